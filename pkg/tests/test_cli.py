from __future__ import annotations

import csv
import hashlib
import subprocess
import sys
from pathlib import Path

import pytest

from multiosn.cli import build_parser, default_seed, main
from multiosn.graph import write_edge_file
from multiosn.matching import write_identity_map

from conftest import worked_example_graph

TASK = "target=T,source=I"


def digest(directory: Path) -> dict[str, str]:
    return {p.relative_to(directory).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(directory.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    d = tmp_path_factory.mktemp("world")
    assert main(["synth", "--users", "400", "--similarity", "0.2", "--skew", "0.5", "--correlation", "0.9",
                 "--seed", "7", "--out", str(d / "s")]) == 0
    return d


class TestSynth:
    def test_byte_identical_reruns(self, tmp_path):
        for name in ("a", "b"):
            assert main(["synth", "--users", "500", "--similarity", "0.2", "--seed", "7",
                         "--out", str(tmp_path / name)]) == 0
        a, b = digest(tmp_path / "a"), digest(tmp_path / "b")
        assert set(a) == {"edges.tsv", "accounts.tsv", "identity.tsv", "truth.txt"}
        assert a == b

    def test_infeasible_exit_2(self, tmp_path):
        assert main(["synth", "--similarity", "0.9", "--skew", "0.5", "--out", str(tmp_path / "x")]) == 2

    def test_seed_env(self, monkeypatch):
        monkeypatch.setenv("MULTIOSN_SEED", "42")
        assert default_seed() == 42
        assert build_parser(default_seed()).parse_args(["synth", "--out", "x"]).seed == 42
        monkeypatch.setenv("MULTIOSN_SEED", "nope")
        assert main(["synth", "--out", "x"]) == 1


class TestMeasure:
    def test_worked_example_line(self, tmp_path, capsys):
        g, match = worked_example_graph()
        write_edge_file(g, tmp_path / "e.tsv")
        write_identity_map(match, tmp_path / "id.tsv")
        assert main(["measure", "--edges", str(tmp_path / "e.tsv"), "--identity", str(tmp_path / "id.tsv"),
                     "--networks", "A,B", "--out", str(tmp_path / "p.tsv")]) == 0
        lines = [ln for ln in (tmp_path / "p.tsv").read_text().splitlines() if "Ax" in ln]
        assert len(lines) == 1
        assert "0.200000" in lines[0] and "0.600000" in lines[0]
        assert "measure:" in capsys.readouterr().out


class TestPipeline:
    def test_stages_and_replay(self, world, tmp_path):
        s = world / "s"

        def run(out: Path):
            out.mkdir()
            steps = [
                ["ingest", "--edges", s / "edges.tsv", "--accounts", s / "accounts.tsv", "--out", out / "snap.tsv"],
                ["match", "--edges", out / "snap.tsv", "--accounts", s / "accounts.tsv", "--networks", "T,I",
                 "--out", out / "id.tsv"],
                ["measure", "--edges", out / "snap.tsv", "--identity", out / "id.tsv", "--out", out / "prof.tsv"],
                ["stats", "--profiles", out / "prof.tsv", "--out", out / "st.kv"],
                ["sample", "--edges", out / "snap.tsv", "--identity", out / "id.tsv", "--task", TASK,
                 "--positives", "60", "--negatives", "300", "--min-cn", "60", "--seed", "1", "--out", out / "tr.tsv"],
                ["sample", "--edges", out / "snap.tsv", "--identity", out / "id.tsv", "--task", TASK,
                 "--positives", "60", "--negatives", "300", "--min-cn", "60", "--seed", "2",
                 "--exclude", out / "tr.tsv", "--out", out / "te.tsv"],
                ["rank", "--edges", out / "snap.tsv", "--identity", out / "id.tsv", "--instances", out / "te.tsv",
                 "--holdout", out / "tr.tsv", "--measure", "JC", "--network", "I", "--k", "30,60",
                 "--out", out / "rank.tsv", "--curve", out / "curve.csv"],
                ["train", "--edges", out / "snap.tsv", "--identity", out / "id.tsv", "--profiles", out / "prof.tsv",
                 "--instances", out / "tr.tsv", "--holdout", out / "te.tsv", "--out", out / "model.tsv"],
                ["predict", "--edges", out / "snap.tsv", "--identity", out / "id.tsv", "--profiles",
                 out / "prof.tsv", "--instances", out / "te.tsv", "--holdout", out / "tr.tsv",
                 "--model", out / "model.tsv", "--out", out / "pred.tsv"],
            ]
            for argv in steps:
                assert main([str(a) for a in argv]) == 0, argv[0]

        run(tmp_path / "r1")
        run(tmp_path / "r2")
        d1 = digest(tmp_path / "r1")
        assert len(d1) == 10
        assert d1 == digest(tmp_path / "r2")

    def test_inputs_not_mutated(self, world, tmp_path):
        s = world / "s"
        before = digest(s)
        assert main(["eval", "--edges", str(s / "edges.tsv"), "--identity", str(s / "identity.tsv"), "--task", TASK,
                     "--positives", "30", "--negatives", "150", "--min-cn", "30", "--runs", "1",
                     "--configs", "NBO", "--out", str(tmp_path / "e.kv")]) == 0
        assert digest(s) == before

    def test_refuses_to_overwrite_input(self, world):
        s = world / "s"
        before = digest(s)
        assert main(["measure", "--edges", str(s / "edges.tsv"), "--identity", str(s / "identity.tsv"),
                     "--out", str(s / "edges.tsv")]) == 1
        assert digest(s) == before


class TestEval:
    def test_csv_rows_have_six_columns(self, world, tmp_path):
        s = world / "s"
        out = tmp_path / "ev.csv"
        assert main(["eval", "--edges", str(s / "edges.tsv"), "--identity", str(s / "identity.tsv"), "--task", TASK,
                     "--positives", "40", "--negatives", "200", "--min-cn", "40", "--runs", "2", "--subset",
                     "--format", "csv", "--out", str(out)]) == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[0] == ["task", "method", "avg_precision", "avg_recall", "avg_f1", "flag"]
        assert all(len(r) == 6 for r in rows)
        methods = [r[1] for r in rows[1:]]
        assert methods[:6] == ["NBO", "NFM", "NBOFM", "NBCL", "NFMCL", "ALL"]
        assert all(r[0] == "target=T,source=I" for r in rows[1:])

    def test_single_config(self, world, tmp_path):
        s = world / "s"
        out = tmp_path / "ev.csv"
        assert main(["eval", "--edges", str(s / "edges.tsv"), "--identity", str(s / "identity.tsv"), "--task", TASK,
                     "--configs", "ALL", "--positives", "40", "--negatives", "200", "--min-cn", "40", "--runs", "1",
                     "--format", "csv", "--out", str(out)]) == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[1][1] == "ALL"
        assert all(len(r) == 6 for r in rows)

    def test_infeasible_sampling_exit_2(self, world, tmp_path):
        s = world / "s"
        assert main(["eval", "--edges", str(s / "edges.tsv"), "--identity", str(s / "identity.tsv"), "--task", TASK,
                     "--positives", "1000000", "--negatives", "1000000", "--min-cn", "1",
                     "--out", str(tmp_path / "x")]) == 2


class TestErrors:
    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["synth", "--bogus"])
        assert exc.value.code == 1
        assert "usage" in capsys.readouterr().err

    def test_missing_subcommand_args(self):
        with pytest.raises(SystemExit) as exc:
            main(["measure"])
        assert exc.value.code == 1

    def test_missing_input_names_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.tsv"
        assert main(["stats", "--profiles", str(missing)]) == 1
        assert str(missing) in capsys.readouterr().err

    def test_bad_task(self):
        with pytest.raises(SystemExit) as exc:
            main(["sample", "--edges", "e", "--identity", "i", "--task", "target=T", "--out", "o"])
        assert exc.value.code == 1

    @pytest.mark.parametrize("flag", ["--runs", "--jobs"])
    def test_counts_at_least_one(self, world, flag, tmp_path):
        s = world / "s"
        assert main(["eval", "--edges", str(s / "edges.tsv"), "--identity", str(s / "identity.tsv"), "--task", TASK,
                     flag, "0", "--out", str(tmp_path / "x")]) == 1

    def test_help_documents_flags(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for flag in ("--task", "--configs", "--subset", "--runs", "--jobs", "--format", "--seed"):
            assert flag in out

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "multiosn", "--version"], capture_output=True, text=True)
        assert res.returncode == 0
        assert res.stdout.startswith("multiosn")
