"""``multiosn`` command line: file-staged batch workflows.

Pipeline stages exchange plain tab-separated files::

    ingest -> snapshot -> match -> identity map -> measure -> profiles
    sample -> instances -> rank | train -> model -> predict
    eval   (sampling, training and scoring in one go, writes a report)
    synth  (writes a snapshot, accounts, identity map and ground truth)

Exit codes: 0 success, 1 input or usage error, 2 infeasible configuration.
The default seed can be overridden with the MULTIOSN_SEED environment variable.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from statistics import fmean
from typing import Sequence

from . import __version__
from .errors import InfeasibleError, InputError
from .experiment import (
    DEFAULT_K_GRID,
    SamplingConfig,
    holdout_graph,
    label,
    read_instances,
    run_supervised,
    run_unsupervised,
    sample_instances,
    subset_analysis,
    write_instances,
)
from .features import CONFIG_ORDER, MEASURES, CategoryThresholds, extract, feature_names, write_feature_dump
from .graph import DEFAULT_MAX_FOLLOWERS, IngestConfig, read_edge_file, write_edge_file
from .matching import (
    DEFAULT_THRESHOLD,
    METHODS,
    match_accounts,
    read_accounts,
    read_identity_map,
    write_accounts,
    write_identity_map,
)
from .measures import profile_all, read_profiles, write_profiles
from .prediction import (
    DEFAULT_EPOCHS,
    DEFAULT_REG,
    TrainConfig,
    binary_prf,
    metrics_curve,
    predict_many,
    rank_pairs,
    read_model,
    train,
    write_model,
)
from .stats import HIST_BINS, correlation, distribution_stats, independence_test, summary_lines
from .synth import SynthConfig, generate_synthetic

logger = logging.getLogger("multiosn")

SEED_ENV = "MULTIOSN_SEED"


class Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 instead of argparse's 2 (2 means infeasible here)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _pair_arg(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts) or parts[0] == parts[1]:
        raise argparse.ArgumentTypeError(f"expected two distinct comma-separated network labels, got {text!r}")
    return parts[0], parts[1]


def _task_arg(text: str) -> tuple[str, str]:
    fields = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep or key.strip() not in ("target", "source") or not val.strip():
            raise argparse.ArgumentTypeError(f"expected target=NET,source=NET, got {text!r}")
        fields[key.strip()] = val.strip()
    if set(fields) != {"target", "source"} or fields["target"] == fields["source"]:
        raise argparse.ArgumentTypeError(f"expected target=NET,source=NET with distinct networks, got {text!r}")
    return fields["target"], fields["source"]


def _configs_arg(text: str) -> tuple[str, ...]:
    out = tuple(c.strip() for c in text.split(",") if c.strip())
    for c in out:
        if c not in CONFIG_ORDER:
            raise argparse.ArgumentTypeError(f"unknown feature config {c!r}; choose from {','.join(CONFIG_ORDER)}")
    if not out:
        raise argparse.ArgumentTypeError("no feature configs given")
    return out


def _ints_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# -- helpers ---------------------------------------------------------------------


def _check_outputs(inputs: Sequence, outputs: Sequence) -> None:
    """Refuse to overwrite an input file."""
    ins = {Path(p).resolve() for p in inputs if p}
    for out in outputs:
        if out and Path(out).resolve() in ins:
            raise InputError(f"output {out} would overwrite an input file")


def _require(path) -> None:
    if path and not Path(path).is_file():
        raise FileNotFoundError(2, "no such input file", str(path))


def _load_graph(args):
    _require(args.edges)
    g, _ = read_edge_file(args.edges, IngestConfig(max_followers=args.max_followers))
    return g


def _load_identity(args):
    _require(args.identity)
    return read_identity_map(args.identity)


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _holdout_positives(paths, target, source, base):
    pos = {p for p, y in base if y}
    for path in paths or ():
        _require(path)
        inst, t, s = read_instances(path)
        if (t, s) != (target, source):
            raise InputError(f"{path}: task target={t} source={s} differs from target={target} source={source}")
        pos.update(p for p, y in inst if y)
    return sorted(pos)


def _thresholds(profiles):
    if not profiles:
        raise InputError("profile file is empty")
    return CategoryThresholds.from_profiles(profiles.values())


# -- subcommands -----------------------------------------------------------------


def cmd_ingest(args) -> int:
    _require(args.edges)
    _require(args.accounts)
    _check_outputs([args.edges, args.accounts], [args.out, args.report])
    extra = {}
    if args.accounts:
        for acc in read_accounts(args.accounts):
            extra.setdefault(acc.network, set()).add(acc.local_id)
    config = IngestConfig(max_followers=args.max_followers, networks_expected=tuple(args.networks or ()))
    g, summary = read_edge_file(args.edges, config, extra)
    write_edge_file(g, args.out)
    if args.report:
        _write_text(args.report, "\n".join(summary.lines()) + "\n")
    filtered = ",".join(f"{n}={summary.users_filtered.get(n, 0)}" for n in sorted(g.networks))
    friends = ",".join(f"{n}={g.num_friendships(n)}" for n in sorted(g.networks))
    print(f"ingest: {summary.records_read} records, {summary.duplicates} duplicates, "
          f"filtered users {filtered}, friendships {friends} -> {args.out}")
    return 0


def cmd_match(args) -> int:
    _require(args.accounts)
    _check_outputs([args.edges, args.accounts], [args.out, args.report])
    g = _load_graph(args)
    accounts = read_accounts(args.accounts)
    idmap, report = match_accounts(g, accounts, threshold=args.threshold, networks=args.networks)
    write_identity_map(idmap, args.out)
    if args.report:
        _write_text(args.report, "\n".join(report.lines()) + "\n")
    counts = idmap.methods()
    tiers = ",".join(f"{m}={counts.get(m, 0)}" for m in METHODS)
    print(f"match: {len(idmap)} links ({tiers}), {report.conflicts} conflicts -> {args.out}")
    return 0


def cmd_measure(args) -> int:
    _check_outputs([args.edges, args.identity], [args.out])
    g = _load_graph(args)
    match = _load_identity(args)
    profiles = profile_all(g, match, args.networks)
    write_profiles(profiles, args.out)
    if profiles:
        ms = fmean(p.f_sim for p in profiles.values())
        me = fmean(p.f_even for p in profiles.values())
        print(f"measure: {len(profiles)} profiles, mean f_sim={ms:.6f} f_even={me:.6f} -> {args.out}")
    else:
        print(f"measure: 0 profiles -> {args.out}")
    return 0


def cmd_stats(args) -> int:
    _require(args.profiles)
    _check_outputs([args.profiles], [args.out])
    profiles = read_profiles(args.profiles)
    values = [profiles[k] for k in sorted(profiles)]
    summary = distribution_stats(values)
    try:
        r = f"{correlation(values):.6f}"
    except InputError as exc:
        r = f"undefined ({exc})"
    try:
        stat, dof, p = independence_test(values, args.bins)
        chi = (f"{stat:.6f}", str(dof), f"{p:.6e}")
    except InputError as exc:
        chi = (f"undefined ({exc})", "", "")
    if args.format == "kv":
        lines = ["[summary]", *summary_lines(summary), "", "[dependence]", f"pearson_r = {r}",
                 f"chi2.bins = {args.bins}", f"chi2.statistic = {chi[0]}", f"chi2.dof = {chi[1]}",
                 f"chi2.p_value = {chi[2]}"]
    else:
        lines = ["bin_lo,bin_hi,f_sim,f_even"]
        for i, (a, b) in enumerate(zip(summary.f_sim.histogram, summary.f_even.histogram)):
            lines.append(f"{i / HIST_BINS:.2f},{(i + 1) / HIST_BINS:.2f},{a},{b}")
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"stats: {summary.n} profiles, mean f_sim={summary.f_sim.mean:.6f} f_even={summary.f_even.mean:.6f}, "
          f"pearson_r={r.split(' ')[0]}, chi2={chi[0].split(' ')[0]} -> {args.out or 'stdout'}")
    return 0


def cmd_sample(args) -> int:
    _check_outputs([args.edges, args.identity, *(args.exclude or ())], [args.out])
    g = _load_graph(args)
    match = _load_identity(args)
    target, source = args.task
    cfg = SamplingConfig(target, source, args.positives, args.negatives, args.min_cn, args.seed)
    exclude = []
    for path in args.exclude or ():
        _require(path)
        inst, _, _ = read_instances(path)
        exclude.extend(p for p, _ in inst)
    pos, neg = sample_instances(g, match, cfg, exclude=exclude)
    write_instances(label(pos, neg), args.out, target, source)
    print(f"sample: {len(pos)} positives, {len(neg)} negatives (seed {args.seed}) -> {args.out}")
    return 0


def cmd_rank(args) -> int:
    _require(args.instances)
    _check_outputs([args.edges, args.identity, args.instances, *(args.holdout or ())], [args.out, args.curve])
    g = _load_graph(args)
    match = _load_identity(args)
    inst, target, source = read_instances(args.instances)
    network = args.network or target
    positives = sum(y for _, y in inst)
    if positives == 0:
        raise InputError(f"{args.instances}: no positive instances")
    scoring = holdout_graph(g, _holdout_positives(args.holdout, target, source, inst))
    ranked = rank_pairs(inst, args.measure, network, scoring, match)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# rank\tu\tv\tscore\tlabel\n")
        for i, e in enumerate(ranked, start=1):
            fh.write(f"{i}\t{e.pair.u}\t{e.pair.v}\t{e.score!r}\t{e.label}\n")
    ks = sorted({k for k in (args.k or DEFAULT_K_GRID) if 1 <= k <= len(ranked)} | {positives})
    curve = metrics_curve(ranked, ks, positives)
    if args.curve:
        rows = ["k,precision,recall,f1"] + [f"{m.k},{m.precision:.6f},{m.recall:.6f},{m.f1:.6f}" for m in curve]
        _write_text(args.curve, "\n".join(rows) + "\n")
    at_p = next(m for m in curve if m.k == positives)
    print(f"rank: {args.measure}@{network} over {len(ranked)} pairs, K={positives} precision={at_p.precision:.4f} "
          f"recall={at_p.recall:.4f} f1={at_p.f1:.4f} -> {args.out}")
    return 0


def _feature_rows(args, inst, target, source, g, match, config):
    _require(args.profiles)
    profiles = read_profiles(args.profiles) if args.profiles else {}
    thr = _thresholds(profiles) if "NFM" in config or config == "ALL" else None
    scoring = holdout_graph(g, _holdout_positives(args.holdout, target, source, inst))
    return [(extract(p, scoring, match, profiles, thr, config), y) for p, y in inst]


def cmd_train(args) -> int:
    _require(args.instances)
    _check_outputs([args.edges, args.identity, args.profiles, args.instances, *(args.holdout or ())],
                   [args.out, args.features_out])
    g = _load_graph(args)
    match = _load_identity(args)
    inst, target, source = read_instances(args.instances)
    rows = _feature_rows(args, inst, target, source, g, match, args.config)
    model = train(rows, TrainConfig(args.reg, args.epochs, args.seed))
    write_model(model, args.out)
    if args.features_out:
        write_feature_dump(rows, args.features_out)
    print(f"train: {args.config} on {len(rows)} instances ({len(model.names)} features), "
          f"objective={model.objective:.6f} -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    _require(args.instances)
    _require(args.model)
    _check_outputs([args.edges, args.identity, args.profiles, args.instances, args.model, *(args.holdout or ())],
                   [args.out])
    g = _load_graph(args)
    match = _load_identity(args)
    model = read_model(args.model)
    config = next((c for c in CONFIG_ORDER if feature_names(c) == model.names), None)
    if config is None:
        raise InputError(f"{args.model}: feature names {','.join(model.names)} match no feature config")
    inst, target, source = read_instances(args.instances)
    rows = _feature_rows(args, inst, target, source, g, match, config)
    yhat, margins = predict_many(model, [fv for fv, _ in rows])
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# u\tv\tlabel\tpredicted\tmargin\n")
        for (fv, y), p, m in zip(rows, yhat.tolist(), margins.tolist()):
            fh.write(f"{fv.pair.u}\t{fv.pair.v}\t{y}\t{p}\t{m:.10g}\n")
    prec, rec, f1 = binary_prf([y for _, y in rows], yhat.tolist())
    print(f"predict: {config} on {len(rows)} instances, precision={prec:.4f} recall={rec:.4f} f1={f1:.4f} -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    _check_outputs([args.edges, args.identity, args.profiles], [args.out])
    g = _load_graph(args)
    match = _load_identity(args)
    target, source = args.task
    cfg = SamplingConfig(target, source, args.positives, args.negatives, args.min_cn, args.seed)
    if args.unsupervised:
        report = run_unsupervised(g, match, cfg, k_grid=args.k, runs=args.runs)
        reports = [report]
    else:
        if args.profiles:
            _require(args.profiles)
            profiles = read_profiles(args.profiles)
        else:
            profiles = profile_all(g, match, (target, source))
        report = run_supervised(g, match, profiles, cfg, args.configs, args.runs,
                                TrainConfig(args.reg, args.epochs, args.seed), jobs=args.jobs)
        reports = [report]
        if args.subset:
            present = tuple(c for c in ("NBO", "NFM") if c in args.configs)
            if present:
                reports.append(subset_analysis(report, present))
    if args.format == "kv":
        text = "\n".join(r.to_kv() for r in reports)
    else:
        text = reports[0].to_csv() + "".join(r.to_csv(header=False, method_prefix=f"{r.kind}:") for r in reports[1:])
    _write_text(args.out, text)
    best = max(report.rows.values(), key=lambda r: (r.f1, r.method))
    print(f"eval: {report.kind} target={target} source={source}, {len(report.rows)} rows over {args.runs} runs, "
          f"best {best.method} f1={best.f1:.4f} -> {args.out or 'stdout'}")
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        users=args.users,
        networks=args.networks,
        mean_degree=args.mean_degree,
        similarity=args.similarity,
        evenness_skew=args.skew,
        cross_link_correlation=args.correlation,
        circles_per_user=args.circles,
        oneway_follow_rate=args.oneway_rate,
        seed=args.seed,
    )
    data = generate_synthetic(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_file(data.graph, out / "edges.tsv")
    write_accounts(data.accounts, out / "accounts.tsv")
    write_identity_map(data.identity, out / "identity.tsv")
    with open(out / "truth.txt", "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(data.truth):
            val = data.truth[key]
            if isinstance(val, dict):
                for sub in sorted(val):
                    fh.write(f"{key}.{sub} = {val[sub]}\n")
            elif isinstance(val, (list, tuple)):
                fh.write(f"{key} = {','.join(map(str, val))}\n")
            else:
                fh.write(f"{key} = {val}\n")
    friends = ",".join(f"{n}={data.graph.num_friendships(n)}" for n in cfg.networks)
    print(f"synth: {cfg.users} linked users, friendships {friends} (seed {cfg.seed}) -> {out}")
    return 0


# -- parser ----------------------------------------------------------------------


def _graph_flags(p, identity=True):
    p.add_argument("--edges", required=True, help="graph snapshot (network<TAB>follower<TAB>followee)")
    p.add_argument("--max-followers", type=int, default=DEFAULT_MAX_FOLLOWERS,
                   help="drop accounts with more followers than this per network; 0 disables (default %(default)s)")
    if identity:
        p.add_argument("--identity", required=True, help="identity map produced by 'match' or 'synth'")


def _sampling_flags(p, seed):
    p.add_argument("--task", type=_task_arg, required=True, help="prediction task, e.g. target=T,source=I")
    p.add_argument("--positives", type=int, default=5000, help="positive pairs per pool (default %(default)s)")
    p.add_argument("--negatives", type=int, default=25000, help="negative pairs per pool (default %(default)s)")
    p.add_argument("--min-cn", type=int, default=5000,
                   help="negatives that must share a neighbour in either network (default %(default)s)")
    p.add_argument("--seed", type=int, default=seed, help=f"sampling seed (default %(default)s; env {SEED_ENV})")


def _model_flags(p):
    p.add_argument("--profiles", help="profile file from 'measure' (needed by maintenance features)")
    p.add_argument("--instances", required=True, help="instance file from 'sample'")
    p.add_argument("--holdout", action="append", metavar="INSTANCES",
                   help="further instance files whose positives are removed from the scoring graph; repeatable")


def build_parser(seed: int = 0) -> Parser:
    parser = Parser(prog="multiosn", description="Cross-network friendship maintenance analysis and link prediction.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("ingest", help="parse and filter follow records into a snapshot")
    p.add_argument("--edges", required=True, help="raw follow records (network<TAB>follower<TAB>followee)")
    p.add_argument("--accounts", help="account file; listed accounts are kept even without friends")
    p.add_argument("--networks", type=lambda s: tuple(x for x in s.split(",") if x),
                   help="comma-separated expected network labels; other labels are errors")
    p.add_argument("--max-followers", type=int, default=DEFAULT_MAX_FOLLOWERS,
                   help="drop accounts with more followers than this per network; 0 disables (default %(default)s)")
    p.add_argument("--out", required=True, help="snapshot file to write")
    p.add_argument("--report", help="optional file for the ingestion counters")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("match", help="link accounts across two networks")
    _graph_flags(p, identity=False)
    p.add_argument("--accounts", required=True,
                   help="account file (network<TAB>id<TAB>username[<TAB>declared network:id])")
    p.add_argument("--networks", type=_pair_arg, help="the two networks to match, e.g. T,I (default: first two)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="bigram cosine acceptance threshold (default %(default)s)")
    p.add_argument("--out", required=True, help="identity map file to write")
    p.add_argument("--report", help="optional file for per-tier counters")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("measure", help="similarity and evenness per linked person")
    _graph_flags(p)
    p.add_argument("--networks", type=lambda s: tuple(x for x in s.split(",") if x),
                   help="networks to measure across (default: all in the snapshot)")
    p.add_argument("--out", required=True, help="profile file to write")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("stats", help="distribution summary and dependence tests of profiles")
    p.add_argument("--profiles", required=True, help="profile file from 'measure'")
    p.add_argument("--bins", type=int, default=4, help="quantile bins per axis for the chi-squared test")
    p.add_argument("--format", choices=("kv", "csv"), default="kv", help="kv summary or csv histogram")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sample", help="draw labelled instance pairs")
    _graph_flags(p)
    _sampling_flags(p, seed)
    p.add_argument("--exclude", action="append", metavar="INSTANCES",
                   help="instance files whose pairs must not be drawn again; repeatable")
    p.add_argument("--out", required=True, help="instance file to write")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("rank", help="rank instances by one neighbourhood measure")
    _graph_flags(p)
    p.add_argument("--instances", required=True, help="instance file from 'sample'")
    p.add_argument("--holdout", action="append", metavar="INSTANCES",
                   help="further instance files whose positives are removed from the scoring graph; repeatable")
    p.add_argument("--measure", choices=sorted(MEASURES), default="JC", help="ranking measure (default %(default)s)")
    p.add_argument("--network", help="network the measure is computed in (default: the target)")
    p.add_argument("--k", type=_ints_arg, help="comma-separated cut-offs for the curve (default 1000..10000)")
    p.add_argument("--out", required=True, help="ranked list to write")
    p.add_argument("--curve", help="optional csv of precision/recall/F1 per cut-off")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", help="fit the linear classifier on one feature config")
    _graph_flags(p)
    _model_flags(p)
    p.add_argument("--config", choices=CONFIG_ORDER, default="ALL", help="feature config (default %(default)s)")
    p.add_argument("--reg", type=float, default=DEFAULT_REG, help="L2 strength of the mean hinge objective")
    p.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS, help="passes over the data")
    p.add_argument("--seed", type=int, default=seed, help=f"visiting-order seed (default %(default)s; env {SEED_ENV})")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--features-out", help="optional feature dump")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a trained model to instances")
    _graph_flags(p)
    _model_flags(p)
    p.add_argument("--model", required=True, help="model file from 'train'")
    p.add_argument("--out", required=True, help="prediction file to write")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="multi-run evaluation report")
    _graph_flags(p)
    _sampling_flags(p, seed)
    p.add_argument("--profiles", help="profile file (default: computed from the snapshot)")
    p.add_argument("--configs", type=_configs_arg, default=CONFIG_ORDER,
                   help=f"comma-separated feature configs (default {','.join(CONFIG_ORDER)})")
    p.add_argument("--unsupervised", action="store_true", help="rank with single measures instead of training")
    p.add_argument("--subset", action="store_true",
                   help="also report NBO/NFM on test pairs with a profiled common neighbour")
    p.add_argument("--runs", type=int, default=3, help="independent runs (default %(default)s)")
    p.add_argument("--k", type=_ints_arg, help="cut-offs for unsupervised curves (default 1000..10000)")
    p.add_argument("--reg", type=float, default=DEFAULT_REG, help="L2 strength of the mean hinge objective")
    p.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS, help="passes over the data")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for runs (default %(default)s)")
    p.add_argument("--format", choices=("kv", "csv"), default="kv", help="report format")
    p.add_argument("--out", help="report file (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic two-network population")
    p.add_argument("--users", type=int, default=1000, help="linked users (default %(default)s)")
    p.add_argument("--networks", type=_pair_arg, default=("T", "I"), help="target,source labels (default T,I)")
    p.add_argument("--similarity", type=float, default=0.2, help="expected similarity (default %(default)s)")
    p.add_argument("--skew", type=float, default=1.0,
                   help="expected target/source friend count ratio in (0, 1] (default %(default)s)")
    p.add_argument("--correlation", type=float, default=1.0,
                   help="probability a circle tie exists in both networks (default %(default)s)")
    p.add_argument("--mean-degree", type=float, default=30.0, help="expected distinct friends per user")
    p.add_argument("--circles", type=int, default=2, help="friend circles per user (default %(default)s)")
    p.add_argument("--oneway-rate", type=float, default=0.05, help="one-way follows per friendship")
    p.add_argument("--seed", type=int, default=seed, help=f"generator seed (default %(default)s; env {SEED_ENV})")
    p.add_argument("--out", required=True, help="directory to write edges/accounts/identity/truth files")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        seed = default_seed()
    except InputError as exc:
        print(f"multiosn: error: {exc}", file=sys.stderr)
        return 1
    parser = build_parser(seed)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    for name in ("positives", "negatives", "runs", "jobs"):
        if getattr(args, name, 1) < 1:
            print(f"multiosn {args.command}: error: --{name} must be at least 1", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"multiosn {args.command}: infeasible: {exc}", file=sys.stderr)
        return 2
    except (InputError, ValueError) as exc:
        print(f"multiosn {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"multiosn {args.command}: error: missing input file {exc.filename}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"multiosn {args.command}: error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
