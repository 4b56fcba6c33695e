"""Instance sampling, held-out scoring graphs and multi-run evaluation.

Instances are pairs of linked persons (accounts in both the target and the
source network).  Positives are target-network friendships, negatives are
linked pairs that are not target friends, and a quota of negatives must share
at least one common neighbour in either network so that the task is not
trivially solved by "has any common neighbour".

All features and ranking scores of a run are computed on a scoring graph
from which the run's positive friendships (train and test) were removed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import fmean
from typing import Iterable, Mapping, Sequence

from .errors import InfeasibleError, InputError
from .features import (
    CONFIG_ORDER,
    MEASURES,
    CategoryThresholds,
    FeatureVector,
    PairKey,
    extract,
    feature_names,
    profiled_common_neighbors,
)
from .graph import MultiNetworkGraph
from .matching import IdentityMap
from .measures import MaintenanceProfile
from .prediction import (
    TrainConfig,
    binary_prf,
    metrics_curve,
    predict_many,
    rank_pairs,
    train,
)

logger = logging.getLogger(__name__)

OVERSAMPLING_CAP = 100
TEST_SEED_OFFSET = 104729  # test pools use a seed far from any training seed
DEFAULT_K_GRID = tuple(range(1000, 10001, 1000))

Instance = tuple[PairKey, int]
TABLE_HEADER = ("task", "method", "avg_precision", "avg_recall", "avg_f1", "flag")


@dataclass(frozen=True)
class SamplingConfig:
    target: str
    source: str
    positives: int = 5000
    negatives: int = 25000
    min_negatives_with_common_neighbor: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.positives < 1 or self.negatives < 1:
            raise InputError("positive and negative counts must be at least 1")
        if not 0 <= self.min_negatives_with_common_neighbor <= self.negatives:
            raise InputError("min_negatives_with_common_neighbor must lie in [0, negatives]")
        if self.target == self.source:
            raise InputError("target and source networks must differ")

    @classmethod
    def scaled(cls, target: str, source: str, positives: int, seed: int = 0) -> SamplingConfig:
        """Keep the default 1 : 5 : 1 positive/negative/common-neighbour proportions."""
        return cls(target, source, positives, 5 * positives, positives, seed)

    def with_seed(self, seed: int) -> SamplingConfig:
        return SamplingConfig(self.target, self.source, self.positives, self.negatives,
                              self.min_negatives_with_common_neighbor, seed)


def linked_population(g: MultiNetworkGraph, match: IdentityMap, target: str, source: str) -> list[str]:
    """Target-network ids of persons with accounts in both networks."""
    out = []
    for acc in match.persons((target, source)):
        if acc[target] in g.users(target) and acc[source] in g.users(source):
            out.append(acc[target])
    return sorted(out)


def has_common_neighbor(g: MultiNetworkGraph, match: IdentityMap, pair: PairKey) -> bool:
    for net in (pair.target, pair.source):
        ends = pair.endpoints(net, match)
        if ends and g.common_friends(net, *ends):
            return True
    return False


def sample_instances(
    g: MultiNetworkGraph,
    match: IdentityMap,
    cfg: SamplingConfig,
    exclude: Iterable[PairKey] = (),
    population: Iterable[str] | None = None,
) -> tuple[list[PairKey], list[PairKey]]:
    """Draw positive and negative pairs; deterministic for a given seed.

    ``exclude`` pairs are never drawn (used to keep test sets disjoint from
    training sets).  ``population`` optionally narrows the eligible persons.
    """
    tgt, src = cfg.target, cfg.source
    for net in (tgt, src):
        if not g.has_network(net):
            raise InputError(f"unknown network {net!r}")
    rng = random.Random(cfg.seed)
    pop = linked_population(g, match, tgt, src)
    if population is not None:
        keep = set(population)
        pop = [u for u in pop if u in keep]
    pop_set = set(pop)
    banned = set(exclude)

    def key(u, v):
        return PairKey(u, v, tgt, src)

    candidates = sorted(
        key(u, v) for u, v in g.friend_pairs(tgt) if u in pop_set and v in pop_set and key(u, v) not in banned
    )
    if len(candidates) < cfg.positives:
        raise InfeasibleError(
            f"requested {cfg.positives} positives but only {len(candidates)} eligible friend pairs exist"
        )
    positives = sorted(rng.sample(candidates, cfg.positives))

    chosen: set[PairKey] = set()

    def acceptable(u, v):
        if u == v or u not in pop_set or v not in pop_set or g.are_friends(tgt, u, v):
            return None
        p = key(u, v)
        if p in banned or p in chosen:
            return None
        return p

    # negatives with a common neighbour: propose two-hop pairs u - z - w
    quota = cfg.min_negatives_with_common_neighbor
    with_cn = 0
    attempts = 0
    budget = OVERSAMPLING_CAP * quota
    nets = (tgt, src)
    while with_cn < quota and attempts < budget:
        attempts += 1
        u = rng.choice(pop)
        net = nets[rng.randrange(2)]
        a = u if net == tgt else match.counterpart(tgt, u, net)
        fa = sorted(g.friends(net, a)) if a is not None else []
        if not fa:
            continue
        z = rng.choice(fa)
        fz = sorted(g.friends(net, z))
        w = rng.choice(fz)
        v = w if net == tgt else match.counterpart(net, w, tgt)
        if v is None:
            continue
        p = acceptable(u, v)
        if p is None:
            continue
        chosen.add(p)
        with_cn += 1
    if with_cn < quota:
        raise InfeasibleError(
            f"found only {with_cn} of {quota} negatives with a common neighbour "
            f"after {attempts} proposals (shortfall {quota - with_cn})"
        )

    remaining = cfg.negatives - len(chosen)
    attempts = 0
    budget = OVERSAMPLING_CAP * max(remaining, 1)
    while remaining > 0 and attempts < budget:
        attempts += 1
        p = acceptable(rng.choice(pop), rng.choice(pop))
        if p is None:
            continue
        chosen.add(p)
        remaining -= 1
    if remaining > 0:
        raise InfeasibleError(
            f"could not draw {cfg.negatives} negatives (shortfall {remaining}) after {attempts} proposals"
        )
    return positives, sorted(chosen)


def holdout_graph(g: MultiNetworkGraph, positives: Iterable[PairKey]) -> MultiNetworkGraph:
    """Scoring graph with the positive friendships removed from their target network."""
    by_net: dict[str, list[tuple[str, str]]] = {}
    for p in positives:
        by_net.setdefault(p.target, []).append((p.u, p.v))
    out = g
    for net, pairs in sorted(by_net.items()):
        out = out.without_friendships(net, pairs)
    return out


def label(positives: Sequence[PairKey], negatives: Sequence[PairKey]) -> list[Instance]:
    return [(p, 1) for p in positives] + [(p, 0) for p in negatives]


# -- reports -------------------------------------------------------------------


@dataclass
class MethodResult:
    method: str
    runs: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def precision(self) -> float:
        return fmean(r[0] for r in self.runs) if self.runs else 0.0

    @property
    def recall(self) -> float:
        return fmean(r[1] for r in self.runs) if self.runs else 0.0

    @property
    def f1(self) -> float:
        return fmean(r[2] for r in self.runs) if self.runs else 0.0

    @property
    def precision_exceeds_recall(self) -> bool:
        return self.precision > self.recall


@dataclass
class RunRecord:
    """What a supervised run leaves behind for the subset analysis."""

    run_index: int
    seed: int
    test_pairs: list[PairKey]
    test_labels: list[int]
    profiled_cn: list[int]
    predictions: dict[str, list[int]]


@dataclass
class EvalReport:
    task: tuple[str, str]
    kind: str
    rows: dict[str, MethodResult] = field(default_factory=dict)
    curves: dict[str, list[tuple[int, float, float, float]]] = field(default_factory=dict)
    fingerprint: dict = field(default_factory=dict)
    runs: list[RunRecord] = field(default_factory=list)
    notes: dict[str, str] = field(default_factory=dict)

    @property
    def digest(self) -> str:
        blob = json.dumps(self.fingerprint, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def flags(self) -> dict[str, str]:
        return {m: "ok" if r.precision_exceeds_recall else "precision<=recall" for m, r in self.rows.items()}

    # -- rendering -----------------------------------------------------------

    def table_rows(self) -> list[list[str]]:
        task = f"target={self.task[0]},source={self.task[1]}"
        out = []
        for m, r in self.rows.items():
            flag = "ok" if r.precision_exceeds_recall else "precision<=recall"
            out.append([task, m, f"{r.precision:.4f}", f"{r.recall:.4f}", f"{r.f1:.4f}", flag])
        return out

    def to_csv(self, header: bool = True, method_prefix: str = "") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(TABLE_HEADER)
        for row in self.table_rows():
            w.writerow([row[0], method_prefix + row[1], *row[2:]])
        if self.curves:
            w.writerow([])
            w.writerow(["curve", "k", "precision", "recall", "f1"])
            for name, pts in self.curves.items():
                for k, p, r, f in pts:
                    w.writerow([name, k, f"{p:.6f}", f"{r:.6f}", f"{f:.6f}"])
        return buf.getvalue()

    def to_kv(self) -> str:
        out = [
            "[report]",
            f"kind = {self.kind}",
            f"task.target = {self.task[0]}",
            f"task.source = {self.task[1]}",
            f"fingerprint = {self.digest}",
        ]
        for k, v in sorted(self.notes.items()):
            out.append(f"note.{k} = {v}")
        out.append("")
        out.append("[config]")
        for k, v in sorted(_flatten(self.fingerprint).items()):
            out.append(f"{k} = {v}")
        for m, r in self.rows.items():
            out += ["", f"[method.{m}]"]
            for i, (p, rc, f) in enumerate(r.runs, start=1):
                out.append(f"run{i}.precision = {p:.6f}")
                out.append(f"run{i}.recall = {rc:.6f}")
                out.append(f"run{i}.f1 = {f:.6f}")
            out += [
                f"avg.precision = {r.precision:.6f}",
                f"avg.recall = {r.recall:.6f}",
                f"avg.f1 = {r.f1:.6f}",
                f"flag = {'ok' if r.precision_exceeds_recall else 'precision<=recall'}",
            ]
        for name, pts in self.curves.items():
            out += ["", f"[curve.{name}]"]
            for k, p, r, f in pts:
                out.append(f"k{k} = {p:.6f},{r:.6f},{f:.6f}")
        return "\n".join(out) + "\n"


def _flatten(d: Mapping, prefix: str = "") -> dict[str, str]:
    out = {}
    for k, v in d.items():
        name = f"{prefix}{k}"
        if isinstance(v, Mapping):
            out.update(_flatten(v, name + "."))
        elif isinstance(v, (list, tuple)):
            out[name] = ",".join(str(x) for x in v)
        else:
            out[name] = str(v)
    return out


# -- unsupervised ----------------------------------------------------------------


def measure_grid(target: str, source: str) -> list[tuple[str, str]]:
    return [(m, net) for net in (target, source) for m in MEASURES]


def _measure_label(measure: str, network: str, cfg: SamplingConfig) -> str:
    role = "tgt" if network == cfg.target else "src"
    return f"{measure}_{role}"


def run_unsupervised(
    g: MultiNetworkGraph,
    match: IdentityMap,
    cfg: SamplingConfig,
    measures: Sequence[tuple[str, str]] | None = None,
    k_grid: Sequence[int] | None = None,
    runs: int = 1,
) -> EvalReport:
    """F1@K curves of single-measure rankings, plus the random baseline.

    Each run draws a fresh instance pool with seed ``cfg.seed + run``.  Rows
    report metrics at K = number of positives, averaged over runs.
    """
    measures = list(measures or measure_grid(cfg.target, cfg.source))
    pool = cfg.positives + cfg.negatives
    ks = sorted({k for k in (k_grid or DEFAULT_K_GRID) if 1 <= k <= pool} | {cfg.positives})
    report = EvalReport(
        task=(cfg.target, cfg.source),
        kind="unsupervised",
        fingerprint={"sampling": asdict(cfg), "runs": runs, "k_grid": list(ks),
                     "measures": [f"{m}@{n}" for m, n in measures]},
    )
    sums: dict[str, list[list[float]]] = {}
    for run in range(runs):
        rcfg = cfg.with_seed(cfg.seed + run)
        pos, neg = sample_instances(g, match, rcfg)
        scoring = holdout_graph(g, pos)
        inst = label(pos, neg)
        for measure, net in measures:
            name = _measure_label(measure, net, cfg)
            ranked = rank_pairs(inst, measure, net, scoring, match)
            curve = metrics_curve(ranked, ks, len(pos))
            at_p = next(m for m in curve if m.k == cfg.positives)
            report.rows.setdefault(name, MethodResult(name)).runs.append((at_p.precision, at_p.recall, at_p.f1))
            acc = sums.setdefault(name, [[0.0, 0.0, 0.0] for _ in ks])
            for slot, m in zip(acc, curve):
                slot[0] += m.precision
                slot[1] += m.recall
                slot[2] += m.f1
    for name, acc in sums.items():
        report.curves[name] = [(k, p / runs, r / runs, f / runs) for k, (p, r, f) in zip(ks, acc)]
    report.curves["random"] = [(k, *random_baseline(k, cfg.positives, pool)) for k in ks]
    base = random_baseline(cfg.positives, cfg.positives, pool)
    report.rows["random"] = MethodResult("random", [base] * runs)
    return report


def random_baseline(k: int, positives: int, total: int) -> tuple[float, float, float]:
    """Expected metrics of K instances drawn uniformly without replacement."""
    prec = positives / total
    rec = k / total
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return prec, rec, f1


# -- supervised ------------------------------------------------------------------


def _features(pairs: Sequence[Instance], scoring, match, profiles, thr, config) -> list[tuple[FeatureVector, int]]:
    return [(extract(p, scoring, match, profiles, thr, config), y) for p, y in pairs]


def _supervised_run(args) -> tuple[dict[str, tuple[float, float, float]], dict[str, tuple[float, float, float]], RunRecord]:
    g, match, profiles, thr, cfg, configs, train_cfg, population, run_index = args
    seed = cfg.seed + run_index
    tr_pos, tr_neg = sample_instances(g, match, cfg.with_seed(seed), population=population)
    used = set(tr_pos) | set(tr_neg)
    te_pos, te_neg = sample_instances(g, match, cfg.with_seed(seed + TEST_SEED_OFFSET), exclude=used,
                                      population=population)
    scoring = holdout_graph(g, list(tr_pos) + list(te_pos))
    train_set, test_set = label(tr_pos, tr_neg), label(te_pos, te_neg)

    results = {}
    preds = {}
    y_true = [y for _, y in test_set]
    for config in configs:
        tr = _features(train_set, scoring, match, profiles, thr, config)
        te = _features(test_set, scoring, match, profiles, thr, config)
        model = train(tr, TrainConfig(train_cfg.reg, train_cfg.epochs, seed, train_cfg.standardize))
        yhat, _ = predict_many(model, [fv for fv, _ in te])
        preds[config] = yhat.tolist()
        results[config] = binary_prf(y_true, preds[config])

    unsup = {}
    for measure, net in measure_grid(cfg.target, cfg.source):
        ranked = rank_pairs(test_set, measure, net, scoring, match)
        m = metrics_curve(ranked, [len(te_pos)], len(te_pos))[0]
        unsup[_measure_label(measure, net, cfg)] = (m.precision, m.recall, m.f1)

    record = RunRecord(
        run_index=run_index + 1,
        seed=seed,
        test_pairs=[p for p, _ in test_set],
        test_labels=y_true,
        profiled_cn=[profiled_common_neighbors(scoring, cfg.target, p.u, p.v, profiles, match) for p, _ in test_set],
        predictions=preds,
    )
    return results, unsup, record


def run_supervised(
    g: MultiNetworkGraph,
    match: IdentityMap,
    profiles: Mapping[str, MaintenanceProfile],
    cfg: SamplingConfig,
    feature_configs: Sequence[str] = CONFIG_ORDER,
    runs: int = 3,
    train_config: TrainConfig | None = None,
    jobs: int = 1,
    population: Iterable[str] | None = None,
) -> EvalReport:
    """Train/test each feature configuration over ``runs`` paired runs.

    Run ``i`` (0-based) samples its training pool with seed ``cfg.seed + i``
    and a disjoint test pool from a derived seed; every configuration sees the
    same pools.  Category thresholds come from the whole profile population
    and are shared by training and testing.  ``population`` optionally
    narrows the persons instances are drawn from, as in :func:`sample_instances`.
    """
    for c in feature_configs:
        feature_names(c)
    if runs < 1:
        raise InputError("runs must be at least 1")
    train_config = train_config or TrainConfig()
    thr = CategoryThresholds.from_profiles(profiles.values()) if profiles else None
    if thr is None and any("NFM" in c or c == "ALL" for c in feature_configs):
        raise InputError("maintenance feature configurations need profiles")

    population = tuple(sorted(population)) if population is not None else None
    tasks = [(g, match, profiles, thr, cfg, tuple(feature_configs), train_config, population, i) for i in range(runs)]
    if jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, runs)) as ex:
            outputs = list(ex.map(_supervised_run, tasks))
    else:
        outputs = [_supervised_run(t) for t in tasks]

    report = EvalReport(
        task=(cfg.target, cfg.source),
        kind="supervised",
        fingerprint={
            "sampling": asdict(cfg),
            "runs": runs,
            "configs": list(feature_configs),
            "train": asdict(train_config),
            "thresholds": asdict(thr) if thr else None,
            "population": len(population) if population is not None else "linked",
        },
    )
    unsup_rows: dict[str, MethodResult] = {}
    for results, unsup, record in outputs:
        for config in feature_configs:
            report.rows.setdefault(config, MethodResult(config)).runs.append(results[config])
        for name, prf in unsup.items():
            unsup_rows.setdefault(name, MethodResult(name)).runs.append(prf)
        report.runs.append(record)
    best = max(unsup_rows.values(), key=lambda r: (r.f1, r.method))
    report.rows[f"best_unsupervised:{best.method}"] = best
    report.notes["best_unsupervised"] = best.method
    return report


def best_unsupervised(report: EvalReport) -> MethodResult | None:
    for name, row in report.rows.items():
        if name.startswith("best_unsupervised:"):
            return row
    return None


def subset_analysis(report: EvalReport, configs: Sequence[str] = ("NBO", "NFM")) -> EvalReport:
    """Metrics restricted to test pairs with a profiled common neighbour in the target network.

    Runs whose subset is empty are skipped; if no run has a qualifying pair
    the returned report has no rows and ``notes['subset'] == 'empty'``.
    """
    out = EvalReport(task=report.task, kind="subset", fingerprint=dict(report.fingerprint, subset="profiled_cn>=1"))
    sizes = []
    for rec in report.runs:
        idx = [i for i, c in enumerate(rec.profiled_cn) if c >= 1]
        sizes.append(len(idx))
        if not idx:
            continue
        y = [rec.test_labels[i] for i in idx]
        for config in configs:
            if config not in rec.predictions:
                raise InputError(f"no predictions recorded for {config!r}")
            yhat = [rec.predictions[config][i] for i in idx]
            out.rows.setdefault(config, MethodResult(config)).runs.append(binary_prf(y, yhat))
    out.notes["subset_sizes"] = ",".join(map(str, sizes))
    out.notes["subset"] = "empty" if not any(sizes) else "ok"
    return out


# -- instance files --------------------------------------------------------------


def write_instances(instances: Sequence[Instance], path, target: str, source: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# target={target} source={source}\n")
        for p, y in sorted(instances, key=lambda t: (-t[1], t[0])):
            fh.write(f"{p.u}\t{p.v}\t{y}\n")


def read_instances(path) -> tuple[list[Instance], str, str]:
    target = source = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if line.startswith("#"):
                meta = dict(tok.split("=", 1) for tok in line[1:].split() if "=" in tok)
                target = meta.get("target", target)
                source = meta.get("source", source)
                continue
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in ("0", "1"):
                raise InputError(f"{path}:{line_no}: expected u<TAB>v<TAB>label(0/1)")
            rows.append((parts[0], parts[1], int(parts[2])))
    if target is None or source is None:
        raise InputError(f"{path}: missing '# target=... source=...' header")
    return [(PairKey(u, v, target, source), y) for u, v, y in rows], target, source
