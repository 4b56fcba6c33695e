"""Unsupervised ranking and a linear max-margin classifier.

The classifier minimises the L2-regularised mean hinge loss

    reg/2 * |w|^2 + 1/n * sum_i max(0, 1 - y_i (w . x_i + b))

on z-scored features.  The bias rides along as a constant input column, as
in liblinear.  The solver is dual coordinate descent: every step is a hinge
subgradient step on one example with an exactly solved step length, and
examples are visited in a seed-driven shuffled order each epoch.  Because the
loss is a mean, duplicating the training set leaves the optimum unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InputError
from .features import MEASURES, FeatureVector, PairKey
from .graph import MultiNetworkGraph
from .matching import IdentityMap

DEFAULT_REG = 1e-3
DEFAULT_EPOCHS = 50
BIAS_INPUT = 1.0


class RankedEntry(NamedTuple):
    pair: PairKey
    score: float
    label: int


def _sort_key(e: RankedEntry):
    return (-e.score, e.pair.u, e.pair.v, e.pair.target, e.pair.source)


def rank_scored(scored: Sequence[tuple[PairKey, float, int]]) -> list[RankedEntry]:
    """Sort by score, highest first; ties fall back to canonical pair order."""
    return sorted((RankedEntry(*s) for s in scored), key=_sort_key)


def score_pair(g: MultiNetworkGraph, match: IdentityMap | None, pair: PairKey, measure: str, network: str) -> float:
    ends = pair.endpoints(network, match)
    if ends is None:
        return 0.0
    return float(MEASURES[measure](g, network, *ends))


def rank_pairs(
    instances: Sequence[tuple[PairKey, int]],
    measure: str,
    network: str,
    g: MultiNetworkGraph,
    match: IdentityMap | None = None,
) -> list[RankedEntry]:
    """Rank instances by one neighbourhood measure evaluated in ``network``.

    ``g`` is the scoring graph with the held-out positives removed.
    """
    if measure not in MEASURES:
        raise InputError(f"unknown measure {measure!r}; choose from {', '.join(MEASURES)}")
    if not g.has_network(network):
        raise InputError(f"unknown network {network!r}")
    return rank_scored([(p, score_pair(g, match, p, measure, network), int(y)) for p, y in instances])


@dataclass(frozen=True)
class MetricsAtK:
    k: int
    precision: float
    recall: float
    f1: float


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def metrics_at_k(ranked: Sequence[RankedEntry], k: int, total_positives: int) -> MetricsAtK:
    if not 1 <= k <= len(ranked):
        raise InputError(f"k={k} outside [1, {len(ranked)}]")
    if total_positives <= 0:
        raise InputError("total_positives must be positive")
    tp = sum(e.label for e in ranked[:k])
    prec = tp / k
    rec = tp / total_positives
    return MetricsAtK(k, prec, rec, f1_score(prec, rec))


def metrics_curve(ranked: Sequence[RankedEntry], ks: Sequence[int], total_positives: int) -> list[MetricsAtK]:
    """Metrics at several cut-offs from one cumulative pass."""
    cum = np.cumsum([e.label for e in ranked])
    out = []
    for k in ks:
        if not 1 <= k <= len(ranked):
            raise InputError(f"k={k} outside [1, {len(ranked)}]")
        tp = int(cum[k - 1])
        prec, rec = tp / k, tp / total_positives
        out.append(MetricsAtK(k, prec, rec, f1_score(prec, rec)))
    return out


# -- linear classifier ---------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    reg: float = DEFAULT_REG
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if self.reg <= 0:
            raise InputError("regularisation strength must be positive")
        if self.epochs < 1:
            raise InputError("epochs must be at least 1")


@dataclass
class LinearModel:
    names: tuple[str, ...]
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    config: TrainConfig = field(default_factory=TrainConfig)
    objective: float = float("nan")

    def weight_map(self) -> dict[str, float]:
        """Weights in raw feature units, folding the standardisation in."""
        w = self.weights / self.scale
        return dict(zip(self.names, w.tolist()))

    def raw_bias(self) -> float:
        return float(self.bias - np.dot(self.weights, self.mean / self.scale))

    def margins(self, X: np.ndarray) -> np.ndarray:
        return ((X - self.mean) / self.scale) @ self.weights + self.bias


def _matrix(features: Sequence[FeatureVector], names: Sequence[str] | None = None) -> np.ndarray:
    rows = []
    for fv in features:
        if names is not None and tuple(fv.names) != tuple(names):
            raise InputError(f"feature set {fv.names} does not match the model's {tuple(names)}")
        row = fv.values()
        if not all(math.isfinite(x) for x in row):
            raise InputError(f"non-finite feature value for pair ({fv.pair.u}, {fv.pair.v})")
        rows.append(row)
    return np.asarray(rows, dtype=float).reshape(len(rows), -1)


def train(data: Sequence[tuple[FeatureVector, int]], config: TrainConfig | None = None) -> LinearModel:
    config = config or TrainConfig()
    if not data:
        raise InputError("empty training set")
    names = data[0][0].names
    X = _matrix([fv for fv, _ in data], names)
    y = np.array([1.0 if lab else -1.0 for _, lab in data])
    return train_arrays(X, y, names, config)


def train_arrays(X: np.ndarray, y: np.ndarray, names: Sequence[str], config: TrainConfig) -> LinearModel:
    """Fit on a dense matrix with labels in {-1, +1}."""
    if not np.all(np.isfinite(X)):
        bad = int(np.argwhere(~np.isfinite(X))[0, 0])
        raise InputError(f"non-finite feature value in training row {bad}")
    if len(set(y.tolist())) < 2:
        raise InputError("training data must contain both classes")
    n, d = X.shape
    if config.standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        mean, scale = np.zeros(d), np.ones(d)
    Z = np.hstack([(X - mean) / scale, np.full((n, 1), BIAS_INPUT)])
    wb, obj = _dual_cd(Z, y, config)
    return LinearModel(tuple(names), wb[:-1].copy(), float(wb[-1] * BIAS_INPUT), mean, scale, config, obj)


def _dual_cd(Z: np.ndarray, y: np.ndarray, config: TrainConfig) -> tuple[np.ndarray, float]:
    n, d = Z.shape
    # mean-hinge objective with reg lambda == sum-hinge SVM with C = 1 / (lambda n)
    C = 1.0 / (config.reg * n)
    rng = np.random.default_rng(config.seed)
    alpha = np.zeros(n)
    w = np.zeros(d)
    qii = np.einsum("ij,ij->i", Z, Z)
    rows = [Z[i] for i in range(n)]
    for _ in range(config.epochs):
        for i in rng.permutation(n):
            if qii[i] == 0:
                continue
            zi = rows[i]
            G = y[i] * float(zi @ w) - 1.0
            a = alpha[i]
            if a == 0.0:
                pg = min(G, 0.0)
            elif a == C:
                pg = max(G, 0.0)
            else:
                pg = G
            if pg != 0.0:
                new = min(max(a - G / qii[i], 0.0), C)
                w += (new - a) * y[i] * zi
                alpha[i] = new
    hinge = np.maximum(0.0, 1.0 - y * (Z @ w))
    obj = 0.5 * config.reg * float(w @ w) + float(hinge.mean())
    return w, obj


def predict(model: LinearModel, features: FeatureVector) -> tuple[int, float]:
    """``(label, margin)``; a zero margin is a negative prediction."""
    X = _matrix([features], model.names)
    if X.shape[1] != len(model.weights):
        raise InputError("feature dimension does not match the model")
    margin = float(model.margins(X)[0])
    return int(margin > 0), margin


def predict_many(model: LinearModel, features: Sequence[FeatureVector]) -> tuple[np.ndarray, np.ndarray]:
    if not features:
        return np.zeros(0, dtype=int), np.zeros(0)
    X = _matrix(features, model.names)
    m = model.margins(X)
    return (m > 0).astype(int), m


def binary_prf(y_true: Sequence[int], y_pred: Sequence[int]) -> tuple[float, float, float]:
    """Precision, recall, F1 for the positive class; undefined ratios are 0."""
    tp = sum(1 for t, p in zip(y_true, y_pred) if t and p)
    fp = sum(1 for t, p in zip(y_true, y_pred) if not t and p)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t and not p)
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    return prec, rec, f1_score(prec, rec)


def evaluate_classifier(model: LinearModel, test: Sequence[tuple[FeatureVector, int]]) -> tuple[float, float, float]:
    if not test:
        raise InputError("empty test set")
    pred, _ = predict_many(model, [fv for fv, _ in test])
    return binary_prf([int(y) for _, y in test], pred.tolist())


# -- model file ----------------------------------------------------------------


def write_model(model: LinearModel, path) -> None:
    """Weights are stored in raw feature units, so no scaler file is needed."""
    c = model.config
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"# reg={c.reg!r} epochs={c.epochs} seed={c.seed} "
            f"standardize={int(c.standardize)} schedule=dual_cd objective={model.objective!r}\n"
        )
        for name, w in model.weight_map().items():
            fh.write(f"{name}\t{w!r}\n")
        fh.write(f"__bias__\t{model.raw_bias()!r}\n")


def read_model(path) -> LinearModel:
    names, weights, bias = [], [], None
    header: Mapping[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if line.startswith("#"):
                header = dict(tok.split("=", 1) for tok in line[1:].split() if "=" in tok)
                continue
            if not line.strip():
                continue
            name, _, val = line.partition("\t")
            try:
                x = float(val)
            except ValueError:
                raise InputError(f"{path}:{line_no}: bad weight {val!r}") from None
            if name == "__bias__":
                bias = x
            else:
                names.append(name)
                weights.append(x)
    if bias is None:
        raise InputError(f"{path}: missing __bias__ line")
    config = TrainConfig(
        reg=float(header.get("reg", DEFAULT_REG)),
        epochs=int(header.get("epochs", DEFAULT_EPOCHS)),
        seed=int(header.get("seed", 0)),
        standardize=bool(int(header.get("standardize", 1))),
    )
    d = len(names)
    return LinearModel(tuple(names), np.array(weights), bias, np.zeros(d), np.ones(d), config,
                       float(header.get("objective", "nan")))
