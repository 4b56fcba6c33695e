"""Distribution summaries and dependence tests over maintenance profiles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaincc

from .errors import InputError
from .measures import MaintenanceProfile

HIST_BINS = 20


@dataclass(frozen=True)
class MeasureSummary:
    mean: float
    q1: float
    median: float
    q3: float
    histogram: tuple[int, ...]
    # values outside [0, 1], which only occur for evenness over more than two networks
    out_of_range: int


@dataclass(frozen=True)
class DistributionSummary:
    n: int
    f_sim: MeasureSummary
    f_even: MeasureSummary
    top_decile_sim_mean: float
    bottom_decile_sim_mean: float
    decile_size: int


def _summary(x: np.ndarray) -> MeasureSummary:
    q1, q2, q3 = np.percentile(x, [25, 50, 75])
    hist, _ = np.histogram(x, bins=HIST_BINS, range=(0.0, 1.0))
    outside = int(np.sum((x < 0) | (x > 1)))
    return MeasureSummary(float(x.mean()), float(q1), float(q2), float(q3), tuple(int(c) for c in hist), outside)


def _arrays(profiles: Sequence[MaintenanceProfile]) -> tuple[np.ndarray, np.ndarray]:
    sim = np.array([p.f_sim for p in profiles], dtype=float)
    even = np.array([p.f_even for p in profiles], dtype=float)
    return sim, even


def distribution_stats(profiles: Sequence[MaintenanceProfile]) -> DistributionSummary:
    if not profiles:
        raise InputError("distribution_stats needs at least one profile")
    sim, even = _arrays(profiles)
    n = len(sim)
    k = max(1, n // 10)
    # stable sort: ties keep input order, so the slices are reproducible
    order = np.argsort(even, kind="stable")
    return DistributionSummary(
        n=n,
        f_sim=_summary(sim),
        f_even=_summary(even),
        top_decile_sim_mean=float(sim[order[-k:]].mean()),
        bottom_decile_sim_mean=float(sim[order[:k]].mean()),
        decile_size=k,
    )


def chi2_statistic(table: np.ndarray) -> tuple[float, int]:
    """Pearson statistic and degrees of freedom of a contingency table."""
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or min(t.shape) < 2:
        raise InputError("contingency table must be at least 2x2")
    rows, cols = t.sum(axis=1), t.sum(axis=0)
    if np.any(rows == 0) or np.any(cols == 0):
        raise InputError("contingency table has an empty row or column; use fewer bins")
    expected = np.outer(rows, cols) / t.sum()
    stat = float(((t - expected) ** 2 / expected).sum())
    return stat, (t.shape[0] - 1) * (t.shape[1] - 1)


def chi2_sf(stat: float, dof: int) -> float:
    """Upper tail of the chi-squared distribution (regularized upper incomplete gamma)."""
    return float(gammaincc(dof / 2.0, stat / 2.0))


def quantile_bins(x: np.ndarray, bins: int) -> np.ndarray:
    """Bin index per value by empirical quantiles; equal values share a bin."""
    inner = np.quantile(x, np.arange(1, bins) / bins)
    return np.searchsorted(inner, x, side="right")


def contingency_table(profiles: Sequence[MaintenanceProfile], bins: int = 4) -> np.ndarray:
    if bins < 2:
        raise InputError("need at least 2 bins per axis")
    sim, even = _arrays(profiles)
    table = np.zeros((bins, bins), dtype=int)
    np.add.at(table, (quantile_bins(sim, bins), quantile_bins(even, bins)), 1)
    return table


def independence_test(profiles: Sequence[MaintenanceProfile], bins: int = 4) -> tuple[float, int, float]:
    """Chi-squared test of independence between similarity and evenness."""
    stat, dof = chi2_statistic(contingency_table(profiles, bins))
    return stat, dof, chi2_sf(stat, dof)


def correlation(profiles: Sequence[MaintenanceProfile]) -> float:
    """Pearson correlation of (f_sim, f_even)."""
    if len(profiles) < 2:
        raise InputError("correlation needs at least two profiles")
    sim, even = _arrays(profiles)
    if np.ptp(sim) == 0 or np.ptp(even) == 0:
        raise InputError("correlation undefined: zero variance on one axis")
    ds, de = sim - sim.mean(), even - even.mean()
    r = float((ds @ de) / np.sqrt((ds @ ds) * (de @ de)))
    return max(-1.0, min(1.0, r))


def summary_lines(s: DistributionSummary) -> list[str]:
    out = [f"profiles = {s.n}"]
    for name, m in (("f_sim", s.f_sim), ("f_even", s.f_even)):
        out += [
            f"{name}.mean = {m.mean:.6f}",
            f"{name}.q1 = {m.q1:.6f}",
            f"{name}.median = {m.median:.6f}",
            f"{name}.q3 = {m.q3:.6f}",
            f"{name}.histogram = {','.join(map(str, m.histogram))}",
            f"{name}.out_of_range = {m.out_of_range}",
        ]
    out += [
        f"decile_size = {s.decile_size}",
        f"top_even_decile.f_sim_mean = {s.top_decile_sim_mean:.6f}",
        f"bottom_even_decile.f_sim_mean = {s.bottom_decile_sim_mean:.6f}",
    ]
    return out
