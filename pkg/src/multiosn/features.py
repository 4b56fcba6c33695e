"""Pair features for multi-network link prediction.

Three families are computed for a candidate pair ``(u, v)`` whose friendship
is to be predicted in a *target* network, with a second *source* network
providing extra evidence:

* neighbourhood scores (common neighbours, Jaccard, Adamic-Adar) in both
  networks;
* common-neighbour maintenance ratios: the share of the pair's friend union
  made of common neighbours in each maintenance category;
* the cross link flag: the pair's counterparts are friends in the source
  network.

Pair endpoints are target-network local ids.  Source-network scores use the
counterparts given by the identity map; a pair without both counterparts
scores 0 there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import fmean
from typing import Iterable, Mapping, Sequence

from .errors import InputError
from .graph import MultiNetworkGraph
from .matching import IdentityMap, person_key
from .measures import MaintenanceProfile

CATEGORIES = ("HEHS", "HELS", "LEHS", "LELS")

NBO, NFM, NBOFM, NBCL, NFMCL, ALL = "NBO", "NFM", "NBOFM", "NBCL", "NFMCL", "ALL"
FEATURE_CONFIGS: dict[str, frozenset[str]] = {
    NBO: frozenset({"nb"}),
    NFM: frozenset({"nfm"}),
    NBOFM: frozenset({"nb", "nfm"}),
    NBCL: frozenset({"nb", "cl"}),
    NFMCL: frozenset({"nfm", "cl"}),
    ALL: frozenset({"nb", "nfm", "cl"}),
}
CONFIG_ORDER = (NBO, NFM, NBOFM, NBCL, NFMCL, ALL)


@dataclass(frozen=True, order=True)
class PairKey:
    u: str
    v: str
    target: str
    source: str

    def __post_init__(self):
        if self.u == self.v:
            raise InputError(f"pair endpoints must differ ({self.u!r})")
        if self.u > self.v:
            # canonical order; frozen, so go through object.__setattr__
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    def endpoints(self, network: str, match: IdentityMap | None) -> tuple[str, str] | None:
        """Pair endpoints in ``network``; None if a counterpart is missing."""
        if network == self.target:
            return self.u, self.v
        if match is None:
            return None
        a = match.counterpart(self.target, self.u, network)
        b = match.counterpart(self.target, self.v, network)
        if a is None or b is None or a == b:
            return None
        return a, b


# -- neighbourhood scores ------------------------------------------------------


def common_neighbors_count(g: MultiNetworkGraph, network: str, u: str, v: str) -> int:
    return len(g.common_friends(network, u, v))


def jaccard(g: MultiNetworkGraph, network: str, u: str, v: str) -> float:
    fu, fv = g.friends(network, u), g.friends(network, v)
    union = len(fu | fv)
    if union == 0:
        return 0.0
    return len(fu & fv) / union


def adamic_adar(g: MultiNetworkGraph, network: str, u: str, v: str) -> float:
    # degree-1 neighbours would divide by log 1 = 0; skipped
    total = 0.0
    for z in sorted(g.common_friends(network, u, v)):
        d = g.degree(network, z)
        if d >= 2:
            total += 1.0 / math.log(d)
    return total


MEASURES = {"CN": common_neighbors_count, "JC": jaccard, "AA": adamic_adar}


# -- maintenance categories ----------------------------------------------------


@dataclass(frozen=True)
class CategoryThresholds:
    mean_sim: float
    mean_even: float
    population_size: int

    @classmethod
    def from_profiles(cls, profiles: Iterable[MaintenanceProfile]) -> CategoryThresholds:
        profiles = list(profiles)
        if not profiles:
            raise InputError("category thresholds need a non-empty profile population")
        return cls(
            mean_sim=fmean(p.f_sim for p in profiles),
            mean_even=fmean(p.f_even for p in profiles),
            population_size=len(profiles),
        )


def category_of(p: MaintenanceProfile, thr: CategoryThresholds) -> str:
    high_even = p.f_even > thr.mean_even
    high_sim = p.f_sim > thr.mean_sim
    return ("HE" if high_even else "LE") + ("HS" if high_sim else "LS")


def nfm_features(
    g: MultiNetworkGraph,
    network: str,
    u: str,
    v: str,
    profiles: Mapping[str, MaintenanceProfile],
    thr: CategoryThresholds,
    match: IdentityMap | None = None,
) -> dict[str, float]:
    fu, fv = g.friends(network, u), g.friends(network, v)
    union = len(fu | fv)
    counts = dict.fromkeys(CATEGORIES, 0)
    for z in fu & fv:
        p = profiles.get(person_key(match, network, z))
        if p is not None:
            counts[category_of(p, thr)] += 1
    if union == 0:
        return {c: 0.0 for c in CATEGORIES}
    return {c: counts[c] / union for c in CATEGORIES}


def profiled_common_neighbors(
    g: MultiNetworkGraph,
    network: str,
    u: str,
    v: str,
    profiles: Mapping[str, MaintenanceProfile],
    match: IdentityMap | None = None,
) -> int:
    return sum(1 for z in g.common_friends(network, u, v) if person_key(match, network, z) in profiles)


def cross_link(g: MultiNetworkGraph, match: IdentityMap | None, pair: PairKey) -> int:
    ends = pair.endpoints(pair.source, match)
    if ends is None:
        return 0
    return int(g.are_friends(pair.source, *ends))


# -- feature vectors -----------------------------------------------------------


def feature_names(config: str) -> tuple[str, ...]:
    """Active feature names in canonical order."""
    try:
        families = FEATURE_CONFIGS[config]
    except KeyError:
        raise InputError(f"unknown feature config {config!r}; choose from {', '.join(CONFIG_ORDER)}") from None
    names: list[str] = []
    if "nb" in families:
        names += ["CN_src", "CN_tgt", "JC_src", "JC_tgt", "AA_src", "AA_tgt"]
    if "nfm" in families:
        names += [f"{c}_tgt" for c in CATEGORIES] + [f"{c}_src" for c in CATEGORIES]
    if "cl" in families:
        names.append("CL")
    return tuple(names)


@dataclass(frozen=True)
class FeatureVector:
    pair: PairKey
    config: str
    cn: dict[str, int] = field(default_factory=dict)
    jc: dict[str, float] = field(default_factory=dict)
    aa: dict[str, float] = field(default_factory=dict)
    nfm: dict[tuple[str, str], float] = field(default_factory=dict)
    cl: int | None = None

    @property
    def names(self) -> tuple[str, ...]:
        return feature_names(self.config)

    def named(self) -> dict[str, float]:
        role = {"src": self.pair.source, "tgt": self.pair.target}
        out = {}
        for name in self.names:
            head, _, r = name.partition("_")
            if name == "CL":
                out[name] = float(self.cl)
            elif head == "CN":
                out[name] = float(self.cn[role[r]])
            elif head == "JC":
                out[name] = self.jc[role[r]]
            elif head == "AA":
                out[name] = self.aa[role[r]]
            else:
                out[name] = self.nfm[(role[r], head)]
        return out

    def values(self) -> list[float]:
        return list(self.named().values())


def extract(
    pair: PairKey,
    g: MultiNetworkGraph,
    match: IdentityMap | None,
    profiles: Mapping[str, MaintenanceProfile],
    thr: CategoryThresholds | None,
    config: str = ALL,
) -> FeatureVector:
    """Features of ``pair`` on the scoring graph ``g``.

    ``g`` must already have the held-out positive friendships removed.
    """
    families = FEATURE_CONFIGS.get(config)
    if families is None:
        feature_names(config)  # raises with the list of valid names
    cn, jc, aa, nfm = {}, {}, {}, {}
    for net in (pair.source, pair.target):
        ends = pair.endpoints(net, match)
        if "nb" in families:
            if ends is None:
                cn[net], jc[net], aa[net] = 0, 0.0, 0.0
            else:
                cn[net] = common_neighbors_count(g, net, *ends)
                jc[net] = jaccard(g, net, *ends)
                aa[net] = adamic_adar(g, net, *ends)
        if "nfm" in families:
            if thr is None:
                raise InputError("maintenance features need category thresholds")
            ratios = nfm_features(g, net, *ends, profiles, thr, match) if ends else dict.fromkeys(CATEGORIES, 0.0)
            for c, val in ratios.items():
                nfm[(net, c)] = val
    cl = cross_link(g, match, pair) if "cl" in families else None
    return FeatureVector(pair, config, cn, jc, aa, nfm, cl)


def write_feature_dump(rows: Sequence[tuple[FeatureVector, int]], path) -> None:
    if not rows:
        raise InputError("nothing to dump")
    names = rows[0][0].names
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(("u", "v", "label", *names)) + "\n")
        for fv, label in rows:
            vals = "\t".join(f"{x:.10g}" for x in fv.values())
            fh.write(f"{fv.pair.u}\t{fv.pair.v}\t{label}\t{vals}\n")
