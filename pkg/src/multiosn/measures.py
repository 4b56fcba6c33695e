"""Friendship maintenance measures of one person over a set of networks.

All measures are ratios of set sizes.  They are evaluated with
:class:`fractions.Fraction` and converted to float once, so worked examples
such as 10/20 friends with 5 shared come out bit-stable (0.2, 0.6, ...).

Friend identity is resolved at the person level: a friend seen in two
networks is one person only if the identity map links the two accounts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InputError
from .graph import MultiNetworkGraph
from .matching import IdentityMap, person_key


def person_sets(friend_sets: Mapping[str, Iterable[str]], match: IdentityMap | None = None) -> dict[str, set]:
    """Map per-network local ids to person keys.

    With ``match=None`` the elements are taken to be person identities
    already, which is convenient for abstract examples.
    """
    if match is None:
        return {net: set(fs) for net, fs in friend_sets.items()}
    return {net: {person_key(match, net, f) for f in fs} for net, fs in friend_sets.items()}


def _need_two(sets: Mapping) -> None:
    if len(sets) < 2:
        raise InputError("maintenance measures need at least two networks")


def _sim_fraction(sets: Mapping[str, set]) -> Fraction:
    union = set().union(*sets.values())
    if not union:
        return Fraction(0)
    common = set.intersection(*(set(s) for s in sets.values()))
    return Fraction(len(common), len(union))


def _equal_fraction(sim: Fraction, n: int) -> Fraction:
    return (1 + (n - 1) * sim) / n


def _in_fractions(sets: Mapping[str, set]) -> dict[str, Fraction]:
    union = set().union(*sets.values())
    if not union:
        return {net: Fraction(0) for net in sets}
    return {net: Fraction(len(s), len(union)) for net, s in sets.items()}


def _even_fraction(sets: Mapping[str, set]) -> Fraction:
    if not set().union(*sets.values()):
        return Fraction(0)
    equal = _equal_fraction(_sim_fraction(sets), len(sets))
    return 1 - sum(abs(r - equal) for r in _in_fractions(sets).values())


def friendship_similarity(friend_sets: Mapping[str, Iterable[str]], match: IdentityMap | None = None) -> float:
    """Share of a person's friends present in every network."""
    sets = person_sets(friend_sets, match)
    _need_two(sets)
    return float(_sim_fraction(sets))


def similarity_upper_bound(friend_sets: Mapping[str, Iterable[str]]) -> float:
    """``min |FR| / max |FR|``; 1 when the person has no friends anywhere."""
    sizes = [len(set(s)) for s in friend_sets.values()]
    if len(sizes) < 2:
        raise InputError("maintenance measures need at least two networks")
    if max(sizes) == 0:
        return 1.0
    return float(Fraction(min(sizes), max(sizes)))


def expected_even_share(f_sim: float, n: int) -> float:
    if n < 2:
        raise InputError("n must be at least 2")
    if not 0.0 <= f_sim <= 1.0:
        raise InputError(f"f_sim must lie in [0, 1], got {f_sim}")
    return (1 + (n - 1) * f_sim) / n


def friend_ratio(friend_sets: Mapping[str, Iterable[str]], network: str, match: IdentityMap | None = None) -> float:
    sets = person_sets(friend_sets, match)
    if network not in sets:
        raise InputError(f"unknown network {network!r}")
    return float(_in_fractions(sets)[network])


def friendship_evenness(friend_sets: Mapping[str, Iterable[str]], match: IdentityMap | None = None) -> float:
    sets = person_sets(friend_sets, match)
    _need_two(sets)
    return float(_even_fraction(sets))


@dataclass(frozen=True)
class MaintenanceProfile:
    f_sim: float
    f_sim_upper: float
    f_equal: float
    f_in: dict[str, float] = field(hash=False)
    f_even: float
    total_unique_friends: int | None
    # set when f_even falls outside [0, 1], which can only happen for n > 2
    even_out_of_range: bool = False


def profile_from_sets(friend_sets: Mapping[str, Iterable[str]], match: IdentityMap | None = None) -> MaintenanceProfile:
    raw = {net: set(fs) for net, fs in friend_sets.items()}
    sets = person_sets(raw, match)
    _need_two(sets)
    n = len(sets)
    union = set().union(*sets.values())
    sim = _sim_fraction(sets)
    equal = _equal_fraction(sim, n)
    even = _even_fraction(sets)
    return MaintenanceProfile(
        f_sim=float(sim),
        f_sim_upper=similarity_upper_bound(raw),
        f_equal=float(equal),
        f_in={net: float(v) for net, v in _in_fractions(sets).items()},
        f_even=float(even),
        total_unique_friends=len(union),
        even_out_of_range=not 0 <= even <= 1,
    )


def profile(accounts: Mapping[str, str], g: MultiNetworkGraph, match: IdentityMap | None) -> MaintenanceProfile:
    """Profile of the person owning ``accounts`` (network -> local id)."""
    friend_sets = {}
    for net, lid in accounts.items():
        if lid not in g.users(net):
            raise InputError(f"account {net}:{lid} not present in the graph")
        friend_sets[net] = g.friends(net, lid)
    return profile_from_sets(friend_sets, match)


def profile_all(
    g: MultiNetworkGraph,
    match: IdentityMap,
    networks: tuple[str, ...] | None = None,
) -> dict[str, MaintenanceProfile]:
    """Profiles of every person linked across ``networks`` and present in ``g``.

    Keys are person keys as produced by :meth:`IdentityMap.person_key`.
    """
    networks = tuple(networks or g.networks)
    out = {}
    for accounts in match.persons(networks):
        if not all(accounts[n] in g.users(n) for n in networks):
            continue
        net0 = networks[0]
        out[match.person_key(net0, accounts[net0])] = profile(accounts, g, match)
    return out


# -- profile file ------------------------------------------------------------


def format_profile_line(key: str, p: MaintenanceProfile) -> str:
    f_in = ";".join(f"{net}={p.f_in[net]:.6f}" for net in sorted(p.f_in))
    cols = [key, f"{p.f_sim:.6f}", f"{p.f_sim_upper:.6f}", f"{p.f_equal:.6f}", f"{p.f_even:.6f}", f_in]
    if p.even_out_of_range:
        cols.append("flag=even_out_of_range")
    return "\t".join(cols)


def write_profiles(profiles: Mapping[str, MaintenanceProfile], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# user_key\tf_sim\tf_sim_upper\tf_equal\tf_even\tf_in\n")
        for key in sorted(profiles):
            fh.write(format_profile_line(key, profiles[key]) + "\n")


def read_profiles(path) -> dict[str, MaintenanceProfile]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (6, 7):
                raise InputError(f"{path}:{line_no}: expected 6 tab-separated fields")
            try:
                f_in = {}
                for item in parts[5].split(";"):
                    net, _, val = item.partition("=")
                    f_in[net] = float(val)
                out[parts[0]] = MaintenanceProfile(
                    f_sim=float(parts[1]),
                    f_sim_upper=float(parts[2]),
                    f_equal=float(parts[3]),
                    f_in=f_in,
                    f_even=float(parts[4]),
                    total_unique_friends=None,
                    even_out_of_range=len(parts) == 7,
                )
            except ValueError as exc:
                raise InputError(f"{path}:{line_no}: {exc}") from None
    return out
