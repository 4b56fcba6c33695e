"""Cross-network account matching.

Three tiers are applied in order, each only over accounts the earlier tiers
left unmatched:

1. self-report: an account declares its counterpart in the other network;
2. exact username: friends of the same base pair with equal usernames;
3. username bigrams: friends of the same base pair whose bigram vectors have
   cosine similarity at or above the threshold.

Tiers 2 and 3 only compare ``FR(b_left) x FR(b_right)`` for each linked base
pair ``(b_left, b_right)``, which keeps popular usernames from colliding
across unrelated parts of the networks.
"""

from __future__ import annotations

import logging
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import InputError
from .graph import MultiNetworkGraph, UserRef

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.63

SELF_REPORT = "self_report"
EXACT_USERNAME = "exact_username"
BIGRAM = "bigram"
METHODS = (SELF_REPORT, EXACT_USERNAME, BIGRAM)


def normalize_username(name: str) -> str:
    name = name.strip().lower()
    if name.startswith("@"):
        name = name[1:]
    return name.strip()


def bigram_vector(username: str) -> Counter:
    """Occurrence counts of consecutive character pairs of the normalized name."""
    name = normalize_username(username)
    return Counter(name[i : i + 2] for i in range(len(name) - 1))


def bigram_cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(c * b[k] for k, c in a.items() if k in b)
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(c * c for c in a.values())) * math.sqrt(sum(c * c for c in b.values()))
    return min(1.0, dot / norm)


def username_similarity(x: str, y: str) -> float:
    return bigram_cosine(bigram_vector(x), bigram_vector(y))


def derive_threshold(candidates: Sequence[tuple[str, str]]) -> float:
    """Median bigram cosine over username pairs."""
    if not candidates:
        raise InputError("derive_threshold needs at least one username pair")
    return statistics.median(username_similarity(a, b) for a, b in candidates)


@dataclass(frozen=True)
class AccountRecord:
    network: str
    local_id: str
    username: str
    declared_counterpart: UserRef | None = None

    def __post_init__(self):
        if not normalize_username(self.username):
            raise InputError(f"empty username for {self.network}:{self.local_id}")

    @property
    def ref(self) -> UserRef:
        return UserRef(self.network, self.local_id)


@dataclass(frozen=True, order=True)
class MatchEdge:
    left: UserRef
    right: UserRef
    method: str
    score: float

    def __post_init__(self):
        if self.left.network == self.right.network:
            raise InputError("a match must join accounts of different networks")
        if self.method not in METHODS:
            raise InputError(f"unknown match method {self.method!r}")
        if not 0.0 <= self.score <= 1.0:
            raise InputError(f"match score {self.score} outside [0, 1]")


class IdentityMap:
    """One-to-one account links between networks.

    Links are treated as an equivalence relation, so a person is the
    connected component of its accounts.  Unlinked accounts are persons of
    their own.
    """

    def __init__(self, edges: Iterable[MatchEdge] = (), threshold: float = DEFAULT_THRESHOLD):
        self.threshold = threshold
        self.conflicts: list[tuple[UserRef, UserRef]] = []
        self._edges: list[MatchEdge] = []
        self._partner: dict[UserRef, dict[str, str]] = {}
        for e in edges:
            self.add(e)

    def add(self, edge: MatchEdge) -> None:
        accounts = dict(self.accounts_of(edge.left))
        for net, lid in self.accounts_of(edge.right).items():
            if net in accounts:
                raise InputError(f"linking {edge.left} and {edge.right} would join two {net} accounts")
            accounts[net] = lid
        self._edges.append(edge)
        for net, lid in accounts.items():
            self._partner[UserRef(net, lid)] = accounts

    @property
    def edges(self) -> list[MatchEdge]:
        return sorted(self._edges)

    def __len__(self) -> int:
        return len(self._edges)

    def __contains__(self, ref: UserRef) -> bool:
        return ref in self._partner

    def accounts_of(self, ref: UserRef) -> dict[str, str]:
        return self._partner.get(ref, {ref.network: ref.local_id})

    def counterpart(self, network: str, local_id: str, other: str) -> str | None:
        if network == other:
            return local_id
        return self._partner.get(UserRef(network, local_id), {}).get(other)

    def person_key(self, network: str, local_id: str) -> str:
        accounts = self.accounts_of(UserRef(network, local_id))
        return "|".join(f"{n}:{accounts[n]}" for n in sorted(accounts))

    def persons(self, networks: Sequence[str]) -> list[dict[str, str]]:
        """Account maps of every person linked across all ``networks``."""
        seen = set()
        out = []
        for accounts in self._partner.values():
            if id(accounts) in seen:
                continue
            seen.add(id(accounts))
            if all(n in accounts for n in networks):
                out.append({n: accounts[n] for n in networks})
        out.sort(key=lambda a: tuple(a[n] for n in networks))
        return out

    def methods(self) -> Counter:
        return Counter(e.method for e in self._edges)


def person_key(match: IdentityMap | None, network: str, local_id: str) -> str:
    if match is None:
        return f"{network}:{local_id}"
    return match.person_key(network, local_id)


@dataclass
class _Candidate:
    score: float
    left: UserRef
    right: UserRef
    left_name: str
    right_name: str

    def sort_key(self):
        return (-self.score, self.left_name, self.left.local_id, self.right_name, self.right.local_id)


@dataclass
class MatchReport:
    """Pipeline counters, one entry per tier."""

    users_matched: dict[str, int] = field(default_factory=dict)
    friends_matched: dict[str, int] = field(default_factory=dict)
    conflicts: int = 0
    base_pairs: int = 0

    def lines(self) -> list[str]:
        out = [f"base_pairs\t{self.base_pairs}", f"self_report_conflicts\t{self.conflicts}"]
        for m in METHODS:
            out.append(f"users_matched[{m}]\t{self.users_matched.get(m, 0)}")
            out.append(f"friends_matched[{m}]\t{self.friends_matched.get(m, 0)}")
        return out


def _self_report_pairs(accounts: Sequence[AccountRecord], left: str, right: str):
    """Declared pairs oriented left->right, with conflicting declarations split out."""
    declared: set[tuple[UserRef, UserRef]] = set()
    for acc in accounts:
        cp = acc.declared_counterpart
        if cp is None:
            continue
        if {acc.network, cp.network} != {left, right}:
            continue
        pair = (acc.ref, cp) if acc.network == left else (cp, acc.ref)
        declared.add(pair)
    uses = Counter()
    for lref, rref in declared:
        uses[lref] += 1
        uses[rref] += 1
    ok = sorted(p for p in declared if uses[p[0]] == 1 and uses[p[1]] == 1)
    bad = sorted(p for p in declared if uses[p[0]] > 1 or uses[p[1]] > 1)
    return ok, bad


def match_accounts(
    g: MultiNetworkGraph,
    accounts: Sequence[AccountRecord],
    base_pairs: Sequence[tuple[UserRef, UserRef]] | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    networks: tuple[str, str] | None = None,
) -> tuple[IdentityMap, MatchReport]:
    """Run the three-tier cascade between two networks of ``g``.

    ``base_pairs`` default to the self-reported pairs, i.e. the accounts that
    declared both identities.  Base pairs are included in the returned map as
    ``self_report`` links.  Accounts without a record use their local id as
    username.
    """
    if not 0.0 < threshold <= 1.0:
        raise InputError(f"threshold must lie in (0, 1], got {threshold}")
    if networks is None:
        if len(g.networks) < 2:
            raise InputError("matching needs at least two networks")
        networks = tuple(sorted(g.networks)[:2])
    left, right = networks
    for net in networks:
        if not g.has_network(net):
            raise InputError(f"unknown network {net!r}")

    names: dict[UserRef, str] = {}
    for acc in accounts:
        if acc.ref in names:
            raise InputError(f"duplicate account record {acc.ref}")
        names[acc.ref] = normalize_username(acc.username)

    def name_of(ref: UserRef) -> str:
        return names.get(ref) or normalize_username(ref.local_id)

    report = MatchReport()
    idmap = IdentityMap(threshold=threshold)
    taken: set[UserRef] = set()

    # tier 1
    declared, conflicts = _self_report_pairs(accounts, left, right)
    idmap.conflicts = conflicts
    report.conflicts = len(conflicts)
    conflicted = {r for p in conflicts for r in p}

    if base_pairs is None:
        base_pairs = declared
    base = []
    for lref, rref in base_pairs:
        if lref.network == right:
            lref, rref = rref, lref
        if (lref.network, rref.network) != (left, right):
            raise InputError(f"base pair {lref}/{rref} does not span {left}/{right}")
        base.append((lref, rref))
    base = sorted(set(base))
    report.base_pairs = len(base)

    base_refs = set()
    for lref, rref in base:
        if lref in taken or rref in taken:
            raise InputError(f"base pair {lref}/{rref} reuses an already linked account")
        idmap.add(MatchEdge(lref, rref, SELF_REPORT, 1.0))
        taken.update((lref, rref))
        base_refs.update((lref, rref))

    tier1 = 0
    for lref, rref in declared:
        if lref in taken or rref in taken:
            continue
        idmap.add(MatchEdge(lref, rref, SELF_REPORT, 1.0))
        taken.update((lref, rref))
        tier1 += 1

    # candidate pairs scoped to shared base-pair neighbourhoods
    candidates: set[tuple[UserRef, UserRef]] = set()
    for lref, rref in base:
        fl = g.friends(left, lref.local_id)
        fr = g.friends(right, rref.local_id)
        for a in fl:
            for b in fr:
                candidates.add((UserRef(left, a), UserRef(right, b)))

    def open_(pair):
        return pair[0] not in taken and pair[1] not in taken and not (set(pair) & conflicted)

    # tier 2
    exact = [
        _Candidate(1.0, a, b, name_of(a), name_of(b))
        for a, b in candidates
        if open_((a, b)) and name_of(a) == name_of(b)
    ]
    tier2 = _assign(exact, EXACT_USERNAME, idmap, taken)

    # tier 3
    vecs: dict[UserRef, Counter] = {}

    def vec(ref):
        if ref not in vecs:
            vecs[ref] = bigram_vector(name_of(ref))
        return vecs[ref]

    fuzzy = []
    for a, b in candidates:
        if not open_((a, b)):
            continue
        score = bigram_cosine(vec(a), vec(b))
        if score >= threshold:
            fuzzy.append(_Candidate(score, a, b, name_of(a), name_of(b)))
    tier3 = _assign(fuzzy, BIGRAM, idmap, taken)

    report.users_matched = {SELF_REPORT: tier1, EXACT_USERNAME: tier2, BIGRAM: tier3}
    report.friends_matched = _friend_counts(g, idmap, base, left, right)
    logger.info("matched %d self-report, %d exact, %d bigram", tier1, tier2, tier3)
    return idmap, report


def _assign(cands: list[_Candidate], method: str, idmap: IdentityMap, taken: set) -> int:
    n = 0
    for c in sorted(cands, key=_Candidate.sort_key):
        if c.left in taken or c.right in taken:
            continue
        idmap.add(MatchEdge(c.left, c.right, method, round(c.score, 12)))
        taken.update((c.left, c.right))
        n += 1
    return n


def _friend_counts(g, idmap: IdentityMap, base, left: str, right: str) -> dict[str, int]:
    """Matched friend slots summed over base pairs, per link method."""
    method_of = {e.left: e.method for e in idmap.edges}
    counts: Counter = Counter()
    for lref, rref in base:
        rfriends = g.friends(right, rref.local_id)
        for a in g.friends(left, lref.local_id):
            b = idmap.counterpart(left, a, right)
            if b is not None and b in rfriends:
                counts[method_of[UserRef(left, a)]] += 1
    return {m: counts.get(m, 0) for m in METHODS}


# -- file formats ------------------------------------------------------------


def _parse_ref(text: str, line_no: int) -> UserRef:
    net, sep, lid = text.partition(":")
    if not sep or not net or not lid:
        raise InputError(f"line {line_no}: expected network:local_id, got {text!r}")
    return UserRef(net.strip(), lid.strip())


def parse_account_lines(lines: Iterable[str]) -> Iterator[AccountRecord]:
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise InputError(f"line {line_no}: expected 3 or 4 tab-separated fields")
        net, lid, uname = (p.strip() for p in parts[:3])
        if not net or not lid or not normalize_username(uname):
            raise InputError(f"line {line_no}: empty field")
        declared = _parse_ref(parts[3], line_no) if len(parts) == 4 and parts[3].strip() else None
        yield AccountRecord(net, lid, uname, declared)


def read_accounts(path) -> list[AccountRecord]:
    with open(path, encoding="utf-8") as fh:
        return list(parse_account_lines(fh))


def write_accounts(accounts: Iterable[AccountRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for a in accounts:
            cols = [a.network, a.local_id, a.username]
            if a.declared_counterpart is not None:
                cols.append(str(a.declared_counterpart))
            fh.write("\t".join(cols) + "\n")


def write_identity_map(idmap: IdentityMap, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# threshold\t{idmap.threshold:.4f}\n")
        for e in idmap.edges:
            fh.write(f"{e.left}\t{e.right}\t{e.method}\t{e.score:.4f}\n")


def read_identity_map(path) -> IdentityMap:
    threshold = DEFAULT_THRESHOLD
    edges = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if line.startswith("# threshold"):
                threshold = float(line.split("\t")[1])
                continue
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise InputError(f"{path}:{line_no}: expected 4 tab-separated fields")
            try:
                score = float(parts[3])
            except ValueError:
                raise InputError(f"{path}:{line_no}: bad score {parts[3]!r}") from None
            edges.append(MatchEdge(_parse_ref(parts[0], line_no), _parse_ref(parts[1], line_no), parts[2], score))
    return IdentityMap(edges, threshold)


def identity_from_pairs(pairs: Iterable[tuple[UserRef, UserRef]], threshold: float = DEFAULT_THRESHOLD) -> IdentityMap:
    """Identity map built from known pairs (self-report links)."""
    return IdentityMap((MatchEdge(a, b, SELF_REPORT, 1.0) for a, b in pairs), threshold)
