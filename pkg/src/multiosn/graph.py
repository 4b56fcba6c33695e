"""Per-network follow graphs and the mutual-follow friendship relation.

A friend of ``u`` in network ``N`` is any account that ``u`` follows and that
follows ``u`` back.  Everything downstream (matching, measures, features)
only ever sees the friend relation; the raw follow edges are kept so that a
held-out scoring graph can be derived by deleting follow records.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import InputError

logger = logging.getLogger(__name__)

DEFAULT_MAX_FOLLOWERS = 2000


class UserRef(NamedTuple):
    network: str
    local_id: str

    def __str__(self) -> str:
        return f"{self.network}:{self.local_id}"


@dataclass(frozen=True)
class IngestConfig:
    """Ingestion options.

    ``max_followers`` drops accounts whose raw follower count in a network
    exceeds the limit (0 disables the filter).  ``networks_expected`` fixes the
    set of network labels; when empty the labels are taken from the records.
    """

    max_followers: int = DEFAULT_MAX_FOLLOWERS
    networks_expected: tuple[str, ...] = ()

    def __post_init__(self):
        if self.max_followers < 0:
            raise InputError("max_followers must be non-negative")


@dataclass
class IngestSummary:
    records_read: int = 0
    duplicates: int = 0
    users_filtered: dict[str, int] = field(default_factory=dict)
    edges_kept: dict[str, int] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"records_read\t{self.records_read}", f"deduplicated\t{self.duplicates}"]
        for net in sorted(self.users_filtered):
            out.append(f"users_filtered[{net}]\t{self.users_filtered[net]}")
        for net in sorted(self.edges_kept):
            out.append(f"edges_kept[{net}]\t{self.edges_kept[net]}")
        return out


class MultiNetworkGraph:
    """Immutable set of directed follow graphs, one per network.

    Friend adjacency is derived once at construction.  Users listed in
    ``extra_users`` are kept as isolated accounts with empty friend sets.
    """

    def __init__(
        self,
        follows: Mapping[str, Iterable[tuple[str, str]]],
        extra_users: Mapping[str, Iterable[str]] | None = None,
    ):
        self._follows: dict[str, frozenset[tuple[str, str]]] = {
            net: frozenset(edges) for net, edges in follows.items()
        }
        extra_users = extra_users or {}
        unknown = set(extra_users) - set(self._follows)
        if unknown:
            raise InputError(f"users given for undeclared networks: {sorted(unknown)}")
        self._users: dict[str, frozenset[str]] = {}
        self._friends: dict[str, dict[str, frozenset[str]]] = {}
        for net, edges in self._follows.items():
            users = set(extra_users.get(net, ()))
            adj: dict[str, set[str]] = defaultdict(set)
            for a, b in edges:
                if a == b:
                    raise InputError(f"self-loop {a!r} in network {net!r}")
                users.add(a)
                users.add(b)
                if (b, a) in edges:
                    adj[a].add(b)
            self._users[net] = frozenset(users)
            self._friends[net] = {u: frozenset(vs) for u, vs in adj.items()}

    # -- structure -----------------------------------------------------------

    @property
    def networks(self) -> tuple[str, ...]:
        return tuple(self._follows)

    def _check(self, network: str) -> None:
        if network not in self._follows:
            raise InputError(f"unknown network {network!r}")

    def has_network(self, network: str) -> bool:
        return network in self._follows

    def users(self, network: str) -> frozenset[str]:
        self._check(network)
        return self._users[network]

    def follows(self, network: str) -> frozenset[tuple[str, str]]:
        self._check(network)
        return self._follows[network]

    def extra_users(self) -> dict[str, frozenset[str]]:
        """Users with no follow edge at all, per network."""
        out = {}
        for net, edges in self._follows.items():
            seen = {a for a, _ in edges} | {b for _, b in edges}
            out[net] = self._users[net] - seen
        return out

    # -- queries -------------------------------------------------------------

    def friends(self, network: str, local_id: str) -> frozenset[str]:
        self._check(network)
        return self._friends[network].get(local_id, frozenset())

    def degree(self, network: str, local_id: str) -> int:
        return len(self.friends(network, local_id))

    def common_friends(self, network: str, u: str, v: str) -> frozenset[str]:
        return self.friends(network, u) & self.friends(network, v)

    def are_friends(self, network: str, u: str, v: str) -> bool:
        return v in self.friends(network, u)

    def friend_pairs(self, network: str) -> Iterator[tuple[str, str]]:
        """Each friendship once, as ``(u, v)`` with ``u < v``."""
        self._check(network)
        for u, vs in self._friends[network].items():
            for v in vs:
                if u < v:
                    yield u, v

    def num_friendships(self, network: str) -> int:
        self._check(network)
        return sum(len(vs) for vs in self._friends[network].values()) // 2

    def degree_histogram(self, network: str) -> dict[int, int]:
        self._check(network)
        hist = Counter(len(self._friends[network].get(u, ())) for u in self._users[network])
        return dict(sorted(hist.items()))

    # -- derivation ----------------------------------------------------------

    def without_friendships(self, network: str, pairs: Iterable[tuple[str, str]]) -> MultiNetworkGraph:
        """Copy with the given friendships removed (both follow directions)."""
        self._check(network)
        drop = set()
        for u, v in pairs:
            if not self.are_friends(network, u, v):
                raise InputError(f"({u}, {v}) is not a friendship in {network!r}")
            drop.add((u, v))
            drop.add((v, u))
        follows = dict(self._follows)
        follows[network] = self._follows[network] - drop
        extras = {net: self._users[net] for net in self._follows}
        return MultiNetworkGraph(follows, extras)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiNetworkGraph):
            return NotImplemented
        return self._follows == other._follows and self._users == other._users

    def __repr__(self) -> str:
        parts = ", ".join(f"{n}: {len(self._users[n])} users" for n in self._follows)
        return f"MultiNetworkGraph({parts})"


def parse_edge_lines(lines: Iterable[str]) -> Iterator[tuple[int, str, str, str]]:
    """Yield ``(line_no, network, follower, followee)`` from edge-file text."""
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise InputError(f"line {line_no}: expected 3 tab-separated fields, got {len(parts)}")
        yield (line_no, *parts)


def load_edges(
    records: Iterable[tuple],
    config: IngestConfig | None = None,
    extra_users: Mapping[str, Iterable[str]] | None = None,
) -> tuple[MultiNetworkGraph, IngestSummary]:
    """Build a graph from ``(network, follower, followee)`` records.

    Records may carry a leading line number (as produced by
    :func:`parse_edge_lines`) so that errors can point at the input line.
    """
    config = config or IngestConfig()
    expected = set(config.networks_expected)
    summary = IngestSummary()
    follows: dict[str, set[tuple[str, str]]] = {net: set() for net in config.networks_expected}

    for idx, rec in enumerate(records, start=1):
        if len(rec) == 4:
            line_no, *rec = rec
            where = f"line {line_no}"
        else:
            where = f"record {idx}"
        if len(rec) != 3:
            raise InputError(f"{where}: expected (network, follower, followee)")
        net, a, b = (str(x).strip() for x in rec)
        if not net or not a or not b:
            raise InputError(f"{where}: empty field")
        if a == b:
            raise InputError(f"{where}: follower equals followee ({a!r})")
        if expected and net not in expected:
            raise InputError(f"{where}: unknown network {net!r}")
        summary.records_read += 1
        edges = follows.setdefault(net, set())
        if (a, b) in edges:
            summary.duplicates += 1
        else:
            edges.add((a, b))

    extras = {net: {str(u).strip() for u in users} for net, users in (extra_users or {}).items()}
    for net in extras:
        if expected and net not in expected:
            raise InputError(f"account for unknown network {net!r}")
        follows.setdefault(net, set())

    if config.max_followers > 0:
        for net, edges in follows.items():
            followers = Counter(b for _, b in edges)
            popular = {u for u, c in followers.items() if c > config.max_followers}
            summary.users_filtered[net] = len(popular)
            if popular:
                follows[net] = {(a, b) for a, b in edges if a not in popular and b not in popular}
                extras[net] = extras.get(net, set()) - popular
    else:
        summary.users_filtered = {net: 0 for net in follows}

    # popular accounts must not come back as isolated users
    graph = MultiNetworkGraph(follows, extras)
    summary.edges_kept = {net: len(e) for net, e in follows.items()}
    logger.info("loaded %d records (%d duplicates)", summary.records_read, summary.duplicates)
    return graph, summary


ISOLATED_DIRECTIVE = "#isolated"


def read_edge_file(path, config: IngestConfig | None = None, extra_users=None):
    """Load an edge file; ``#isolated<TAB>network<TAB>id`` lines add edgeless users."""
    extras: dict[str, set[str]] = {net: set(us) for net, us in (extra_users or {}).items()}
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    for line_no, raw in enumerate(lines, start=1):
        if raw.startswith(ISOLATED_DIRECTIVE + "\t"):
            parts = raw.rstrip("\r\n").split("\t")
            if len(parts) != 3 or not parts[1].strip() or not parts[2].strip():
                raise InputError(f"{path}:{line_no}: malformed isolated-user line")
            extras.setdefault(parts[1].strip(), set()).add(parts[2].strip())
    return load_edges(parse_edge_lines(lines), config, extras)


def write_edge_file(graph: MultiNetworkGraph, path) -> None:
    """Snapshot writer; isolated users survive the round trip as directives."""
    isolated = graph.extra_users()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# network\tfollower\tfollowee\n")
        for net in sorted(graph.networks):
            for u in sorted(isolated[net]):
                fh.write(f"{ISOLATED_DIRECTIVE}\t{net}\t{u}\n")
            for a, b in sorted(graph.follows(net)):
                fh.write(f"{net}\t{a}\t{b}\n")
