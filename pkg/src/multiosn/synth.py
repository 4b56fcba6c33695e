"""Seeded synthetic two-network populations with known maintenance parameters.

Core users hold an account in both networks and are linked in the identity
map.  Their friendships come in two kinds:

* circle ties: users join a few small friend circles and are friends with
  every circle mate.  A circle tie is kept in both networks with probability
  ``cross_link_correlation`` and otherwise lives in one network only;
* weak ties: friendships with peripheral accounts that exist in one network
  only and are never linked, like the unmatched friends of real users.

Per core user with ``c`` circle ties, the number of weak ties is drawn so that
the expected share of common friends is ``similarity``, and every exclusive
tie goes to the target network with the probability that makes the expected
target/source friend count ratio equal ``evenness_skew``.  That ratio caps
the reachable similarity (the min/max friend count bound), so requests above
it are refused.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import asdict, dataclass
from typing import Any

from .errors import InfeasibleError, InputError
from .graph import MultiNetworkGraph, UserRef
from .matching import AccountRecord, IdentityMap, identity_from_pairs


@dataclass(frozen=True)
class SynthConfig:
    users: int = 1000
    networks: tuple[str, str] = ("T", "I")  # (target, source); source is the denser one
    mean_degree: float = 30.0  # expected distinct friends per core user, both networks together
    similarity: float = 0.2
    evenness_skew: float = 1.0  # expected target/source friend count ratio, in (0, 1]
    cross_link_correlation: float = 1.0
    circles_per_user: int = 2
    peripheral_degree: float = 3.0
    oneway_follow_rate: float = 0.05
    seed: int = 0

    def validate(self) -> None:
        if self.users < 2:
            raise InputError("need at least 2 users")
        if len(self.networks) != 2 or self.networks[0] == self.networks[1]:
            raise InputError("need two distinct network labels")
        if self.mean_degree <= 0 or self.peripheral_degree <= 0:
            raise InputError("degrees must be positive")
        if self.circles_per_user < 1:
            raise InputError("circles_per_user must be at least 1")
        if not 0.0 <= self.similarity <= 1.0:
            raise InputError("similarity must lie in [0, 1]")
        if not 0.0 < self.evenness_skew <= 1.0:
            raise InputError("evenness_skew must lie in (0, 1]")
        if not 0.0 < self.cross_link_correlation <= 1.0:
            raise InputError("cross_link_correlation must lie in (0, 1]")
        if self.oneway_follow_rate < 0:
            raise InputError("oneway_follow_rate must be non-negative")
        if self.similarity > self.evenness_skew + 1e-12:
            raise InfeasibleError(
                f"similarity {self.similarity} exceeds its upper bound min/max friend count = "
                f"{self.evenness_skew} implied by evenness_skew"
            )
        if self.similarity > self.cross_link_correlation + 1e-12:
            raise InfeasibleError(
                f"similarity {self.similarity} needs cross_link_correlation >= similarity "
                f"(got {self.cross_link_correlation})"
            )


@dataclass
class SynthData:
    graph: MultiNetworkGraph
    identity: IdentityMap
    accounts: list[AccountRecord]
    truth: dict[str, Any]

    @property
    def target(self) -> str:
        return self.truth["target"]

    @property
    def source(self) -> str:
        return self.truth["source"]


def _circles(rng: random.Random, n: int, size: int, rounds: int) -> list[list[int]]:
    circles = []
    for _ in range(rounds):
        order = list(range(n))
        rng.shuffle(order)
        chunks = [order[i : i + size] for i in range(0, n, size)]
        if len(chunks) > 1 and len(chunks[-1]) < 2:
            chunks[-2].extend(chunks.pop())
        circles.extend(c for c in chunks if len(c) >= 2)
    return circles


def _stochastic_round(rng: random.Random, x: float) -> int:
    base = math.floor(x)
    return base + (rng.random() < x - base)


def _handle(seed: int, local_id: str) -> str:
    return hashlib.sha256(f"{seed}:{local_id}".encode()).hexdigest()[:12]


def generate_synthetic(cfg: SynthConfig) -> SynthData:
    cfg.validate()
    rng = random.Random(cfg.seed)
    tgt, src = cfg.networks
    n = cfg.users
    s, r, rho = cfg.similarity, cfg.evenness_skew, cfg.cross_link_correlation

    circle_degree = s * cfg.mean_degree / rho
    # exclusive ties go to the target network with this probability
    p_target = 0.0 if s >= 1.0 else (r - s) / ((1.0 + r) * (1.0 - s))

    core = {net: [f"{net}u{i:05d}" for i in range(n)] for net in (tgt, src)}
    friendships: dict[str, set[tuple[str, str]]] = {tgt: set(), src: set()}

    def add(net, a, b):
        friendships[net].add((a, b) if a < b else (b, a))

    circle_deg = [0] * n
    if circle_degree > 0:
        size = max(2, round(circle_degree / cfg.circles_per_user) + 1)
        ties = set()
        for members in _circles(rng, n, size, cfg.circles_per_user):
            members = sorted(members)
            for i, a in enumerate(members):
                for b in members[i + 1 :]:
                    ties.add((a, b))
        for a, b in sorted(ties):
            circle_deg[a] += 1
            circle_deg[b] += 1
            x = rng.random()
            if x < rho:
                nets = (tgt, src)
            elif rng.random() < p_target:
                nets = (tgt,)
            else:
                nets = (src,)
            for net in nets:
                add(net, core[net][a], core[net][b])

    weak_ratio = (rho / s - 1.0) if s > 0 else None
    weak: dict[str, list[tuple[int, int]]] = {tgt: [], src: []}
    for i in range(n):
        if weak_ratio is None:
            w = _stochastic_round(rng, cfg.mean_degree)
        else:
            w = _stochastic_round(rng, circle_deg[i] * weak_ratio)
        for _ in range(w):
            net = tgt if rng.random() < p_target else src
            weak[net].append((i, len(weak[net])))

    peripheral: dict[str, list[str]] = {}
    for net in (tgt, src):
        pool = max(1, math.ceil(len(weak[net]) / cfg.peripheral_degree))
        peripheral[net] = [f"{net}p{j:05d}" for j in range(pool)]
        taken: dict[int, set[int]] = {}
        for i, _ in weak[net]:
            used = taken.setdefault(i, set())
            if len(used) >= pool:
                continue
            j = rng.randrange(pool)
            while j in used:
                j = rng.randrange(pool)
            used.add(j)
            add(net, core[net][i], peripheral[net][j])

    follows: dict[str, set[tuple[str, str]]] = {}
    for net in (tgt, src):
        edges = set()
        for a, b in sorted(friendships[net]):
            edges.add((a, b))
            edges.add((b, a))
        everyone = core[net] + peripheral[net]
        extra = round(cfg.oneway_follow_rate * len(friendships[net]))
        attempts = 0
        while extra > 0 and attempts < 100 * (extra + 1):
            attempts += 1
            a, b = rng.choice(everyone), rng.choice(everyone)
            if a == b or (a, b) in edges or (b, a) in edges:
                continue
            edges.add((a, b))
            extra -= 1
        follows[net] = edges

    extras = {net: core[net] + peripheral[net] for net in (tgt, src)}
    graph = MultiNetworkGraph(follows, extras)
    pairs = [(UserRef(tgt, core[tgt][i]), UserRef(src, core[src][i])) for i in range(n)]
    identity = identity_from_pairs(pairs)

    accounts = []
    for i in range(n):
        accounts.append(AccountRecord(tgt, core[tgt][i], f"user{i:05d}", UserRef(src, core[src][i])))
        accounts.append(AccountRecord(src, core[src][i], f"user{i:05d}"))
    for net in (tgt, src):
        # unrelated random handles, so the name tiers of matching have nothing to link
        accounts.extend(AccountRecord(net, p, _handle(cfg.seed, p)) for p in peripheral[net])

    truth = dict(asdict(cfg))
    truth.update(
        target=tgt,
        source=src,
        circle_degree=circle_degree,
        p_target_exclusive=p_target,
        expected_target_share=r * (1 + s) / (1 + r),
        expected_source_share=(1 + s) / (1 + r),
        friendships={net: len(friendships[net]) for net in (tgt, src)},
        peripheral_accounts={net: len(peripheral[net]) for net in (tgt, src)},
    )
    truth["networks"] = list(cfg.networks)
    return SynthData(graph, identity, accounts, truth)
