from __future__ import annotations

import random

import pytest

from multiosn.graph import MultiNetworkGraph, UserRef
from multiosn.matching import identity_from_pairs


def friend_graph(friendships, one_way=(), extra_users=None) -> MultiNetworkGraph:
    """Graph from ``{net: [(a, b), ...]}`` mutual pairs plus optional one-way follows."""
    follows = {}
    for net, pairs in friendships.items():
        edges = follows.setdefault(net, set())
        for a, b in pairs:
            edges.add((a, b))
            edges.add((b, a))
    for net, a, b in one_way:
        follows.setdefault(net, set()).add((a, b))
    return MultiNetworkGraph(follows, extra_users)


def worked_example_graph():
    """User x with 10 friends in A and 20 in B, 5 of them the same people.

    Linked persons use ids p00..p24; account ids are prefixed by network.
    """
    a_friends = [f"p{i:02d}" for i in range(10)]  # p00..p09
    b_friends = [f"p{i:02d}" for i in range(5, 25)]  # p05..p24, overlap p05..p09
    g = friend_graph({
        "A": [("Ax", f"A{p}") for p in a_friends],
        "B": [("Bx", f"B{p}") for p in b_friends],
    })
    pairs = [(UserRef("A", "Ax"), UserRef("B", "Bx"))]
    pairs += [(UserRef("A", f"A{p}"), UserRef("B", f"B{p}")) for p in a_friends if p in b_friends]
    return g, identity_from_pairs(pairs)


def random_two_network(rng: random.Random, n_users: int, p_a: float, p_b: float, p_link: float):
    """Random two-network instance where user i owns accounts Ai and Bi."""
    users = list(range(n_users))
    fa = [(f"A{i}", f"A{j}") for i in users for j in users if i < j and rng.random() < p_a]
    fb = [(f"B{i}", f"B{j}") for i in users for j in users if i < j and rng.random() < p_b]
    g = friend_graph({"A": fa, "B": fb}, extra_users={"A": [f"A{i}" for i in users], "B": [f"B{i}" for i in users]})
    linked = [i for i in users if rng.random() < p_link]
    match = identity_from_pairs((UserRef("A", f"A{i}"), UserRef("B", f"B{i}")) for i in linked)
    return g, match, linked


@pytest.fixture
def worked_example():
    return worked_example_graph()


def subset_fixture(pos_units: int = 40, neg_units: int = 60, seed: int = 0):
    """Units (u, v, z) where u and v are both friends of z in the target network.

    In positive units u and v are also friends; in negative units they are not.
    Once the positive friendships are held out, every unit looks the same to
    neighbourhood scores (one common neighbour of degree 2).  Only the common
    neighbour's maintenance profile differs: LEHS in positive units, HELS in
    negative ones.  Which units are positive is shuffled so that id order
    carries no signal.  Returns ``(graph, match, profiles, population)``.
    """
    from multiosn.measures import MaintenanceProfile

    total = pos_units + neg_units
    positive = set(random.Random(seed).sample(range(total), pos_units))
    pairs, population, profiles, refs = [], [], {}, []
    for k in range(total):
        u, v, z = f"u{k:03d}", f"v{k:03d}", f"z{k:03d}"
        pairs += [(u, z), (v, z)]
        if k in positive:
            pairs.append((u, v))
            sim, even = 0.9, 0.1
        else:
            sim, even = 0.1, 0.9
        population += [u, v]
        for x in (u, v, z):
            refs.append((UserRef("T", x), UserRef("I", "i" + x)))
        profiles[f"I:i{z}|T:{z}"] = MaintenanceProfile(sim, 1.0, (1 + sim) / 2, {}, even, None)
    g = friend_graph({"T": pairs, "I": []}, extra_users={"I": [b.local_id for _, b in refs]})
    return g, identity_from_pairs(refs), profiles, population
