from __future__ import annotations

from statistics import fmean

import pytest

from multiosn.errors import InfeasibleError, InputError
from multiosn.measures import profile_all
from multiosn.synth import SynthConfig, generate_synthetic


def profiles(cfg):
    data = generate_synthetic(cfg)
    return data, list(profile_all(data.graph, data.identity, cfg.networks).values())


class TestTargets:
    def test_similarity_mean_large_population(self):
        _, ps = profiles(SynthConfig(users=10_000, similarity=0.2, evenness_skew=1.0, seed=3))
        assert len(ps) == 10_000
        assert 0.17 <= fmean(p.f_sim for p in ps) <= 0.23

    def test_full_duplication(self):
        _, ps = profiles(SynthConfig(users=500, similarity=1.0, evenness_skew=1.0, seed=1))
        assert all(p.f_sim == 1.0 and p.f_even == 1.0 for p in ps)

    @pytest.mark.parametrize("rho", [0.5, 0.9])
    def test_similarity_with_partial_correlation(self, rho):
        _, ps = profiles(SynthConfig(users=3000, similarity=0.2, evenness_skew=0.5, cross_link_correlation=rho,
                                     seed=2))
        assert fmean(p.f_sim for p in ps) == pytest.approx(0.2, abs=0.03)

    def test_skew_controls_friend_count_ratio(self):
        data, ps = profiles(SynthConfig(users=3000, similarity=0.2, evenness_skew=0.5, seed=4))
        t, i = data.target, data.source
        ratio = fmean(p.f_in[t] for p in ps) / fmean(p.f_in[i] for p in ps)
        assert ratio == pytest.approx(0.5, abs=0.05)
        assert fmean(p.f_in[t] for p in ps) == pytest.approx(data.truth["expected_target_share"], abs=0.03)

    def test_source_is_denser(self):
        data = generate_synthetic(SynthConfig(users=1000, similarity=0.2, evenness_skew=0.5, seed=5))
        assert data.graph.num_friendships("I") > data.graph.num_friendships("T")


class TestFeasibility:
    def test_similarity_above_count_bound(self):
        with pytest.raises(InfeasibleError, match="upper bound"):
            SynthConfig(similarity=0.9, evenness_skew=0.5).validate()

    def test_similarity_above_correlation(self):
        with pytest.raises(InfeasibleError):
            SynthConfig(similarity=0.5, evenness_skew=1.0, cross_link_correlation=0.3).validate()

    @pytest.mark.parametrize(
        "kw",
        [{"users": 1}, {"similarity": -0.1}, {"evenness_skew": 0.0}, {"cross_link_correlation": 1.5},
         {"mean_degree": 0}, {"networks": ("T", "T")}, {"circles_per_user": 0}],
    )
    def test_invalid(self, kw):
        with pytest.raises(InputError):
            SynthConfig(**kw).validate()


class TestStructure:
    def test_deterministic(self):
        cfg = SynthConfig(users=300, similarity=0.3, evenness_skew=0.6, cross_link_correlation=0.8, seed=9)
        a, b = generate_synthetic(cfg), generate_synthetic(cfg)
        assert a.graph == b.graph
        assert a.identity.edges == b.identity.edges
        assert a.accounts == b.accounts

    def test_seed_changes_graph(self):
        a = generate_synthetic(SynthConfig(users=300, seed=1))
        b = generate_synthetic(SynthConfig(users=300, seed=2))
        assert a.graph != b.graph

    def test_every_core_user_linked_once(self):
        data = generate_synthetic(SynthConfig(users=200, seed=0))
        persons = data.identity.persons(("T", "I"))
        assert len(persons) == 200
        assert all(p["T"][1:] == p["I"][1:] for p in persons)

    def test_accounts_declare_counterparts(self):
        data = generate_synthetic(SynthConfig(users=50, seed=0))
        declared = [a for a in data.accounts if a.declared_counterpart is not None]
        assert len(declared) == 50
        assert all(a.network == "T" and a.declared_counterpart.network == "I" for a in declared)

    def test_one_way_follows_present(self):
        data = generate_synthetic(SynthConfig(users=200, oneway_follow_rate=0.1, seed=0))
        g = data.graph
        one_way = [(a, b) for a, b in g.follows("T") if (b, a) not in g.follows("T")]
        assert one_way
