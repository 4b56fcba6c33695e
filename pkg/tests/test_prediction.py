from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from multiosn.errors import InputError
from multiosn.features import FeatureVector, PairKey, extract
from multiosn.graph import UserRef
from multiosn.matching import identity_from_pairs
from multiosn.prediction import (
    LinearModel,
    RankedEntry,
    TrainConfig,
    binary_prf,
    evaluate_classifier,
    metrics_at_k,
    metrics_curve,
    predict,
    predict_many,
    rank_pairs,
    rank_scored,
    read_model,
    train,
    train_arrays,
    write_model,
)

from conftest import friend_graph


def pk(i, j):
    return PairKey(f"n{i:02d}", f"n{j:02d}", "T", "I")


def entries(labels):
    """Ranked list with the given labels top to bottom."""
    return [RankedEntry(pk(0, i + 1), float(len(labels) - i), y) for i, y in enumerate(labels)]


def bf_metrics(ranked, k, positives):
    tp = len([e for e in ranked[:k] if e.label == 1])
    p, r = tp / k, tp / positives
    return p, r, (2 * p * r / (p + r) if tp else 0.0)


class TestRanking:
    def test_perfect_separation(self):
        scored = [(pk(0, i), float(i % 2), i % 2) for i in range(1, 11)]
        ranked = rank_scored(scored)
        assert [e.label for e in ranked] == [1] * 5 + [0] * 5

    def test_ties_use_canonical_order(self):
        scored = [(pk(i, i + 1), 0.5, 0) for i in (5, 1, 3)]
        ranked = rank_scored(scored)
        assert [e.pair.u for e in ranked] == ["n01", "n03", "n05"]
        assert rank_scored(list(reversed(scored))) == ranked

    def test_source_jaccard_toy(self):
        # positives (a,b) and (c,d) share two source friends, negative (a,c) shares none
        g = friend_graph({
            "T": [("a", "x")],
            "I": [("ia", "s1"), ("ia", "s2"), ("ib", "s1"), ("ib", "s2"),
                  ("ic", "s3"), ("ic", "s4"), ("id", "s3"), ("id", "s4")],
        }, extra_users={"T": ["b", "c", "d"]})
        match = identity_from_pairs([(UserRef("T", x), UserRef("I", "i" + x)) for x in "abcd"])
        inst = [(PairKey("a", "c", "T", "I"), 0), (PairKey("a", "b", "T", "I"), 1), (PairKey("c", "d", "T", "I"), 1),
                (PairKey("b", "d", "T", "I"), 0)]
        ranked = rank_pairs(inst, "JC", "I", g, match)
        assert [e.label for e in ranked] == [1, 1, 0, 0]
        assert ranked[0].score == 1.0

    def test_unknown_measure(self):
        g = friend_graph({"T": [("a", "b")]})
        with pytest.raises(InputError):
            rank_pairs([], "XX", "T", g)


class TestMetricsAtK:
    def test_hand_count(self):
        labels = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0]
        m = metrics_at_k(entries(labels), 3, 3)
        assert (m.precision, m.recall, m.f1) == pytest.approx((2 / 3, 2 / 3, 2 / 3))

    def test_perfect(self):
        m = metrics_at_k(entries([1] * 5000 + [0] * 100), 5000, 5000)
        assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)

    def test_no_positive_in_top(self):
        m = metrics_at_k(entries([0, 0, 1]), 2, 1)
        assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)

    @pytest.mark.parametrize("k", [0, 11])
    def test_k_out_of_range(self, k):
        with pytest.raises(InputError):
            metrics_at_k(entries([1] * 10), k, 10)

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=60), st.data())
    @settings(max_examples=200, deadline=None)
    def test_curve_matches_brute_force(self, labels, data):
        if sum(labels) == 0:
            labels = labels + [1]
        ranked = entries(labels)
        ks = data.draw(st.lists(st.integers(1, len(labels)), min_size=1, max_size=5))
        for m in metrics_curve(ranked, ks, sum(labels)):
            want = bf_metrics(ranked, m.k, sum(labels))
            assert (m.precision, m.recall, m.f1) == pytest.approx(want, abs=1e-12)
            single = metrics_at_k(ranked, m.k, sum(labels))
            assert single == m


class TestBinaryPrf:
    def test_all_correct(self):
        assert binary_prf([1, 0, 1], [1, 0, 1]) == (1.0, 1.0, 1.0)

    def test_all_negative(self):
        assert binary_prf([1, 0, 1], [0, 0, 0]) == (0.0, 0.0, 0.0)

    def test_hand_count(self):
        # 2 tp, 1 fp, 1 fn
        assert binary_prf([1, 1, 0, 1, 0], [1, 1, 1, 0, 0]) == pytest.approx((2 / 3, 2 / 3, 2 / 3))


def dual_oracle(Z, y, reg):
    """Box-constrained dual solved by L-BFGS-B; returns the primal weights."""
    n = len(y)
    C = 1.0 / (reg * n)
    Q = (y[:, None] * Z) @ (y[:, None] * Z).T
    res = minimize(lambda a: 0.5 * a @ Q @ a - a.sum(), np.zeros(n), jac=lambda a: Q @ a - 1.0,
                   bounds=[(0.0, C)] * n, method="L-BFGS-B", options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000})
    return (res.x * y) @ Z


def primal(w, Z, y, reg):
    return 0.5 * reg * w @ w + np.maximum(0.0, 1.0 - y * (Z @ w)).mean()


class TestClassifier:
    def test_separable_1d(self):
        X = np.array([[1.0]] * 10 + [[-1.0]] * 10)
        y = np.array([1.0] * 10 + [-1.0] * 10)
        model = train_arrays(X, y, ["x"], TrainConfig())
        assert np.all((model.margins(X) > 0) == (y > 0))

    def test_duplicated_training_set(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(60, 3))
        y = np.where(X @ [1.0, -2.0, 0.5] + 0.3 * rng.normal(size=60) > 0, 1.0, -1.0)
        cfg = TrainConfig(reg=0.1, epochs=500, seed=4)
        a = train_arrays(X, y, "abc", cfg)
        b = train_arrays(np.vstack([X, X]), np.concatenate([y, y]), "abc", cfg)
        assert np.max(np.abs(a.weights - b.weights)) <= 1e-6
        assert abs(a.bias - b.bias) <= 1e-6

    def test_xor_trains_without_error(self):
        X = np.array([[0, 0], [1, 1], [0, 1], [1, 0]] * 25, dtype=float)
        y = np.array([-1, -1, 1, 1] * 25, dtype=float)
        model = train_arrays(X, y, "ab", TrainConfig(epochs=100))
        acc = np.mean((model.margins(X) > 0) == (y > 0))
        assert 0.25 <= acc <= 0.75

    @pytest.mark.parametrize("reg", [1.0, 0.1, 0.01])
    def test_matches_independent_dual_solver(self, reg):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(80, 4))
        y = np.where(X @ [0.5, -1.0, 2.0, 0.0] + rng.normal(size=80) > 0.2, 1.0, -1.0)
        model = train_arrays(X, y, "abcd", TrainConfig(reg=reg, epochs=2000, standardize=False))
        Z = np.hstack([X, np.ones((80, 1))])
        w_ref = dual_oracle(Z, y, reg)
        ours = np.append(model.weights, model.bias)
        assert primal(ours, Z, y, reg) <= primal(w_ref, Z, y, reg) + 1e-8
        np.testing.assert_allclose(ours, w_ref, atol=1e-4)

    def test_objective_reported(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 2))
        y = np.where(X[:, 0] > 0, 1.0, -1.0)
        m = train_arrays(X, y, "ab", TrainConfig(reg=0.5, standardize=False))
        Z = np.hstack([X, np.ones((30, 1))])
        assert m.objective == pytest.approx(primal(np.append(m.weights, m.bias), Z, y, 0.5))

    def test_seed_determinism(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(50, 3))
        y = np.where(X[:, 1] > 0, 1.0, -1.0)
        a = train_arrays(X, y, "abc", TrainConfig(seed=9))
        b = train_arrays(X, y, "abc", TrainConfig(seed=9))
        assert np.array_equal(a.weights, b.weights) and a.bias == b.bias

    def test_single_class_rejected(self):
        with pytest.raises(InputError):
            train_arrays(np.zeros((3, 1)), np.ones(3), "x", TrainConfig())

    def test_non_finite_rejected(self):
        X = np.array([[1.0], [np.nan]])
        with pytest.raises(InputError, match="row 1"):
            train_arrays(X, np.array([1.0, -1.0]), "x", TrainConfig())

    @pytest.mark.parametrize("kw", [{"reg": 0.0}, {"reg": -1.0}, {"epochs": 0}])
    def test_bad_config(self, kw):
        with pytest.raises(InputError):
            TrainConfig(**kw)


def toy_vector(values):
    pair = PairKey("a", "b", "T", "I")
    return FeatureVector(pair, "NBO", cn={"T": values[1], "I": values[0]}, jc={"T": values[3], "I": values[2]},
                         aa={"T": values[5], "I": values[4]})


def hand_model(weights, bias):
    d = len(weights)
    names = ("CN_src", "CN_tgt", "JC_src", "JC_tgt", "AA_src", "AA_tgt")
    return LinearModel(names, np.array(weights, dtype=float), bias, np.zeros(d), np.ones(d))


class TestPredict:
    def test_zero_weights_positive_bias(self):
        label, margin = predict(hand_model([0] * 6, 1.0), toy_vector([3, 1, 0.5, 0.2, 1.0, 0.3]))
        assert (label, margin) == (1, 1.0)

    def test_zero_margin_is_negative(self):
        label, margin = predict(hand_model([1, 0, 0, 0, 0, 0], -2.0), toy_vector([2, 0, 0, 0, 0, 0]))
        assert margin == 0.0 and label == 0

    def test_hand_dot_product(self):
        w = [0.5, -1.0, 2.0, 0.0, 1.0, -0.5]
        x = [3, 1, 0.5, 0.2, 1.0, 0.3]
        want = sum(a * b for a, b in zip(w, x)) - 1.0  # 1.5 - 1 + 1 + 0 + 1 - 0.15 - 1 = 1.35
        label, margin = predict(hand_model(w, -1.0), toy_vector(x))
        assert margin == pytest.approx(1.35) == pytest.approx(want)
        assert label == 1

    def test_feature_mismatch(self):
        fv = FeatureVector(PairKey("a", "b", "T", "I"), "NFM", nfm={})
        with pytest.raises(InputError, match="does not match"):
            predict(hand_model([0] * 6, 0.0), fv)


class TestEndToEnd:
    def fixture(self):
        # positives share friends in both networks, negatives share none
        pairs_t, pairs_i, inst = [], [], []
        for k in range(12):
            a, b = f"p{k}a", f"p{k}b"
            for z in range(2):
                pairs_t += [(a, f"z{k}_{z}"), (b, f"z{k}_{z}")]
                pairs_i += [("i" + a, f"iz{k}_{z}"), ("i" + b, f"iz{k}_{z}")]
            inst.append((PairKey(a, b, "T", "I"), 1))
        for k in range(12):
            a, b = f"n{k}a", f"n{k}b"
            pairs_t += [(a, f"y{k}a"), (b, f"y{k}b")]
            inst.append((PairKey(a, b, "T", "I"), 0))
        g = friend_graph({"T": pairs_t, "I": pairs_i})
        ids = {p.u for p, _ in inst} | {p.v for p, _ in inst}
        match = identity_from_pairs((UserRef("T", x), UserRef("I", "i" + x)) for x in ids)
        return g, match, inst

    def test_train_predict_model_file(self, tmp_path):
        g, match, inst = self.fixture()
        data = [(extract(p, g, match, {}, None, "NBCL"), y) for p, y in inst]
        model = train(data, TrainConfig(seed=1))
        assert evaluate_classifier(model, data) == (1.0, 1.0, 1.0)
        write_model(model, tmp_path / "m.tsv")
        back = read_model(tmp_path / "m.tsv")
        assert back.names == model.names
        _, m1 = predict_many(model, [fv for fv, _ in data])
        _, m2 = predict_many(back, [fv for fv, _ in data])
        np.testing.assert_allclose(m1, m2, atol=1e-9)
        assert back.config == model.config

    def test_empty_sets(self):
        with pytest.raises(InputError):
            train([])
        g, match, inst = self.fixture()
        data = [(extract(p, g, match, {}, None, "NBO"), y) for p, y in inst]
        with pytest.raises(InputError):
            evaluate_classifier(train(data), [])
