import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antfis.dataset import FeatureStage, Normalizer
from antfis.fcm import FcmConfig, fcm_cluster
from antfis.fis import (SIGMA_CAP, SIGMA_FLOOR, FisModel, decode_premise,
                        design_matrix, encode_premise, firing_strengths,
                        fit_consequents, init_from_fcm, predict,
                        predict_batch, solve_consequents)


def unit_normalizer(d):
    names = ("x", "y", "z", "pressure", "air_superficial_velocity")[:d]
    return Normalizer(names, np.zeros(d), np.ones(d))


def make_model(centers, sigmas, coeffs):
    centers = np.asarray(centers, dtype=float)
    d = centers.shape[1]
    return FisModel(centers=centers, sigmas=np.asarray(sigmas, dtype=float),
                    coeffs=np.asarray(coeffs, dtype=float),
                    stage=FeatureStage.from_arity(d),
                    normalizer=unit_normalizer(d))


class TestFiringStrengths:
    def test_peak_at_center(self):
        m = make_model([[0.2, 0.7], [0.9, 0.1]], [[0.1, 0.2], [0.3, 0.1]],
                       np.zeros((2, 3)))
        w = firing_strengths(m, [0.2, 0.7])
        assert w[0] == pytest.approx(1.0, abs=1e-15)
        assert 0.0 < w[1] < 1.0

    def test_one_sigma_offset(self):
        m = make_model([[0.5]], [[0.2]], np.zeros((1, 2)))
        w = firing_strengths(m, [0.7])
        assert w[0] == pytest.approx(math.exp(-0.5), rel=1e-12)

    @given(seed=st.integers(0, 500))
    @settings(max_examples=30, deadline=None)
    def test_product_of_factors(self, seed):
        rng = np.random.default_rng(seed)
        c, d = 3, 4
        m = make_model(rng.random((c, d)), 0.05 + rng.random((c, d)),
                       np.zeros((c, d + 1)))
        x = rng.random(d)
        w = firing_strengths(m, x)
        for i in range(c):
            per_factor = np.prod([
                math.exp(-((x[j] - m.centers[i, j]) ** 2)
                         / (2.0 * m.sigmas[i, j] ** 2))
                for j in range(d)
            ])
            assert w[i] == pytest.approx(per_factor, rel=1e-12)

    def test_arity_mismatch(self):
        m = make_model([[0.5, 0.5]], [[0.2, 0.2]], np.zeros((1, 3)))
        with pytest.raises(ValueError):
            firing_strengths(m, [0.5])


class TestPredict:
    def test_constant_consequents(self):
        coeffs = np.array([[0.0, 0.0, 0.42], [0.0, 0.0, 0.42]])
        m = make_model([[0.1, 0.1], [0.8, 0.9]], [[0.2, 0.2], [0.2, 0.2]],
                       coeffs)
        for x in ([0.0, 0.0], [0.5, 0.5], [1.3, -0.2]):
            assert predict(m, x) == pytest.approx(0.42, abs=1e-12)

    def test_single_rule_is_affine(self):
        m = make_model([[0.5]], [[0.3]], [[2.0, -0.5]])
        for x in (-0.5, 0.0, 0.3, 1.7):
            assert predict(m, [x]) == pytest.approx(2.0 * x - 0.5, abs=1e-12)

    def test_two_rule_hand_computation(self):
        m = make_model([[0.0], [1.0]], [[0.4], [0.25]],
                       [[1.0, 0.0], [-2.0, 3.0]])
        x = 0.3
        w1 = math.exp(-(x - 0.0) ** 2 / (2 * 0.4**2))
        w2 = math.exp(-(x - 1.0) ** 2 / (2 * 0.25**2))
        f1 = 1.0 * x + 0.0
        f2 = -2.0 * x + 3.0
        expected = (w1 * f1 + w2 * f2) / (w1 + w2)
        assert predict(m, [x]) == pytest.approx(expected, rel=1e-12)

    def test_survives_underflow_of_raw_strengths(self):
        # both premises fire below the float range; the shifted mixture
        # must still return the dominant rule's consequent value
        m = make_model([[0.0], [1.0]], [[SIGMA_FLOOR], [SIGMA_FLOOR]],
                       [[0.0, 1.0], [0.0, 2.0]])
        x = 0.4
        assert np.exp(firing_strengths(m, [x])).max() == pytest.approx(1.0)
        assert firing_strengths(m, [x]).max() == 0.0  # raw strengths underflow
        assert predict(m, [x]) == pytest.approx(1.0, abs=1e-9)

    @given(seed=st.integers(0, 500))
    @settings(max_examples=30, deadline=None)
    def test_convex_combination_bound(self, seed):
        rng = np.random.default_rng(seed)
        c, d = 4, 3
        m = make_model(rng.random((c, d)), 0.05 + rng.random((c, d)),
                       rng.standard_normal((c, d + 1)))
        x = rng.random(d)
        rule_vals = m.coeffs[:, :d] @ x + m.coeffs[:, d]
        y = predict(m, x)
        assert rule_vals.min() - 1e-9 <= y <= rule_vals.max() + 1e-9

    @given(seed=st.integers(0, 500))
    @settings(max_examples=30, deadline=None)
    def test_equals_raw_weighted_average(self, seed):
        # the normalized mixture is invariant to the common scale of the
        # strengths; cross-check against the direct ratio form
        rng = np.random.default_rng(seed)
        c, d = 3, 2
        m = make_model(rng.random((c, d)), 0.1 + rng.random((c, d)),
                       rng.standard_normal((c, d + 1)))
        x = rng.random(d)
        w = firing_strengths(m, x)
        vals = m.coeffs[:, :d] @ x + m.coeffs[:, d]
        assert predict(m, x) == pytest.approx(float(w @ vals / w.sum()),
                                              rel=1e-12)

    def test_non_finite_rejected(self):
        m = make_model([[0.5]], [[0.3]], [[1.0, 0.0]])
        with pytest.raises(ValueError):
            predict(m, [float("nan")])


class TestInitFromFcm:
    def test_centers_follow_clusters(self):
        rng = np.random.default_rng(2)
        a = rng.normal([0.2, 0.2], 0.03, size=(80, 2))
        b = rng.normal([0.8, 0.8], 0.03, size=(80, 2))
        X = np.vstack([a, b])
        y = X @ np.array([0.1, 0.2]) + 0.05
        res = fcm_cluster(X, FcmConfig(c=2, seed=4))
        model = init_from_fcm(res, X, y, FeatureStage.XY2, unit_normalizer(2))
        np.testing.assert_allclose(np.sort(model.centers[:, 0]),
                                   np.sort(res.centers[:, 0]), atol=1e-12)
        assert (model.sigmas >= SIGMA_FLOOR).all()

    def test_constant_feature_floors_sigma(self):
        X = np.column_stack([np.linspace(0, 1, 40), np.full(40, 0.5)])
        y = X[:, 0]
        res = fcm_cluster(X, FcmConfig(c=2, seed=1))
        model = init_from_fcm(res, X, y, FeatureStage.XY2, unit_normalizer(2))
        np.testing.assert_allclose(model.sigmas[:, 1], SIGMA_FLOOR)

    def test_consequents_are_fit(self):
        rng = np.random.default_rng(3)
        X = rng.random((100, 2))
        y = X @ np.array([0.3, -0.2]) + 0.4
        res = fcm_cluster(X, FcmConfig(c=3, seed=2))
        model = init_from_fcm(res, X, y, FeatureStage.XY2, unit_normalizer(2))
        pred = predict_batch(model, X)
        assert np.sqrt(np.mean((pred - y) ** 2)) < 1e-4


class TestFitConsequents:
    def test_planted_recovery(self):
        rng = np.random.default_rng(7)
        c, d, n = 3, 2, 200
        true = make_model(rng.random((c, d)), 0.2 + 0.3 * rng.random((c, d)),
                          rng.standard_normal((c, d + 1)))
        X = rng.random((n, d))
        y = predict_batch(true, X)
        start = fit_consequents(true, X, np.zeros(n))  # wrong consequents
        refit = fit_consequents(start, X, y, lam=0.0)
        np.testing.assert_allclose(refit.coeffs, true.coeffs, atol=1e-6)

    def test_planted_recovery_default_damping_bias(self):
        # Tikhonov damping biases exact recovery by about lam * cond(A);
        # with the default lam the planted coefficients come back to ~1e-5.
        rng = np.random.default_rng(7)
        c, d, n = 3, 2, 200
        true = make_model(rng.random((c, d)), 0.2 + 0.3 * rng.random((c, d)),
                          rng.standard_normal((c, d + 1)))
        X = rng.random((n, d))
        y = predict_batch(true, X)
        refit = fit_consequents(true, X, y)
        np.testing.assert_allclose(refit.coeffs, true.coeffs, atol=1e-4)

    def test_single_rule_matches_ols(self):
        rng = np.random.default_rng(9)
        x = rng.random(100)
        y = 1.7 * x + 0.3 + 0.01 * rng.standard_normal(100)
        m = make_model([[0.5]], [[0.3]], [[0.0, 0.0]])
        refit = fit_consequents(m, x[:, None], y, lam=0.0)
        slope, intercept = np.polyfit(x, y, 1)
        assert refit.coeffs[0, 0] == pytest.approx(slope, abs=1e-9)
        assert refit.coeffs[0, 1] == pytest.approx(intercept, abs=1e-9)

    def test_exact_line_with_default_damping(self):
        x = np.linspace(0.0, 1.0, 50)
        y = 2.0 * x + 1.0
        m = make_model([[0.5]], [[0.3]], [[0.0, 0.0]])
        refit = fit_consequents(m, x[:, None], y)
        np.testing.assert_allclose(refit.coeffs[0], [2.0, 1.0], atol=1e-6)

    def test_huge_damping_shrinks_to_zero(self):
        rng = np.random.default_rng(1)
        X = rng.random((50, 2))
        y = rng.random(50)
        m = make_model([[0.5, 0.5]], [[0.3, 0.3]], [[1.0, 1.0, 1.0]])
        refit = fit_consequents(m, X, y, lam=1e12)
        np.testing.assert_allclose(refit.coeffs, 0.0, atol=1e-6)

    @given(seed=st.integers(0, 200))
    @settings(max_examples=20, deadline=None)
    def test_never_increases_sse(self, seed):
        rng = np.random.default_rng(seed)
        c, d, n = 2, 2, 60
        m = make_model(rng.random((c, d)), 0.1 + rng.random((c, d)),
                       0.1 * rng.standard_normal((c, d + 1)))
        X = rng.random((n, d))
        y = rng.random(n)
        sse_before = np.sum((predict_batch(m, X) - y) ** 2)
        refit = fit_consequents(m, X, y)
        sse_after = np.sum((predict_batch(refit, X) - y) ** 2)
        assert sse_after <= sse_before + 1e-9

    def test_underdetermined_minimum_norm(self):
        # more coefficients than rows: lam=0 must still solve
        rng = np.random.default_rng(4)
        m = make_model(rng.random((4, 3)), 0.2 + rng.random((4, 3)),
                       np.zeros((4, 4)))
        X = rng.random((5, 3))
        y = rng.random(5)
        refit = fit_consequents(m, X, y, lam=0.0)
        pred = predict_batch(refit, X)
        np.testing.assert_allclose(pred, y, atol=1e-8)

    def test_design_matrix_reproduces_prediction(self):
        rng = np.random.default_rng(6)
        m = make_model(rng.random((3, 2)), 0.2 + rng.random((3, 2)),
                       rng.standard_normal((3, 3)))
        X = rng.random((20, 2))
        A = design_matrix(m, X)
        np.testing.assert_allclose(A @ m.coeffs.ravel(), predict_batch(m, X),
                                   rtol=1e-12)

    def test_negative_damping_rejected(self):
        with pytest.raises(ValueError):
            solve_consequents(np.ones((3, 2)), np.ones(3), lam=-1.0)


class TestEncodeDecode:
    def test_round_trip(self):
        rng = np.random.default_rng(11)
        m = make_model(rng.random((3, 2)),
                       SIGMA_FLOOR + rng.random((3, 2)) * 0.5,
                       rng.standard_normal((3, 3)))
        v = encode_premise(m)
        back = decode_premise(v, m)
        np.testing.assert_array_equal(back.centers, m.centers)
        np.testing.assert_array_equal(back.sigmas, m.sigmas)
        np.testing.assert_array_equal(back.coeffs, m.coeffs)

    def test_vector_layout_rule_major(self):
        m = make_model([[0.1, 0.2], [0.3, 0.4]], [[0.5, 0.6], [0.7, 0.8]],
                       np.zeros((2, 3)))
        np.testing.assert_array_equal(
            encode_premise(m), [0.1, 0.5, 0.2, 0.6, 0.3, 0.7, 0.4, 0.8])

    def test_sigma_clamped_on_decode(self):
        m = make_model([[0.5]], [[0.3]], [[0.0, 0.0]])
        low = decode_premise(np.array([0.5, 0.0]), m)
        assert low.sigmas[0, 0] == SIGMA_FLOOR
        high = decode_premise(np.array([0.5, 5.0]), m)
        assert high.sigmas[0, 0] == SIGMA_CAP

    def test_length_check(self):
        m = make_model([[0.5, 0.5], [0.2, 0.2]], [[0.3, 0.3], [0.3, 0.3]],
                       np.zeros((2, 3)))
        assert encode_premise(m).shape == (8,)
        with pytest.raises(ValueError):
            decode_premise(np.zeros(7), m)

    def test_c2_d3_length_12(self):
        m = make_model(np.full((2, 3), 0.5), np.full((2, 3), 0.3),
                       np.zeros((2, 4)))
        assert encode_premise(m).shape == (12,)


class TestModelValidation:
    def test_sigma_floor_enforced(self):
        with pytest.raises(ValueError, match="floor"):
            make_model([[0.5]], [[1e-6]], [[0.0, 0.0]])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            FisModel(centers=np.zeros((2, 2)), sigmas=np.full((2, 3), 0.1),
                     coeffs=np.zeros((2, 3)), stage=FeatureStage.XY2,
                     normalizer=unit_normalizer(2))

    def test_rules_view(self):
        m = make_model([[0.1, 0.2]], [[0.5, 0.6]], [[1.0, 2.0, 3.0]])
        rules = m.rules
        assert len(rules) == 1
        assert rules[0].premise[1].center == 0.2
        assert rules[0].premise[1].sigma == 0.6
        assert rules[0].consequent == (1.0, 2.0, 3.0)
