import numpy as np
import pytest

from balmix.mixing import (
    Example,
    MixedExample,
    MixupConfig,
    balanced_mixup_batch,
    draw_lambda_balanced,
    draw_lambda_classic,
    mix,
    mix_arrays,
)
from util import ks_statistic


def ex(features, label, k):
    return Example.from_label(np.array(features, dtype=float), label, k)


class TestLambdaDraws:
    def test_classic_alpha_one_is_uniform(self):
        rng = np.random.default_rng(0)
        draws = np.array([draw_lambda_classic(1.0, rng) for _ in range(100_000)])
        assert abs(draws.mean() - 0.5) < 0.005
        assert ks_statistic(draws, np.sort(draws)) < 0.01  # CDF of U(0,1) is x

    def test_classic_symmetric_mean(self):
        rng = np.random.default_rng(1)
        draws = np.array([draw_lambda_classic(0.2, rng) for _ in range(100_000)])
        assert abs(draws.mean() - 0.5) < 0.005

    def test_classic_ks_against_numeric_cdf(self):
        # oracle: scipy's regularized incomplete beta, itself cross-checked
        # against mpmath's arbitrary-precision numerical integration
        from mpmath import betainc as mp_betainc
        from scipy.special import betainc as sp_betainc

        for x in np.linspace(0.02, 0.98, 25):
            exact = float(mp_betainc(0.2, 0.2, 0, x, regularized=True))
            assert abs(sp_betainc(0.2, 0.2, x) - exact) < 1e-10
        rng = np.random.default_rng(2)
        draws = np.sort([draw_lambda_classic(0.2, rng) for _ in range(100_000)])
        assert ks_statistic(draws, sp_betainc(0.2, 0.2, draws)) < 0.01

    def test_balanced_alpha_one_is_uniform(self):
        rng = np.random.default_rng(3)
        draws = np.sort([draw_lambda_balanced(1.0, rng) for _ in range(100_000)])
        assert ks_statistic(draws, draws) < 0.01

    def test_balanced_mean_matches_beta_mean(self):
        rng = np.random.default_rng(4)
        draws = np.array([draw_lambda_balanced(0.1, rng) for _ in range(100_000)])
        assert abs(draws.mean() - 0.1 / 1.1) < 0.003

    @pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3, 1.0, 2.5])
    def test_balanced_ks_against_closed_form_cdf(self, alpha):
        rng = np.random.default_rng(int(alpha * 100))
        draws = np.sort([draw_lambda_balanced(alpha, rng) for _ in range(100_000)])
        assert ks_statistic(draws, draws**alpha) < 0.01

    def test_nonpositive_alpha_rejected(self):
        rng = np.random.default_rng(0)
        for alpha in (0.0, -1.0):
            with pytest.raises(ValueError):
                draw_lambda_classic(alpha, rng)
            with pytest.raises(ValueError):
                draw_lambda_balanced(alpha, rng)


class TestMix:
    def test_endpoints_exact(self):
        a = ex([2.0, 0.0], 0, 2)
        b = ex([0.0, 2.0], 1, 2)
        at_one = mix(a, b, 1.0)
        assert np.array_equal(at_one.features, a.features)
        assert np.array_equal(at_one.soft_label, a.one_hot)
        at_zero = mix(a, b, 0.0)
        assert np.array_equal(at_zero.features, b.features)
        assert np.array_equal(at_zero.soft_label, b.one_hot)

    def test_hand_arithmetic(self):
        a = ex([2.0, 0.0], 0, 2)
        b = ex([0.0, 2.0], 1, 2)
        mixed = mix(a, b, 0.25)
        assert mixed.features == pytest.approx([0.5, 1.5])
        assert mixed.soft_label == pytest.approx([0.25, 0.75])

    def test_affine_midpoint(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = ex(rng.normal(size=4), 0, 3)
            b = ex(rng.normal(size=4), 2, 3)
            mid = mix(a, b, 0.5)
            assert mid.features == pytest.approx((a.features + b.features) / 2, abs=1e-12)

    def test_soft_label_is_probability_vector(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            k = int(rng.integers(2, 6))
            a = ex(rng.normal(size=3), int(rng.integers(k)), k)
            b = ex(rng.normal(size=3), int(rng.integers(k)), k)
            mixed = mix(a, b, float(rng.uniform()))
            assert abs(mixed.soft_label.sum() - 1.0) <= 1e-12
            assert np.all(mixed.soft_label >= 0.0)
            assert (mixed.soft_label > 0).sum() <= 2

    def test_features_stay_in_envelope(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a = ex(rng.normal(size=5), 0, 2)
            b = ex(rng.normal(size=5), 1, 2)
            mixed = mix(a, b, float(rng.uniform()))
            low = np.minimum(a.features, b.features) - 1e-12
            high = np.maximum(a.features, b.features) + 1e-12
            assert np.all(mixed.features >= low) and np.all(mixed.features <= high)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimensions"):
            mix(ex([1.0], 0, 2), ex([1.0, 2.0], 0, 2), 0.5)
        with pytest.raises(ValueError, match="class counts"):
            mix(ex([1.0], 0, 2), ex([1.0], 0, 3), 0.5)

    def test_lambda_out_of_range_rejected(self):
        a, b = ex([1.0], 0, 2), ex([2.0], 1, 2)
        for lam in (-0.01, 1.01):
            with pytest.raises(ValueError):
                mix(a, b, lam)


class TestBalancedMixupBatch:
    def batches(self, rng, n, k=3, d=4):
        inst = [ex(rng.normal(size=d), int(rng.integers(k)), k) for _ in range(n)]
        bal = [ex(rng.normal(size=d), int(rng.integers(k)), k) for _ in range(n)]
        return inst, bal

    def test_tiny_alpha_recovers_instance_batch(self):
        rng = np.random.default_rng(8)
        inst, bal = self.batches(rng, 1000)
        mixed = balanced_mixup_batch(inst, bal, 1e-4, np.random.default_rng(9))
        weights = np.array([m.lam for m in mixed])
        assert weights.mean() < 1e-3
        deviation = np.mean([np.abs(m.features - i.features).max()
                             for m, i in zip(mixed, inst)])
        assert deviation < 0.01

    def test_mean_weight_on_balanced_sample(self):
        rng = np.random.default_rng(10)
        inst, bal = self.batches(rng, 20_000)
        mixed = balanced_mixup_batch(inst, bal, 0.1, np.random.default_rng(11))
        weights = np.array([m.lam for m in mixed])
        assert abs(weights.mean() - 0.1 / 1.1) < 0.003

    def test_soft_labels_supported_on_source_classes(self):
        rng = np.random.default_rng(12)
        inst, bal = self.batches(rng, 500)
        mixed = balanced_mixup_batch(inst, bal, 0.3, np.random.default_rng(13))
        for m, i, b in zip(mixed, inst, bal):
            assert abs(m.soft_label.sum() - 1.0) <= 1e-12
            support = set(np.flatnonzero(m.soft_label > 0).tolist())
            assert support <= {i.label, b.label}

    def test_weight_convention_switch(self):
        rng = np.random.default_rng(14)
        inst, bal = self.batches(rng, 200)
        on_balanced = balanced_mixup_batch(inst, bal, 0.1, np.random.default_rng(15))
        on_instance = balanced_mixup_batch(inst, bal, 0.1, np.random.default_rng(15),
                                           lambda_weights="instance")
        # identical coefficient stream, mirrored weighting
        for mb, mi, i, b in zip(on_balanced, on_instance, inst, bal):
            assert mb.lam == mi.lam
            expected_b = mb.lam * b.features + (1 - mb.lam) * i.features
            expected_i = mi.lam * i.features + (1 - mi.lam) * b.features
            assert mb.features == pytest.approx(expected_b, abs=1e-12)
            assert mi.features == pytest.approx(expected_i, abs=1e-12)

    def test_per_position_independence(self):
        rng = np.random.default_rng(16)
        batches = np.array([rng.beta(0.2, 1.0, size=8) for _ in range(20_000)])
        corr = np.corrcoef(batches.T)
        off_diag = corr[~np.eye(8, dtype=bool)]
        assert np.abs(off_diag).max() < 0.02

    def test_mean_weight_increasing_in_alpha(self):
        rng = np.random.default_rng(18)
        inst, bal = self.batches(rng, 30_000)
        means = []
        for alpha in (0.05, 0.1, 0.2, 0.3, 0.5):
            mixed = balanced_mixup_batch(inst, bal, alpha, np.random.default_rng(19))
            means.append(np.mean([m.lam for m in mixed]))
        assert all(a < b for a, b in zip(means, means[1:]))

    def test_matches_vectorized_mix_arrays(self):
        rng = np.random.default_rng(20)
        inst, bal = self.batches(rng, 64)
        mixed = balanced_mixup_batch(inst, bal, 0.2, np.random.default_rng(21))
        lam = np.array([m.lam for m in mixed])
        xf, yf = mix_arrays(
            np.stack([b.features for b in bal]), np.stack([b.one_hot for b in bal]),
            np.stack([i.features for i in inst]), np.stack([i.one_hot for i in inst]),
            lam,
        )
        got_x = np.stack([m.features for m in mixed])
        got_y = np.stack([m.soft_label for m in mixed])
        assert got_x == pytest.approx(xf, abs=1e-15)
        assert got_y == pytest.approx(yf, abs=1e-15)

    def test_length_mismatch_rejected(self):
        rng = np.random.default_rng(22)
        inst, bal = self.batches(rng, 4)
        with pytest.raises(ValueError, match="lengths"):
            balanced_mixup_batch(inst, bal[:3], 0.1, rng)


class TestTypes:
    def test_example_one_hot_invariant(self):
        with pytest.raises(ValueError):
            Example(features=np.array([1.0]), label=0, one_hot=np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            Example(features=np.array([1.0]), label=1, one_hot=np.array([1.0, 0.0]))

    def test_mixed_example_invariants(self):
        with pytest.raises(ValueError):
            MixedExample(features=np.array([1.0]), soft_label=np.array([0.6, 0.6]), lam=0.5)
        with pytest.raises(ValueError):
            MixedExample(features=np.array([1.0]), soft_label=np.array([0.5, 0.5]), lam=1.5)

    def test_mixup_config_validation(self):
        cfg = MixupConfig(alpha=0.2, mode="balanced")
        assert cfg.lambda_weights == "balanced"
        with pytest.raises(ValueError):
            MixupConfig(alpha=0.0, mode="balanced")
        with pytest.raises(ValueError):
            MixupConfig(alpha=0.1, mode="cutmix")
        with pytest.raises(ValueError):
            MixupConfig(alpha=0.1, mode="balanced", lambda_weights="both")
