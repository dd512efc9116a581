import math

import numpy as np
import pytest

from reldep.dataset import PreconditionError, Sample, align
from reldep.kernels import KernelConfig, KernelSpec
from reldep.reltest import (
    JointGaussianSummary,
    RotationMatrix,
    dependent_test,
    generalized_test,
    independent_test,
    joint_summary,
    normal_cdf,
    rotation_matrix,
)
from reldep.synthbench import SynthConfig, sample_synthetic

# Reference values computed once with a 50-digit Maclaurin series for erf
# (cross-checked against an independent arbitrary-precision implementation);
# truncated here to well beyond double precision.
NORMAL_CDF_TABLE = [
    (-3.0, 0.001349898031630094526652),
    (-1.0, 0.1586552539314570514148),
    (-0.5, 0.3085375387259868963623),
    (0.5, 0.6914624612740131036377),
    (1.0, 0.8413447460685429485852),
    (1.6448536269514722, 0.9499999999999999460658),
    (2.0, 0.9772498680518207927997),
    (2.5, 0.993790334674223864833),
    (5.0, 0.9999997133484281208061),
]


class TestNormalCdf:
    def test_zero_is_half(self):
        assert normal_cdf(0.0) == 0.5

    def test_frozen_reference_table(self):
        for x, expected in NORMAL_CDF_TABLE:
            assert normal_cdf(x) == pytest.approx(expected, abs=1e-13)

    def test_upper_quantile(self):
        assert normal_cdf(1.6448536269514722) == pytest.approx(0.95, abs=1e-7)

    def test_symmetry(self, rng):
        for x in rng.uniform(-6, 6, size=1000):
            assert abs(normal_cdf(-x) - (1.0 - normal_cdf(x))) < 1e-14

    def test_monotone(self, rng):
        xs = np.sort(rng.uniform(-8, 8, size=200))
        vals = [normal_cdf(float(x)) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestRotationMatrix:
    def test_aligned_vector_gives_identity(self):
        r = rotation_matrix([1.0, 0.0, 0.0])
        assert np.array_equal(r.q, np.eye(3))

    def test_two_dim_quarter_turn(self):
        r = rotation_matrix([1.0, -1.0])
        expected = (np.sqrt(2) / 2) * np.array([[1.0, -1.0], [1.0, 1.0]])
        assert np.allclose(r.q, expected, atol=1e-15)
        out = r.q @ np.array([1.0, -1.0])
        assert out[0] == pytest.approx(np.sqrt(2.0), rel=1e-15)
        assert abs(out[1]) < 1e-15

    def test_property_random_vectors(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 9))
            v = rng.standard_normal(n) * 10.0 ** float(rng.integers(-3, 4))
            r = rotation_matrix(v)
            norm = np.linalg.norm(v)
            out = r.q @ v
            assert np.abs(r.q.T @ r.q - np.eye(n)).max() < 1e-10
            assert out[0] == pytest.approx(norm, rel=1e-10)
            assert np.all(np.abs(out[1:]) < 1e-10 * norm)
            assert np.linalg.det(r.q) == pytest.approx(1.0, abs=1e-8)

    def test_leading_zeros(self):
        r = rotation_matrix([0.0, 0.0, 2.0])
        out = r.q @ np.array([0.0, 0.0, 2.0])
        assert out[0] == pytest.approx(2.0, rel=1e-15)
        assert np.all(np.abs(out[1:]) < 1e-14)

    def test_negative_leading_component(self):
        r = rotation_matrix([-3.0, 0.0])
        out = r.q @ np.array([-3.0, 0.0])
        assert out[0] == pytest.approx(3.0, rel=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            rotation_matrix([0.0, 0.0])

    def test_too_short_rejected(self):
        with pytest.raises(ValueError, match="length >= 2"):
            rotation_matrix([1.0])

    def test_validation_rejects_reflection(self):
        with pytest.raises(ValueError, match="reflection"):
            RotationMatrix(np.diag([1.0, -1.0]))


def synthetic_joint(m=120, gamma3=0.9, seed=5):
    return sample_synthetic(SynthConfig(m=m, gamma3=gamma3, seed=seed))


class TestDependentTest:
    def test_identical_targets_give_half(self):
        j0 = synthetic_joint()
        j = align(j0.x, j0.y, j0.y)
        res = dependent_test(j)
        assert res.statistic == 0.0
        assert res.p_value == 0.5
        assert not res.reject_null

    def test_swap_negates_statistic(self):
        j = synthetic_joint()
        swapped = align(j.x, j.z, j.y)
        a = dependent_test(j)
        b = dependent_test(swapped)
        assert b.statistic == -a.statistic
        assert a.p_value + b.p_value == pytest.approx(1.0, abs=1e-12)

    def test_result_invariants(self):
        res = dependent_test(synthetic_joint())
        assert 0.0 <= res.p_value <= 1.0
        assert res.std_dev >= 0.0
        assert res.reject_null == (res.p_value < res.alpha)
        assert res.method == "dependent"

    def test_small_m_warning(self):
        res = dependent_test(synthetic_joint(m=60))
        assert res.small_m_warning and res.warnings()
        res = dependent_test(synthetic_joint(m=150))
        assert not res.small_m_warning

    def test_alpha_validation(self):
        with pytest.raises(ValueError, match="alpha"):
            dependent_test(synthetic_joint(), alpha=1.5)

    def test_needs_z(self):
        j = synthetic_joint()
        with pytest.raises(PreconditionError, match="three variables"):
            dependent_test(align(j.x, j.y))

    def test_kernel_info_reports_bandwidths(self):
        res = dependent_test(synthetic_joint())
        assert set(res.kernel_info) == {"x", "y", "z"}
        assert res.kernel_info["x"]["family"] == "gaussian"
        assert res.kernel_info["x"]["bandwidth"] > 0

    def test_linear_kernel_config(self):
        cfg = KernelConfig(x=KernelSpec(family="linear"))
        res = dependent_test(synthetic_joint(), cfg)
        assert res.kernel_info["x"] == {"family": "linear", "bandwidth": None}


class TestIndependentTest:
    def test_small_sample_rejected(self, rng):
        j = align(
            Sample(rng.standard_normal((7, 2)), "x"),
            Sample(rng.standard_normal((7, 2)), "y"),
            Sample(rng.standard_normal((7, 2)), "z"),
        )
        with pytest.raises(PreconditionError, match="m >= 8"):
            independent_test(j)

    def test_runs_and_reports(self):
        res = independent_test(synthetic_joint(m=150))
        assert res.method == "independent"
        assert 0.0 <= res.p_value <= 1.0
        # the warning tracks the half-sample size, 75 here
        assert res.small_m_warning
        assert not independent_test(synthetic_joint(m=250)).small_m_warning

    def test_x_bandwidths_reported_per_half(self):
        res = independent_test(synthetic_joint(m=200))
        bw = res.kernel_info["x"]["bandwidth"]
        assert len(bw) == 2 and all(b > 0 for b in bw)

    def test_shuffle_seed_changes_split(self):
        j = synthetic_joint(m=200)
        a = independent_test(j)
        b = independent_test(j, shuffle_seed=3)
        assert a.statistic != b.statistic
        c = independent_test(j, shuffle_seed=3)
        assert b.statistic == c.statistic


class TestJointSummaryAndGeneralized:
    def test_reduction_matches_dependent(self):
        for seed in range(5):
            j = synthetic_joint(seed=seed)
            dep = dependent_test(j)
            summary = joint_summary(j, [(0, 1), (0, 2)])
            gen = generalized_test(summary, [1.0, -1.0])
            assert gen.p_value == pytest.approx(dep.p_value, abs=1e-12)
            assert gen.statistic == pytest.approx(dep.statistic, rel=1e-12)

    def test_scale_invariance(self):
        summary = joint_summary(synthetic_joint(), [(0, 1), (0, 2)])
        a = generalized_test(summary, [1.0, -1.0])
        b = generalized_test(summary, [17.5, -17.5])
        assert a.p_value == pytest.approx(b.p_value, abs=1e-12)

    def test_three_statistic_weights(self):
        j = synthetic_joint()
        summary = joint_summary(j, [(0, 1), (0, 2), (1, 2)])
        res = generalized_test(summary, [1.0, 1.0, -2.0])
        assert 0.0 <= res.p_value <= 1.0
        assert res.method == "generalized"

    def test_duplicated_pair_perfectly_correlated(self):
        j = synthetic_joint()
        summary = joint_summary(j, [(0, 1), (0, 1)])
        cov = summary.covariance
        assert cov[0, 0] == cov[1, 1]
        assert cov[0, 1] == pytest.approx(cov[0, 0], rel=1e-12)
        assert np.linalg.eigvalsh(cov)[0] >= -1e-18

    def test_matches_pairwise_covariance_summary(self):
        from reldep.hsic import covariance_summary
        from reldep.reltest import dependent_statistics

        j = synthetic_joint()
        st = dependent_statistics(j)
        summary = joint_summary(j, [(0, 1), (0, 2)])
        assert summary.means[0] == pytest.approx(st.e_xy.value, rel=1e-14)
        assert summary.means[1] == pytest.approx(st.e_xz.value, rel=1e-14)
        assert summary.covariance[0, 0] == pytest.approx(st.cov.var_xy, rel=1e-14)
        assert summary.covariance[0, 1] == pytest.approx(st.cov.cov_xyxz, rel=1e-14)

    def test_constant_target_zero_row(self):
        j = synthetic_joint()
        const = Sample(np.ones((j.m, 2)), "const")
        specs = [KernelSpec(), KernelSpec(), KernelSpec(family="linear")]
        summary = joint_summary(
            [j.x, j.y, const], [(0, 1), (0, 2)], specs
        )
        assert abs(summary.means[1]) < 1e-12
        assert abs(summary.covariance[0, 1]) < 1e-12
        assert summary.covariance[1, 1] <= 1e-12  # floored variance only

    def test_misaligned_samples(self, rng):
        a = Sample(rng.standard_normal((10, 2)), "a")
        b = Sample(rng.standard_normal((11, 2)), "b")
        with pytest.raises(PreconditionError, match="differ"):
            joint_summary([a, b], [(0, 1), (1, 0)])

    def test_weight_length_mismatch(self):
        summary = joint_summary(synthetic_joint(), [(0, 1), (0, 2)])
        with pytest.raises(ValueError, match="does not match"):
            generalized_test(summary, [1.0, -1.0, 0.0])

    def test_zero_weights_rejected(self):
        summary = joint_summary(synthetic_joint(), [(0, 1), (0, 2)])
        with pytest.raises(ValueError, match="nonzero"):
            generalized_test(summary, [0.0, 0.0])

    def test_summary_validation(self):
        with pytest.raises(ValueError, match="symmetric"):
            JointGaussianSummary(
                np.zeros(2), np.array([[1.0, 0.5], [0.2, 1.0]]), m=10
            )
        with pytest.raises(ValueError, match="positive semidefinite"):
            JointGaussianSummary(
                np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]), m=10
            )
        with pytest.raises(ValueError, match="at least two"):
            JointGaussianSummary(np.zeros(1), np.eye(1), m=10)


class TestPValueMonotonicity:
    def test_p_decreases_in_statistic(self):
        from reldep.reltest import _upper_p

        stats = np.linspace(-3, 8, 40)
        ps = [_upper_p(s) for s in stats]
        assert all(b < a for a, b in zip(ps, ps[1:]))
