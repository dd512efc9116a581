"""Unbiased HSIC estimation, h-vectors, variances and cross-covariances.

All estimators work on zero-diagonal Gram matrices.  The unbiased value is

    (Tr(KL) + (1'K1)(1'L1)/((m-1)(m-2)) - 2 (1'KL1)/(m-2)) / (m (m-3)),

which equals the average over all ordered 4-tuples of distinct indices of
the order-4 symmetrized kernel

    h(i,j,q,r) = (1/24) * sum over the 24 orderings (s,t,u,v)
                 of k_st (l_st + l_uv - 2 l_su).

The per-observation aggregates of h drive the variance machinery:
``h_vector`` computes, in O(m^2), a vector whose entry i is exactly
``H_SUM_RATIO`` times the sum of h(i,j,q,r) over all ordered 3-tuples
(j,q,r) of distinct indices avoiding i.  ``hsic_bruteforce`` and
``h_vector_bruteforce`` enumerate the tuples directly and exist purely to
cross-check the fast path; they share no code with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from math import copysign, sqrt

import numpy as np

from reldep import _backend
from reldep.dataset import PreconditionError
from reldep.kernels import GramMatrix

__all__ = [
    "H_SUM_RATIO",
    "VARIANCE_FLOOR",
    "HsicEstimate",
    "CovarianceSummary",
    "hsic_unbiased",
    "hsic_estimate",
    "h_vector",
    "hsic_bruteforce",
    "h_vector_bruteforce",
    "variance_hsic",
    "cross_covariance",
    "covariance_summary",
]

# Ratio between the fused O(m^2) h-vector and the raw per-index sums of the
# order-4 kernel over ordered 3-tuples.  Established once against
# h_vector_bruteforce at m in {8, 10, 12} (tests/test_hsic.py keeps the
# regression check); it is constant in m.
H_SUM_RATIO = 2.0

# Variance estimates are unbiased and can dip below zero at small m; they
# are floored here so downstream standard deviations stay well defined.
VARIANCE_FLOOR = 1e-12

UNSCALED = "unscaled_statistic"


@dataclass(frozen=True)
class HsicEstimate:
    """Unbiased HSIC value plus the per-observation aggregate vector."""

    value: float
    h_vector: np.ndarray
    m: int
    pair_label: str = ""

    def __post_init__(self):
        h = np.ascontiguousarray(self.h_vector, dtype=np.float64)
        h.setflags(write=False)
        object.__setattr__(self, "h_vector", h)
        if h.shape != (self.m,):
            raise ValueError("h_vector length must equal the sample size")


@dataclass(frozen=True)
class CovarianceSummary:
    """Variances and cross-covariance of two HSIC statistics on shared data.

    Values describe the unscaled statistics (they already carry the 1/m
    decay).  The cross term is clamped so the implied 2x2 matrix is
    positive semidefinite.
    """

    var_xy: float
    var_xz: float
    cov_xyxz: float
    scale_note: str = UNSCALED

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.var_xy, self.cov_xyxz], [self.cov_xyxz, self.var_xz]]
        )


def _falling3(n: int) -> float:
    """n (n-1) (n-2): the number of ordered 3-tuples from n items."""
    return float(n * (n - 1) * (n - 2))


def _check_pair(kt: GramMatrix, lt: GramMatrix) -> int:
    for g in (kt, lt):
        if not g.zero_diagonal:
            raise ValueError("estimator requires zero-diagonal Gram matrices")
    if kt.m != lt.m:
        raise ValueError(f"Gram sizes differ: {kt.m} vs {lt.m}")
    if kt.m < 4:
        raise PreconditionError(f"unbiased HSIC needs m >= 4, got {kt.m}")
    return kt.m


def _value_from_rows(m, kl_row, k_row, l_row):
    trace_kl = float(kl_row.sum())
    sum_k = float(k_row.sum())
    sum_l = float(l_row.sum())
    row_dot = float(k_row @ l_row)
    value = (
        trace_kl
        + sum_k * sum_l / ((m - 1.0) * (m - 2.0))
        - 2.0 * row_dot / (m - 2.0)
    ) / (m * (m - 3.0))
    return value, trace_kl, sum_k, sum_l, row_dot


def hsic_unbiased(kt: GramMatrix, lt: GramMatrix) -> float:
    """Unbiased HSIC estimate from two zero-diagonal Gram matrices.

    Unbiasedness means the value can be negative even though the population
    quantity is nonnegative.
    """
    m = _check_pair(kt, lt)
    kl_row, k_row, l_row = _backend.hsic_reductions(kt.values, lt.values)
    return _value_from_rows(m, kl_row, k_row, l_row)[0]


def hsic_estimate(kt: GramMatrix, lt: GramMatrix, pair_label: str = "") -> HsicEstimate:
    """Unbiased HSIC value together with its h-vector, in one O(m^2) pass."""
    m = _check_pair(kt, lt)
    kl_row, k_row, l_row, k_lrow, l_krow = _backend.hsic_h_reductions(
        kt.values, lt.values
    )
    value, trace_kl, sum_k, sum_l, row_dot = _value_from_rows(m, kl_row, k_row, l_row)
    h = (
        (m - 2.0) ** 2 * kl_row
        - m * k_row * l_row
        + (m - 2.0) * (trace_kl - k_lrow - l_krow)
        + sum_l * k_row
        + sum_k * l_row
        - row_dot
    )
    return HsicEstimate(value=value, h_vector=h, m=m, pair_label=pair_label)


def h_vector(kt: GramMatrix, lt: GramMatrix) -> np.ndarray:
    """Per-observation aggregate vector of the order-4 kernel.

    Entry i equals ``H_SUM_RATIO`` times the sum of h(i,j,q,r) over all
    ordered 3-tuples (j,q,r) of distinct indices avoiding i, computed in
    O(m^2) instead of O(m^4).
    """
    return hsic_estimate(kt, lt).h_vector


# ---------------------------------------------------------------------------
# Brute-force oracles.  Plain-Python tuple enumeration, deliberately
# independent of the backend reductions above.
# ---------------------------------------------------------------------------

_ORDERINGS = list(permutations(range(4)))


def _kernel_h(k: np.ndarray, l: np.ndarray, quad) -> float:
    """Symmetrized order-4 kernel over one set of four distinct indices."""
    total = 0.0
    for p in _ORDERINGS:
        s, t, u, v = quad[p[0]], quad[p[1]], quad[p[2]], quad[p[3]]
        total += k[s, t] * (l[s, t] + l[u, v] - 2.0 * l[s, u])
    return total / 24.0


def hsic_bruteforce(kt: GramMatrix, lt: GramMatrix) -> float:
    """Unbiased HSIC by direct enumeration of index 4-tuples.

    h is invariant under reordering its four indices (it is the symmetrized
    kernel), so averaging over the m-choose-4 subsets equals averaging over
    all ordered 4-tuples.  Guarded to m <= 40; cost grows as m^4.
    """
    m = _check_pair(kt, lt)
    if m > 40:
        raise PreconditionError(f"brute force limited to m <= 40, got {m}")
    k, l = kt.values, lt.values
    total = 0.0
    count = 0
    for quad in combinations(range(m), 4):
        total += _kernel_h(k, l, quad)
        count += 1
    return total / count


def h_vector_bruteforce(kt: GramMatrix, lt: GramMatrix) -> np.ndarray:
    """Raw per-index sums of h over ordered 3-tuples avoiding each index.

    Entry i sums h(i,j,q,r) over all ordered triples of distinct indices
    drawn from the other m-1 observations; by the reordering invariance of
    h each unordered triple contributes six times.  Guarded to m <= 30.
    """
    m = _check_pair(kt, lt)
    if m > 30:
        raise PreconditionError(f"brute force limited to m <= 30, got {m}")
    k, l = kt.values, lt.values
    out = np.zeros(m)
    for i in range(m):
        others = [j for j in range(m) if j != i]
        acc = 0.0
        for trip in combinations(others, 3):
            acc += _kernel_h(k, l, (i,) + trip)
        out[i] = 6.0 * acc
    return out


# ---------------------------------------------------------------------------
# Variance machinery.
# ---------------------------------------------------------------------------


def _r_statistic(h_a: np.ndarray, h_b: np.ndarray, m: int) -> float:
    """Mean over i of the normalized per-index sums' product.

    h_a and h_b are fused-formula vectors (H_SUM_RATIO times the raw sums),
    hence the extra 1/H_SUM_RATIO^2.
    """
    f = _falling3(m - 1)
    return float(h_a @ h_b) / (H_SUM_RATIO**2 * m * f * f)


def variance_hsic(e: HsicEstimate) -> float:
    """Variance estimate of the unscaled HSIC statistic, floored at epsilon.

    Computed as (16/m) (R - value^2) with R the mean squared normalized
    per-observation aggregate.  The floor keeps downstream standard
    deviations positive when the unbiased estimate dips below zero.
    """
    r = _r_statistic(e.h_vector, e.h_vector, e.m)
    return max((16.0 / e.m) * (r - e.value**2), VARIANCE_FLOOR)


def cross_covariance(e_xy: HsicEstimate, e_xz: HsicEstimate) -> float:
    """Covariance estimate between two HSIC statistics sharing their source.

    Both estimates must come from the same sample rows with a shared source
    Gram matrix; that cannot be verified here and is the caller's contract.
    """
    if e_xy.m != e_xz.m:
        raise ValueError(f"sample sizes differ: {e_xy.m} vs {e_xz.m}")
    r = _r_statistic(e_xy.h_vector, e_xz.h_vector, e_xy.m)
    return (16.0 / e_xy.m) * (r - e_xy.value * e_xz.value)


def covariance_summary(e_xy: HsicEstimate, e_xz: HsicEstimate) -> CovarianceSummary:
    """Clamped 2x2 covariance summary of two correlated HSIC statistics.

    The cross term is shrunk to sqrt(var_xy var_xz) when the raw estimate
    exceeds it, which makes the matrix positive semidefinite by
    construction.
    """
    var_xy = variance_hsic(e_xy)
    var_xz = variance_hsic(e_xz)
    cov = cross_covariance(e_xy, e_xz)
    bound = sqrt(var_xy * var_xz)
    if abs(cov) > bound:
        cov = copysign(bound, cov)
    return CovarianceSummary(var_xy=var_xy, var_xz=var_xz, cov_xyxz=cov)
