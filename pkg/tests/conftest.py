import numpy as np
import pytest

from reldep.dataset import Sample
from reldep.kernels import Bandwidth, gram_gaussian, zero_diagonal


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_zero_diag_pair(rng, m, d=3, bw=(1.3, 0.8)):
    """Seeded pair of zero-diagonal Gaussian Gram matrices."""
    x = Sample(rng.standard_normal((m, d)), "x")
    y = Sample(rng.standard_normal((m, d)), "y")
    kt = zero_diagonal(gram_gaussian(x, Bandwidth(bw[0])))
    lt = zero_diagonal(gram_gaussian(y, Bandwidth(bw[1])))
    return kt, lt


def constant_offdiag_gram(m, c=0.4):
    """Zero-diagonal Gram with every off-diagonal entry equal to c."""
    values = np.full((m, m), c)
    np.fill_diagonal(values, 0.0)
    from reldep.kernels import GramMatrix

    return GramMatrix(values=values, zero_diagonal=True, family="linear", bandwidth=None)
