import numpy as np
import pytest

from soslab.sdp import SdpProblem


def make_planted_sdp(rng, blocks, m, nfree=0):
    """Random SDP with a known strictly complementary optimal pair.

    X* and S* share an eigenbasis with complementary supports, y* is
    arbitrary, and the data are completed so that (X*, y*, S*) is optimal
    with objective value b . y*.
    """
    a_blocks = []
    xs, ss = [], []
    for k in blocks:
        a = rng.standard_normal((m, k, k))
        a = 0.5 * (a + a.transpose(0, 2, 1))
        a_blocks.append(a)
        q, _ = np.linalg.qr(rng.standard_normal((k, k)))
        rank_x = int(rng.integers(1, k + 1))
        dx = np.zeros(k)
        dx[:rank_x] = rng.uniform(0.5, 2.0, rank_x)
        ds = np.zeros(k)
        ds[rank_x:] = rng.uniform(0.5, 2.0, k - rank_x)
        xs.append(q @ np.diag(dx) @ q.T)
        ss.append(q @ np.diag(ds) @ q.T)
    ystar = rng.standard_normal(m)
    b = np.zeros(m)
    for a, x in zip(a_blocks, xs):
        b += np.einsum("jab,ab->j", a, x)
    free_cons = None
    free_obj = None
    if nfree:
        free_cons = rng.standard_normal((m, nfree))
        ustar = rng.standard_normal(nfree)
        b = b + free_cons @ ustar
        free_obj = free_cons.T @ ystar
    c_blocks = [
        np.einsum("j,jab->ab", ystar, a) - s for a, s in zip(a_blocks, ss)
    ]
    problem = SdpProblem(
        blocks=list(blocks),
        c_blocks=c_blocks,
        a_blocks=a_blocks,
        b=b,
        free_cons=free_cons,
        free_obj=free_obj,
    )
    return problem, float(b @ ystar)


@pytest.fixture
def planted_sdp():
    return make_planted_sdp
