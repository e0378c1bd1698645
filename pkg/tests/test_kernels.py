import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dostbc import kernels
from dostbc.search import column_types

BACKENDS = kernels.available_backends()
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="extension not built")


def _problem(seed, f, n, t, m, integer=False):
    rng = np.random.default_rng(seed)
    if integer:
        draw = lambda *s: rng.integers(-2, 3, s) + 1j * rng.integers(-2, 3, s)
        pts = np.array([1, -1, 1j, -1j, 1 + 1j, 0][:m], complex)
    else:
        draw = lambda *s: rng.normal(size=s) + 1j * rng.normal(size=s)
        pts = draw(m)
    return draw(f, t), draw(f, n, t), draw(f, n, t), pts


def test_backend_selection():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@needs_cython
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6), st.integers(1, 4),
       st.integers(1, 6), st.integers(1, 6), st.booleans())
def test_single_symbol_backends_agree(seed, f, n, t, m, integer):
    args = _problem(seed, f, n, t, m, integer)
    ia, ma = BACKENDS["python"].single_symbol_argmin(*args)
    ib, mb = BACKENDS["cython"].single_symbol_argmin(*args)
    assert np.allclose(ma, mb)
    assert np.array_equal(ia, ib)


@needs_cython
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5), st.integers(1, 3),
       st.integers(1, 5), st.integers(1, 5), st.booleans())
def test_joint_backends_agree(seed, f, n, t, m, integer):
    args = _problem(seed, f, n, t, m, integer)
    assert np.array_equal(BACKENDS["python"].joint_argmin(*args),
                          BACKENDS["cython"].joint_argmin(*args))


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_ties_go_to_smallest_index(name):
    be = BACKENDS[name]
    pts = np.array([1, -1, 1, -1], complex)              # duplicated points
    y = np.zeros((1, 2), complex)
    u = np.ones((1, 1, 2), complex)
    v = np.zeros((1, 1, 2), complex)
    assert be.single_symbol_argmin(y, u, v, pts)[0][0, 0] == 0
    assert be.joint_argmin(y, u, v, pts)[0, 0] == 0
    u2 = np.ones((1, 2, 2), complex)
    assert be.joint_argmin(y, u2, np.zeros_like(u2), pts)[0].tolist() == [0, 1]


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_joint_matches_single_when_decoupled(name):
    # u_n on disjoint slots decouples the joint metric
    be = BACKENDS[name]
    rng = np.random.default_rng(0)
    u = np.zeros((20, 3, 3), complex)
    for n in range(3):
        u[:, n, n] = rng.normal(size=20) + 1j
    y = rng.normal(size=(20, 3)) + 1j * rng.normal(size=(20, 3))
    pts = np.exp(2j * np.pi * np.arange(8) / 8)
    v = np.zeros_like(u)
    assert np.array_equal(be.joint_argmin(y, u, v, pts),
                          be.single_symbol_argmin(y, u, v, pts)[0])


@needs_cython
@pytest.mark.parametrize("n, k, t", [(1, 1, 1), (1, 2, 1), (1, 2, 2), (2, 2, 2),
                                     (2, 2, 1), (3, 2, 3), (2, 3, 3), (3, 2, 4),
                                     (2, 4, 4), (2, 4, 3)])
def test_search_backends_agree(n, k, t):
    types = column_types(n, k)
    a = BACKENDS["python"].search_dfs(types, k, n, t)
    b = BACKENDS["cython"].search_dfs(types, k, n, t)
    assert (a[0] is None) == (b[0] is None)
    if a[0] is not None:
        assert list(a[0]) == list(b[0])
    assert a[1] == b[1]


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_search_node_limit(name):
    types = column_types(3, 3)
    chosen, nodes = BACKENDS[name].search_dfs(types, 3, 3, 4, node_limit=10)
    assert chosen is None and nodes < 0
