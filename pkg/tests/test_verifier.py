import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dostbc import construct
from dostbc.codes import DistributedCode
from dostbc.verifier import (assemble_code_matrix, check_channel_free_orthogonality,
                             check_diagonal_R, check_structural,
                             check_weighted_orthogonality, classify_columns,
                             noise_covariance, verify)


def code_from(a, b):
    return DistributedCode.from_arrays(np.asarray(a, complex), np.asarray(b, complex))


def weighted_trap():
    """Not row-monomial; passes the channel-free identities but not the weighted ones."""
    a = [[[0, 0, 0]], [[0, -1, 1j]]]
    b = [[[1, 1, 1j]], [[0, 0, 0]]]
    return code_from(a, b)


# -- structure ----------------------------------------------------------------------

def test_structural_passes_on_construction():
    rep = check_structural(construct(4, 4))
    assert rep.passed and not rep.violations


def test_shared_a_column_breaks_column_disjointness():
    a = np.zeros((2, 2, 2), complex)
    a[0, 0, 0] = a[1, 1, 0] = 1
    rep = check_structural(code_from(a, np.zeros_like(a)))
    assert not rep.column_disjoint_across_relays
    assert rep.alphabet and rep.row_monomial


def test_overlapping_a_and_b_breaks_disjoint_support():
    code = construct(2, 2).replace_entry(0, "b", 0, 0, 1j)
    assert not check_structural(code).disjoint_support


def test_alphabet_violation():
    code = construct(2, 2).replace_entry(0, "a", 0, 0, 2)
    rep = check_structural(code)
    assert not rep.alphabet
    assert verify(code).verdict == "not_dostbc"


# -- code matrix and covariance -----------------------------------------------------

def test_assemble_small_code():
    s = np.array([0.3 + 0.1j, -0.7 + 0.2j])
    x = assemble_code_matrix(construct(2, 2), np.ones(2), s)
    expect = [[s[0], -s[1]], [s[1].conjugate(), s[0].conjugate()]]
    assert np.allclose(x, expect)


def test_assemble_zero_symbols():
    x = assemble_code_matrix(construct(5, 5), np.arange(1, 6), np.zeros(5))
    assert not x.any()


def test_relay_encoding_matches_definition():
    rng = np.random.default_rng(3)
    code = construct(5, 4)
    h = rng.normal(size=4) + 1j * rng.normal(size=4)
    s = rng.normal(size=5) + 1j * rng.normal(size=5)
    x = assemble_code_matrix(code, h, s)
    for k, pair in enumerate(code.relays):
        assert np.allclose(x[k], h[k] * s @ pair.a + np.conj(h[k] * s) @ pair.b)


def test_covariance_zero_gains():
    assert np.allclose(noise_covariance(construct(4, 4), np.zeros(4), 0.7), np.eye(8))


def test_covariance_structure_x44():
    f = np.array([0.3 + 0.4j, 1.1, -0.2j, 0.9 - 0.1j])
    rho = 0.8
    r = noise_covariance(construct(4, 4), f, rho)
    w2 = np.abs(rho * f) ** 2
    assert r[0, 0] == pytest.approx(1 + w2[0] + w2[1])
    assert r[5, 5] == pytest.approx(1 + w2[2] + w2[3])
    assert np.allclose(r - np.diag(np.diag(r)), 0)


def test_covariance_non_row_monomial_is_not_diagonal():
    a = np.zeros((1, 1, 2), complex)
    a[0, 0] = [1, 1]
    r = noise_covariance(code_from(a, np.zeros_like(a)), [0.5], 1.0)
    assert abs(r[0, 1]) > 0


def test_covariance_rejects_bad_input():
    with pytest.raises(ValueError):
        noise_covariance(construct(2, 2), [1.0], 1.0)
    with pytest.raises(ValueError):
        noise_covariance(construct(2, 2), [1.0, 1.0], 0.0)


# -- channel-free ----------------------------------------------------------------------

def test_channel_free_x55_row_counts():
    code = construct(5, 5)
    res = check_channel_free_orthogonality(code)
    assert res.passed
    assert set(np.unique(res.E)) <= {1, 2}
    counts = (np.abs(code.a_stack) ** 2 + np.abs(code.b_stack) ** 2).sum(axis=2)
    assert np.array_equal(res.E, counts)


def test_sign_flip_breaks_cross_condition():
    code = construct(2, 2).replace_entry(0, "a", 0, 0, -1)
    res = check_channel_free_orthogonality(code)
    assert not res.orthogonal
    assert any("A0" in f and "B1" in f for f in res.failures)


def test_empty_row_is_not_positive():
    a = construct(2, 2).a_stack.copy()
    b = construct(2, 2).b_stack.copy()
    a[:, 1] = 0
    b[:, 1] = 0
    res = check_channel_free_orthogonality(code_from(a, b))
    assert not res.positive and not res.passed


# -- weighted ----------------------------------------------------------------------------

def test_weighted_passes_on_construction():
    res = check_weighted_orthogonality(construct(4, 4), draws=8, tol=1e-9)
    assert res.passed
    assert res.D.shape == (8, 4, 4)
    assert (np.abs(res.D) > 1e-9).all()


def test_weighted_equals_channel_free_when_r_is_identity():
    # f -> 0 makes R = I; rho scales f, so a tiny rho approximates it
    for code in (construct(3, 3), construct(2, 2).replace_entry(0, "a", 0, 0, -1)):
        a = check_weighted_orthogonality(code, draws=2, rho=1e-12).passed
        assert a == check_channel_free_orthogonality(code).passed


def test_weighted_trap():
    code = weighted_trap()
    assert check_channel_free_orthogonality(code).passed
    assert not check_structural(code).row_monomial
    assert not check_weighted_orthogonality(code).passed
    assert verify(code).verdict == "not_dostbc"


def test_weighted_is_seed_deterministic():
    a = check_weighted_orthogonality(construct(3, 4), seed=5)
    b = check_weighted_orthogonality(construct(3, 4), seed=5)
    assert np.array_equal(a.D, b.D)


def test_non_row_monomial_dostbc_gets_plain_verdict():
    # relay 0 repeats s_1 in two slots, relay 1 sends it conjugated in the
    # orthogonal pattern; R is block diagonal but not diagonal
    a = np.zeros((2, 1, 2), complex)
    b = np.zeros_like(a)
    a[0, 0] = [1, 1]
    b[1, 0] = [1, -1]
    rep = verify(code_from(a, b))
    assert rep.verdict == "dostbc"
    assert not rep.algebraic["diagonal_R"]


# -- diagonal R ----------------------------------------------------------------------------

@pytest.mark.parametrize("nk", [(2, 2), (4, 5), (5, 5), (3, 4)])
def test_diagonal_r_on_constructions(nk):
    res = check_diagonal_R(construct(*nk))
    assert res.passed and res.row_monomial and res.consistent


def test_diagonal_r_detects_repeated_row():
    a = np.zeros((2, 2, 4), complex)
    b = np.zeros_like(a)
    a[0, 0, 0] = a[0, 0, 1] = 1
    b[1, 1, 2] = 1
    res = check_diagonal_R(code_from(a, b))
    assert not res.passed and not res.row_monomial and res.consistent


@st.composite
def column_monomial_codes(draw):
    k = draw(st.integers(1, 3))
    n = draw(st.integers(1, 3))
    t = draw(st.integers(2, 5))
    a = np.zeros((k, n, t), complex)
    b = np.zeros_like(a)
    units = [1, -1, 1j, -1j]
    for kk in range(k):
        for tt in range(t):
            choice = draw(st.integers(0, 2 * n))     # 0: empty column
            if choice:
                m = a if choice <= n else b
                m[kk, (choice - 1) % n, tt] = draw(st.sampled_from(units))
    return code_from(a, b)


@settings(max_examples=80, deadline=None)
@given(column_monomial_codes())
def test_diagonal_r_iff_row_monomial(code):
    res = check_diagonal_R(code, draws=3)
    assert res.passed == check_structural(code).row_monomial
    assert res.consistent


# -- classification and report -----------------------------------------------------------

def test_classify_x44():
    cc = classify_columns(construct(4, 4))
    assert (cc.type_ii, cc.type_i, cc.invalid) == (8, 0, 0)
    assert cc.parity_ok


def test_classify_x45():
    cc = classify_columns(construct(4, 5))
    assert (cc.type_ii, cc.type_i) == (8, 4)


def test_classify_same_relay_twice_is_invalid():
    a = np.zeros((1, 2, 1), complex)
    b = np.zeros_like(a)
    a[0, 0, 0] = 1
    b[0, 1, 0] = 1
    assert classify_columns(code_from(a, b)).tags == ["invalid"]


def test_report_serialises():
    rep = verify(construct(3, 3))
    d = rep.to_dict()
    assert d["verdict"] == "row_monomial_dostbc"
    assert set(d["structural"]) == {"alphabet", "disjoint_support", "column_monomial",
                                    "row_monomial", "column_disjoint_across_relays"}
    assert set(d["algebraic"]) == {"channel_free_orthogonality", "positive_E",
                                   "weighted_orthogonality", "diagonal_R"}
    assert "verdict: row_monomial_dostbc" in rep.to_text()
    assert rep.to_json().startswith("{")


def test_verify_never_mutates():
    code = construct(4, 4)
    before = code.fingerprint()
    verify(code)
    assert code.fingerprint() == before
