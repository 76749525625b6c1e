import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhm import core, cyclic, ktheory
from qhm.core import MatrixElement, build_frame, one, random_element, star
from qhm.cyclic import (
    NotAProjectorError,
    NotAUnitaryError,
    WedgeWord,
    check_cyclicity,
    check_wedge_condition,
    hochschild_b,
    pair_chain,
    pair_even,
    pair_odd,
    standard_cocycles,
)
from qhm.heisenberg import derive

TWO_PI_I = 2j * np.pi


@pytest.fixture(scope="module")
def cocycles(params):
    return standard_cocycles(params.c)


@pytest.fixture(scope="module")
def cycles(params):
    return cyclic.build_dual_cycles(params)


def tuples(params, arity, count, base=0):
    return [[random_element(params, base + 97 * k + j, 2, max_degree=1) for j in range(arity)]
            for k in range(count)]


def test_standard_family(cocycles):
    assert set(cocycles) == {"tau", "phi_1", "phi_2", "phi_3", "phi_13", "phi_23", "phi_123", "phi_12"}
    assert [cocycles[k].arity for k in ("phi_1", "phi_13", "phi_123")] == [1, 2, 3]
    assert cocycles["phi_13"].parity == "even" and cocycles["phi_123"].parity == "odd"
    assert not cocycles["phi_12"].cyclic
    assert all(cocycles[k].cyclic for k in cocycles if k != "phi_12")


@pytest.mark.parametrize("word,expected", [((1,), True), ((1, 3), True), ((2, 3), True),
                                           ((1, 2, 3), True), ((1, 2), False)])
def test_wedge_condition(word, expected):
    assert check_wedge_condition(WedgeWord(word), c=2) is expected


def test_wedge_bracket_term_for_12():
    assert cyclic.wedge_bracket_term(WedgeWord((1, 2)), 2) == {(3,): pytest.approx(2.0)}


def test_trace_cochain_is_closed(params, cocycles):
    b = hochschild_b(cocycles["tau"])
    for a0, a1 in tuples(params, 2, 3):
        assert abs(b(a0, a1)) < params.tol_num


@pytest.mark.parametrize("name", ["phi_1", "phi_2", "phi_3", "phi_13", "phi_23", "phi_123", "phi_12"])
def test_cocycle_is_hochschild_closed(params, cocycles, name):
    phi = cocycles[name]
    b = hochschild_b(phi)
    for t in tuples(params, phi.arity + 2, 3, base=5):
        assert abs(b(*t)) < params.tol_num


@pytest.mark.parametrize("name", ["phi_1", "phi_2", "phi_3", "phi_13", "phi_23", "phi_123"])
def test_cocycle_is_cyclic(params, cocycles, name):
    phi = cocycles[name]
    assert check_cyclicity(phi, tuples(params, phi.arity + 1, 3, base=11)) < params.tol_num


def test_phi12_unit_identity_and_noncyclicity(params, cocycles):
    x1, _ = build_frame(params)
    pairs = [tuple(t) for t in tuples(params, 2, 3, base=17)] + [(star(x1), x1)]
    for a, b in pairs:
        assert abs(cocycles["phi_12"](one(params), a, b) - params.c * cocycles["phi_3"](a, b)) < params.tol_num
    witness = (one(params), star(x1), x1)
    assert abs(cocycles["phi_3"](*witness[1:])) > 1.0
    assert cyclic.cyclic_permutation_residual(cocycles["phi_12"], witness) > 1.0


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 1000), st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_cocycles_are_multilinear(params, cocycles, seed, lam):
    a, b, c = (random_element(params, seed + j, 2, max_degree=1) for j in range(3))
    phi = cocycles["phi_13"]
    lhs = phi(a, lam * b + c, b)
    rhs = lam * phi(a, b, b) + phi(a, c, b)
    assert abs(lhs - rhs) < params.tol_num * (1 + abs(lam))


def test_odd_normalization():
    assert cyclic.odd_normalization(1) == pytest.approx(1 / (cmath.sqrt(2j) * math.sqrt(math.pi)))
    assert cyclic.odd_normalization(3) == pytest.approx(1 / (8 * cmath.sqrt(2j) * math.gamma(2.5)))


def test_torus_pairing_analytic(params, cocycles):
    """<U1, phi_1> = N_1 tau(U1* d1 U1) with d1 U1 = -2 pi i U1."""
    expected = cyclic.odd_normalization(1) * (-TWO_PI_I)
    assert pair_odd(core.U1(params), cocycles["phi_1"]) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(-cmath.sqrt(TWO_PI_I))


def test_cup_product_two_expansions_agree(params, cocycles, units):
    """(phi_12 # tr)(P+, P+, P+): entrywise expansion against full matrix products."""
    P = units.P_plus
    entrywise = cyclic.cup_tr(cocycles["phi_12"])(P, P, P)

    def dm(i, M):
        return M.map(lambda F: derive(i, F))

    def tr(M):
        return sum(core.trace(M[k, k], refine=2) for k in range(M.size))

    dense = tr(P @ dm(1, P) @ dm(2, P)) - tr(P @ dm(2, P) @ dm(1, P))
    assert abs(entrywise - dense) < params.tol_num


def test_even_pairing_rejects_non_projector(params, cocycles):
    two = MatrixElement.scalar(params, [[2.0]])
    with pytest.raises(NotAProjectorError):
        pair_even(two, cocycles["tau"])
    with pytest.raises(ValueError):
        pair_even(one(params), cocycles["phi_1"])


def test_odd_pairing_rejects_non_unitary(params, cocycles):
    with pytest.raises(NotAUnitaryError):
        pair_odd(core.scale(2.0, one(params)), cocycles["phi_1"])
    with pytest.raises(ValueError):
        pair_odd(core.U1(params), cocycles["phi_13"])


def test_odd_pairing_gauge_invariance(params, cocycles, units):
    th = 0.7
    V = MatrixElement.scalar(params, [[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    conj = V @ units.U3 @ V.star()
    for name in ("phi_1", "phi_2", "phi_3"):
        a = pair_odd(units.U3, cocycles[name])
        b = pair_odd(conj, cocycles[name])
        assert abs(a - b) < params.tol_num


@pytest.mark.parametrize("name", ["c_1", "c_2", "c_3", "c_13", "c_23", "c_12", "c_123"])
def test_dual_cycles_closed(params, cycles, name):
    assert cyclic.check_chain_closed(cycles[name]) < params.tol_num


def test_chain_boundary_is_not_trivially_zero(params):
    x1, _ = build_frame(params)
    chain = cyclic.ChainTensor(((1.0, (x1, star(x1))),))
    assert cyclic.check_chain_closed(chain) > 1e-3


def test_dual_pairings_degree_one(params, cycles, cocycles):
    lam = ktheory.d3_eigenvalue(params)
    assert lam == pytest.approx(-TWO_PI_I)
    assert pair_chain(cycles["c_1"], cocycles["phi_1"]) == pytest.approx(-TWO_PI_I, abs=1e-4)
    assert pair_chain(cycles["c_2"], cocycles["phi_2"]) == pytest.approx(-TWO_PI_I, abs=1e-4)
    assert pair_chain(cycles["c_3"], cocycles["phi_3"]) == pytest.approx(lam, abs=1e-4)
    for c, p in itertools.product(("c_1", "c_2"), ("phi_1", "phi_2", "phi_3")):
        if c[2:] != p[4:]:
            assert abs(pair_chain(cycles[c], cocycles[p])) < 1e-4
    assert abs(pair_chain(cycles["c_3"], cocycles["phi_1"])) < 1e-4


def test_c3_phi2_closed_form(params, cycles, cocycles):
    """The frame strips are centred at 0 and 1/2, which leaves i 2 pi c (mu - 1/4)."""
    val = pair_chain(cycles["c_3"], cocycles["phi_2"])
    assert val == pytest.approx(TWO_PI_I * params.c * (params.mu - 0.25), abs=1e-4)


def test_dual_pairings_degree_two_and_three(params, cycles, cocycles):
    for k in ("13", "23"):
        assert pair_chain(cycles["c_" + k], cocycles["phi_" + k]) == pytest.approx(2 * TWO_PI_I**2, abs=1e-4)
    assert abs(pair_chain(cycles["c_13"], cocycles["phi_23"])) < 1e-4
    assert abs(pair_chain(cycles["c_23"], cocycles["phi_13"])) < 1e-4
    assert pair_chain(cycles["c_12"], cocycles["phi_12"]) == pytest.approx(-2 * TWO_PI_I**2, abs=1e-4)
    lam = ktheory.d3_eigenvalue(params)
    val = pair_chain(cycles["c_123"], cocycles["phi_123"])
    assert val == pytest.approx(6 * TWO_PI_I**2 * lam, abs=1e-4)


def test_pair_chain_degree_mismatch(cycles, cocycles):
    with pytest.raises(ValueError):
        pair_chain(cycles["c_1"], cocycles["phi_13"])
