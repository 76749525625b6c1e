import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhm import core
from qhm.core import build_frame, distance, random_element
from qhm.heisenberg import (
    DerivationCoeffs,
    GroupElem,
    act_alpha,
    check_transport,
    compose,
    derive,
    derive_coeffs,
    sigma,
    sigma_constants,
    trace,
    transport_coeffs,
)

coords = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
groups = st.builds(GroupElem, coords, coords, coords)


def rich_element(params, seed):
    """Seeded element with components in degrees -1, 0 and 1."""
    x1, x2 = build_frame(params)
    a = random_element(params, seed, 2, max_degree=1)
    return a + x1 * core.U2(params) * 0.5 + x2.star() * core.U1(params) * (0.3 - 0.2j)


@pytest.fixture(scope="module")
def F(params):
    return rich_element(params, 0)


@pytest.fixture(scope="module")
def G(params):
    return rich_element(params, 1)


def test_composition_orientation(params, F):
    """Exactly one composition order turns alpha into a group action."""
    g, h = GroupElem(0.3, -0.4, 0.1), GroupElem(-0.2, 0.7, 0.5)
    lhs = act_alpha(g, act_alpha(h, F))
    assert distance(lhs, act_alpha(compose(g, h, params.c), F)) < params.tol_num
    assert distance(lhs, act_alpha(compose(h, g, params.c), F)) > 1e-2


@settings(max_examples=20, deadline=None)
@given(groups, groups)
def test_compose_matches_matrix_product(g, h):
    c = 3
    assert np.allclose(g.matrix(c) @ h.matrix(c), compose(g, h, c).matrix(c))


def test_action_is_automorphism(params, F, G):
    g = GroupElem(0.21, -0.33, 0.7)
    assert distance(act_alpha(g, F * G), act_alpha(g, F) * act_alpha(g, G)) < params.tol_num
    assert distance(act_alpha(g, F.star()), act_alpha(g, F).star()) < params.tol_num


def test_commutation_relations(params, F):
    d = derive
    assert distance(d(1, d(2, F)) - d(2, d(1, F)), -params.c * d(3, F)) < params.tol_num
    assert distance(d(1, d(3, F)), d(3, d(1, F))) < params.tol_num
    assert distance(d(2, d(3, F)), d(3, d(2, F))) < params.tol_num


@pytest.mark.parametrize("i", [1, 2, 3])
def test_leibniz(params, F, G, i):
    lhs = derive(i, F * G)
    rhs = derive(i, F) * G + F * derive(i, G)
    assert distance(lhs, rhs) < params.tol_num


@pytest.mark.parametrize("i", [1, 2, 3])
def test_generators_are_derivatives_of_the_action(params, F, i):
    h = 1e-4
    unit = [0.0, 0.0, 0.0]
    X, Y = np.meshgrid(np.linspace(-0.4, 1.3, 9), np.linspace(0, 1, 5), indexing="ij")
    for p in sorted(F.support):
        vals = {}
        for k in (-2, -1, 1, 2):
            unit[i - 1] = k * h
            vals[k] = act_alpha(GroupElem(*unit), F)(p, X, Y)
        fd = (vals[-2] - 8 * vals[-1] + 8 * vals[1] - vals[2]) / (12 * h)
        assert np.abs(fd - derive(i, F)(p, X, Y)).max() < 1e-5


def test_trace_properties(params, F, G):
    assert abs(trace(F * G) - trace(G * F)) < params.tol_num
    for i in (1, 2, 3):
        assert abs(trace(derive(i, F * G))) < params.tol_num
    assert trace(F.star() * F).real >= -params.tol_num


def test_trace_invariance(params, F):
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = GroupElem(*rng.uniform(-1, 1, 3))
        assert abs(trace(act_alpha(g, F)) - trace(F)) < params.tol_num


@settings(max_examples=10, deadline=None)
@given(groups, coords, coords, coords)
def test_transport(params, g, u, v, w):
    d = DerivationCoeffs(u, v, w)
    dp, res = check_transport(g, d, params, seeds=(3,), length=2)
    assert res < params.tol_num
    assert (dp.u, dp.v) == (u, v)
    assert dp.w == pytest.approx(w - params.c * (v * g.r - g.s * u))


def test_transport_identity_explicit(params, F):
    g = GroupElem(0.4, -0.25, 0.0)
    d = DerivationCoeffs(0.0, 1.0, 0.0)
    dp = transport_coeffs(g, d, params.c)
    assert dp.w != 0
    lhs = act_alpha(g, derive_coeffs(d, F))
    assert distance(lhs, derive_coeffs(dp, act_alpha(g, F))) < params.tol_num
    assert distance(lhs, derive_coeffs(d, act_alpha(g, F))) > 1e-2


def test_sigma(params):
    x1, x2 = build_frame(params)
    a = random_element(params, 5, 2, max_degree=0)
    assert distance(x1 * a, sigma(a) * x1) < params.tol_num
    assert distance(x2 * a, sigma(a) * x2) < params.tol_num
    assert distance(sigma(x1.star() * x2), x2 * x1.star()) < params.tol_num


def test_sigma_constants(params, F):
    k = sigma_constants(params)
    assert k == pytest.approx((-2 * params.c * params.nu, 2 * params.c * params.mu, 0.0))
    for i in (1, 2, 3):
        lhs = derive(i, sigma(F))
        rhs = sigma(derive(i, F) + k[i - 1] * derive(3, F))
        assert distance(lhs, rhs) < params.tol_num


def test_derivation_index_checked(params):
    with pytest.raises(ValueError):
        derive(4, core.one(params))
