"""Heisenberg group action, its infinitesimal generators and the trace.

The group is parametrized by triples (r, s, t) with the law

    (r, s, t) o (r', s', t') = (r + r', s + s', t + t' + c s r'),

and acts by

    alpha_g F(p, x, y) = e(-p (t + c s (x - r - p mu))) F(p, x - r, y - s).

This phase is the one compatible with the twisted periodicity and with the
product, so every alpha_g is a *-automorphism.  Its generators are

    d1 = -d/dx,   d2 = -d/dy - 2 pi i p c (x - p mu),   d3 = -2 pi i p,

and they satisfy [d1, d2] = -c d3 with d3 central.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    TWO_PI_I,
    QhmElement,
    QhmParams,
    Sum,
    distance,
    random_element,
    trace,
    zero_jet,
)

__all__ = [
    "GroupElem",
    "DerivationCoeffs",
    "Action",
    "Derivation",
    "act_alpha",
    "sigma",
    "derive",
    "derive_coeffs",
    "compose",
    "check_transport",
    "transport_coeffs",
    "sigma_constants",
    "trace",
]


@dataclass(frozen=True)
class GroupElem:
    """Heisenberg group element (r, s, t)."""

    r: float = 0.0
    s: float = 0.0
    t: float = 0.0

    def matrix(self, c: int) -> np.ndarray:
        """Upper unitriangular 3x3 realization of the group law."""
        return np.array([[1.0, self.s, self.t / c], [0.0, 1.0, self.r], [0.0, 0.0, 1.0]])


def compose(g: GroupElem, h: GroupElem, c: int) -> GroupElem:
    """The product g o h, so that alpha_g alpha_h = alpha_{g o h}."""
    return GroupElem(g.r + h.r, g.s + h.s, g.t + h.t + c * g.s * h.r)


@dataclass(frozen=True)
class DerivationCoeffs:
    """Coefficients of u d1 + v d2 + w d3."""

    u: float = 0.0
    v: float = 0.0
    w: float = 0.0


class Action(QhmElement):
    """alpha_g applied to an element."""

    def __init__(self, g: GroupElem, a: QhmElement):
        self.params, self.g, self.a = a.params, g, a
        self.support = a.support

    def _jet(self, p, x, y, order):
        c, mu = self.params.c, self.params.mu
        r, s, t = self.g.r, self.g.s, self.g.t
        inner = self.a._jet(p, x - r, y - s, order)
        phase = np.exp(-TWO_PI_I * p * (t + c * s * (x - r - p * mu)))
        k = -TWO_PI_I * p * c * s  # d/dx of the phase exponent
        if k == 0:
            return phase * inner
        out = zero_jet(x, order)
        for a in range(order + 1):
            for b in range(order + 1 - a):
                out[a, b] = phase * sum(
                    math.comb(a, i) * k**i * inner[a - i, b] for i in range(a + 1)
                )
        return out


class Derivation(QhmElement):
    """One of the generators d1, d2, d3 applied to an element."""

    def __init__(self, i: int, a: QhmElement):
        if i not in (1, 2, 3):
            raise ValueError("derivation index must be 1, 2 or 3")
        self.params, self.i, self.a = a.params, i, a
        self.support = a.support - {0} if i == 3 else a.support

    def _jet(self, p, x, y, order):
        if self.i == 3:
            return -TWO_PI_I * p * self.a._jet(p, x, y, order)
        J = self.a._jet(p, x, y, order + 1)
        out = zero_jet(x, order)
        if self.i == 1:
            for a in range(order + 1):
                for b in range(order + 1 - a):
                    out[a, b] = -J[a + 1, b]
            return out
        c, mu = self.params.c, self.params.mu
        k = TWO_PI_I * p * c
        xs = x - p * mu
        for a in range(order + 1):
            for b in range(order + 1 - a):
                val = -J[a, b + 1] - k * xs * J[a, b]
                if a:
                    val = val - k * a * J[a - 1, b]
                out[a, b] = val
        return out


def act_alpha(g: GroupElem, F: QhmElement) -> QhmElement:
    if g.r == 0 and g.s == 0 and g.t == 0:
        return F
    return Action(g, F)


def sigma(F: QhmElement) -> QhmElement:
    """The automorphism alpha_{(2 mu, 2 nu, 0)} implementing xi a = sigma(a) xi."""
    prm = F.params
    return act_alpha(GroupElem(2 * prm.mu, 2 * prm.nu, 0.0), F)


def derive(i: int, F: QhmElement) -> QhmElement:
    return Derivation(i, F)


def derive_coeffs(d: DerivationCoeffs, F: QhmElement) -> QhmElement:
    terms = [(w, Derivation(i, F)) for i, w in ((1, d.u), (2, d.v), (3, d.w)) if w != 0]
    return Sum(F.params, terms)


def transport_coeffs(g: GroupElem, d: DerivationCoeffs, c: int) -> DerivationCoeffs:
    """Solve w = w' + c (v' r - s u') with u' = u and v' = v."""
    return DerivationCoeffs(d.u, d.v, d.w - c * (d.v * g.r - g.s * d.u))


def check_transport(g: GroupElem, d: DerivationCoeffs, params: QhmParams,
                    seeds=(0, 1, 2), length: int = 2) -> tuple[DerivationCoeffs, float]:
    """Primed coefficients with alpha_g d = d' alpha_g, and the worst residual.

    Raises AssertionError if the residual exceeds tol_num.
    """
    dp = transport_coeffs(g, d, params.c)
    res = 0.0
    for seed in seeds:
        F = random_element(params, seed, length, max_degree=2)
        lhs = act_alpha(g, derive_coeffs(d, F))
        rhs = derive_coeffs(dp, act_alpha(g, F))
        res = max(res, distance(lhs, rhs))
    if res > params.tol_num:
        raise AssertionError(f"transport residual {res:.3e} exceeds tolerance")
    return dp, res


def sigma_constants(params: QhmParams) -> tuple[float, float, float]:
    """(k1, k2, k3) with d_i sigma = sigma (d_i + k_i d3)."""
    g = GroupElem(2 * params.mu, 2 * params.nu, 0.0)
    out = []
    for d in (DerivationCoeffs(1, 0, 0), DerivationCoeffs(0, 1, 0), DerivationCoeffs(0, 0, 1)):
        # alpha d = d' alpha  =>  d alpha = alpha (d + (w - w') d3)
        out.append(d.w - transport_coeffs(g, d, params.c).w)
    return tuple(out)
