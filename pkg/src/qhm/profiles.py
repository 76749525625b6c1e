"""Smooth transition profiles built from the flat function exp(-1/t).

The basic logistic-type step is ``s(t) = 1 / (1 + exp(1/t - 1/(1 - t)))`` on
``(0, 1)``, extended by 0 on the left and 1 on the right.  Every profile used
by the package is an algebraic expression in ``s`` and ``1 - s``; its
derivatives are produced symbolically once and evaluated in a form that never
forms ``exp(1/t)`` directly, so no overflow occurs near the endpoints.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp
from scipy.special import expit

_t, _s, _sb = sp.symbols("t s sb", real=True)
# z(t) = 1/t - 1/(1-t); s = expit(-z), sb = 1 - s = expit(z).
_zprime = -1 / _t**2 - 1 / (1 - _t) ** 2

# Inside this margin the profile is replaced by its exact constant value.
_EDGE = 1e-3


def _total_derivative(expr):
    """d/dt of an expression in (t, s, sb) with ds/dt = -s*sb*z'."""
    ds = -_s * _sb * _zprime
    return sp.diff(expr, _t) + sp.diff(expr, _s) * ds - sp.diff(expr, _sb) * ds


class Profile:
    """A function ``h(t)`` on ``[0, 1]`` given as an expression in ``s``, ``1-s``.

    ``left`` and ``right`` are the constant values taken for ``t <= 0`` and
    ``t >= 1``.
    """

    def __init__(self, expr, left: float, right: float):
        self._exprs = [sp.simplify(expr)]
        self._funcs = []
        self.left = float(left)
        self.right = float(right)

    def _func(self, k: int):
        while len(self._exprs) <= k:
            self._exprs.append(_total_derivative(self._exprs[-1]))
        while len(self._funcs) <= k:
            e = self._exprs[len(self._funcs)]
            self._funcs.append(sp.lambdify((_t, _s, _sb), e, "numpy"))
        return self._funcs[k]

    def __call__(self, t, k: int = 0) -> np.ndarray:
        """Return the k-th derivative of the profile at ``t``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        if k == 0:
            out[t <= _EDGE] = self.left
            out[t >= 1 - _EDGE] = self.right
        m = (t > _EDGE) & (t < 1 - _EDGE)
        if np.any(m):
            tm = t[m]
            z = 1.0 / tm - 1.0 / (1.0 - tm)
            val = self._func(k)(tm, expit(-z), expit(z))
            out[m] = np.broadcast_to(val, tm.shape)
        return out


@lru_cache(maxsize=None)
def step() -> Profile:
    """The basic step ``s``: 0 on the left, 1 on the right."""
    return Profile(_s, 0.0, 1.0)


@lru_cache(maxsize=None)
def normalized_fall() -> Profile:
    """``(1-s)/sqrt((1-s)^2 + s^2)``: falls from 1 to 0, squares with its mirror to 1."""
    return Profile(_sb / sp.sqrt(_sb**2 + _s**2), 1.0, 0.0)


@lru_cache(maxsize=None)
def sqrt_step() -> Profile:
    """``sqrt(s)``: a rising edge whose square is the basic step."""
    return Profile(sp.sqrt(_s), 0.0, 1.0)


def chi(x, k: int = 0, which: int = 1) -> np.ndarray:
    """k-th derivative of the circle partition function chi_1 or chi_2.

    ``chi_1`` equals 1 on ``|x| <= 1/6`` and 0 on ``1/3 <= |x| <= 1/2``
    (x taken modulo 1); ``chi_2(x) = chi_1(x - 1/2)``; ``chi_1^2 + chi_2^2 = 1``.
    """
    x = np.asarray(x, dtype=float)
    if which == 2:
        x = x - 0.5
    xr = (x + 0.5) % 1.0 - 0.5
    a = np.abs(xr)
    val = normalized_fall()(6.0 * a - 1.0, k)
    if k:
        val = val * (6.0**k) * np.sign(xr) ** k
    return val
