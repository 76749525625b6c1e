"""Cochains on the algebra: Hochschild boundary, cyclicity, the cocycles built
from the Heisenberg derivations, cup product with the matrix trace, the
Chern-Connes pairings and the dual Hochschild cycles.

All trace evaluations go through :func:`qhm.core.chain_trace`, which computes
tau(f_0 ... f_n) from pointwise values without forming intermediate products.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    MatrixElement,
    QhmElement,
    QhmParams,
    U1,
    U2,
    build_frame,
    chain_trace,
    matrix_distance,
    mul,
    star,
    trace,
)
from .heisenberg import derive

__all__ = [
    "CocycleHandle",
    "ChainTensor",
    "WedgeWord",
    "tau_cochain",
    "hochschild_b",
    "cyclic_permutation_residual",
    "check_cyclicity",
    "check_wedge_condition",
    "wedge_bracket_term",
    "cocycle_from_wedge",
    "standard_cocycles",
    "cup_tr",
    "pair_even",
    "pair_odd",
    "odd_normalization",
    "build_dual_cycles",
    "pair_chain",
    "chain_boundary",
    "check_chain_closed",
    "NotAProjectorError",
    "NotAUnitaryError",
]


class NotAProjectorError(ValueError):
    """Raised by pair_even for a matrix that is not a self-adjoint idempotent."""


class NotAUnitaryError(ValueError):
    """Raised by pair_odd for a matrix that is not unitary."""


# --------------------------------------------------------------------------
# cochains
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CocycleHandle:
    """Multilinear functional of ``arity + 1`` algebra arguments."""

    arity: int
    fn: Callable[..., complex] = field(repr=False)
    label: str = ""
    cyclic: bool = True

    @property
    def parity(self) -> str:
        return "even" if self.arity % 2 == 0 else "odd"

    def __call__(self, *args: QhmElement) -> complex:
        if len(args) != self.arity + 1:
            raise ValueError(f"{self.label} expects {self.arity + 1} arguments, got {len(args)}")
        if any(a.is_zero for a in args):
            return 0j
        return complex(self.fn(*args))


def tau_cochain() -> CocycleHandle:
    """The trace viewed as a 0-cochain."""
    return CocycleHandle(0, trace, "tau")


def hochschild_b(phi: CocycleHandle) -> CocycleHandle:
    """(b phi)(a_0, ..., a_{n+1}) as the alternating sum of contracted arguments."""
    n = phi.arity

    def fn(*a):
        total = 0j
        for j in range(n + 1):
            args = a[:j] + (mul(a[j], a[j + 1]),) + a[j + 2:]
            total += (-1) ** j * phi(*args)
        total += (-1) ** (n + 1) * phi(mul(a[n + 1], a[0]), *a[1:n + 1])
        return total

    return CocycleHandle(n + 1, fn, f"b({phi.label})", cyclic=False)


def cyclic_permutation_residual(phi: CocycleHandle, args: Sequence[QhmElement]) -> float:
    n = phi.arity
    rotated = (args[n],) + tuple(args[:n])
    return abs(phi(*args) - (-1) ** n * phi(*rotated))


def check_cyclicity(phi: CocycleHandle, tuples: Sequence[Sequence[QhmElement]]) -> float:
    """Worst |phi(a_0..a_n) - (-1)^n phi(a_n, a_0, .., a_{n-1})| over the tuples."""
    if phi.arity == 0:
        return 0.0
    return max((cyclic_permutation_residual(phi, t) for t in tuples), default=0.0)


# --------------------------------------------------------------------------
# Lie-algebra wedge words
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WedgeWord:
    """Ordered distinct basis indices of the Heisenberg Lie algebra."""

    indices: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices) or not set(self.indices) <= {1, 2, 3}:
            raise ValueError(f"invalid wedge word {self.indices}")


def _bracket(i: int, j: int, c: int) -> dict[int, float]:
    """[X_i, X_j] in the basis X_1, X_2, X_3 with [X_1, X_2] = -c X_3."""
    if (i, j) == (1, 2):
        return {3: -float(c)}
    if (i, j) == (2, 1):
        return {3: float(c)}
    return {}


def _wedge_normal(word: Sequence[int]) -> tuple[int, tuple[int, ...]] | None:
    """Sign and sorted form of a wedge monomial, or None if it vanishes."""
    if len(set(word)) != len(word):
        return None
    perm = sorted(range(len(word)), key=lambda k: word[k])
    sign = 1
    seen = [False] * len(perm)
    for k in range(len(perm)):
        if not seen[k]:
            j, cycle = k, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                cycle += 1
            sign *= (-1) ** (cycle - 1)
    return sign, tuple(sorted(word))


def wedge_bracket_term(w: WedgeWord, c: int) -> dict[tuple[int, ...], float]:
    """Expansion of sum_{i<j} (-1)^{i+j} [X_i, X_j] ^ X_1 ^ .. (omit i, j) .. ^ X_n."""
    out: dict[tuple[int, ...], float] = {}
    idx = w.indices
    for a, b in itertools.combinations(range(len(idx)), 2):
        rest = [idx[k] for k in range(len(idx)) if k not in (a, b)]
        for basis, coef in _bracket(idx[a], idx[b], c).items():
            nf = _wedge_normal([basis] + rest)
            if nf is None:
                continue
            sign, key = nf
            out[key] = out.get(key, 0.0) + (-1) ** (a + b + 2) * sign * coef
    return {k: v for k, v in out.items() if v != 0}


def check_wedge_condition(w: WedgeWord, c: int = 1) -> bool:
    """True iff the bracket expansion of the wedge word vanishes identically."""
    return not wedge_bracket_term(w, c)


def _perm_sign(perm: Sequence[int]) -> int:
    nf = _wedge_normal(list(perm))
    return nf[0]


def cocycle_from_wedge(w: WedgeWord | Sequence[int], c: int = 1) -> CocycleHandle:
    """sum over permutations s of eps(s) tau(a_0 d_{w[s(1)]} a_1 ... d_{w[s(n)]} a_n).

    ``cyclic`` is False when the wedge condition fails (the word (1, 2)).
    """
    if not isinstance(w, WedgeWord):
        w = WedgeWord(tuple(w))
    idx = w.indices
    n = len(idx)
    perms = [(p, _perm_sign(p)) for p in itertools.permutations(range(n))]

    def fn(*a):
        total = 0j
        for p, sgn in perms:
            factors = [a[0]] + [derive(idx[p[k]], a[k + 1]) for k in range(n)]
            total += sgn * chain_trace(factors)
        return total

    label = "phi_" + "".join(str(i) for i in idx)
    return CocycleHandle(n, fn, label, cyclic=check_wedge_condition(w, c))


def standard_cocycles(c: int = 1) -> dict[str, CocycleHandle]:
    """tau, phi_1, phi_2, phi_3, phi_13, phi_23, phi_123 and the Hochschild-only phi_12."""
    out = {"tau": tau_cochain()}
    for word in [(1,), (2,), (3,), (1, 3), (2, 3), (1, 2, 3), (1, 2)]:
        h = cocycle_from_wedge(word, c)
        out[h.label] = h
    return out


# --------------------------------------------------------------------------
# cup product with the matrix trace and the pairings
# --------------------------------------------------------------------------


def cup_tr(phi: CocycleHandle, k: int | None = None) -> Callable[..., complex]:
    """The functional (phi # tr) on tuples of k x k matrices."""

    def fn(*mats: MatrixElement) -> complex:
        if len(mats) != phi.arity + 1:
            raise ValueError("wrong number of matrix arguments")
        size = mats[0].size
        if any(m.size != size for m in mats) or (k is not None and size != k):
            raise ValueError("matrix size mismatch")
        n = len(mats)
        total = 0j
        for idx in itertools.product(range(size), repeat=n):
            entries = [mats[j][idx[j], idx[(j + 1) % n]] for j in range(n)]
            if any(e.is_zero for e in entries):
                continue
            total += phi(*entries)
        return total

    return fn


def _as_matrix(x) -> MatrixElement:
    return x if isinstance(x, MatrixElement) else MatrixElement.promote(x)


def pair_even(e, phi: CocycleHandle, check: bool = True) -> complex:
    """(1/m!) (phi # tr)(e, ..., e) for a projector e and a 2m-cocycle phi."""
    e = _as_matrix(e)
    if phi.arity % 2:
        raise ValueError("even pairing needs an even cocycle")
    if check:
        tol = e.params.tol_num
        if matrix_distance(e @ e, e) > tol or matrix_distance(e.star(), e) > tol:
            raise NotAProjectorError("argument is not a self-adjoint idempotent")
    m = phi.arity // 2
    return cup_tr(phi)(*([e] * (phi.arity + 1))) / math.factorial(m)


def odd_normalization(n: int) -> complex:
    """2^{-n} / sqrt(2 i) / Gamma(n/2 + 1), principal branch."""
    return 2.0 ** (-n) / cmath.sqrt(2j) / math.gamma(n / 2 + 1)


def pair_odd(u, phi: CocycleHandle, check: bool = True) -> complex:
    """Normalized (phi # tr)(u* - 1, u - 1, u* - 1, ..., u - 1)."""
    u = _as_matrix(u)
    n = phi.arity
    if n % 2 == 0:
        raise ValueError("odd pairing needs an odd cocycle")
    eye = MatrixElement.identity(u.params, u.size)
    if check:
        tol = u.params.tol_num
        if matrix_distance(u @ u.star(), eye) > tol or matrix_distance(u.star() @ u, eye) > tol:
            raise NotAUnitaryError("argument is not unitary")
    a = u.star() - eye
    b = u - eye
    args = [a if j % 2 == 0 else b for j in range(n + 1)]
    return odd_normalization(n) * cup_tr(phi)(*args)


# --------------------------------------------------------------------------
# Hochschild chains and the dual cycles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainTensor:
    """Finite sum of weighted elementary tensors a_0 (x) ... (x) a_n."""

    terms: tuple[tuple[complex, tuple[QhmElement, ...]], ...]
    label: str = ""

    @property
    def degree(self) -> int:
        return len(self.terms[0][1]) - 1

    def __post_init__(self):
        if len({len(t) for _, t in self.terms}) > 1:
            raise ValueError("mixed tensor lengths")


def pair_chain(chain: ChainTensor, phi: CocycleHandle) -> complex:
    if chain.degree != phi.arity:
        raise ValueError(f"cannot pair a {chain.degree}-chain with a {phi.arity}-cochain")
    return sum((w * phi(*t) for w, t in chain.terms), 0j)


def chain_boundary(chain: ChainTensor) -> ChainTensor:
    """Hochschild boundary of a chain."""
    n = chain.degree
    out = []
    for w, a in chain.terms:
        for j in range(n):
            out.append(((-1) ** j * w, a[:j] + (mul(a[j], a[j + 1]),) + a[j + 2:]))
        out.append(((-1) ** n * w, (mul(a[n], a[0]),) + a[1:n]))
    return ChainTensor(tuple(out), f"b{chain.label}")


def check_chain_closed(chain: ChainTensor, seed: int = 0, n_functionals: int = 12) -> float:
    """Largest value of b(chain) against products of seeded point evaluations.

    Each functional is a_0 (x) ... (x) a_{n-1} -> prod_j a_j(p_j, x_j, y_j); the
    degrees p_j are drawn from those present in the boundary so that the
    battery is not trivially zero.
    """
    bd = chain_boundary(chain)
    if chain.degree == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    slots = chain.degree
    degs = [sorted(set().union(*[t[j].support for _, t in bd.terms])) or [0] for j in range(slots)]
    worst = 0.0
    for _ in range(n_functionals):
        pts = [(int(rng.choice(degs[j])), rng.uniform(-1, 2), rng.uniform(0, 1)) for j in range(slots)]
        val = 0j
        for w, t in bd.terms:
            prod = w
            for j, (p, x, y) in enumerate(pts):
                prod *= complex(t[j](p, x, y)) if p in t[j].support else 0.0
            val += prod
        worst = max(worst, abs(val))
    return worst


def build_dual_cycles(params: QhmParams) -> dict[str, ChainTensor]:
    """c_1, c_2, c_3, c_13, c_23, c_123 and the Hochschild-only c_12."""
    u1, u2 = U1(params), U2(params)
    xis = build_frame(params)
    u = {1: u1, 2: u2}
    out = {
        "c_1": ChainTensor(((1.0, (star(u1), u1)),), "c_1"),
        "c_2": ChainTensor(((1.0, (star(u2), u2)),), "c_2"),
        "c_3": ChainTensor(tuple((1.0, (star(x), x)) for x in xis), "c_3"),
    }
    for j in (1, 2):
        terms = []
        for x in xis:
            terms.append((1.0, (mul(star(x), star(u[j])), u[j], x)))
            terms.append((-1.0, (mul(star(u[j]), star(x)), x, u[j])))
        out[f"c_{j}3"] = ChainTensor(tuple(terms), f"c_{j}3")
    out["c_12"] = ChainTensor(
        ((1.0, (mul(star(u1), star(u2)), u2, u1)), (-1.0, (mul(star(u2), star(u1)), u1, u2))),
        "c_12",
    )
    terms = []
    for x in xis:
        gens = {1: u1, 2: u2, 3: x}
        for perm in itertools.permutations((1, 2, 3)):
            sgn = _perm_sign(perm)
            a, b, c = (gens[k] for k in perm)
            head = mul(mul(star(c), star(b)), star(a))
            terms.append((float(sgn), (head, a, b, c)))
    out["c_123"] = ChainTensor(tuple(terms), "c_123")
    return out
