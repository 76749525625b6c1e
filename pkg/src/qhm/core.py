"""Smooth elements of the quantum Heisenberg manifold algebra D^c_{mu,nu}.

An element is a finitely supported family F(p, x, y) of smooth functions on
R x S^1 indexed by the degree p, subject to the twisted periodicity

    F(p, x + 1, y) = e(-c p (y - p nu)) F(p, x, y),        e(t) = exp(2 pi i t).

Elements are stored as immutable expression trees.  Every node knows its degree
support and can return exact pointwise values together with mixed partial
derivatives ("jets") at arbitrary sample points, so products, the involution,
the group action and the derivations are all evaluated from their defining
formulas without any intermediate resampling.  Quadrature only enters through
the trace and through the coefficient view used for the fold diagnostics.

A jet of order K at a degree p is a complex array ``J`` of shape
``(K + 1, K + 1) + x.shape`` with ``J[a, b] = d^a/dx^a d^b/dy^b F(p, x, y)``;
only entries with ``a + b <= K`` are meaningful.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from . import profiles

TWO_PI_I = 2j * np.pi


def e(t):
    """The character e(t) = exp(2 pi i t)."""
    return np.exp(TWO_PI_I * np.asarray(t))


# --------------------------------------------------------------------------
# errors and parameters
# --------------------------------------------------------------------------


class QhmError(Exception):
    """Base class for errors raised by the package."""


class ParamsError(QhmError, ValueError):
    """Invalid parameter set (failed invariant or guard)."""


class ParamsMismatchError(QhmError, ValueError):
    """Operands belong to different algebra instances."""


class DegreeTruncationError(QhmError):
    """A product would leave the degree window [-P, P]."""


class WindowOverflowError(QhmError):
    """The Fourier window in y is too small for an element."""


def min_ny_halfwidth(c: int, mu: float, p_max: int) -> int:
    """Smallest Fourier half-width accepted for the given twist, mu and window."""
    return int(c * p_max * (math.ceil(2 * p_max * abs(mu)) + 2) + 8)


@dataclass(frozen=True)
class QhmParams:
    """One algebra instance plus its discretization settings.

    ``nx`` is the number of x samples per unit interval used by quadrature and
    ``nx + 1`` is the number of Chebyshev nodes in the coefficient view;
    ``ny_halfwidth`` bounds the Fourier indices n in [-N_y, N_y].
    """

    c: int = 2
    mu: float = 0.3
    nu: float = 0.2
    nx: int = 128
    ny_halfwidth: int = 64
    p_max: int = 4
    tol_alg: float = 1e-9
    tol_num: float = 1e-5

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 1:
            raise ParamsError(f"c must be a positive integer, got {self.c!r}")
        if self.nx < 8:
            raise ParamsError(f"nx must be at least 8, got {self.nx}")
        if self.p_max < 1:
            raise ParamsError(f"p_max must be at least 1, got {self.p_max}")
        need = min_ny_halfwidth(self.c, self.mu, self.p_max)
        if self.ny_halfwidth < need:
            raise ParamsError(
                f"ny_halfwidth={self.ny_halfwidth} is below the fold-window bound {need}"
            )

    def swapped(self) -> "QhmParams":
        """Parameters of the partner instance with mu and nu exchanged.

        The Fourier window is raised to the minimum admissible value if needed.
        """
        ny = max(self.ny_halfwidth, min_ny_halfwidth(self.c, self.nu, self.p_max))
        return replace(self, mu=self.nu, nu=self.mu, ny_halfwidth=ny)

    def refined(self, factor: int = 2) -> "QhmParams":
        """Same instance with nx and ny_halfwidth multiplied by ``factor``."""
        return replace(self, nx=self.nx * factor, ny_halfwidth=self.ny_halfwidth * factor)

    def require_mu(self):
        if self.mu == 0:
            raise ParamsError("this operation needs mu != 0")

    def require_nu(self):
        if self.nu == 0:
            raise ParamsError("this operation needs nu != 0")


# --------------------------------------------------------------------------
# jet arithmetic
# --------------------------------------------------------------------------


def _binom_table(n: int) -> np.ndarray:
    return np.array([[math.comb(i, j) for j in range(n + 1)] for i in range(n + 1)], float)


def leibniz(A: np.ndarray, B: np.ndarray, order: int) -> np.ndarray:
    """Jet of a pointwise product from the jets of the two factors."""
    if order == 0:
        return A[:1, :1] * B[:1, :1]
    C = np.zeros(np.broadcast_shapes(A.shape, B.shape), complex)
    binom = _binom_table(order)
    for a in range(order + 1):
        for b in range(order + 1 - a):
            acc = 0
            for i in range(a + 1):
                for j in range(b + 1):
                    acc = acc + binom[a, i] * binom[b, j] * A[i, j] * B[a - i, b - j]
            C[a, b] = acc
    return C


def zero_jet(x: np.ndarray, order: int) -> np.ndarray:
    return np.zeros((order + 1, order + 1) + np.shape(x), complex)


def _shapes(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    return x, y


# --------------------------------------------------------------------------
# element nodes
# --------------------------------------------------------------------------


class QhmElement:
    """Base class of all algebra elements (immutable expression nodes)."""

    params: QhmParams
    support: frozenset

    # -- evaluation -------------------------------------------------------

    def jet(self, p: int, x, y, order: int = 0) -> np.ndarray:
        """Mixed partial derivatives of F(p, ., .) up to total order ``order``."""
        x, y = _shapes(x, y)
        if p not in self.support:
            return zero_jet(x, order)
        return self._jet(int(p), x, y, order)

    def _jet(self, p, x, y, order):  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, p: int, x, y):
        return self.jet(p, x, y, 0)[0, 0]

    # -- algebra sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __neg__(self):
        return scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, QhmElement):
            return mul(self, other)
        return scale(other, self)

    def __rmul__(self, other):
        return scale(other, self)

    def star(self):
        return star(self)

    @property
    def is_zero(self) -> bool:
        return not self.support


def _check_same(*els: QhmElement) -> QhmParams:
    params = els[0].params
    for el in els[1:]:
        if el.params != params:
            raise ParamsMismatchError("elements belong to different algebra instances")
    return params


class Sum(QhmElement):
    """Finite linear combination of elements."""

    def __init__(self, params: QhmParams, terms: Iterable[tuple[complex, QhmElement]]):
        self.params = params
        self.terms = tuple((complex(w), t) for w, t in terms if w != 0 and not t.is_zero)
        self.support = frozenset().union(*[t.support for _, t in self.terms])

    def _jet(self, p, x, y, order):
        out = zero_jet(x, order)
        for w, t in self.terms:
            if p in t.support:
                out = out + w * t._jet(p, x, y, order)
        return out


class TorusMonomial(QhmElement):
    """The degree-0 function e(m x + n y)."""

    def __init__(self, params: QhmParams, m: int, n: int):
        self.params, self.m, self.n = params, int(m), int(n)
        self.support = frozenset({0})

    def _jet(self, p, x, y, order):
        base = e(self.m * x + self.n * y)
        out = zero_jet(x, order)
        for a in range(order + 1):
            for b in range(order + 1 - a):
                out[a, b] = (TWO_PI_I * self.m) ** a * (TWO_PI_I * self.n) ** b * base
        return out


class XiLeaf(QhmElement):
    """Frame generator xi_1 or xi_2 of the bimodule (degree 1).

    On its fundamental strip the function is chi_i(x); elsewhere it is the
    unique extension with xi(x + 1, y) = e(-c (y - nu)) xi(x, y).
    """

    def __init__(self, params: QhmParams, which: int):
        if which not in (1, 2):
            raise ValueError("which must be 1 or 2")
        self.params, self.which = params, which
        self.support = frozenset({1})

    def _jet(self, p, x, y, order):
        c, nu = self.params.c, self.params.nu
        k = np.floor(x + 0.5) if self.which == 1 else np.floor(x)
        phase = e(-c * k * (y - nu))
        out = zero_jet(x, order)
        u = x - k
        for a in range(order + 1):
            ch = profiles.chi(u, a, self.which)
            for b in range(order + 1 - a):
                out[a, b] = ch * (-TWO_PI_I * c * k) ** b * phase
        return out


class Product(QhmElement):
    """Twisted convolution product of two elements."""

    def __init__(self, a: QhmElement, b: QhmElement):
        self.params = _check_same(a, b)
        self.a, self.b = a, b
        supp = frozenset(q + r for q in a.support for r in b.support)
        P = self.params.p_max
        if any(abs(d) > P for d in supp):
            raise DegreeTruncationError(
                f"product support {sorted(supp)} exceeds the degree window [-{P}, {P}]"
            )
        self.support = supp

    def _jet(self, p, x, y, order):
        mu, nu = self.params.mu, self.params.nu
        out = zero_jet(x, order)
        for q in self.a.support:
            if p - q in self.b.support:
                A = self.a._jet(q, x, y, order)
                B = self.b._jet(p - q, x - 2 * q * mu, y - 2 * q * nu, order)
                out = out + leibniz(A, B, order)
        return out


class Star(QhmElement):
    """Involution F*(p, x, y) = conj F(-p, x - 2 p mu, y - 2 p nu)."""

    def __init__(self, a: QhmElement):
        self.params, self.a = a.params, a
        self.support = frozenset(-q for q in a.support)

    def _jet(self, p, x, y, order):
        mu, nu = self.params.mu, self.params.nu
        return np.conj(self.a._jet(-p, x - 2 * p * mu, y - 2 * p * nu, order))


# --------------------------------------------------------------------------
# constructors and public operations
# --------------------------------------------------------------------------


def zero(params: QhmParams) -> QhmElement:
    return Sum(params, ())


def one(params: QhmParams) -> QhmElement:
    return TorusMonomial(params, 0, 0)


def torus(params: QhmParams, m: int, n: int) -> QhmElement:
    """The degree-0 character e(m x + n y)."""
    return TorusMonomial(params, m, n)


def U1(params: QhmParams) -> QhmElement:
    return TorusMonomial(params, 1, 0)


def U2(params: QhmParams) -> QhmElement:
    return TorusMonomial(params, 0, 1)


def add(F: QhmElement, G: QhmElement) -> QhmElement:
    params = _check_same(F, G)
    return Sum(params, [(1.0, F), (1.0, G)])


def scale(lam: complex, F: QhmElement) -> QhmElement:
    return Sum(F.params, [(lam, F)])


def linear_combination(params: QhmParams, terms: Iterable[tuple[complex, QhmElement]]):
    terms = list(terms)
    if terms:
        _check_same(*[t for _, t in terms])
    return Sum(params, terms)


def mul(F: QhmElement, G: QhmElement) -> QhmElement:
    if F.is_zero or G.is_zero:
        return zero(_check_same(F, G))
    return Product(F, G)


def star(F: QhmElement) -> QhmElement:
    if isinstance(F, Star):
        return F.a
    return Star(F)


def evaluate(F: QhmElement, p: int, x, y):
    """Pointwise value F(p, x, y) for arbitrary real x and y."""
    if abs(p) > F.params.p_max:
        raise DegreeTruncationError(f"degree {p} is outside the window")
    return F(p, x, y)


def degree_part(F: QhmElement, p: int) -> "DegreePart":
    """The homogeneous component of F in degree p."""
    return DegreePart(F, p)


class DegreePart(QhmElement):
    def __init__(self, a: QhmElement, p: int):
        self.params, self.a, self.p = a.params, a, int(p)
        self.support = frozenset({self.p}) & a.support

    def _jet(self, p, x, y, order):
        return self.a._jet(p, x, y, order)


def build_frame(params: QhmParams) -> tuple[QhmElement, QhmElement]:
    """The two bimodule generators xi_1, xi_2 with sum xi_i* xi_i = sum xi_i xi_i* = 1."""
    return XiLeaf(params, 1), XiLeaf(params, 2)


GENERATOR_NAMES = ("1", "U1", "U1*", "U2", "U2*", "xi1", "xi2", "xi1*", "xi2*")
_GEN_DEGREE = {"1": 0, "U1": 0, "U1*": 0, "U2": 0, "U2*": 0,
               "xi1": 1, "xi2": 1, "xi1*": -1, "xi2*": -1}


def generator(params: QhmParams, name: str) -> QhmElement:
    if name == "1":
        return one(params)
    if name in ("U1", "U1*"):
        return TorusMonomial(params, 1 if name == "U1" else -1, 0)
    if name in ("U2", "U2*"):
        return TorusMonomial(params, 0, 1 if name == "U2" else -1)
    leaf = XiLeaf(params, int(name[2]))
    return Star(leaf) if name.endswith("*") else leaf


def random_element(params: QhmParams, seed: int, length: int, max_degree: int | None = None,
                   n_words: int = 3) -> QhmElement:
    """Deterministic random noncommutative polynomial in the generators.

    Each of ``n_words`` words has at most ``length`` factors drawn from
    ``GENERATOR_NAMES``; coefficients are complex Gaussians damped by
    ``2**-len(word)``.  With ``max_degree`` set, words whose total degree has
    absolute value above it are redrawn, which keeps products of a few such
    elements inside the degree window.
    """
    rng = np.random.default_rng(seed)
    if length == 0:
        w = complex(rng.normal(), rng.normal())
        return scale(w, one(params))
    terms = []
    for _ in range(n_words):
        while True:
            L = int(rng.integers(1, length + 1))
            word = [GENERATOR_NAMES[i] for i in rng.integers(0, len(GENERATOR_NAMES), L)]
            deg = sum(_GEN_DEGREE[g] for g in word)
            if max_degree is None or abs(deg) <= max_degree:
                break
        el = generator(params, word[0])
        for g in word[1:]:
            el = mul(el, generator(params, g))
        w = complex(rng.normal(), rng.normal()) * 2.0 ** (-L)
        terms.append((w, el))
    return Sum(params, terms)


# --------------------------------------------------------------------------
# quadrature, coefficient view and comparison
# --------------------------------------------------------------------------


def quadrature_grid(params: QhmParams, refine: int = 1):
    """Periodic tensor grid on [0,1) x [0,1) used by the trace."""
    nx = params.nx * refine
    ny = 2 * params.ny_halfwidth + 1
    x = np.arange(nx) / nx
    y = np.arange(ny) / ny
    return np.meshgrid(x, y, indexing="ij")


def chebyshev_nodes(n: int) -> np.ndarray:
    """The n + 1 Chebyshev extreme points mapped to [0, 1], in increasing order."""
    return (1.0 - np.cos(np.pi * np.arange(n + 1) / n)) / 2.0


def coefficients(F: QhmElement) -> dict[int, np.ndarray]:
    """Fourier-in-y / nodal-in-x coefficients a_{p,n}(x_k).

    Returns, for each degree p in the support, an array of shape
    ``(2 N_y + 1, nx + 1)`` whose entry ``[n + N_y, k]`` is ``a_{p,n}(x_k)``
    at the Chebyshev node ``x_k``.
    """
    prm = F.params
    N = prm.ny_halfwidth
    M = 2 * N + 1
    xk = chebyshev_nodes(prm.nx)
    yj = np.arange(M) / M
    X, Y = np.meshgrid(xk, yj, indexing="ij")
    out = {}
    for p in sorted(F.support):
        vals = F(p, X, Y)
        a = np.fft.fftshift(np.fft.fft(vals, axis=1) / M, axes=1)
        out[p] = a.T.copy()
    return out


def resynthesize(F: QhmElement, p: int, x, y, coeffs: dict | None = None) -> np.ndarray:
    """Evaluate degree ``p`` of ``F`` from its coefficient view alone.

    Barycentric interpolation through the Chebyshev nodes in x, the Fourier
    series in y, and the fold F(p, x + k, y) = e(k (c p^2 nu - c p y)) F(p, x, y)
    for x outside [0, 1).  Accuracy is set by ``nx``: the error falls
    spectrally as the node count grows.
    """
    prm = F.params
    N = prm.ny_halfwidth
    a = (coefficients(F) if coeffs is None else coeffs)[p]
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    k = np.floor(x)
    nodal = BarycentricInterpolator(chebyshev_nodes(prm.nx), a.T)((x - k).ravel())
    modes = e(np.outer(y.ravel(), np.arange(-N, N + 1)))
    vals = (nodal * modes).sum(axis=1).reshape(x.shape)
    return vals * e(k * (prm.c * p * p * prm.nu - prm.c * p * y))


def fold_residual(F: QhmElement) -> float:
    """max |a_{p,m}(1) - e(c p^2 nu) a_{p,m+cp}(0)| over in-window pairs."""
    prm = F.params
    N = prm.ny_halfwidth
    res = 0.0
    for p, a in coefficients(F).items():
        shift = prm.c * p
        ph = e(prm.c * p * p * prm.nu)
        for m in range(-N, N + 1):
            if -N <= m + shift <= N:
                res = max(res, abs(a[m + N, -1] - ph * a[m + shift + N, 0]))
    return float(res)


def tail_magnitude(F: QhmElement) -> float:
    """Largest |a_{p,n}| at the window edge |n| = N_y."""
    vals = [np.abs(a[[0, -1], :]).max() for a in coefficients(F).values()]
    return float(max(vals, default=0.0))


def check_window(F: QhmElement) -> float:
    """Raise WindowOverflowError if the Fourier tail exceeds tol_num."""
    t = tail_magnitude(F)
    if t > F.params.tol_num:
        raise WindowOverflowError(f"Fourier tail {t:.3e} exceeds tolerance")
    return t


_LATTICE_X = np.linspace(-1.37, 2.21, 23)
_LATTICE_Y = np.linspace(0.0, 1.0, 11, endpoint=False) + 0.013


def distance(F: QhmElement, G: QhmElement) -> float:
    """Coefficient sup-norm and lattice sup-norm of F - G, whichever is larger."""
    _check_same(F, G)
    D = Sum(F.params, [(1.0, F), (-1.0, G)])
    if D.is_zero:
        return 0.0
    coef = max((float(np.abs(a).max()) for a in coefficients(D).values()), default=0.0)
    X, Y = np.meshgrid(_LATTICE_X, _LATTICE_Y, indexing="ij")
    lat = max(float(np.abs(D(p, X, Y)).max()) for p in D.support)
    return max(coef, lat)


def trace(F: QhmElement, refine: int = 1) -> complex:
    """tau(F): integral of F(0, x, y) over the unit square (periodic trapezoid)."""
    if 0 not in F.support:
        return 0j
    X, Y = quadrature_grid(F.params, refine)
    return complex(F(0, X, Y).mean())


def chain_trace(factors: Sequence[QhmElement], refine: int | None = None) -> complex:
    """tau(f_0 f_1 ... f_n) computed without forming intermediate products.

    The degree-0 part of the product is the sum over degree tuples with total 0
    of the pointwise products of the shifted factors, so no degree window is
    needed for intermediate partial products.

    The x-bandwidth of the integrand grows with the number of factors, so by
    default the x grid is oversampled by ceil(n / 2) for n factors.
    """
    if any(f.is_zero for f in factors):
        return 0j
    if refine is None:
        refine = max(1, math.ceil(len(factors) / 2))
    params = _check_same(*factors)
    X, Y = quadrature_grid(params, refine)
    mu, nu = params.mu, params.nu
    n = len(factors)
    supports = [sorted(f.support) for f in factors]
    lo_rest = [sum(min(s) for s in supports[j:]) for j in range(n + 1)]
    hi_rest = [sum(max(s) for s in supports[j:]) for j in range(n + 1)]
    cache: dict = {}

    def value(j, q, D):
        key = (j, q, D)
        if key not in cache:
            cache[key] = factors[j](q, X - 2 * D * mu, Y - 2 * D * nu)
        return cache[key]

    total = 0j

    def walk(j, D, acc):
        nonlocal total
        if j == n:
            if D == 0:
                total += complex(acc.mean())
            return
        for q in supports[j]:
            Dn = D + q
            if not (lo_rest[j + 1] <= -Dn <= hi_rest[j + 1]):
                continue
            walk(j + 1, Dn, acc * value(j, q, D))

    walk(0, 0, np.ones_like(X, dtype=complex))
    return total


# --------------------------------------------------------------------------
# matrices over the algebra
# --------------------------------------------------------------------------


class MatrixElement:
    """k x k matrix with entries in one algebra instance."""

    def __init__(self, entries: Sequence[Sequence[QhmElement]]):
        rows = [tuple(r) for r in entries]
        self.size = len(rows)
        if any(len(r) != self.size for r in rows):
            raise ValueError("matrix must be square")
        self.entries = tuple(rows)
        self.params = _check_same(*[x for r in rows for x in r])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def identity(cls, params: QhmParams, k: int) -> "MatrixElement":
        return cls([[one(params) if i == j else zero(params) for j in range(k)] for i in range(k)])

    @classmethod
    def scalar(cls, params: QhmParams, values) -> "MatrixElement":
        """Constant matrix with the given complex entries."""
        values = np.asarray(values, complex)
        return cls([[scale(values[i, j], one(params)) if values[i, j] != 0 else zero(params)
                     for j in range(values.shape[1])] for i in range(values.shape[0])])

    @classmethod
    def promote(cls, F: QhmElement) -> "MatrixElement":
        return cls([[F]])

    def _check(self, other: "MatrixElement"):
        if other.size != self.size:
            raise ValueError("matrix size mismatch")
        _check_same(self.entries[0][0], other.entries[0][0])

    def __add__(self, other: "MatrixElement") -> "MatrixElement":
        self._check(other)
        k = self.size
        return MatrixElement([[add(self[i, j], other[i, j]) for j in range(k)] for i in range(k)])

    def __sub__(self, other: "MatrixElement") -> "MatrixElement":
        return self + other.scale(-1.0)

    def scale(self, lam: complex) -> "MatrixElement":
        k = self.size
        return MatrixElement([[scale(lam, self[i, j]) for j in range(k)] for i in range(k)])

    def __matmul__(self, other: "MatrixElement") -> "MatrixElement":
        self._check(other)
        k = self.size
        out = []
        for i in range(k):
            row = []
            for j in range(k):
                terms = [(1.0, mul(self[i, l], other[l, j])) for l in range(k)]
                row.append(Sum(self.params, terms))
            out.append(row)
        return MatrixElement(out)

    def star(self) -> "MatrixElement":
        k = self.size
        return MatrixElement([[star(self[j, i]) for j in range(k)] for i in range(k)])

    def map(self, fn) -> "MatrixElement":
        k = self.size
        return MatrixElement([[fn(self[i, j]) for j in range(k)] for i in range(k)])

    def values(self, p: int, x, y) -> np.ndarray:
        """Pointwise matrix values, shape (k, k) + broadcast shape."""
        k = self.size
        x, y = _shapes(x, y)
        out = np.zeros((k, k) + x.shape, complex)
        for i in range(k):
            for j in range(k):
                out[i, j] = self[i, j](p, x, y)
        return out


def matrix_distance(A: MatrixElement, B: MatrixElement) -> float:
    A._check(B)
    return max(distance(A[i, j], B[i, j]) for i in range(A.size) for j in range(A.size))


def matrix_trace(factors: Sequence[MatrixElement], refine: int | None = None) -> complex:
    """(tau # tr)(A_0 A_1 ... A_n) by expanding the matrix-trace index cycle."""
    k = factors[0].size
    total = 0j
    for idx in itertools.product(range(k), repeat=len(factors)):
        chain = [factors[j][idx[j], idx[(j + 1) % len(factors)]] for j in range(len(factors))]
        total += chain_trace(chain, refine)
    return total
