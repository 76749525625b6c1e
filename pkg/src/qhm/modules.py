"""The projective module E over the algebra, its connexions, and the
isomorphism Phi between the instances (c, mu, nu) and (c, nu, mu).

Vectors of E are smooth functions on R x S^1 with compact support in x.  As
for algebra elements they are lazy nodes returning exact jets, so the module
operations are evaluated from their defining formulas:

    <f, g>_D(p, x, y) = sum_n e(c n p (y - p nu)) conj f(x + n, y) g(x - 2 p mu + n, y - 2 p nu)
    (f . F)(x, y)     = sum_q f(x - 2 q mu, y - 2 q nu) F(-q, x - 2 q mu, y - 2 q nu)
    beta_g f(x, y)    = exp(i pi x (t + s c x / 2) / mu) f(x - r, y - s)

The frame of E consists of y-independent flat-top bumps f_j whose squares,
periodized along 2 mu Z, add up to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import profiles
from .core import (
    TWO_PI_I,
    DegreeTruncationError,
    MatrixElement,
    ParamsError,
    ParamsMismatchError,
    QhmElement,
    QhmParams,
    e,
    leibniz,
    trace,
    zero_jet,
)
from .heisenberg import GroupElem, derive

__all__ = [
    "ModuleVector",
    "PlateauBump",
    "VectorSum",
    "RightAction",
    "Beta",
    "Leg",
    "InnerProductD",
    "ModuleFrame",
    "PhiImage",
    "inner_product_D",
    "right_action",
    "act_beta",
    "connexion_13",
    "connexion_23",
    "curvature_13",
    "curvature_23",
    "build_module_frame",
    "frame_projector",
    "reconstruct",
    "random_vector",
    "pair_even_module",
    "pair_even_module_prime",
    "phi_apply",
    "phi_apply_matrix",
    "phi_action_partner",
    "vector_distance",
]


# --------------------------------------------------------------------------
# module vectors
# --------------------------------------------------------------------------


class ModuleVector:
    """Base class of vectors of E; ``support`` is an open x-interval."""

    params: QhmParams
    support: tuple[float, float]

    def jet(self, x, y, order: int = 0) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return self._jet(x, y, order)

    def _jet(self, x, y, order):  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, x, y):
        return self.jet(x, y, 0)[0, 0]

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        return VectorSum([(1.0, self), (1.0, other)])

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        return VectorSum([(1.0, self), (-1.0, other)])

    def scale(self, lam: complex) -> "ModuleVector":
        return VectorSum([(lam, self)])

    def __mul__(self, F: QhmElement) -> "ModuleVector":
        return right_action(self, F)


def _require_module(params: QhmParams):
    params.require_mu()


class PlateauBump(ModuleVector):
    """amp * h(x) * e(n y) with h rising across [a - d/2, a + d/2], flat, falling across [b - d/2, b + d/2].

    Each edge is the square root of the basic step, so the squares of
    adjacent bumps sharing an edge add up to one.
    """

    def __init__(self, params: QhmParams, a: float, b: float, delta: float,
                 n: int = 0, amp: complex = 1.0):
        if not b - a >= delta > 0:
            raise ValueError("need 0 < delta <= b - a")
        self.params, self.a, self.b, self.delta = params, float(a), float(b), float(delta)
        self.n, self.amp = int(n), complex(amp)
        self.support = (self.a - delta / 2, self.b + delta / 2)

    def profile_jet(self, x, order):
        prof = profiles.sqrt_step()
        d = self.delta
        t_up = (x - self.a) / d + 0.5
        t_dn = (self.b - x) / d + 0.5
        out = []
        for k in range(order + 1):
            up = prof(t_up, k) * d ** (-k)
            dn = prof(t_dn, k) * (-1.0 / d) ** k
            if k == 0:
                out.append(up * dn)
            else:
                # the two edges never overlap, so only one factor varies at a time
                out.append(np.where(x < (self.a + self.b) / 2, up * prof(t_dn), dn * prof(t_up)))
        return out

    def _jet(self, x, y, order):
        h = self.profile_jet(x, order)
        ph = self.amp * e(self.n * y)
        out = zero_jet(x, order)
        for a in range(order + 1):
            for b in range(order + 1 - a):
                out[a, b] = h[a] * (TWO_PI_I * self.n) ** b * ph
        return out


class VectorSum(ModuleVector):
    def __init__(self, terms: Sequence[tuple[complex, ModuleVector]]):
        terms = [(complex(w), v) for w, v in terms]
        if not terms:
            raise ValueError("empty vector sum")
        self.params = terms[0][1].params
        if any(v.params != self.params for _, v in terms):
            raise ParamsMismatchError("vectors belong to different instances")
        self.terms = tuple((w, v) for w, v in terms if w != 0)
        live = [v for _, v in self.terms] or [terms[0][1]]
        self.support = (min(v.support[0] for v in live), max(v.support[1] for v in live))

    def _jet(self, x, y, order):
        out = zero_jet(x, order)
        for w, v in self.terms:
            out = out + w * v._jet(x, y, order)
        return out


class RightAction(ModuleVector):
    def __init__(self, f: ModuleVector, F: QhmElement):
        if f.params != F.params:
            raise ParamsMismatchError("vector and element belong to different instances")
        self.params, self.f, self.F = f.params, f, F
        mu = self.params.mu
        qs = [-p for p in F.support]
        self.support = (min(f.support[0] + 2 * q * mu for q in qs),
                        max(f.support[1] + 2 * q * mu for q in qs)) if qs else f.support

    def _jet(self, x, y, order):
        mu, nu = self.params.mu, self.params.nu
        out = zero_jet(x, order)
        for p in self.F.support:
            q = -p
            xs, ys = x - 2 * q * mu, y - 2 * q * nu
            out = out + leibniz(self.f._jet(xs, ys, order), self.F._jet(p, xs, ys, order), order)
        return out


class Beta(ModuleVector):
    """The covariant action beta_g on a vector."""

    def __init__(self, g: GroupElem, f: ModuleVector):
        _require_module(f.params)
        self.params, self.g, self.f = f.params, g, f
        self.support = (f.support[0] + g.r, f.support[1] + g.r)

    def _jet(self, x, y, order):
        mu, c = self.params.mu, self.params.c
        r, s, t = self.g.r, self.g.s, self.g.t
        inner = self.f._jet(x - r, y - s, order)
        # phase exp(Q(x - r)), Q(u) = i pi (t u + s c u^2 / 2) / mu; evaluating at
        # x - r (translate last) is what makes beta covariant for the action alpha
        u = x - r
        Q1 = 1j * np.pi * (t + s * c * u) / mu
        Q2 = 1j * np.pi * s * c / mu
        E = [np.exp(1j * np.pi * u * (t + s * c * u / 2) / mu)]
        for k in range(order):
            prev2 = E[k - 1] if k >= 1 else 0
            E.append(Q1 * E[k] + k * Q2 * prev2)
        out = zero_jet(x, order)
        for a in range(order + 1):
            for b in range(order + 1 - a):
                out[a, b] = sum(math.comb(a, i) * E[i] * inner[a - i, b] for i in range(a + 1))
        return out


class Leg(ModuleVector):
    """One component of a connexion applied to a vector.

    ``kind`` is ``"x"`` (d/dx), ``"y"`` (d/dy - i pi c x^2 / (2 mu)) or
    ``"p"`` (multiplication by -i pi x / mu).
    """

    def __init__(self, kind: str, f: ModuleVector):
        if kind not in ("x", "y", "p"):
            raise ValueError("kind must be 'x', 'y' or 'p'")
        _require_module(f.params)
        self.params, self.kind, self.f = f.params, kind, f
        self.support = f.support

    def _jet(self, x, y, order):
        mu, c = self.params.mu, self.params.c
        out = zero_jet(x, order)
        if self.kind == "x":
            J = self.f._jet(x, y, order + 1)
            for a in range(order + 1):
                for b in range(order + 1 - a):
                    out[a, b] = J[a + 1, b]
            return out
        if self.kind == "p":
            J = self.f._jet(x, y, order)
            k = -1j * np.pi / mu
            for a in range(order + 1):
                for b in range(order + 1 - a):
                    out[a, b] = k * (x * J[a, b] + (a * J[a - 1, b] if a else 0))
            return out
        J = self.f._jet(x, y, order + 1)
        k = -1j * np.pi * c / (2 * mu)
        for a in range(order + 1):
            for b in range(order + 1 - a):
                val = J[a, b + 1] + k * x * x * J[a, b]
                if a >= 1:
                    val = val + k * 2 * a * x * J[a - 1, b]
                if a >= 2:
                    val = val + k * a * (a - 1) * J[a - 2, b]
                out[a, b] = val
        return out


def vector_distance(f: ModuleVector, g: ModuleVector, n: int = 41) -> float:
    """Sup of |f - g| on a lattice covering both supports."""
    lo = min(f.support[0], g.support[0])
    hi = max(f.support[1], g.support[1])
    X, Y = np.meshgrid(np.linspace(lo, hi, 4 * n), np.linspace(0, 1, n, endpoint=False) + 0.011,
                       indexing="ij")
    return float(np.abs(f(X, Y) - g(X, Y)).max())


def random_vector(params: QhmParams, seed: int, n_terms: int = 3) -> ModuleVector:
    """Seeded sum of plateau bumps with random modes in y, supported in (-1, 1)."""
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(n_terms):
        a = rng.uniform(-0.6, 0.2)
        w = rng.uniform(0.15, 0.35)
        d = rng.uniform(0.05, 0.12)
        bump = PlateauBump(params, a, a + w, min(d, w), int(rng.integers(-2, 3)))
        terms.append((complex(rng.normal(), rng.normal()), bump))
    return VectorSum(terms)


# --------------------------------------------------------------------------
# inner product and right action
# --------------------------------------------------------------------------


class InnerProductD(QhmElement):
    """The algebra-valued inner product <f, g>_D as an algebra element."""

    def __init__(self, f: ModuleVector, g: ModuleVector):
        if f.params != g.params:
            raise ParamsMismatchError("vectors belong to different instances")
        _require_module(f.params)
        self.params, self.f, self.g = f.params, f, g
        mu, P = self.params.mu, self.params.p_max
        lo = f.support[0] - g.support[1]
        hi = f.support[1] - g.support[0]
        # p contributes iff 2 p mu lies in the open interval (lo, hi)
        cand = [p for p in range(-4 * P - 64, 4 * P + 65) if lo < 2 * p * mu < hi]
        if any(abs(p) > P for p in cand):
            raise DegreeTruncationError(
                f"inner product needs degrees {cand[0]}..{cand[-1]} beyond the window {P}"
            )
        self.support = frozenset(cand)

    def _jet(self, p, x, y, order):
        c, mu, nu = self.params.c, self.params.mu, self.params.nu
        flo, fhi = self.f.support
        out = zero_jet(x, order)
        n_lo = int(math.floor(flo - x.max())) if x.size else 0
        n_hi = int(math.ceil(fhi - x.min())) if x.size else -1
        for n in range(n_lo, n_hi + 1):
            F = np.conj(self.f._jet(x + n, y, order))
            G = self.g._jet(x - 2 * p * mu + n, y - 2 * p * nu, order)
            ph = e(c * n * p * (y - p * nu))
            k = TWO_PI_I * c * n * p
            PH = zero_jet(x, order)
            for b in range(order + 1):
                PH[0, b] = k**b * ph
            out = out + leibniz(leibniz(PH, F, order), G, order)
        return out


def inner_product_D(f: ModuleVector, g: ModuleVector) -> QhmElement:
    return InnerProductD(f, g)


def right_action(f: ModuleVector, F: QhmElement) -> ModuleVector:
    _require_module(f.params)
    return RightAction(f, F)


def act_beta(g: GroupElem, f: ModuleVector) -> ModuleVector:
    if g.r == 0 and g.s == 0 and g.t == 0:
        return f
    return Beta(g, f)


# --------------------------------------------------------------------------
# connexions and curvature
# --------------------------------------------------------------------------


def connexion_13(f: ModuleVector) -> tuple[ModuleVector, ModuleVector]:
    """(dx-leg, dp-leg) of the connexion paired with the derivations 1 and 3."""
    return Leg("x", f), Leg("p", f)


def connexion_23(f: ModuleVector) -> tuple[ModuleVector, ModuleVector]:
    """(dy-leg, dp-leg) of the connexion paired with the derivations 2 and 3."""
    return Leg("y", f), Leg("p", f)


def curvature_13(f: ModuleVector) -> ModuleVector:
    """Commutator of the two legs of connexion_13, in leg order."""
    return Leg("x", Leg("p", f)) - Leg("p", Leg("x", f))


def curvature_23(f: ModuleVector) -> ModuleVector:
    return Leg("y", Leg("p", f)) - Leg("p", Leg("y", f))


# --------------------------------------------------------------------------
# frame and even pairings
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ModuleFrame:
    """Bumps f_j with sum_j sum_q f_j(x - 2 q mu)^2 = 1."""

    vectors: tuple[PlateauBump, ...]
    period: float
    delta: float

    def partition_residual(self, n: int = 4001) -> float:
        L = self.period
        x = np.linspace(0.0, L, n)
        total = np.zeros_like(x)
        for f in self.vectors:
            for q in range(-3, 4):
                total += np.abs(f(x - q * L, 0.0)) ** 2
        return float(np.abs(total - 1).max())


def build_module_frame(params: QhmParams) -> ModuleFrame:
    """Frame of E made of k = floor(2|mu|) + 1 bumps per period 2|mu|."""
    _require_module(params)
    L = 2 * abs(params.mu)
    k = int(math.floor(L)) + 1
    step = L / k
    if step >= 1:
        raise ParamsError("infeasible frame geometry")
    delta = 0.9 * min(1 - step, step)
    vecs = tuple(PlateauBump(params, j * step, (j + 1) * step, delta) for j in range(k))
    return ModuleFrame(vecs, L, delta)


def frame_projector(frame: ModuleFrame) -> MatrixElement:
    """The projector (<f_i, f_j>_D) representing E in a matrix algebra."""
    v = frame.vectors
    return MatrixElement([[inner_product_D(a, b) for b in v] for a in v])


def reconstruct(frame: ModuleFrame, g: ModuleVector) -> ModuleVector:
    """sum_j f_j . <f_j, g>_D, which equals g for a frame."""
    return VectorSum([(1.0, right_action(f, inner_product_D(f, g))) for f in frame.vectors])


def pair_even_module(which: str, params: QhmParams, route: str = "connexion") -> complex:
    """Pairing of [E] with tau, phi_13 or phi_23.

    ``route="connexion"`` uses the frame trace of the curvature;
    ``route="projector"`` pairs the frame projector with the cocycle.
    """
    frame = build_module_frame(params)
    if route == "projector":
        from .cyclic import cocycle_from_wedge, pair_even, tau_cochain

        E = frame_projector(frame)
        phi = {"tau": tau_cochain(), "phi13": cocycle_from_wedge((1, 3), params.c),
               "phi23": cocycle_from_wedge((2, 3), params.c)}[which]
        return pair_even(E, phi)
    if route != "connexion":
        raise ValueError(f"unknown route {route!r}")
    curv = {"tau": lambda f: f, "phi13": curvature_13, "phi23": curvature_23}[which]
    return sum((trace(inner_product_D(f, curv(f))) for f in frame.vectors), 0j)


_PRIME_MAP = {"tau": "tau", "phi13": "phi23", "phi23": "phi13"}


def pair_even_module_prime(which: str, params: QhmParams, route: str = "connexion") -> complex:
    """Pairing of the induced module E' with tau, phi_13 or phi_23.

    E' is E over the partner instance pulled back through Phi, so phi_13 and
    phi_23 correspond to phi'_23 and phi'_13 there.  ``route="phi"`` instead
    transports the partner frame projector through Phi and pairs it directly.
    """
    params.require_nu()
    partner = params.swapped()
    if route != "phi":
        return pair_even_module(_PRIME_MAP[which], partner, route)
    from .cyclic import cocycle_from_wedge, pair_even, tau_cochain

    E = phi_apply_matrix(frame_projector(build_module_frame(partner)), target=params)
    phi = {"tau": tau_cochain(), "phi13": cocycle_from_wedge((1, 3), params.c),
           "phi23": cocycle_from_wedge((2, 3), params.c)}[which]
    return pair_even(E, phi)


# --------------------------------------------------------------------------
# the isomorphism Phi
# --------------------------------------------------------------------------


class PhiImage(QhmElement):
    """Phi(F) on the partner instance.

        Phi(F)(-p, x, y) = e(c theta_p(x, y)) F(p, -y, -x),
        theta_p = p x y + p^2 (mu x + nu y) + mu nu p (4 p^2 - 1) / 3.

    On degree 0 it is a(x, y) -> a(-y, -x); on degree 1 it reproduces the
    bimodule map T up to the normalization of the phase.
    """

    def __init__(self, a: QhmElement, target: QhmParams):
        src = a.params
        if (target.c, target.mu, target.nu) != (src.c, src.nu, src.mu):
            raise ParamsMismatchError("target must be the partner instance")
        self.params, self.a = target, a
        self.support = frozenset(-p for p in a.support)

    def _jet(self, pt, x, y, order):
        src = self.a.params
        c, mu, nu = src.c, src.mu, src.nu
        p = -pt
        J = self.a._jet(p, -y, -x, order)
        H = zero_jet(x, order)
        for a in range(order + 1):
            for b in range(order + 1 - a):
                H[a, b] = (-1) ** (a + b) * J[b, a]
        theta = p * x * y + p * p * (mu * x + nu * y) + mu * nu * p * (4 * p * p - 1) / 3
        gx = TWO_PI_I * c * (p * y + p * p * mu)
        gy = TWO_PI_I * c * (p * x + p * p * nu)
        gxy = TWO_PI_I * c * p
        E = zero_jet(x, order)
        E[0, 0] = e(c * theta)
        for b in range(order):
            E[0, b + 1] = gy * E[0, b]
        for a in range(order):
            for b in range(order - a):
                E[a + 1, b] = gx * E[a, b] + (b * gxy * E[a, b - 1] if b else 0)
        return leibniz(E, H, order)


def phi_apply(F: QhmElement, target: QhmParams | None = None) -> QhmElement:
    return PhiImage(F, target if target is not None else F.params.swapped())


def phi_apply_matrix(M: MatrixElement, target: QhmParams | None = None) -> MatrixElement:
    target = target if target is not None else M.params.swapped()
    return M.map(lambda F: phi_apply(F, target))


def phi_action_partner(g: GroupElem, c: int) -> GroupElem:
    """The group element g' with Phi alpha_g = alpha'_{g'} Phi."""
    return GroupElem(-g.s, -g.r, -g.t + c * g.s * g.r)


def induced_derivation_residuals(F: QhmElement) -> list[float]:
    """Residuals of -Phi d1 = d'2 Phi, -Phi d2 = d'1 Phi, -Phi d3 = d'3 Phi."""
    from .core import distance

    out = []
    for i, j in ((1, 2), (2, 1), (3, 3)):
        lhs = phi_apply(derive(i, F)) * -1.0
        rhs = derive(j, phi_apply(F))
        out.append(distance(lhs, rhs))
    return out
