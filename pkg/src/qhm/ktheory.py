"""Matrix-level K-theory data: the unitaries U1, U2, U3, the projectors P+-,
Q+-, the odd pairing table, the reduction identities for the top-degree
pairing, the transfer formula and a finite Toeplitz model of the index map.

U3 = M+ + M- with

    M+ = [[xi1, 0], [-xi2, 0]],      M- = [[0, sigma(xi2)*], [0, sigma(xi1)*]],

P+- = M+- M+-*,  Q+ = diag(1, 0),  Q- = diag(0, 1).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    MatrixElement,
    QhmParams,
    U1,
    U2,
    build_frame,
    distance,
    matrix_distance,
    matrix_trace,
    star,
    zero,
)
from .cyclic import cocycle_from_wedge, pair_even, pair_odd, standard_cocycles
from .heisenberg import derive, sigma

__all__ = [
    "UnitaryTriple",
    "build_unitaries",
    "relation_residuals",
    "odd_table",
    "odd_table_reference",
    "top_degree_direct",
    "top_degree_reduction",
    "top_degree_pairs",
    "d3_eigenvalue",
    "check_reduction_lemmas",
    "pair_P_plus",
    "transfer_check",
    "ToeplitzOperator",
    "shift",
    "corner",
    "toeplitz_lift_U3",
    "toeplitz_index_U3",
    "check_pimsner_axioms",
    "SQRT_I2PI",
]

SQRT_I2PI = cmath.sqrt(2j * np.pi)


@dataclass(frozen=True)
class UnitaryTriple:
    U1: MatrixElement
    U2: MatrixElement
    U3: MatrixElement
    M_plus: MatrixElement
    M_minus: MatrixElement
    P_plus: MatrixElement
    P_minus: MatrixElement
    Q_plus: MatrixElement
    Q_minus: MatrixElement


def build_unitaries(params: QhmParams) -> UnitaryTriple:
    x1, x2 = build_frame(params)
    z = zero(params)
    Mp = MatrixElement([[x1, z], [-x2, z]])
    Mm = MatrixElement([[z, star(sigma(x2))], [z, star(sigma(x1))]])
    U3 = Mp + Mm
    return UnitaryTriple(
        U1=MatrixElement.promote(U1(params)),
        U2=MatrixElement.promote(U2(params)),
        U3=U3,
        M_plus=Mp,
        M_minus=Mm,
        P_plus=Mp @ Mp.star(),
        P_minus=Mm @ Mm.star(),
        Q_plus=MatrixElement.scalar(params, [[1, 0], [0, 0]]),
        Q_minus=MatrixElement.scalar(params, [[0, 0], [0, 1]]),
    )


def relation_residuals(u: UnitaryTriple) -> dict[str, float]:
    """Residuals of the fourteen relations between M+-, P+-, Q+- and of U3 unitarity."""
    prm = u.U3.params
    eye = MatrixElement.identity(prm, 2)
    zero2 = MatrixElement.scalar(prm, np.zeros((2, 2)))
    Mp, Mm, Pp, Pm, Qp, Qm = u.M_plus, u.M_minus, u.P_plus, u.P_minus, u.Q_plus, u.Q_minus
    d = matrix_distance
    return {
        "M+M+*=P+": d(Mp @ Mp.star(), Pp),
        "M-M-*=P-": d(Mm @ Mm.star(), Pm),
        "M+*M+=Q+": d(Mp.star() @ Mp, Qp),
        "M-*M-=Q-": d(Mm.star() @ Mm, Qm),
        "P+^2=P+ and P+*=P+": max(d(Pp @ Pp, Pp), d(Pp.star(), Pp)),
        "P-^2=P- and P-*=P-": max(d(Pm @ Pm, Pm), d(Pm.star(), Pm)),
        "P++P-=I": d(Pp + Pm, eye),
        "Q+-^2=Q+- and Q+-*=Q+-": max(d(Qp @ Qp, Qp), d(Qm @ Qm, Qm), d(Qp.star(), Qp), d(Qm.star(), Qm)),
        "Q++Q-=I": d(Qp + Qm, eye),
        "P+M+=M+": d(Pp @ Mp, Mp),
        "P-M-=M-": d(Pm @ Mm, Mm),
        "M+Q+=M+ and M-Q-=M-": max(d(Mp @ Qp, Mp), d(Mm @ Qm, Mm)),
        "M+M-*=0 and M-M+*=0": max(d(Mp @ Mm.star(), zero2), d(Mm @ Mp.star(), zero2)),
        "M+*M-=0 and M-*M+=0": max(d(Mp.star() @ Mm, zero2), d(Mm.star() @ Mp, zero2)),
        "U3U3*=I": d(u.U3 @ u.U3.star(), eye),
        "U3*U3=I": d(u.U3.star() @ u.U3, eye),
    }


_ODD_COLUMNS = ("phi_1", "phi_2", "phi_3", "phi_123")


def odd_table(params: QhmParams, units: UnitaryTriple | None = None) -> np.ndarray:
    """Rows U1, U2, U3; columns phi_1, phi_2, phi_3, phi_123."""
    u = units or build_unitaries(params)
    cocs = standard_cocycles(params.c)
    out = np.zeros((3, 4), complex)
    for i, U in enumerate((u.U1, u.U2, u.U3)):
        for j, name in enumerate(_ODD_COLUMNS):
            out[i, j] = pair_odd(U, cocs[name])
    return out


def odd_table_reference(params: QhmParams) -> np.ndarray:
    """Published closed forms of the odd table as functions of (c, mu, nu)."""
    c, mu, nu = params.c, params.mu, params.nu
    r = SQRT_I2PI
    return np.array([
        [-r, 0, 0, 0],
        [0, -r, 0, 0],
        [r * 2 * c * nu, -r * 2 * c * mu, 0, (2j * np.pi) ** 1.5 * c / 3],
    ], complex)


def top_degree_direct(params: QhmParams, units: UnitaryTriple | None = None) -> complex:
    u = units or build_unitaries(params)
    return pair_odd(u.U3, cocycle_from_wedge((1, 2, 3), params.c))


def d3_eigenvalue(params: QhmParams, units: UnitaryTriple | None = None) -> complex:
    """The scalar lam with d3 M+ = lam M+, read off at a sample point."""
    u = units or build_unitaries(params)
    x1 = u.M_plus[0, 0]
    lam = complex(derive(3, x1)(1, 0.0, 0.3) / x1(1, 0.0, 0.3))
    if distance(derive(3, x1), lam * x1) > params.tol_alg:
        raise AssertionError("M+ is not a d3 eigenvector")
    return lam


def pair_P_plus(params: QhmParams, units: UnitaryTriple | None = None) -> complex:
    """<P+, phi_12> with the antisymmetrized (Hochschild-only) 2-cochain."""
    u = units or build_unitaries(params)
    return pair_even(u.P_plus, cocycle_from_wedge((1, 2), params.c))


def top_degree_reduction(params: QhmParams, units: UnitaryTriple | None = None,
                         factor: float = 6.0) -> complex:
    """<U3, phi_123> from <P+, phi_12> through the synthesis identity.

    With d3 M+ = lam M+, each antisymmetrized pair T_231 - T_132,
    T_123 - T_213 and T_312 - T_321 of the top-degree sum equals
    2 lam <P+, phi_12> (see :func:`top_degree_pairs`), so

        6 sqrt(2 i pi) <U3, phi_123> = 6 lam <P+, phi_12>.

    ``factor=2.0`` gives the variant in which only the first pair survives.
    """
    u = units or build_unitaries(params)
    lam = d3_eigenvalue(params, u)
    return factor * lam * pair_P_plus(params, u) / (6 * cmath.sqrt(2j * np.pi))


def top_degree_pairs(params: QhmParams, units: UnitaryTriple | None = None) -> dict[str, complex]:
    """The three antisymmetrized pairs of T_ijk = (tau # tr)(A d_i B d_j A d_k B), A = U3* - 1, B = U3 - 1."""
    u = units or build_unitaries(params)
    eye = MatrixElement.identity(params, 2)
    A, B = u.U3.star() - eye, u.U3 - eye

    def T(i, j, k):
        return _tr(A, _dm(i, B), _dm(j, A), _dm(k, B))

    return {
        "231-132": T(2, 3, 1) - T(1, 3, 2),
        "123-213": T(1, 2, 3) - T(2, 1, 3),
        "312-321": T(3, 1, 2) - T(3, 2, 1),
    }


def _dm(i: int, M: MatrixElement) -> MatrixElement:
    return M.map(lambda F: derive(i, F))


def _tr(*mats: MatrixElement) -> complex:
    return matrix_trace(list(mats))


def check_reduction_lemmas(params: QhmParams, units: UnitaryTriple | None = None) -> dict[str, float]:
    """Residuals of the identities used to reduce the top-degree pairing."""
    u = units or build_unitaries(params)
    Mp, Mm, Pp, Pm, Qp, Qm, U = (u.M_plus, u.M_minus, u.P_plus, u.P_minus,
                                 u.Q_plus, u.Q_minus, u.U3)
    M = {+1: Mp, -1: Mm}
    Pj = {+1: Pp, -1: Pm}
    Qj = {+1: Qp, -1: Qm}
    out: dict[str, float] = {}
    zero2 = MatrixElement.scalar(params, np.zeros((2, 2)))
    for sgn in (+1, -1):
        s = "+" if sgn > 0 else "-"
        for i in (1, 2):
            lhs = (_dm(i, M[sgn]) @ M[-sgn].star()) + (M[sgn] @ _dm(i, M[-sgn].star()))
            out[f"R11a{s} i={i}"] = matrix_distance(lhs, zero2)
            lhs = (_dm(i, M[sgn].star()) @ Pj[-sgn]) + (M[sgn].star() @ _dm(i, Pj[-sgn]))
            out[f"R11b{s} i={i}"] = matrix_distance(lhs, zero2)
            lhs = Qj[-sgn] @ _dm(i, M[sgn].star())
            out[f"R21a{s} i={i}"] = matrix_distance(lhs, zero2)
            out[f"R21b{s} i={i}"] = matrix_distance(Qj[sgn] @ _dm(i, M[sgn].star()),
                                                    _dm(i, M[sgn].star()))
            for j in (1, 2):
                if i == j:
                    continue
                dM_i, dMs_j = _dm(i, M[sgn]), _dm(j, M[sgn].star())
                a = _tr(Pj[-sgn], dM_i, dMs_j)
                b = _tr(Pj[sgn], _dm(j, Pj[sgn]), _dm(i, Pj[sgn]))
                out[f"R12{s} ij={i}{j}"] = abs(a - b)
                a = _tr(Pj[sgn], dM_i, dMs_j)
                b0 = _tr(dM_i, dMs_j)
                b1 = _tr(Pj[sgn], _dm(j, Pj[sgn]), _dm(i, Pj[sgn]))
                out[f"R13{s} ij={i}{j} (plus form)"] = abs(a - (b0 + b1))
                out[f"R13{s} ij={i}{j} (minus form)"] = abs(a - (b0 - b1))
                out[f"R22{s} ij={i}{j}"] = abs(_tr(Qj[-sgn], _dm(i, M[sgn].star()), _dm(j, M[sgn])))
                a = _tr(Qj[sgn], _dm(i, M[sgn].star()), _dm(j, M[sgn]))
                out[f"R23{s} ij={i}{j}"] = abs(a - _tr(_dm(i, M[sgn].star()), _dm(j, M[sgn])))
    for i, j in ((1, 2), (2, 1)):
        a = _tr(_dm(i, U), _dm(j, U.star()))
        b = _tr(_dm(i, Mp), _dm(j, Mp.star())) + _tr(_dm(i, Mm), _dm(j, Mm.star()))
        out[f"L2a ij={i}{j}"] = abs(a - b)
    out["L2b"] = abs(_tr(_dm(1, U), _dm(2, U.star())) - _tr(_dm(2, U), _dm(1, U.star())))
    direct = top_degree_direct(params, u)
    p_plus = pair_P_plus(params, u)
    out["synthesis"] = abs(direct - top_degree_reduction(params, u))
    out["synthesis (i4pi literal)"] = abs(6 * SQRT_I2PI * direct - 4j * np.pi * p_plus)
    return out


def transfer_check(params: QhmParams, p_plus_value: complex | None = None,
                   table: np.ndarray | None = None) -> dict[str, float]:
    """Residuals of <U, phi_123> = (-sqrt(i 2 pi) / 3) <dU, phi_12> for U1, U2, U3.

    dU1 = dU2 = 0 and dU3 = [Q-] - [P+]; <Q-, phi_12> vanishes because Q- is
    constant.  ``p_plus_value`` defaults to the computed <P+, phi_12>.
    """
    u = build_unitaries(params)
    if table is None:
        table = np.array([[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, top_degree_direct(params, u)]],
                         complex)
    if p_plus_value is None:
        p_plus_value = pair_P_plus(params, u)
    q_minus = pair_even(u.Q_minus, cocycle_from_wedge((1, 2), params.c))
    boundary = {"U1": 0.0, "U2": 0.0, "U3": q_minus - p_plus_value}
    out = {}
    for row, name in enumerate(("U1", "U2", "U3")):
        predicted = -SQRT_I2PI / 3 * boundary[name]
        out[name] = abs(table[row, 3] - predicted)
    return out


# --------------------------------------------------------------------------
# finite Toeplitz model
# --------------------------------------------------------------------------


def shift(N: int) -> np.ndarray:
    """Truncated unilateral shift S e_k = e_{k+1}."""
    return np.eye(N, k=-1)


def corner(N: int, k: int = 0) -> np.ndarray:
    E = np.zeros((N, N))
    E[k, k] = 1.0
    return E


class ToeplitzOperator:
    """Finite sum of A_k (x) B_k with A_k scalar N x N and B_k a matrix over the algebra."""

    def __init__(self, terms: Sequence[tuple[np.ndarray, MatrixElement]]):
        self.terms = [(np.asarray(A, float), B) for A, B in terms if np.any(A)]
        if not terms:
            raise ValueError("empty operator")
        self.N = terms[0][0].shape[0]
        self.k = terms[0][1].size
        self.params = terms[0][1].params

    def __matmul__(self, other: "ToeplitzOperator") -> "ToeplitzOperator":
        return ToeplitzOperator([(A @ A2, B @ B2) for A, B in self.terms for A2, B2 in other.terms])

    def __add__(self, other: "ToeplitzOperator") -> "ToeplitzOperator":
        return ToeplitzOperator(self.terms + other.terms)

    def star(self) -> "ToeplitzOperator":
        return ToeplitzOperator([(A.T, B.star()) for A, B in self.terms])

    def values(self, p: int, x: float, y: float) -> np.ndarray:
        """Numeric (N k) x (N k) matrix of the degree-p part at the point (x, y)."""
        out = np.zeros((self.N * self.k, self.N * self.k), complex)
        for A, B in self.terms:
            out += np.kron(A, B.values(p, x, y))
        return out


def _embed(params: QhmParams, blocks: dict[tuple[int, int], MatrixElement]) -> MatrixElement:
    """4 x 4 matrix assembled from 2 x 2 blocks at block positions (0|1, 0|1)."""
    z = zero(params)
    grid = [[z] * 4 for _ in range(4)]
    for (bi, bj), M in blocks.items():
        for i in range(2):
            for j in range(2):
                grid[2 * bi + i][2 * bj + j] = M[i, j]
    return MatrixElement(grid)


def toeplitz_lift_U3(params: QhmParams, N: int, units: UnitaryTriple | None = None) -> ToeplitzOperator:
    """The lift [[S M+ + S* M-, P P+], [P Q-, S* M+* + S M-*]] at truncation N."""
    u = units or build_unitaries(params)
    S, P = shift(N), corner(N)
    E = lambda bi, bj, M: _embed(params, {(bi, bj): M})  # noqa: E731
    return ToeplitzOperator([
        (S, E(0, 0, u.M_plus)), (S.T, E(0, 0, u.M_minus)),
        (P, E(0, 1, u.P_plus)), (P, E(1, 0, u.Q_minus)),
        (S.T, E(1, 1, u.M_plus.star())), (S, E(1, 1, u.M_minus.star())),
    ])


SAMPLE_POINTS = [(p, x, y) for p in range(-2, 3) for x, y in ((0.13, 0.71), (0.58, 0.27), (0.91, 0.44))]


def toeplitz_index_U3(params: QhmParams, N: int = 32) -> dict:
    """Compare U (1 + 0) U* with diag(1 - P P+, P Q-) at sample points.

    Returns the interior residual (levels 0..N-2), the residual after
    subtracting the predicted top-level defect -E_top (x) P-, the largest
    entry of the defect outside the top level, and the largest numerical rank
    of the defect block.
    """
    if N < 4:
        raise ValueError("N must be at least 4")
    u = build_unitaries(params)
    L = toeplitz_lift_U3(params, N, u)
    I2 = MatrixElement.identity(params, 2)
    eye = np.eye(N)
    P, Etop = corner(N), corner(N, N - 1)
    left = ToeplitzOperator([(eye, _embed(params, {(0, 0): I2}))])
    lhs = L @ left @ L.star()
    rhs = ToeplitzOperator([
        (eye, _embed(params, {(0, 0): I2})), (P, _embed(params, {(0, 0): u.P_plus}).map(lambda F: -F)),
        (P, _embed(params, {(1, 1): u.Q_minus})),
    ])
    predicted = ToeplitzOperator([(Etop, _embed(params, {(0, 0): u.P_minus}).map(lambda F: -F))])
    interior = corrected = outside = 0.0
    rank = 0
    top = slice(4 * (N - 1), 4 * N)
    for p, x, y in SAMPLE_POINTS:
        D = lhs.values(p, x, y) - rhs.values(p, x, y)
        interior = max(interior, float(np.abs(D[: 4 * (N - 1), : 4 * (N - 1)]).max()))
        mask = np.ones_like(D, bool)
        mask[top, top] = False
        outside = max(outside, float(np.abs(D[mask]).max()))
        corrected = max(corrected, float(np.abs(D - predicted.values(p, x, y)).max()))
        sv = np.linalg.svd(D[top, top], compute_uv=False)
        rank = max(rank, int((sv > 1e-8).sum()))
    trivial = max(matrix_distance(u.U1 @ u.U1.star(), MatrixElement.identity(params, 1)),
                  matrix_distance(u.U2 @ u.U2.star(), MatrixElement.identity(params, 1)))
    return {
        "interior_residual": interior,
        "defect_outside_top": outside,
        "defect_rank": rank,
        "corrected_residual": corrected,
        "boundary": "[Q-] - [P+]",
        "trivial_lift_defect": trivial,
    }


def check_pimsner_axioms(params: QhmParams, N: int = 8, t: float = 0.37) -> dict[str, float]:
    """Covariance axioms for pi(a) = 1 (x) a and T(xi) = S (x) xi at truncation N."""
    x1, x2 = build_frame(params)
    a = U1(params) * 0.5 + U2(params).star() * (0.25 + 0.5j)
    S, eye = shift(N), np.eye(N)
    P, Etop = corner(N), corner(N, N - 1)
    m = MatrixElement.promote
    T1 = ToeplitzOperator([(S, m(x1))])
    T2 = ToeplitzOperator([(S, m(x2))])
    pi_a = ToeplitzOperator([(eye, m(a))])
    Ta1 = ToeplitzOperator([(S, m(a * x1))])
    out = {"i_interior": 0.0, "i_corrected": 0.0, "iii": 0.0, "iv_corrected": 0.0, "gauge": 0.0}
    lhs_i = T1.star() @ T2
    rhs_i = ToeplitzOperator([(eye, m(x1.star() * x2))])
    defect_i = ToeplitzOperator([(-Etop, m(x1.star() * x2))])
    lhs_iii, rhs_iii = pi_a @ T1, Ta1
    lhs_iv = T1 @ T2.star()
    rhs_iv = ToeplitzOperator([(eye, m(x1 * x2.star()))])
    defect_iv = ToeplitzOperator([(-P, m(x1 * x2.star()))])
    W = np.diag(np.exp(2j * np.pi * t * np.arange(N)))
    for p, x, y in SAMPLE_POINTS:
        D = lhs_i.values(p, x, y) - rhs_i.values(p, x, y)
        out["i_interior"] = max(out["i_interior"], float(np.abs(D[: N - 1, : N - 1]).max()))
        out["i_corrected"] = max(out["i_corrected"],
                                 float(np.abs(D - defect_i.values(p, x, y)).max()))
        out["iii"] = max(out["iii"], float(np.abs(lhs_iii.values(p, x, y) - rhs_iii.values(p, x, y)).max()))
        D = lhs_iv.values(p, x, y) - rhs_iv.values(p, x, y)
        out["iv_corrected"] = max(out["iv_corrected"],
                                  float(np.abs(D - defect_iv.values(p, x, y)).max()))
        V = T1.values(p, x, y)
        out["gauge"] = max(out["gauge"],
                           float(np.abs(W @ V @ W.conj().T - np.exp(2j * np.pi * t) * V).max()))
    return out
