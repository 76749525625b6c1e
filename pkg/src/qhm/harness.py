"""Suite orchestration, report emission and the ``qhm`` command line tool.

    qhm verify [--suite all|algebra|heisenberg|cocycles|even|odd|dual|toeplitz] \\
               [--c 2 --mu 0.3 --nu 0.2] [--nx 128 --ny 64 --pmax 4] \\
               [--seed 0] [--json report.json] [--markdown tables.md]
    qhm sweep --resolutions 64,128,256 [same options]

Every check produces a :class:`CheckRecord` comparing a computed value with a
reference value.  References come in three kinds: ``paper-table`` (published
closed forms in (c, mu, nu)), ``derived-oracle`` (an independent computation
or an identity whose exact value is zero) and ``trivial``.  The exit code is
0 iff no check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from . import core, cyclic, heisenberg, ktheory, modules
from .core import QhmParams, QhmError, distance

log = logging.getLogger("qhm")

SUITES = ("algebra", "heisenberg", "cocycles", "even", "odd", "dual", "toeplitz")
PROVENANCES = ("paper-table", "derived-oracle", "trivial")
TOL_TABLE = 1e-4

# The roundoff floor below which a residual carries no convergence information.
ROUNDOFF_FLOOR = 1e-12


@dataclass(frozen=True)
class SuiteConfig:
    params: QhmParams = field(default_factory=QhmParams)
    suites: tuple[str, ...] = SUITES
    seed: int = 0
    n_tuples: int = 20
    toeplitz_n: int = 32
    resolutions: tuple[int, ...] = ()
    json_path: str | None = None
    markdown_path: str | None = None

    def validate(self):
        unknown = set(self.suites) - set(SUITES)
        if unknown:
            raise ValueError(f"unknown suites {sorted(unknown)}")


@dataclass
class CheckRecord:
    id: str
    computed: complex
    reference: complex
    provenance: str
    tol: float
    abs_err: float = float("nan")
    passed: bool = False
    skipped: bool = False
    reason: str = ""
    nx: int = 0
    ny: int = 0
    quadrature: bool = False

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        self.computed = complex(self.computed)
        self.reference = complex(self.reference)
        if not self.skipped:
            self.abs_err = float(abs(self.computed - self.reference))
            self.passed = bool(self.abs_err <= self.tol)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "computed": [self.computed.real, self.computed.imag],
            "reference": [self.reference.real, self.reference.imag],
            "provenance": self.provenance,
            "abs_err": None if self.skipped else self.abs_err,
            "tol": self.tol,
            "pass": self.passed,
            "skipped": self.skipped,
            "reason": self.reason,
            "nx": self.nx,
            "ny": self.ny,
            "quadrature": self.quadrature,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CheckRecord":
        rec = cls(
            id=d["id"],
            computed=complex(*d["computed"]),
            reference=complex(*d["reference"]),
            provenance=d["provenance"],
            tol=d["tol"],
            skipped=d.get("skipped", False),
            reason=d.get("reason", ""),
            nx=d.get("nx", 0),
            ny=d.get("ny", 0),
            quadrature=d.get("quadrature", False),
        )
        if rec.skipped:
            rec.abs_err = float("nan") if d["abs_err"] is None else d["abs_err"]
            rec.passed = d["pass"]
        return rec


def _skip(check_id: str, reason: str, params: QhmParams) -> CheckRecord:
    return CheckRecord(check_id, 0, 0, "trivial", 0.0, skipped=True, reason=reason,
                       nx=params.nx, ny=params.ny_halfwidth)


class _Recorder:
    def __init__(self, params: QhmParams):
        self.params = params
        self.records: list[CheckRecord] = []

    def add(self, check_id, computed, reference=0.0, provenance="derived-oracle",
            tol=None, quadrature=False):
        tol = self.params.tol_num if tol is None else tol
        self.records.append(CheckRecord(check_id, computed, reference, provenance, tol,
                                        nx=self.params.nx, ny=self.params.ny_halfwidth,
                                        quadrature=quadrature))

    def residual(self, check_id, value, quadrature=False, tol=None):
        self.add(check_id, value, 0.0, "derived-oracle", tol, quadrature)

    def skip(self, check_id, reason):
        self.records.append(_skip(check_id, reason, self.params))


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------


def _seeded(params, seed, count, length=2, max_degree=1):
    return [core.random_element(params, seed + k, length, max_degree=max_degree)
            for k in range(count)]


def _with_xi(params, seed):
    """Seeded element with nonzero components in degrees -1, 0 and 1."""
    x1, x2 = core.build_frame(params)
    a = core.random_element(params, seed, 2, max_degree=1)
    return a + x1 * core.U2(params) * 0.5 + x2.star() * core.U1(params) * (0.3 - 0.2j)


def _route(el, via):
    """Evaluator for degree slices of ``el``: closed forms or the coefficient view."""
    if via == "closed":
        return el
    if via != "coefficients":
        raise ValueError(f"unknown evaluation route {via!r}")
    coeffs = core.coefficients(el)
    return lambda p, x, y: core.resynthesize(el, p, x, y, coeffs)


def dense_product_oracle(F1, F2, n: int = 256, via: str = "closed") -> float:
    """max |mul(F1, F2) - sum_q F1(q, x, y) F2(p - q, x - 2 q mu, y - 2 q nu)| on an n x n grid.

    With ``via="coefficients"`` the product is read back from its coefficient
    view instead of its closed form, so the comparison also exercises the
    Chebyshev/Fourier discretization (accurate once ``nx`` is large enough).
    """
    prm = F1.params
    X, Y = np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij")
    prod = core.mul(F1, F2)
    value = _route(prod, via)
    worst = 0.0
    for p in sorted(prod.support):
        direct = np.zeros_like(X, complex)
        for q in F1.support:
            if p - q in F2.support:
                direct += F1(q, X, Y) * F2(p - q, X - 2 * q * prm.mu, Y - 2 * q * prm.nu)
        worst = max(worst, float(np.abs(value(p, X, Y) - direct).max()))
    return worst


def coefficient_view_params(params: QhmParams, factor: int = 16) -> QhmParams:
    """Instance whose coefficient view resolves seeded inputs to well below tol_num.

    The plateau bumps of the module vectors have steep edges, so their
    Chebyshev coefficients decay slowly; 16 nx nodes bring the read-back
    error of <f, g>_D under 1e-7 at the default resolution.
    """
    return replace(params, nx=factor * params.nx)


def suite_algebra(cfg: SuiteConfig) -> list[CheckRecord]:
    prm = cfg.params
    R = _Recorder(prm)
    one = core.one(prm)
    x1, x2 = core.build_frame(prm)
    R.residual("algebra.frame.sum_xi*xi", distance(x1.star() * x1 + x2.star() * x2, one))
    R.residual("algebra.frame.sum_xixi*", distance(x1 * x1.star() + x2 * x2.star(), one))
    a = core.coefficients(x1)[1]
    N = prm.ny_halfwidth
    keep = [N, N - prm.c]
    off = np.delete(a, keep, axis=0)
    R.residual("algebra.frame.fourier_support", float(np.abs(off).max()))
    R.residual("algebra.frame.quasi_periodicity",
               float(abs(x1(1, 1.37, 0.41) - core.e(-prm.c * (0.41 - prm.nu)) * x1(1, 0.37, 0.41))))
    els = _seeded(prm, cfg.seed, 3 * cfg.n_tuples)
    assoc = max(distance((els[3 * k] * els[3 * k + 1]) * els[3 * k + 2],
                         els[3 * k] * (els[3 * k + 1] * els[3 * k + 2])) for k in range(cfg.n_tuples))
    R.residual("algebra.associativity", assoc)
    inv = max(distance(F.star().star(), F) for F in els[:10])
    anti = max(distance((els[k] * els[k + 1]).star(), els[k + 1].star() * els[k].star())
               for k in range(10))
    R.residual("algebra.star_involutive", inv)
    R.residual("algebra.star_antimultiplicative", anti)
    grading = max(len((F * G).support - {p + q for p in F.support for q in G.support})
                  for F, G in zip(els[:10], els[10:20]))
    R.residual("algebra.grading", grading)
    X, Y = np.meshgrid(np.linspace(0, 1, 17), np.linspace(0, 1, 13), indexing="ij")
    lhs = (x1 * x2.star())(0, X, Y)
    R.residual("algebra.inner_product_pointwise", float(np.abs(lhs - x1(1, X, Y) * np.conj(x2(1, X, Y))).max()))
    R.residual("algebra.fold_consistency", max(core.fold_residual(F * G) for F, G in zip(els[:5], els[5:10])))
    R.residual("algebra.tail_decay", max(core.tail_magnitude(F * G) for F, G in zip(els[:5], els[5:10])))
    R.residual("algebra.mul_dense_oracle", dense_product_oracle(x1, x2.star()))
    y1, y2 = core.build_frame(coefficient_view_params(prm))
    R.residual("algebra.mul_coefficient_view_oracle",
               dense_product_oracle(y1, y2.star(), n=64, via="coefficients"), quadrature=True)
    return R.records


def suite_heisenberg(cfg: SuiteConfig) -> list[CheckRecord]:
    prm = cfg.params
    R = _Recorder(prm)
    d = heisenberg.derive
    els = [_with_xi(prm, cfg.seed + k) for k in range(6)]
    F, G = els[0], els[1]
    R.residual("heisenberg.relcomm_12", distance(d(1, d(2, F)) - d(2, d(1, F)), -prm.c * d(3, F)))
    R.residual("heisenberg.relcomm_13", distance(d(1, d(3, F)), d(3, d(1, F))))
    R.residual("heisenberg.relcomm_23", distance(d(2, d(3, F)), d(3, d(2, F))))
    for i in (1, 2, 3):
        R.residual(f"heisenberg.leibniz_{i}", max(distance(d(i, A * B), d(i, A) * B + A * d(i, B))
                                                 for A, B in zip(els[:3], els[3:])))
    R.residual("heisenberg.trace_property",
               max(abs(heisenberg.trace(A * B) - heisenberg.trace(B * A)) for A, B in zip(els[:3], els[3:])),
               quadrature=True)
    R.residual("heisenberg.trace_of_derivation",
               max(abs(heisenberg.trace(d(i, A))) for i in (1, 2, 3) for A in els[:3]), quadrature=True)
    R.residual("heisenberg.trace_positivity",
               max(max(0.0, -heisenberg.trace(A.star() * A).real) for A in els))
    rng = np.random.default_rng(cfg.seed)
    gs = [heisenberg.GroupElem(*rng.uniform(-1, 1, 3)) for _ in range(10)]
    R.residual("heisenberg.trace_invariance",
               max(abs(heisenberg.trace(heisenberg.act_alpha(g, F)) - heisenberg.trace(F)) for g in gs),
               quadrature=True)
    g, h = gs[0], gs[1]
    R.residual("heisenberg.group_law", distance(heisenberg.act_alpha(g, heisenberg.act_alpha(h, F)),
                                               heisenberg.act_alpha(heisenberg.compose(g, h, prm.c), F)))
    R.residual("heisenberg.automorphism", distance(heisenberg.act_alpha(g, F * G),
                                                  heisenberg.act_alpha(g, F) * heisenberg.act_alpha(g, G)))
    worst = 0.0
    for gg in gs[:3]:
        for dc in (heisenberg.DerivationCoeffs(1, 0, 0), heisenberg.DerivationCoeffs(0, 1, 0),
                   heisenberg.DerivationCoeffs(0.3, -0.7, 0.2)):
            worst = max(worst, heisenberg.check_transport(gg, dc, prm)[1])
    R.residual("heisenberg.transport", worst)
    k = heisenberg.sigma_constants(prm)
    R.add("heisenberg.sigma_constants", complex(k[0], k[1]),
          complex(-2 * prm.c * prm.nu, 2 * prm.c * prm.mu), "paper-table", prm.tol_alg)
    x1, x2 = core.build_frame(prm)
    a = core.random_element(prm, cfg.seed + 99, 2, max_degree=0)
    R.residual("heisenberg.sigma_commutation", distance(x1 * a, heisenberg.sigma(a) * x1))
    R.residual("heisenberg.sigma_inner_product",
               distance(heisenberg.sigma(x1.star() * x2), x2 * x1.star()))
    X, Y = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 7), indexing="ij")
    R.residual("heisenberg.sigma_degree0",
               float(np.abs(heisenberg.sigma(a)(0, X, Y) - a(0, X - 2 * prm.mu, Y - 2 * prm.nu)).max()))
    return R.records


def suite_cocycles(cfg: SuiteConfig) -> list[CheckRecord]:
    prm = cfg.params
    R = _Recorder(prm)
    cocs = cyclic.standard_cocycles(prm.c)
    n = cfg.n_tuples
    for name, phi in cocs.items():
        if name == "tau":
            continue
        m = phi.arity
        tuples = [_seeded(prm, cfg.seed + 1000 * k, m + 2) for k in range(n)]
        b = cyclic.hochschild_b(phi)
        R.residual(f"cocycles.{name}.hochschild_b", max(abs(b(*t)) for t in tuples), quadrature=True)
        if phi.cyclic:
            R.residual(f"cocycles.{name}.cyclicity",
                       cyclic.check_cyclicity(phi, [t[: m + 1] for t in tuples]), quadrature=True)
    x1, _ = core.build_frame(prm)
    one = core.one(prm)
    els = _seeded(prm, cfg.seed + 7, 2 * n)
    pairs = list(zip(els[:n], els[n:])) + [(x1.star(), x1)]
    R.residual("cocycles.phi_12.unit_identity",
               max(abs(cocs["phi_12"](one, a, b) - prm.c * cocs["phi_3"](a, b)) for a, b in pairs),
               quadrature=True)
    witness = (x1.star(), x1)
    lower = abs(prm.c * cocs["phi_3"](*witness))
    cyc = cyclic.cyclic_permutation_residual(cocs["phi_12"], (one,) + witness)
    # phi_12 is Hochschild only: on the witness its cyclicity defect is visibly nonzero
    R.add("cocycles.phi_12.noncyclic_witness", float(min(cyc, lower) > 100 * prm.tol_num), 1.0,
          "derived-oracle", 0.0)
    for word, expected in (((1, 3), True), ((2, 3), True), ((1, 2, 3), True), ((1, 2), False)):
        R.add(f"cocycles.wedge{''.join(map(str, word))}",
              float(cyclic.check_wedge_condition(cyclic.WedgeWord(word), prm.c)), float(expected),
              "trivial" if word == (1, 2) else "paper-table", 0.0)
    return R.records


def even_table_reference(params: QhmParams) -> dict[str, complex]:
    """Published closed forms for the even table (|<E', tau>| is compared in magnitude)."""
    tpi = 2j * np.pi
    return {
        "1.tau": 1.0, "E.tau": 2 * params.mu, "E.phi13": -tpi, "E.phi23": 0.0,
        "Eprime.phi13": 0.0, "Eprime.phi23": -tpi, "|Eprime.tau|": 2 * abs(params.nu),
    }


def suite_even(cfg: SuiteConfig) -> list[CheckRecord]:
    prm = cfg.params
    R = _Recorder(prm)
    ref = even_table_reference(prm)
    R.add("even.1.tau", heisenberg.trace(core.one(prm)), ref["1.tau"], "paper-table", TOL_TABLE)
    if prm.mu == 0:
        R.skip("even.E", "the module E needs mu != 0")
    else:
        for w in ("tau", "phi13", "phi23"):
            val = modules.pair_even_module(w, prm)
            R.add(f"even.E.{w}", val, ref[f"E.{w}"], "paper-table", TOL_TABLE, quadrature=True)
            R.add(f"even.E.{w}.projector_route", modules.pair_even_module(w, prm, "projector"), val,
                  "derived-oracle", TOL_TABLE, quadrature=True)
        _module_structure(R, cfg)
        _phi_structure(R, cfg)
    if prm.nu == 0:
        R.skip("even.Eprime", "the module E' needs nu != 0")
    else:
        for w in ("tau", "phi13", "phi23"):
            val = modules.pair_even_module_prime(w, prm)
            if w == "tau":
                R.add("even.Eprime.|tau|", abs(val), ref["|Eprime.tau|"], "paper-table", TOL_TABLE,
                      quadrature=True)
                R.add("even.Eprime.tau.signed", val, 2 * prm.nu, "derived-oracle", TOL_TABLE,
                      quadrature=True)
            else:
                R.add(f"even.Eprime.{w}", val, ref[f"Eprime.{w}"], "paper-table", TOL_TABLE,
                      quadrature=True)
            R.add(f"even.Eprime.{w}.phi_route", modules.pair_even_module_prime(w, prm, "phi"), val,
                  "derived-oracle", TOL_TABLE, quadrature=True)
    return R.records


def dense_inner_product_oracle(f, g, n: int = 64, via: str = "closed") -> float:
    """Compare <f, g>_D (closed form or coefficient view) with its defining sum."""
    prm = f.params
    X, Y = np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij")
    ip = modules.inner_product_D(f, g)
    value = _route(ip, via)
    worst = 0.0
    for p in sorted(ip.support):
        direct = np.zeros_like(X, complex)
        for m in range(-4, 5):
            direct += (core.e(prm.c * m * p * (Y - p * prm.nu)) * np.conj(f(X + m, Y))
                       * g(X - 2 * p * prm.mu + m, Y - 2 * p * prm.nu))
        worst = max(worst, float(np.abs(value(p, X, Y) - direct).max()))
    return worst


def dense_right_action_oracle(f, F, n: int = 64, via: str = "closed") -> float:
    """Compare f.F with its defining sum, reading F from closed forms or coefficients."""
    prm = f.params
    X, Y = np.meshgrid(np.linspace(-1.5, 1.5, 2 * n), np.arange(n) / n, indexing="ij")
    coef = _route(F, via)
    direct = np.zeros_like(X, complex)
    for p in F.support:
        q = -p
        direct += f(X - 2 * q * prm.mu, Y - 2 * q * prm.nu) * coef(p, X - 2 * q * prm.mu, Y - 2 * q * prm.nu)
    return float(np.abs(modules.right_action(f, F)(X, Y) - direct).max())


def _module_structure(R: _Recorder, cfg: SuiteConfig):
    prm = cfg.params
    vecs = [modules.random_vector(prm, cfg.seed + k) for k in range(5)]
    els = [core.random_element(prm, cfg.seed + 50 + k, 2, max_degree=1) for k in range(4)]
    f, g = vecs[0], vecs[1]
    F, G = els[0], els[1]
    ip = modules.inner_product_D
    R.residual("even.module.adjoint", distance(ip(f, g).star(), ip(g, f)))
    R.residual("even.module.linearity", distance(ip(f, modules.right_action(g, F)), ip(f, g) * F))
    R.residual("even.module.associativity",
               modules.vector_distance(modules.right_action(modules.right_action(f, F), G),
                                       modules.right_action(f, F * G)))
    R.residual("even.module.unit", modules.vector_distance(modules.right_action(f, core.one(prm)), f))
    R.residual("even.module.positivity", max(0.0, -heisenberg.trace(ip(f, f)).real))
    R.residual("even.module.fold", core.fold_residual(ip(f, g)))
    R.residual("even.module.inner_product_oracle", dense_inner_product_oracle(f, g))
    R.residual("even.module.right_action_oracle", dense_right_action_oracle(f, F))
    fine = coefficient_view_params(prm)
    ff, gf = modules.random_vector(fine, cfg.seed), modules.random_vector(fine, cfg.seed + 1)
    Ff = core.random_element(fine, cfg.seed + 50, 2, max_degree=1)
    R.residual("even.module.inner_product_coefficient_view_oracle",
               dense_inner_product_oracle(ff, gf, via="coefficients"), quadrature=True)
    R.residual("even.module.right_action_coefficient_view_oracle",
               dense_right_action_oracle(ff, Ff, via="coefficients"), quadrature=True)
    rng = np.random.default_rng(cfg.seed + 5)
    worst = 0.0
    for _ in range(3):
        gg = heisenberg.GroupElem(*rng.uniform(-0.5, 0.5, 3))
        worst = max(worst, modules.vector_distance(
            modules.act_beta(gg, modules.right_action(f, F)),
            modules.right_action(modules.act_beta(gg, f), heisenberg.act_alpha(gg, F))))
    R.residual("even.module.beta_covariance", worst)
    frame = modules.build_module_frame(prm)
    R.residual("even.module.frame_partition", frame.partition_residual())
    R.residual("even.module.frame_reconstruction",
               max(modules.vector_distance(modules.reconstruct(frame, v), v) for v in vecs))
    fF = modules.right_action(f, F)
    d = heisenberg.derive
    legs = (("x", 1), ("y", 2), ("p", 3))
    R.residual("even.module.connexion_leibniz", max(
        modules.vector_distance(modules.Leg(k, fF),
                                modules.right_action(modules.Leg(k, f), F) + modules.right_action(f, -d(i, F)))
        for k, i in legs))
    R.residual("even.module.curvature_13",
               max(modules.vector_distance(modules.curvature_13(v), v.scale(-1j * np.pi / prm.mu)) for v in vecs))
    R.residual("even.module.curvature_23",
               max(modules.vector_distance(modules.curvature_23(v), v.scale(0.0)) for v in vecs))
    # generators of beta against the closed-form legs (central differences)
    R.residual("even.module.legs_from_beta", legs_from_beta_residual(f))


def legs_from_beta_residual(f, h: float = 1e-4) -> float:
    """Five-point central differences of beta along the three one-parameter
    subgroups, compared with the closed-form connexion legs (d/dt beta = -leg)."""
    X, Y = np.meshgrid(np.linspace(-0.8, 0.8, 33), np.linspace(0, 1, 9), indexing="ij")
    worst = 0.0
    for kind, gen in (("x", lambda t: heisenberg.GroupElem(t, 0, 0)),
                      ("y", lambda t: heisenberg.GroupElem(0, t, 0)),
                      ("p", lambda t: heisenberg.GroupElem(0, 0, t))):
        v = {k: modules.act_beta(gen(k * h), f)(X, Y) for k in (-2, -1, 1, 2)}
        fd = (v[-2] - 8 * v[-1] + 8 * v[1] - v[2]) / (12 * h)
        worst = max(worst, float(np.abs(fd + modules.Leg(kind, f)(X, Y)).max()))
    return worst


def _phi_structure(R: _Recorder, cfg: SuiteConfig):
    prm = cfg.params
    els = [_with_xi(prm, cfg.seed + 70 + k) for k in range(4)]
    F, G = els[0], els[1]
    Phi = modules.phi_apply
    R.residual("even.phi.multiplicative", distance(Phi(F * G), Phi(F) * Phi(G)))
    R.residual("even.phi.star", distance(Phi(F.star()), Phi(F).star()))
    R.residual("even.phi.trace", abs(heisenberg.trace(Phi(F * G)) - heisenberg.trace(F * G)), quadrature=True)
    R.residual("even.phi.U1", distance(Phi(core.U1(prm)), core.torus(prm.swapped(), 0, -1)))
    rng = np.random.default_rng(cfg.seed + 9)
    worst = 0.0
    for _ in range(3):
        g = heisenberg.GroupElem(*rng.uniform(-0.5, 0.5, 3))
        worst = max(worst, distance(Phi(heisenberg.act_alpha(g, F)),
                                    heisenberg.act_alpha(modules.phi_action_partner(g, prm.c), Phi(F))))
    R.residual("even.phi.action_intertwining", worst)
    R.residual("even.phi.derivation_intertwining", max(modules.induced_derivation_residuals(F)))
    back = modules.phi_apply(Phi(F), target=prm)
    R.residual("even.phi.involutive", distance(back, F))
    a = els[:3]
    pa = [Phi(x) for x in a]
    for w_src, w_dst in (((2, 3), (1, 3)), ((1, 3), (2, 3))):
        phi_src = cyclic.cocycle_from_wedge(w_src, prm.c)
        phi_dst = cyclic.cocycle_from_wedge(w_dst, prm.c)
        R.residual(f"even.phi.pullback_phi'{''.join(map(str, w_dst))}",
                   abs(phi_dst(*pa) - phi_src(*a)), quadrature=True)


def suite_odd(cfg: SuiteConfig) -> list[CheckRecord]:
    prm = cfg.params
    R = _Recorder(prm)
    u = ktheory.build_unitaries(prm)
    for name, val in ktheory.relation_residuals(u).items():
        R.residual(f"odd.relations.{name}", val)
    table = ktheory.odd_table(prm, u)
    ref = ktheory.odd_table_reference(prm)
    rows, cols = ("U1", "U2", "U3"), ("phi_1", "phi_2", "phi_3", "phi_123")
    for i, rname in enumerate(rows):
        for j, cname in enumerate(cols):
            R.add(f"odd.table.{rname}.{cname}", table[i, j], ref[i, j], "paper-table", TOL_TABLE,
                  quadrature=True)
    oracle = odd_u3_product_oracle(prm, u)
    for j, cname in enumerate(cols):
        R.add(f"odd.table.U3.{cname}.product_oracle", table[2, j], oracle[j], "derived-oracle",
              TOL_TABLE, quadrature=True)
    red = ktheory.top_degree_reduction(prm, u)
    R.add("odd.top_degree.routes_agree", table[2, 3], red, "derived-oracle", TOL_TABLE, quadrature=True)
    for k, v in ktheory.check_reduction_lemmas(prm, u).items():
        # the printed sign of the third relation and the literal synthesis constant
        # are compared as published; the corrected forms are derived identities
        published = "plus form" in k or "literal" in k
        R.add(f"odd.reduction.{k}", v, 0.0, "paper-table" if published else "derived-oracle",
              TOL_TABLE, quadrature=True)
    lam = ktheory.d3_eigenvalue(prm, u)
    for k, v in ktheory.top_degree_pairs(prm, u).items():
        R.add(f"odd.top_degree.pair_{k}", v, 2 * lam * ktheory.pair_P_plus(prm, u), "derived-oracle",
              TOL_TABLE, quadrature=True)
    p_plus = ktheory.pair_P_plus(prm, u)
    R.add("odd.P_plus.phi_12", p_plus, 2j * np.pi * prm.c, "paper-table", TOL_TABLE, quadrature=True)
    q_minus = cyclic.pair_even(u.Q_minus, cyclic.cocycle_from_wedge((1, 2), prm.c))
    R.add("odd.Q_minus.phi_12", q_minus, 0.0, "trivial", TOL_TABLE)
    tr = ktheory.transfer_check(prm, p_plus_value=2j * np.pi * prm.c, table=table)
    for k, v in tr.items():
        R.add(f"odd.transfer.{k}", v, 0.0, "paper-table", TOL_TABLE, quadrature=True)
    ratio = table[2, 3] / (q_minus - p_plus)
    R.add("odd.transfer.implied_constant", ratio, ktheory.SQRT_I2PI, "derived-oracle", TOL_TABLE,
          quadrature=True)
    return R.records


def odd_u3_product_oracle(params: QhmParams, u=None) -> list[complex]:
    """U3 row of the odd table with every matrix product formed explicitly."""
    import itertools

    u = u or ktheory.build_unitaries(params)
    eye = core.MatrixElement.identity(params, 2)
    A, B = u.U3.star() - eye, u.U3 - eye

    def dm(i, M):
        return M.map(lambda F: heisenberg.derive(i, F))

    def tr(M):
        return sum(heisenberg.trace(M[k, k]) for k in range(M.size))

    out = [cyclic.odd_normalization(1) * tr(A @ dm(i, B)) for i in (1, 2, 3)]
    top = 0j
    for perm in itertools.permutations((1, 2, 3)):
        sgn = cyclic._perm_sign([k - 1 for k in perm])
        top += sgn * tr(A @ dm(perm[0], B) @ dm(perm[1], A) @ dm(perm[2], B))
    out.append(cyclic.odd_normalization(3) * top)
    return out


def suite_dual(cfg: SuiteConfig) -> list[CheckRecord]:
    prm = cfg.params
    R = _Recorder(prm)
    cycles = cyclic.build_dual_cycles(prm)
    cocs = cyclic.standard_cocycles(prm.c)
    tpi = 2j * np.pi
    for name, ch in cycles.items():
        R.residual(f"dual.{name}.closed", cyclic.check_chain_closed(ch, cfg.seed))
    lam = ktheory.d3_eigenvalue(prm)
    R.add("dual.c_1.phi_1", cyclic.pair_chain(cycles["c_1"], cocs["phi_1"]), -tpi, "derived-oracle",
          TOL_TABLE, quadrature=True)
    R.add("dual.c_2.phi_2", cyclic.pair_chain(cycles["c_2"], cocs["phi_2"]), -tpi, "derived-oracle",
          TOL_TABLE, quadrature=True)
    R.add("dual.c_3.phi_3", cyclic.pair_chain(cycles["c_3"], cocs["phi_3"]), lam, "derived-oracle",
          TOL_TABLE, quadrature=True)
    for k in ("c_13", "c_23"):
        phi = cocs["phi_" + k[2:]]
        val = cyclic.pair_chain(cycles[k], phi)
        R.add(f"dual.{k}.{phi.label}.nonzero", float(abs(val) > TOL_TABLE), 1.0, "derived-oracle", 0.0)
    val = cyclic.pair_chain(cycles["c_123"], cocs["phi_123"])
    R.add("dual.c_123.phi_123", val / abs(6 * tpi**3), 6 * tpi**3 / abs(6 * tpi**3), "paper-table",
          TOL_TABLE, quadrature=True)
    R.add("dual.c_123.phi_123.derived", val, 6 * (tpi**2) * lam, "derived-oracle", TOL_TABLE,
          quadrature=True)
    families = {1: (("c_1", "c_2", "c_3"), ("phi_1", "phi_2", "phi_3")),
                2: (("c_13", "c_23"), ("phi_13", "phi_23"))}
    for deg, (cs, ps) in families.items():
        for ck in cs:
            for pk in ps:
                if ck[2:] == pk[4:]:
                    continue
                R.add(f"dual.offdiag.{ck}.{pk}", cyclic.pair_chain(cycles[ck], cocs[pk]), 0.0,
                      "paper-table", TOL_TABLE, quadrature=True)
    R.add("dual.c_3.phi_2.closed_form", cyclic.pair_chain(cycles["c_3"], cocs["phi_2"]),
          tpi * prm.c * (prm.mu - 0.25), "derived-oracle", TOL_TABLE, quadrature=True)
    return R.records


def suite_toeplitz(cfg: SuiteConfig) -> list[CheckRecord]:
    prm = cfg.params
    R = _Recorder(prm)
    res = ktheory.toeplitz_index_U3(prm, cfg.toeplitz_n)
    R.residual("toeplitz.interior", res["interior_residual"])
    R.residual("toeplitz.defect_outside_top", res["defect_outside_top"])
    R.residual("toeplitz.defect_matches_prediction", res["corrected_residual"])
    R.add("toeplitz.defect_rank_le_2", float(res["defect_rank"] <= 2), 1.0, "derived-oracle", 0.0)
    R.residual("toeplitz.trivial_lifts", res["trivial_lift_defect"])
    for k, v in ktheory.check_pimsner_axioms(prm).items():
        R.residual(f"toeplitz.axiom_{k}", v)
    return R.records


SUITE_FUNCS: dict[str, Callable[[SuiteConfig], list[CheckRecord]]] = {
    "algebra": suite_algebra,
    "heisenberg": suite_heisenberg,
    "cocycles": suite_cocycles,
    "even": suite_even,
    "odd": suite_odd,
    "dual": suite_dual,
    "toeplitz": suite_toeplitz,
}


def run_suite(cfg: SuiteConfig) -> list[CheckRecord]:
    """Run the selected suites in dependency order; output sorted by check id."""
    cfg.validate()
    records: list[CheckRecord] = []
    for name in SUITES:
        if name not in cfg.suites:
            continue
        log.info("running suite %s", name)
        try:
            records.extend(SUITE_FUNCS[name](cfg))
        except QhmError as exc:
            records.append(_skip(f"{name}.suite", f"{type(exc).__name__}: {exc}", cfg.params))
    return sorted(records, key=lambda r: r.id)


def summarize(records: Iterable[CheckRecord]) -> dict[str, int]:
    records = list(records)
    skipped = sum(r.skipped for r in records)
    passed = sum(r.passed and not r.skipped for r in records)
    return {"passed": passed, "failed": len(records) - passed - skipped, "skipped": skipped}


def report(cfg: SuiteConfig, records: list[CheckRecord]) -> dict:
    return {
        "params": asdict(cfg.params),
        "checks": [r.to_dict() for r in records],
        "summary": summarize(records),
    }


def _fmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:+.6f}{z.imag:+.6f}i"


def emit_tables(records: Iterable[CheckRecord]) -> str:
    """Markdown tables for the even and odd pairing cells."""
    records = list(records)
    head = "| cell | computed | reference | abs err | pass |\n|---|---|---|---|---|\n"
    even = [r for r in records if r.id.startswith("even.") and r.provenance == "paper-table"]
    odd = [r for r in records if r.id.startswith("odd.table.") and r.provenance == "paper-table"]
    out = []
    for title, rows in (("Even pairings", even), ("Odd pairings", odd)):
        body = "".join(f"| {r.id} | {_fmt(r.computed)} | {_fmt(r.reference)} | {r.abs_err:.2e} | "
                       f"{'yes' if r.passed else 'NO'} |\n" for r in rows)
        out.append(f"### {title}\n\n{head}{body}")
    return "\n".join(out)


def sweep(cfg: SuiteConfig, resolutions: Iterable[int]) -> dict:
    """Run the suites at several nx values (ny_halfwidth scaled along) and tabulate errors.

    A quadrature-bound derived check is flagged when doubling the resolution
    does not at least halve its error, unless the finer error is already at
    the roundoff floor.  Published-value cells are tabulated but not gated:
    their error measures a fixed discrepancy, not discretization.
    """
    resolutions = sorted(set(int(r) for r in resolutions))
    if len(resolutions) < 2:
        raise ValueError("a sweep needs at least two resolutions")
    base = cfg.params
    per: dict[str, list[float]] = {}
    gated: dict[str, bool] = {}
    for nx in resolutions:
        ny = max(int(round(base.ny_halfwidth * nx / base.nx)),
                 core.min_ny_halfwidth(base.c, base.mu, base.p_max))
        prm = replace(base, nx=nx, ny_halfwidth=ny)
        for r in run_suite(replace(cfg, params=prm)):
            if r.skipped:
                continue
            per.setdefault(r.id, []).append(r.abs_err)
            gated[r.id] = r.quadrature and r.provenance == "derived-oracle"
    flagged = []
    for cid, errs in per.items():
        if not gated[cid] or len(errs) != len(resolutions):
            continue
        if any(b > max(a / 2, ROUNDOFF_FLOOR) for a, b in zip(errs, errs[1:])):
            flagged.append(cid)
    return {"resolutions": resolutions, "errors": per,
            "gated": sorted(k for k, v in gated.items() if v), "non_monotone": sorted(flagged)}


# --------------------------------------------------------------------------
# command line
# --------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--suite", default="all",
                        help="all or a comma-separated subset of " + ",".join(SUITES))
    common.add_argument("--c", type=int, default=2)
    common.add_argument("--mu", type=float, default=0.3)
    common.add_argument("--nu", type=float, default=0.2)
    common.add_argument("--nx", type=int, default=128)
    common.add_argument("--ny", type=int, default=None, help="Fourier half-width (default: 64 or the minimum)")
    common.add_argument("--pmax", type=int, default=4)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tuples", type=int, default=20, help="seeded tuples per cocycle check")
    common.add_argument("--json", dest="json_path")
    common.add_argument("--markdown", dest="markdown_path")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="qhm", description="Numerical verification of pairings on quantum Heisenberg manifolds.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the verification suites")
    sw = sub.add_parser("sweep", parents=[common], help="convergence sweep over nx")
    sw.add_argument("--resolutions", default="64,128,256")
    return p


def config_from_args(args) -> SuiteConfig:
    ny = args.ny
    if ny is None:
        ny = max(64, core.min_ny_halfwidth(args.c, args.mu, args.pmax))
    params = QhmParams(c=args.c, mu=args.mu, nu=args.nu, nx=args.nx, ny_halfwidth=ny, p_max=args.pmax)
    suites = SUITES if args.suite == "all" else tuple(s.strip() for s in args.suite.split(","))
    res = tuple(int(r) for r in args.resolutions.split(",")) if getattr(args, "resolutions", None) else ()
    cfg = SuiteConfig(params=params, suites=suites, seed=args.seed, n_tuples=args.tuples,
                      resolutions=res, json_path=args.json_path, markdown_path=args.markdown_path)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
    except (ValueError, QhmError) as exc:
        print(f"qhm: invalid configuration: {exc}", file=sys.stderr)
        return 2
    if args.command == "sweep":
        out = sweep(cfg, cfg.resolutions)
        for cid in sorted(out["errors"]):
            errs = " ".join(f"{e:.2e}" for e in out["errors"][cid])
            flag = "  NON-MONOTONE" if cid in out["non_monotone"] else ""
            print(f"{cid:60s} {errs}{flag}")
        if cfg.json_path:
            with open(cfg.json_path, "w") as fh:
                json.dump(out, fh, indent=2, sort_keys=True)
        return 1 if out["non_monotone"] else 0
    records = run_suite(cfg)
    for r in records:
        status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
        detail = r.reason if r.skipped else f"err={r.abs_err:.2e} tol={r.tol:.0e} [{r.provenance}]"
        print(f"{status} {r.id:60s} {detail}")
    summ = summarize(records)
    print(f"passed={summ['passed']} failed={summ['failed']} skipped={summ['skipped']}")
    if cfg.json_path:
        with open(cfg.json_path, "w") as fh:
            json.dump(report(cfg, records), fh, indent=2, sort_keys=True)
    if cfg.markdown_path:
        with open(cfg.markdown_path, "w") as fh:
            fh.write(emit_tables(records))
    return 0 if summ["failed"] == 0 else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
