"""Preset models: scalar fields (1+1 and n-dim) and 1+1 electrodynamics.

Each preset carries its closed-form phase-space surface as stored regression
data, plus whatever polynomials the derivation pipeline needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, MembershipError, UnsupportedKindError
from .lagrangian import (
    MAXWELL_1P1,
    QUADRATIC_SCALAR,
    LagrangianDensity,
    QuadricVariety,
    check_metric,
    checked_metric,
    graph_variety,
    homogenize,
    maxwell_1p1,
    quadratic_scalar,
)
from .legendre import ImplicitSurface, affine_chart, constrained_dual_sample, dual_quadric, lift_over_base
from .phase import PhaseSpace, ed_phase, scalar_phase
from .polynomial import Polynomial


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Model constants.

    ``metric`` holds the contravariant ``g^ij`` that enters the Lagrangian.
    ``potential`` is Psi for scalar models and Phi for electrodynamics, as a
    polynomial over ``phase.base_names``.
    """

    name: str
    kind: str
    phase: PhaseSpace
    metric: np.ndarray
    potential: Polynomial
    C0: float | None = None
    expected_surface: ImplicitSurface | None = None
    params: dict = field(default_factory=dict)

    @property
    def n_worldsheet(self) -> int:
        return self.phase.n_worldsheet

    @property
    def n_fields(self) -> int:
        return self.phase.n_fields

    @property
    def C(self) -> float:
        return 2.0 * self.C0

    @property
    def lagrangian(self) -> LagrangianDensity:
        if self.kind == QUADRATIC_SCALAR:
            return quadratic_scalar(self.metric, self.potential)
        return maxwell_1p1(self.C0, self.potential)

    @property
    def gcheck_lower(self) -> np.ndarray:
        """Inverse of the sign-conjugated metric ``(-1)^(i+j) g^ij``."""
        return np.linalg.inv(checked_metric(self.metric))

    def potential_at(self, x, phi) -> float:
        return float(self.potential([*x, *np.atleast_1d(phi)]))


def _mass_potential(base: tuple[str, ...], m: float) -> Polynomial:
    return Polynomial.from_monomials(base, [({"phi": 2}, -0.5 * m * m)])


def scalar_surface(phase: PhaseSpace, ginv: np.ndarray, psi: Polynomial) -> ImplicitSurface:
    """``eta = Pphi + 1/2 gcheck_ij P^i P^j - Psi``."""
    n = phase.n_worldsheet
    names = phase.surface_variables
    gl = np.linalg.inv(checked_metric(ginv))
    P = [Polynomial.variable(names, f"P{i}") for i in range(n)]
    eta = Polynomial.variable(names, "Pphi") - psi.with_variables(names)
    for i in range(n):
        for j in range(n):
            if gl[i, j]:
                eta = eta + 0.5 * gl[i, j] * P[i] * P[j]
    return ImplicitSurface(eta.chop(1e-15), phase)


def scalar_ndim(g, psi: Polynomial | None = None, mass: float | None = None) -> ModelSpec:
    """Scalar field with metric ``g^ij`` and potential Psi (or the mass term ``-1/2 m^2 phi^2``)."""
    ginv = check_metric(g)
    if abs(np.linalg.det(ginv)) < 1e-12:
        raise ConfigurationError("metric must be nondegenerate")
    phase = scalar_phase(len(ginv))
    base = phase.base_names
    if psi is None:
        psi = _mass_potential(base, mass or 0.0)
    psi = psi.with_variables(base)
    return ModelSpec("scalar-ndim", QUADRATIC_SCALAR, phase, ginv, psi,
                     expected_surface=scalar_surface(phase, ginv, psi),
                     params={"metric": ginv.tolist(), "mass": mass})


def kg_1p1(m: float = 0.0) -> ModelSpec:
    """Klein-Gordon in 1+1 with ``g = diag(1, -1)`` and ``Psi = -1/2 m^2 phi^2``."""
    if m < 0:
        raise ConfigurationError("mass must be nonnegative")
    spec = scalar_ndim(np.diag([1.0, -1.0]), mass=m)
    return ModelSpec("kg1p1", spec.kind, spec.phase, spec.metric, spec.potential,
                     expected_surface=spec.expected_surface, params={"mass": m})


def guessed_surface_1p1() -> Polynomial:
    """Massless guess ``p_01 - 1/2 p_phi0^2 + 1/2 p_phi1^2`` in the first-order coordinates."""
    names = ("p_01", "p_phi0", "p_phi1")
    return Polynomial.from_monomials(names, [({"p_01": 1}, 1.0), ({"p_phi0": 2}, -0.5), ({"p_phi1": 2}, 0.5)])


GUESS_RENAMING = {"p_01": "Pphi", "p_phi1": "P0", "p_phi0": "P1"}


def rename(poly: Polynomial, mapping: dict[str, str]) -> Polynomial:
    return Polynomial(tuple(mapping.get(v, v) for v in poly.variables), poly.terms)


# --------------------------------------------------------------------------
# electrodynamics


def ed_surface(phase: PhaseSpace, C: float, phi_pot: Polynomial) -> ImplicitSurface:
    """Dual-variety equation on the chart ``Pi = -1``."""
    names = phase.surface_variables
    v = {n: Polynomial.variable(names, n) for n in phase.momentum_names}
    Q = v["P_A0A1"]
    bracket = Q * (v["P_x0x1"] - phi_pot.with_variables(names)) - v["P_A0x0"] * v["P_A1x1"] + v["P_A0x1"] * v["P_A1x0"]
    S = v["P_A0x0"] + v["P_A1x1"]
    return ImplicitSurface((Q - 4.0 * C) * bracket - C * S * S, phase)


def electrodynamics_1p1(C0: float = 0.25, phi_pot: Polynomial | float | None = None) -> ModelSpec:
    """``L = C F01^2 + Phi`` with ``C = 2 C0``; potentials ``A0, A1`` are the fields."""
    if C0 == 0:
        raise ConfigurationError("C0 must be nonzero")
    phase = ed_phase()
    base = phase.base_names
    if phi_pot is None:
        phi_pot = Polynomial(base)
    elif not isinstance(phi_pot, Polynomial):
        phi_pot = Polynomial.constant(base, float(phi_pot))
    phi_pot = phi_pot.with_variables(base)
    return ModelSpec("ed1p1", MAXWELL_1P1, phase, np.diag([1.0, -1.0]), phi_pot, C0=C0,
                     expected_surface=ed_surface(phase, 2.0 * C0, phi_pot), params={"c0": C0})


def ed_graph_polynomials(model: ModelSpec, x=(0.0, 0.0), A=(0.0, 0.0)) -> tuple[Polynomial, Polynomial]:
    """``(F, pi)`` over ``(Lambda, X...)`` at a base point.

    ``F = Lambda X_x0x1 - C (X_A0x0 + X_A1x1)^2 - Phi X_x0x1^2``; the linear
    combination is ``F01`` in these coordinates.  ``pi`` is the Plücker relation.
    """
    names = ("Lambda",) + model.phase.polyvector_names
    v = {n: Polynomial.variable(names, n) for n in names}
    phi_val = model.potential_at(x, A)
    S = v["X_A0x0"] + v["X_A1x1"]
    vol = v["X_x0x1"]
    F = v["Lambda"] * vol - model.C * S * S - phi_val * vol * vol
    pi = v["X_A0A1"] * vol - v["X_A0x0"] * v["X_A1x1"] + v["X_A0x1"] * v["X_A1x0"]
    return F, pi


def ed_graph_point(model: ModelSpec, f: np.ndarray, scale: float = 1.0, x=(0.0, 0.0), A=(0.0, 0.0)) -> np.ndarray:
    """Point ``(Lambda, X...)`` of the graph variety for the jet ``f[a, i]``."""
    from .exterior import graph_tangent

    v = graph_tangent(np.asarray(f, dtype=float))
    coords = np.array([v[I] for I in model.phase.indices]) * scale
    lam = homogenize(model.lagrangian).chart_value(
        {I: c for I, c in zip(model.phase.indices, coords)}, np.asarray(x), np.asarray(A))
    return np.concatenate([[lam], coords])


def ed_membership(model: ModelSpec, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Relative residuals of the shipped surface on random dual samples."""
    out = np.empty(samples)
    for k in range(samples):
        x = rng.uniform(-1, 1, 2)
        A = rng.uniform(-1, 1, 2)
        X = ed_graph_point(model, rng.normal(size=(2, 2)), rng.uniform(0.5, 2.0) * rng.choice([-1, 1]), x, A)
        F, pi = ed_graph_polynomials(model, x, A)
        alpha, beta = rng.normal(size=2)
        mp = constrained_dual_sample(F, [pi], X, (alpha, beta), model.phase)
        vals = dict(zip(model.phase.base_names, [*x, *A])) | mp.values()
        out[k] = model.expected_surface.relative_residual(vals)
    return out


# --------------------------------------------------------------------------
# derivation pipeline


def derive_surface(model: ModelSpec, check_samples: int = 64, seed: int = 0,
                   tol: float = 1e-9) -> tuple[ImplicitSurface, list[str]]:
    """Run the Lagrangian-to-surface pipeline and return the surface with a step log."""
    log = [f"(a) homogenize: Lambda = X_vol * L(jet) for model {model.name}"]
    if model.kind == QUADRATIC_SCALAR:
        L = model.lagrangian
        base = model.phase.base_names
        n = model.n_worldsheet
        log.append(f"(b) graph quadric over [Lambda : Xphi : X0..X{n - 1}], size {n + 2}, per base point {base}")
        log.append("(c) dual quadric by matrix inversion, normalized to unit max entry")
        log.append("(d) affine chart Pi = -1, coefficient of Pphi set to +1")

        def at(point):
            x, phi = point[:n], point[n]
            return affine_chart(dual_quadric(graph_variety(L, x, phi))).eta

        eta = lift_over_base(at, base, max(model.potential.degree, 0))
        log.append(f"    lifted over the base with polynomial degree {max(model.potential.degree, 0)}")
        surface = ImplicitSurface(eta, model.phase).canonical()
    elif model.kind == MAXWELL_1P1:
        log.append("(b) graph variety {F = 0, pi = 0}: graph equation plus one Plücker relation")
        log.append("(c) dual by P = alpha dF + beta dpi; closed-form surface validated by membership")
        resid = ed_membership(model, check_samples, np.random.default_rng(seed))
        if resid.max() > tol:
            raise MembershipError(f"surface fails membership: max relative residual {resid.max():.3e}")
        log.append(f"    {check_samples} samples, max relative residual {resid.max():.3e}")
        log.append("(d) affine chart Pi = -1")
        surface = model.expected_surface.canonical()
    else:
        raise UnsupportedKindError(model.kind)
    log.append("(e) explicit solution for the volume momentum: not needed, surface kept implicit")
    return surface, log


# --------------------------------------------------------------------------
# worldline toys


def worldline_quadric(V: float = 0.0) -> QuadricVariety:
    """Graph quadric of ``L = 1/2 qdot^2 - V`` over ``[Lambda : Xt : Xq]``."""
    G = np.array([[0.0, 0.5, 0.0], [0.5, V, 0.0], [0.0, 0.0, -0.5]])
    return QuadricVariety(G, ("Lambda", "Xt", "Xq"), ("Pi", "p_t", "p"))


def worldline_surface(V: float = 0.0) -> ImplicitSurface:
    """Chart of the worldline dual; ``p_t = -E`` so the result reads ``E - H(p)``."""
    return affine_chart(dual_quadric(worldline_quadric(V)), lead="p_t", lead_coeff=-1.0)


def cylinder_quadric() -> QuadricVariety:
    """Quadric whose matrix ignores one coordinate, so it is a cone over a lower one."""
    return QuadricVariety(np.diag([1.0, 0.0, -1.0, -1.0]), ("Lambda", "X0", "X1", "X2"))


def by_name(name: str, mass: float = 0.0, metric=None, c0: float = 0.25, phi0: float = 0.0) -> ModelSpec:
    if name == "kg1p1":
        return kg_1p1(mass)
    if name == "scalar-ndim":
        g = np.diag([1.0, -1.0, -1.0]) if metric is None else metric
        return scalar_ndim(g, mass=mass)
    if name == "ed1p1":
        return electrodynamics_1p1(c0, phi0)
    raise ConfigurationError(f"unknown model {name!r}; expected kg1p1, scalar-ndim or ed1p1")
