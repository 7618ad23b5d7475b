"""Equations of motion from the degeneracy condition ``i_Xi omega = alpha d eta``.

Phase-space axes are the targetspace axes (fields, then worldsheet) followed
by one axis per momentum coordinate.  The canonical form is
``omega = sum_K dP_K ^ dx^{I_K}``; the residual of the degeneracy condition is
evaluated slot by slot against every basis direction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ChartError, ConfigurationError, UnsupportedKindError
from .exterior import PolyForm, Polyvector, interior, wedge_all
from .lagrangian import MAXWELL_1P1, QUADRATIC_SCALAR, checked_metric
from .legendre import ImplicitSurface
from .models import ModelSpec
from .phase import PhaseSpace
from .polynomial import Polynomial


@dataclass(frozen=True, eq=False)
class ExtendedJet:
    """Pointwise first jet on phase space.

    ``f[a, i]`` is the derivative of field ``a`` along ``x^i``; ``pderiv[K][i]``
    the derivative of momentum ``K`` along ``x^i``; ``P`` the momentum values.
    """

    x: np.ndarray
    phi: np.ndarray
    f: np.ndarray
    P: Mapping[str, float]
    pderiv: Mapping[str, np.ndarray]

    def values(self, phase: PhaseSpace) -> dict[str, float]:
        out = dict(zip(phase.worldsheet_names, self.x))
        out.update(zip(phase.field_names, self.phi))
        out.update(self.P)
        return out


@dataclass
class ResidualReport:
    """Per-equation residual norms keyed by equation tag."""

    max: dict[str, float] = field(default_factory=dict)
    l2: dict[str, float] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add(self, tag: str, values) -> None:
        v = np.abs(np.asarray(values, dtype=float)).ravel()
        self.max[tag] = float(v.max()) if v.size else 0.0
        self.l2[tag] = float(np.sqrt(np.mean(v**2))) if v.size else 0.0

    def worst(self, tags: Sequence[str] | None = None) -> float:
        tags = self.max.keys() if tags is None else tags
        return max((self.max[t] for t in tags), default=0.0)

    def to_json(self) -> str:
        return json.dumps({"max": self.max, "l2": self.l2, "meta": self.meta}, sort_keys=True, indent=1)


@dataclass(frozen=True, eq=False)
class MotionSystem:
    """Closed-form equations for one model family.

    ``momenta(x, phi, f, gauge)`` returns the algebraic relations;
    ``evolution`` maps a label to a polynomial right-hand side.
    ``independent`` and ``redundant`` partition the equation tags; every
    redundant tag carries a certificate statement.
    """

    model: ModelSpec
    sigma: ImplicitSurface
    family: str
    momenta: Callable
    evolution: dict[str, Polynomial]
    independent: tuple[str, ...]
    redundant: tuple[str, ...]
    certificates: dict[str, str]
    tags: dict[str, str]


# --------------------------------------------------------------------------
# structural pieces


def omega_form(phase: PhaseSpace) -> PolyForm:
    """``sum_K dP_K ^ dx^{I_K}`` written in sorted multi-index form."""
    n, T = phase.n_worldsheet, phase.target_dim
    sign = (-1.0) ** n
    return PolyForm(phase.phase_dim, n + 1, {I + (T + k,): sign for k, I in enumerate(phase.indices)})


def tangent_polyvector(phase: PhaseSpace, jet: ExtendedJet) -> Polyvector:
    """``wedge_i (d/dx^i + f[a, i] d/dphi^a + pderiv[K][i] d/dP_K)``."""
    m, T, D = phase.n_fields, phase.target_dim, phase.phase_dim
    f = np.atleast_2d(jet.f)
    vecs = []
    for i in range(phase.n_worldsheet):
        c = {(m + i,): 1.0}
        for a in range(m):
            c[(a,)] = f[a, i]
        for k, name in enumerate(phase.momentum_names):
            c[(T + k,)] = jet.pderiv[name][i]
        vecs.append(Polyvector(D, 1, c))
    return wedge_all(vecs)


def slot_tags(model: ModelSpec) -> dict[str, str]:
    """Equation tag for each phase-space coordinate slot."""
    if model.name == "kg1p1":
        return {"Pphi": "alpha", "P1": "Part2_1", "P0": "Part2_2", "phi": "Part2_3",
                "x0": "Part2_4", "x1": "Part2_5"}
    if model.kind == QUADRATIC_SCALAR:
        tags = {"Pphi": "HE1", "phi": "HE3"}
        for i in range(model.n_worldsheet):
            tags[f"P{i}"] = f"HE2[{i}]"
            tags[f"x{i}"] = f"HE4[{i}]"
        return tags
    if model.kind == MAXWELL_1P1:
        order = ["P_x0x1", "P_A0x0", "P_A0x1", "P_A1x0", "P_A1x1", "P_A0A1", "A0", "A1", "x0", "x1"]
        return {name: f"HEEM{k + 1}" for k, name in enumerate(order)}
    return {name: f"slot[{name}]" for name in model.phase.coordinate_names}


def degeneracy_residual(sigma: ImplicitSurface, jet: ExtendedJet, alpha: float | None = None,
                        phase: PhaseSpace | None = None) -> np.ndarray:
    """Components of ``i_Xi omega - alpha d eta`` in ``phase.coordinate_names`` order.

    With ``alpha=None`` the multiplier is eliminated through the volume
    momentum slot, which then vanishes identically.
    """
    phase = phase or sigma.phase
    if phase is None:
        raise ValueError("surface carries no phase-space description")
    vals = jet.values(phase)
    names = phase.coordinate_names
    deta = np.array([sigma.eta.diff(n)(vals) for n in names], dtype=float)
    Xi = tangent_polyvector(phase, jet)
    ixw = interior(Xi, omega_form(phase)).to_dense()
    if alpha is None:
        k = names.index(phase.volume_momentum)
        if deta[k] == 0:
            raise ChartError("surface does not depend on the volume momentum here; multiplier undefined")
        alpha = ixw[k] / deta[k]
    return ixw - alpha * deta


def residual_by_tag(model: ModelSpec, sigma: ImplicitSurface, jet: ExtendedJet, alpha=None) -> dict[str, float]:
    r = degeneracy_residual(sigma, jet, alpha, model.phase)
    tags = slot_tags(model)
    return {tags[n]: float(v) for n, v in zip(model.phase.coordinate_names, r)}


# --------------------------------------------------------------------------
# algebraic relations


def _scalar_momenta(model: ModelSpec):
    n = model.n_worldsheet
    gc = checked_metric(model.metric)
    gl = np.linalg.inv(gc)
    signs = (-1.0) ** np.arange(n)

    def momenta(x, phi, f, gauge=None):
        P = gc @ (signs * np.asarray(f)[0])
        out = {f"P{i}": P[i] for i in range(n)}
        out["Pphi"] = model.potential([*x, *phi]) - 0.5 * (P @ gl @ P)
        return out

    return momenta


def _ed_momenta(model: ModelSpec):
    C = model.C

    def momenta(x, phi, f, gauge=None):
        Q = 2.0 * C if gauge is None else gauge
        D = Q - 4.0 * C
        r0, r1 = Q * D * f[0, 1], -Q * D * f[1, 0]
        det = (2 * C) ** 2 - (D + 2 * C) ** 2
        a = (2 * C * r0 - (D + 2 * C) * r1) / det
        b = (2 * C * r1 - (D + 2 * C) * r0) / det
        p_a1x0 = Q * f[0, 0]
        p_a0x1 = -Q * f[1, 1]
        S = a + b
        p_vol = model.potential([*x, *phi]) + (a * b - p_a0x1 * p_a1x0 + C * S * S / D) / Q
        return {"P_A0A1": Q, "P_A0x0": a, "P_A0x1": p_a0x1, "P_A1x0": p_a1x0, "P_A1x1": b, "P_x0x1": p_vol}

    return momenta


def build_motion_system(sigma: ImplicitSurface, model: ModelSpec, tol: float = 1e-10) -> MotionSystem:
    """Equations of motion for a recognized surface family."""
    if model.expected_surface is None or sigma.eta.distance(model.expected_surface.eta) > tol:
        raise UnsupportedKindError("surface is not the model's recognized family; use degeneracy_residual")
    tags = slot_tags(model)
    base = model.phase.base_names
    if model.kind == QUADRATIC_SCALAR:
        psi_phi = model.potential.diff("phi")
        evolution = {"laplacian(phi)": psi_phi}
        if model.name == "kg1p1":
            indep = ("alpha", "Part2_1", "Part2_2", "Part2_3")
            red = ("Part2_4", "Part2_5")
        else:
            n = model.n_worldsheet
            indep = ("HE1",) + tuple(f"HE2[{i}]" for i in range(n)) + ("HE3",)
            red = tuple(f"HE4[{k}]" for k in range(n))
        certs = {t: "follows from the momentum relations, the field equation and eta = 0" for t in red}
        return MotionSystem(model, sigma, "scalar", _scalar_momenta(model), evolution, indep, red, certs, tags)
    if model.kind == MAXWELL_1P1:
        # F01 = d0 A1 - d1 A0
        evolution = {
            "d0(F01)": model.potential.diff("A1") / (2.0 * model.C),
            "d1(F01)": model.potential.diff("A0") * (-1.0 / (2.0 * model.C)),
        }
        indep = ("HEEM1", "HEEM2", "HEEM3", "HEEM4", "HEEM5", "HEEM7", "HEEM8")
        red = ("HEEM6", "HEEM9", "HEEM10")
        certs = {
            "HEEM6": "holds when Phi = 0, or in the gauge P_A0A1 = 2C",
            "HEEM9": "combination of HEEM7, HEEM8 and the potential's x0 derivative",
            "HEEM10": "combination of HEEM7, HEEM8 and the potential's x1 derivative",
        }
        return MotionSystem(model, sigma, "ed", _ed_momenta(model), evolution, indep, red, certs, tags)
    raise UnsupportedKindError(model.kind)


def substituted_surface(system: MotionSystem) -> Polynomial:
    """``eta`` with the algebraic momentum relations substituted, over jet variables."""
    model = system.model
    if system.family != "scalar":
        raise UnsupportedKindError("exact substitution is only available for the scalar family")
    n = model.n_worldsheet
    names = model.phase.base_names + tuple(f"f{i}" for i in range(n))
    fvars = np.array([Polynomial.variable(names, f"f{i}") for i in range(n)], dtype=object)
    gc = checked_metric(model.metric)
    gl = np.linalg.inv(gc)
    P = [sum((gc[i, j] * (-1.0) ** j * fvars[j] for j in range(n)), Polynomial(names)) for i in range(n)]
    vals = {v: Polynomial.variable(names, v) for v in model.phase.base_names}
    vals.update({f"P{i}": P[i] for i in range(n)})
    quad = sum((0.5 * gl[i, j] * P[i] * P[j] for i in range(n) for j in range(n)), Polynomial(names))
    vals["Pphi"] = model.potential.with_variables(names) - quad
    out = system.sigma.eta(vals)
    return out.with_variables(names) if isinstance(out, Polynomial) else Polynomial.constant(names, out)


# --------------------------------------------------------------------------
# consistent jets


def _second_order_size(m: int, n: int, gauge: bool) -> int:
    return m * n * (n + 1) // 2 + (n if gauge else 0)


def _unpack(s: np.ndarray, m: int, n: int, gauge: bool):
    H = np.zeros((m, n, n))
    k = 0
    for a in range(m):
        for i in range(n):
            for j in range(i, n):
                H[a, i, j] = H[a, j, i] = s[k]
                k += 1
    q = s[k:k + n] if gauge else np.zeros(n)
    return H, q


def extended_jet(system: MotionSystem, x, phi, f, s, gauge=None) -> ExtendedJet:
    """Jet whose momentum derivatives follow from second-order data ``s`` by the chain rule."""
    model = system.model
    m, n = model.n_fields, model.n_worldsheet
    x, phi, f = np.asarray(x, float), np.asarray(phi, float), np.asarray(f, float)
    H, q = _unpack(np.asarray(s, float), m, n, gauge is not None)
    P = {k: float(np.real(v)) for k, v in system.momenta(x, phi, f, gauge).items()}
    h = 1e-30
    derivs = {k: np.zeros(n) for k in P}
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = 1.0
        g = None if gauge is None else gauge + 1j * h * q[i]
        Pc = system.momenta(x + 1j * h * ei, phi + 1j * h * f[:, i], f + 1j * h * H[:, :, i], g)
        for k, v in Pc.items():
            derivs[k][i] = np.imag(v) / h
    return ExtendedJet(x, phi, f, P, derivs)


def sample_consistent_jets(system: MotionSystem, count: int, rng: np.random.Generator,
                           random_gauge: bool | None = None) -> list[ExtendedJet]:
    """Random jets satisfying the independent equations.

    Random second-order data is projected (minimum-norm least squares) so
    that every independent slot vanishes; the slot residuals are affine in it.
    """
    model = system.model
    m, n = model.n_fields, model.n_worldsheet
    if random_gauge is None:
        random_gauge = system.family == "ed" and not model.potential.terms
    size = _second_order_size(m, n, random_gauge)
    tags = slot_tags(model)
    names = model.phase.coordinate_names
    idx = [names.index(c) for c in names if tags[c] in system.independent]
    out = []
    for _ in range(count):
        x = rng.uniform(-1, 1, n)
        phi = rng.uniform(-1, 1, m)
        f = rng.normal(size=(m, n))
        gauge = model.C * rng.uniform(0.5, 1.5) if random_gauge else None

        def indep(s):
            jet = extended_jet(system, x, phi, f, s, gauge)
            return degeneracy_residual(system.sigma, jet, None, model.phase)[idx]

        s0 = rng.normal(size=size)
        r0 = indep(np.zeros(size))
        A = np.column_stack([indep(e) - r0 for e in np.eye(size)])
        s = s0 - np.linalg.lstsq(A, r0 + A @ s0, rcond=None)[0]
        out.append(extended_jet(system, x, phi, f, s, gauge))
    return out


def redundancy_check(system: MotionSystem, jets: Sequence[ExtendedJet]) -> ResidualReport:
    """Residuals of every slot over ``jets``; redundant tags are the certified ones."""
    rows = [residual_by_tag(system.model, system.sigma, j) for j in jets]
    rep = ResidualReport(meta={"samples": len(jets), "independent": list(system.independent),
                               "redundant": list(system.redundant)})
    for tag in system.independent + system.redundant:
        rep.add(tag, [r[tag] for r in rows])
    return rep


# --------------------------------------------------------------------------
# Euler-Lagrange oracle


def _interior(a: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    sl = tuple(slice(1, -1) if k in axes else slice(None) for k in range(a.ndim))
    return a[sl]


def _d2(u: np.ndarray, i: int, j: int, h: Sequence[float]) -> np.ndarray:
    """Centered second derivative on interior points of every axis."""
    n = u.ndim
    core = tuple(slice(1, -1) for _ in range(n))

    def shifted(di, dj):
        sl = []
        for k in range(n):
            off = (di if k == i else 0) + (dj if k == j else 0)
            sl.append(slice(1 + off, u.shape[k] - 1 + off))
        return u[tuple(sl)]

    if i == j:
        return (shifted(1, 0) - 2 * u[core] + shifted(-1, 0)) / h[i] ** 2
    return (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4 * h[i] * h[j])


def euler_lagrange_residual(model: ModelSpec, field: np.ndarray, spacing: Sequence[float],
                            origin: Sequence[float] | None = None) -> ResidualReport:
    """Centered-difference residual of the field equations at interior points.

    Scalar: ``g^ij d_i d_j phi - dPsi/dphi`` on an N-dimensional grid.
    Electrodynamics: ``field`` has shape ``(2, n0, n1)`` holding ``A0, A1``;
    residuals are ``dPhi/dA0 + 2C d1 F01`` and ``dPhi/dA1 - 2C d0 F01``.
    """
    h = [float(s) for s in spacing]
    rep = ResidualReport(meta={"model": model.name, "spacing": h})
    if model.kind == QUADRATIC_SCALAR:
        u = np.asarray(field, dtype=float)
        n = model.n_worldsheet
        if u.ndim != n or min(u.shape) < 3:
            raise ConfigurationError("scalar field grid must have one axis per worldsheet direction, >= 3 points")
        lap = sum(model.metric[i, j] * _d2(u, i, j, h) for i in range(n) for j in range(n) if model.metric[i, j])
        coords = _interior_coords(u.shape, h, origin)
        dpsi = model.potential.diff("phi")([*coords, u[tuple(slice(1, -1) for _ in range(n))]])
        rep.add("Res", lap - dpsi)
        return rep
    if model.kind == MAXWELL_1P1:
        A = np.asarray(field, dtype=float)
        if A.ndim != 3 or A.shape[0] != 2 or min(A.shape[1:]) < 3:
            raise ConfigurationError("electrodynamics grid must have shape (2, n0, n1) with >= 3 points per axis")
        A0, A1 = A
        d1F = _d2(A1, 0, 1, h) - _d2(A0, 1, 1, h)
        d0F = _d2(A1, 0, 0, h) - _d2(A0, 0, 1, h)
        coords = _interior_coords(A0.shape, h, origin)
        vals = [*coords, A0[1:-1, 1:-1], A1[1:-1, 1:-1]]
        C = model.C
        rep.add("Res1", model.potential.diff("A0")(vals) + 2 * C * d1F)
        rep.add("Res2", model.potential.diff("A1")(vals) - 2 * C * d0F)
        return rep
    raise UnsupportedKindError(model.kind)


def _interior_coords(shape, h, origin):
    origin = np.zeros(len(shape)) if origin is None else np.asarray(origin, float)
    axes = [origin[k] + h[k] * np.arange(1, shape[k] - 1) for k in range(len(shape))]
    return np.meshgrid(*axes, indexing="ij")
