"""Time integration of the derived first-order systems on periodic 1-D grids.

Klein-Gordon 1+1: ``phi`` and ``P0`` are stepped by velocity Verlet, ``P1`` is
recomputed from ``phi`` (wide centered difference) and ``Pphi`` follows the
x0-slot equation, so ``eta`` is a genuine drift diagnostic.  The reference
oracle integrates the second-order field equation with the compact
Laplacian.  Electrodynamics uses the temporal gauge ``d0 A0 = 0``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ConfigurationError, UnsupportedKindError
from .lagrangian import MAXWELL_1P1, QUADRATIC_SCALAR
from .models import ModelSpec
from .motion import _ed_momenta


@dataclass(frozen=True, eq=False)
class FieldState:
    """Fields and momenta at the nodes of a periodic grid at time ``t``."""

    t: float
    h: float
    fields: dict[str, np.ndarray]
    momenta: dict[str, np.ndarray]
    diag: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def nodes(self) -> int:
        return len(next(iter(self.fields.values())))

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(self.nodes)

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.h, {k: v.copy() for k, v in self.fields.items()},
                          {k: v.copy() for k, v in self.momenta.items()},
                          {k: v.copy() for k, v in self.diag.items()})


@dataclass(frozen=True, eq=False)
class ReferenceState:
    """Three-level state of the second-order reference scheme."""

    t: float
    h: float
    dt: float
    phi: np.ndarray
    phi_prev: np.ndarray

    @property
    def velocity(self) -> np.ndarray:
        """First-order backward estimate of ``d0 phi``."""
        return (self.phi - self.phi_prev) / self.dt


@dataclass
class Trajectory:
    snapshots: list[FieldState]
    diagnostics: dict[str, list[float]]
    model: str
    dt: float

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> FieldState:
        return self.snapshots[-1]


def check_cfl(h: float, dt: float) -> None:
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    if not h > 0:
        raise ConfigurationError("h must be positive")
    if dt > h * (1 + 1e-12):
        raise ConfigurationError(f"CFL violated: dt = {dt:g} exceeds h = {h:g}")


def _d(u: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * h)


def _lap(u: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / (h * h)


def _require(model: ModelSpec, kind: str) -> None:
    if model.kind != kind or model.n_worldsheet != 2:
        raise UnsupportedKindError(f"{model.name} is not a 1+1 {kind} model")


def mass_squared(model: ModelSpec) -> float | None:
    """``m^2`` when the potential is exactly ``-1/2 m^2 phi^2``, else None."""
    pot = model.potential
    phi2 = tuple(2 if v == "phi" else 0 for v in pot.variables)
    if set(pot.terms) - {phi2}:
        return None
    return -2.0 * pot.terms.get(phi2, 0.0)


# --------------------------------------------------------------------------
# initial data


def kg_initial(model: ModelSpec, phi0: np.ndarray, v0: np.ndarray, h: float, t0: float = 0.0) -> FieldState:
    """State on the surface: ``P0 = d0 phi``, ``P1 = d1 phi``, ``Pphi`` from ``eta = 0``."""
    _require(model, QUADRATIC_SCALAR)
    phi0, v0 = np.array(phi0, dtype=float), np.array(v0, dtype=float)
    x = h * np.arange(len(phi0))
    P0 = model.metric[0, 0] * v0 + model.metric[0, 1] * _d(phi0, h)
    P1 = -(model.metric[1, 0] * v0 + model.metric[1, 1] * _d(phi0, h))
    psi = model.potential([t0, x, phi0])
    Pphi = psi - 0.5 * P0**2 + 0.5 * P1**2
    return FieldState(t0, h, {"phi": phi0}, {"P0": P0, "P1": P1, "Pphi": Pphi + 0 * x})


def plane_wave(model: ModelSpec, nodes: int, length: float, k: float, amplitude: float = 1.0) -> FieldState:
    """``phi = a cos(k x - omega t)`` at ``t = 0`` with ``omega^2 = k^2 + m^2``."""
    m2 = mass_squared(model)
    if m2 is None:
        raise UnsupportedKindError("plane waves need a pure mass potential")
    h = length / nodes
    x = h * np.arange(nodes)
    w = math.sqrt(k * k + m2)
    return kg_initial(model, amplitude * np.cos(k * x), amplitude * w * np.sin(k * x), h)


def reference_initial(model: ModelSpec, phi0: np.ndarray, v0: np.ndarray, h: float, dt: float,
                      t0: float = 0.0) -> ReferenceState:
    """Taylor start ``phi_prev = phi0 - dt v0 + dt^2/2 a0``."""
    _require(model, QUADRATIC_SCALAR)
    check_cfl(h, dt)
    phi0, v0 = np.array(phi0, dtype=float), np.array(v0, dtype=float)
    x = h * np.arange(len(phi0))
    a0 = _lap(phi0, h) + model.potential.diff("phi")([t0, x, phi0])
    return ReferenceState(t0, h, dt, phi0, phi0 - dt * v0 + 0.5 * dt * dt * a0)


def ed_initial(model: ModelSpec, nodes: int, length: float, F01: float, rng: np.random.Generator,
               modes: int = 3) -> FieldState:
    """Smooth random potentials with uniform field strength ``F01``."""
    _require(model, MAXWELL_1P1)
    h = length / nodes
    x = h * np.arange(nodes)
    A = []
    for _ in range(2):
        a = np.zeros(nodes)
        for q in range(1, modes + 1):
            c, s = rng.normal(size=2) / q
            a += c * np.cos(2 * np.pi * q * x / length) + s * np.sin(2 * np.pi * q * x / length)
        A.append(a)
    return _ed_state(model, 0.0, h, A[0], A[1], np.full(nodes, 2.0 * model.C * F01))


def _ed_state(model, t, h, A0, A1, S, F01_diag=None) -> FieldState:
    x = h * np.arange(len(A0))
    C = model.C
    f = np.empty((2, 2, len(A0)))
    f[0, 0] = 0.0
    f[0, 1] = _d(A0, h)
    f[1, 0] = f[0, 1] + S / (2.0 * C)
    f[1, 1] = _d(A1, h)
    P = _ed_momenta(model)([t, x], [A0, A1], f)
    momenta = {k: np.asarray(v, dtype=float) + 0 * x for k, v in P.items()}
    diag = {"F01": S / (2.0 * C) if F01_diag is None else F01_diag}
    return FieldState(t, h, {"A0": A0, "A1": A1}, momenta, diag)


# --------------------------------------------------------------------------
# single steps


def step_hamiltonian(model: ModelSpec, s: FieldState, dt: float) -> FieldState:
    """One leapfrog step of the first-order system (generic potential path)."""
    check_cfl(s.h, dt)
    if model.kind == QUADRATIC_SCALAR:
        _require(model, QUADRATIC_SCALAR)
        h, x, t = s.h, s.x, s.t
        dpsi = model.potential.diff("phi")
        dpsi_t = model.potential.diff("x0")
        phi, P0, Pphi = s.fields["phi"], s.momenta["P0"], s.momenta["Pphi"]
        P1 = _d(phi, h)
        DP1 = _d(P1, h)
        half = P0 + 0.5 * dt * (DP1 + dpsi([t, x, phi]))
        phin = phi + dt * half
        P1n = _d(phin, h)
        DP1n = _d(P1n, h)
        P0n = half + 0.5 * dt * (DP1n + dpsi([t + dt, x, phin]))
        src = 0.5 * (dpsi_t([t, x, phi]) + dpsi_t([t + dt, x, phin]))
        Pphin = Pphi + dt * src + 0.5 * (P1n - P1) * (P1n + P1) - dt * half * 0.5 * (DP1 + DP1n)
        return FieldState(t + dt, h, {"phi": phin}, {"P0": P0n, "P1": P1n, "Pphi": Pphin + 0 * x})
    if model.kind == MAXWELL_1P1:
        h, x, t = s.h, s.x, s.t
        A0, A1 = s.fields["A0"], s.fields["A1"]
        S = s.momenta["P_A0x0"] + s.momenta["P_A1x1"]
        dphi = model.potential.diff("A1")
        Sh = S + 0.5 * dt * dphi([t, x, A0, A1])
        DA0 = _d(A0, h)
        A1n = A1 + dt * (DA0 + Sh / (2.0 * model.C))
        Sn = Sh + 0.5 * dt * dphi([t + dt, x, A0, A1n])
        F01 = (A1n - A1) / dt - DA0
        return _ed_state(model, t + dt, h, A0.copy(), A1n, Sn + 0 * x, F01)
    raise UnsupportedKindError(model.kind)


def step_reference_lagrangian(model: ModelSpec, s: ReferenceState, dt: float) -> ReferenceState:
    """One step of ``phi_tt = phi_xx + dPsi/dphi`` (compact Laplacian, three levels)."""
    if abs(dt - s.dt) > 1e-15 * s.dt:
        raise ConfigurationError("reference state was started for a different dt")
    check_cfl(s.h, dt)
    x = s.h * np.arange(len(s.phi))
    a = _lap(s.phi, s.h) + model.potential.diff("phi")([s.t, x, s.phi])
    return ReferenceState(s.t + dt, s.h, dt, 2.0 * s.phi - s.phi_prev + dt * dt * a, s.phi.copy())


# --------------------------------------------------------------------------
# diagnostics


def eta_values(model: ModelSpec, s: FieldState) -> np.ndarray:
    vals = dict(zip(model.phase.worldsheet_names, [s.t, s.x]))
    vals.update(s.fields)
    vals.update(s.momenta)
    if model.kind == QUADRATIC_SCALAR:
        vals["P1"] = _d(s.fields["phi"], s.h)
    return np.asarray(model.expected_surface.eta(vals), dtype=float) + 0 * s.x


def energy(model: ModelSpec, s: FieldState) -> float:
    """Grid energy: ``h sum(1/2 P0^2 + 1/2 P1^2 - Psi)`` (scalar) or ``h sum(C F01^2 - Phi)`` (ED)."""
    if model.kind == QUADRATIC_SCALAR:
        phi = s.fields["phi"]
        dens = 0.5 * s.momenta["P0"] ** 2 + 0.5 * _d(phi, s.h) ** 2 - model.potential([s.t, s.x, phi])
    else:
        F = s.diag["F01"]
        dens = model.C * F * F - model.potential([s.t, s.x, s.fields["A0"], s.fields["A1"]])
    return float(s.h * np.sum(dens + 0 * s.x))


def _record(model, s, diag):
    diag["t"].append(s.t)
    diag["energy"].append(energy(model, s))
    diag["eta_max"].append(float(np.max(np.abs(eta_values(model, s)))))
    if model.kind == MAXWELL_1P1:
        F = s.diag["F01"]
        diag["f01_spread"].append(float(F.max() - F.min()))


def run(model: ModelSpec, initial: FieldState, T: float, dt: float, stride: int = 1,
        backend: str | None = None) -> Trajectory:
    """Integrate to time ``T`` and keep every ``stride``-th state.

    The step is shrunk to ``T / ceil(T / dt)`` so the last snapshot lands on ``T``.
    """
    if T < 0:
        raise ConfigurationError("T must be nonnegative")
    if stride < 1:
        raise ConfigurationError("stride must be >= 1")
    check_cfl(initial.h, dt)
    keys = ["t", "energy", "eta_max"] + (["f01_spread"] if model.kind == MAXWELL_1P1 else [])
    diag: dict[str, list[float]] = {k: [] for k in keys}
    s = initial.copy()
    _record(model, s, diag)
    snaps = [s]
    if T == 0:
        return Trajectory(snaps, diag, model.name, dt)
    nsteps = max(1, math.ceil(T / dt - 1e-9))
    dt = T / nsteps
    m2 = mass_squared(model) if model.kind == QUADRATIC_SCALAR else None
    done = 0
    while done < nsteps:
        chunk = min(stride, nsteps - done)
        if m2 is not None:
            impl = kernels.get_backend(backend)
            s = s.copy()
            phi, P0, Pphi = s.fields["phi"], s.momenta["P0"], s.momenta["Pphi"]
            impl.kg_hamiltonian_steps(phi, P0, Pphi, s.h, dt, m2, chunk)
            s.momenta["P1"] = _d(phi, s.h)
            s = replace(s, t=initial.t + (done + chunk) * dt)
        else:
            for _ in range(chunk):
                s = step_hamiltonian(model, s, dt)
        done += chunk
        _record(model, s, diag)
        snaps.append(s)
    return Trajectory(snaps, diag, model.name, dt)


def run_reference(model: ModelSpec, initial: ReferenceState, T: float, backend: str | None = None) -> ReferenceState:
    """Advance the reference scheme by ``round(T / dt)`` steps."""
    nsteps = int(round(T / initial.dt))
    m2 = mass_squared(model)
    if m2 is None:
        s = initial
        for _ in range(nsteps):
            s = step_reference_lagrangian(model, s, initial.dt)
        return s
    phi, prev = initial.phi.copy(), initial.phi_prev.copy()
    kernels.get_backend(backend).kg_reference_steps(phi, prev, initial.h, initial.dt, m2, nsteps)
    return ReferenceState(initial.t + nsteps * initial.dt, initial.h, initial.dt, phi, prev)


def measure_frequency(times, series) -> float:
    """Angular frequency from linearly interpolated zero crossings.

    A least-squares line through the crossing times gives the half period.
    """
    t, y = np.asarray(times, float), np.asarray(series, float)
    idx = np.nonzero(np.signbit(y[:-1]) != np.signbit(y[1:]))[0]
    if len(idx) < 3:
        raise ValueError("need at least three zero crossings to fit a frequency")
    tc = t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
    slope = np.polyfit(np.arange(len(tc)), tc, 1)[0]
    return math.pi / slope


def probe_series(model: ModelSpec, initial: FieldState, T: float, dt: float, node: int = 0,
                 backend: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Field value at one node after every step."""
    traj = run(model, initial, T, dt, stride=1, backend=backend)
    key = "phi" if model.kind == QUADRATIC_SCALAR else "A1"
    return traj.times, np.array([s.fields[key][node] for s in traj.snapshots])


# --------------------------------------------------------------------------
# CSV export


def _fmt(v) -> str:
    return format(float(v), ".17g")


def trajectory_columns(model: ModelSpec) -> list[str]:
    if model.kind == QUADRATIC_SCALAR:
        return ["t", "node", "phi", "P0", "P1", "Pphi", "eta"]
    return ["t", "node", "A0", "A1", *model.phase.momentum_names, "eta", "F01"]


def write_trajectory_csv(model: ModelSpec, traj: Trajectory, path, header: str = "") -> None:
    cols = trajectory_columns(model)
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for s in traj.snapshots:
            eta = eta_values(model, s)
            data = {**s.fields, **s.momenta, **s.diag, "eta": eta}
            for i in range(s.nodes):
                w.writerow([_fmt(s.t), i] + [_fmt(data[c][i]) for c in cols[2:]])


def write_diagnostics_csv(traj: Trajectory, path, header: str = "") -> None:
    cols = list(traj.diagnostics)
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*(traj.diagnostics[c] for c in cols)):
            w.writerow([_fmt(v) for v in row])
