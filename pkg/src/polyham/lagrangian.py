"""Lagrangian densities, their degree-1 homogenization, and the graph quadric."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ChartError, ConstraintError, StructuralError, UnsupportedKindError
from .exterior import JetSample, MultiIndex, Polyvector, basis_indices, is_decomposable
from .polynomial import Polynomial

QUADRATIC_SCALAR = "quadratic-scalar"
MAXWELL_1P1 = "maxwell-1p1"
CUSTOM = "custom"


def check_metric(g) -> np.ndarray:
    g = np.array(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise StructuralError("metric must be a square matrix")
    if not np.allclose(g, g.T, rtol=0, atol=1e-14):
        raise StructuralError("metric must be symmetric")
    return g


def checked_metric(ginv: np.ndarray) -> np.ndarray:
    """The sign-conjugated metric ``(-1)^(i+j) g^ij`` used in polyvector coordinates."""
    n = len(ginv)
    s = (-1.0) ** np.arange(n)
    return ginv * np.outer(s, s)


@dataclass(frozen=True, eq=False)
class LagrangianDensity:
    """A first-order Lagrangian density ``L(x, phi, J)`` with ``J[a, i] = d phi^a / d x^i``.

    ``potential`` is a polynomial over ``x0 .. x{N-1}`` followed by the field
    names; for the quadratic scalar kind it is Psi, for the Maxwell kind Phi.
    ``density`` callbacks must be side-effect free.
    """

    n_worldsheet: int
    n_fields: int
    kind: str
    ginv: np.ndarray | None = None
    potential: Polynomial | None = None
    coupling: float | None = None
    density: Callable | None = None
    field_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (QUADRATIC_SCALAR, MAXWELL_1P1, CUSTOM):
            raise UnsupportedKindError(self.kind)
        if not self.field_names:
            names = ("phi",) if self.n_fields == 1 else tuple(f"A{a}" for a in range(self.n_fields))
            object.__setattr__(self, "field_names", names)
        if self.potential is not None:
            object.__setattr__(self, "potential", self.potential.with_variables(self.base_names))

    @property
    def base_names(self) -> tuple[str, ...]:
        return tuple(f"x{i}" for i in range(self.n_worldsheet)) + tuple(self.field_names)

    def potential_at(self, x, phi):
        if self.potential is None:
            return 0.0
        return self.potential([*x, *phi])

    def evaluate(self, x, phi, J):
        J = np.atleast_2d(J)
        if self.kind == QUADRATIC_SCALAR:
            f = J[0]
            return 0.5 * (f @ self.ginv @ f) + self.potential_at(x, phi)
        if self.kind == MAXWELL_1P1:
            f01 = J[1, 0] - J[0, 1]
            return self.coupling * f01 * f01 + self.potential_at(x, phi)
        return self.density(x, phi, J)

    __call__ = evaluate


def quadratic_scalar(ginv, psi: Polynomial | None = None) -> LagrangianDensity:
    """``L = 1/2 g^ij d_i phi d_j phi + Psi(x, phi)``."""
    ginv = check_metric(ginv)
    n = len(ginv)
    base = tuple(f"x{i}" for i in range(n)) + ("phi",)
    psi = Polynomial(base) if psi is None else psi
    return LagrangianDensity(n, 1, QUADRATIC_SCALAR, ginv=ginv, potential=psi)


def maxwell_1p1(C0: float, phi_pot: Polynomial | None = None) -> LagrangianDensity:
    """``L = C F01^2 + Phi(A, x)`` with ``C = 2 C0`` and ``F01 = d0 A1 - d1 A0``."""
    base = ("x0", "x1", "A0", "A1")
    phi_pot = Polynomial(base) if phi_pot is None else phi_pot
    return LagrangianDensity(2, 2, MAXWELL_1P1, potential=phi_pot, coupling=2.0 * C0)


def custom(n_worldsheet: int, n_fields: int, density: Callable) -> LagrangianDensity:
    return LagrangianDensity(n_worldsheet, n_fields, CUSTOM, density=density)


# --------------------------------------------------------------------------
# graph chart


def _graph_index(m: int, n: int, a: int, i: int) -> MultiIndex:
    return (a, *[m + k for k in range(n) if k != i])


def jet_from_coords(coeffs: Mapping[MultiIndex, complex], m: int, n: int) -> np.ndarray:
    """Field derivatives encoded by polyvector coordinates on the graph chart."""
    vol = coeffs.get(tuple(range(m, m + n)), 0.0)
    if vol == 0:
        raise ChartError("polyvector not a graph over the worldsheet (volume coordinate is zero)")
    f = np.empty((m, n), dtype=np.result_type(*coeffs.values(), float))
    for a in range(m):
        for i in range(n):
            f[a, i] = (-1) ** i * coeffs.get(_graph_index(m, n, a, i), 0.0) / vol
    return f


def jet_from_polyvector(v: Polyvector, model, check: bool = True, tol: float = 1e-10) -> JetSample:
    """Recover ``d phi^a / d x^i`` from a decomposable tangent polyvector."""
    m, n = model.n_fields, model.n_worldsheet
    if v.dim != m + n or v.grade != n:
        raise StructuralError(f"expected grade {n} in dim {m + n}, got grade {v.grade} in dim {v.dim}")
    if v[tuple(range(m, m + n))] == 0:
        raise ChartError("polyvector not a graph over the worldsheet (volume coordinate is zero)")
    if check and not is_decomposable(v, tol):
        raise ConstraintError("polyvector is not decomposable")
    return JetSample(jet_from_coords(v.coeffs, m, n))


@dataclass(frozen=True, eq=False)
class HomogeneousLagrangian:
    """Degree-1 homogeneous extension of a density to decomposable polyvectors."""

    underlying: LagrangianDensity
    tol: float = 1e-10

    @property
    def n_fields(self):
        return self.underlying.n_fields

    @property
    def n_worldsheet(self):
        return self.underlying.n_worldsheet

    def _base(self, x, phi):
        L = self.underlying
        x = np.zeros(L.n_worldsheet) if x is None else np.asarray(x)
        phi = np.zeros(L.n_fields) if phi is None else np.asarray(phi)
        return x, phi

    def chart_value(self, coeffs: Mapping[MultiIndex, complex], x=None, phi=None):
        """Chart formula ``vol * L(jet)`` without the decomposability check."""
        x, phi = self._base(x, phi)
        m, n = self.n_fields, self.n_worldsheet
        f = jet_from_coords(coeffs, m, n)
        return coeffs[tuple(range(m, m + n))] * self.underlying.evaluate(x, phi, f)

    def evaluate(self, v: Polyvector, x=None, phi=None):
        jet = jet_from_polyvector(v, self, check=True, tol=self.tol)
        x, phi = self._base(x, phi)
        vol = v[tuple(range(self.n_fields, self.n_fields + self.n_worldsheet))]
        return self.underlying.evaluate(x, phi, jet.f) * vol

    __call__ = evaluate

    def gradient(self, v: Polyvector, x=None, phi=None) -> dict[MultiIndex, float]:
        """``d Lambda / d X_I`` for every grade-N coordinate, by complex step.

        Falls back to central differences when the density rejects complex input.
        """
        m, n = self.n_fields, self.n_worldsheet
        idxs = basis_indices(m + n, n)
        base = {I: v[I] for I in idxs}
        out = {}
        for I in idxs:
            try:
                h = 1e-30
                pert = dict(base)
                pert[I] = base[I] + 1j * h
                out[I] = float(np.imag(self.chart_value(pert, x, phi)) / h)
            except TypeError:
                h = 1e-6 * max(1.0, abs(base[I]))
                hi, lo = dict(base), dict(base)
                hi[I] += h
                lo[I] -= h
                out[I] = (self.chart_value(hi, x, phi) - self.chart_value(lo, x, phi)) / (2 * h)
        return out


def homogenize(L: LagrangianDensity) -> HomogeneousLagrangian:
    return HomogeneousLagrangian(L)


def lambda_closed_form(L: LagrangianDensity, xbar_phi: float, xbar: Sequence[float], x=None, phi=0.0) -> float:
    """Closed form ``Xphi * (1/2 gcheck^ij X_i X_j / Xphi^2 + Psi)`` for the quadratic kind."""
    if L.kind != QUADRATIC_SCALAR:
        raise UnsupportedKindError(L.kind)
    xbar = np.asarray(xbar, dtype=float)
    x = np.zeros(L.n_worldsheet) if x is None else x
    gc = checked_metric(L.ginv)
    return xbar_phi * (0.5 * (xbar @ gc @ xbar) / xbar_phi**2 + L.potential_at(x, [phi]))


# --------------------------------------------------------------------------
# quadrics


@dataclass(frozen=True, eq=False)
class QuadricVariety:
    """Projective quadric ``{X : X^T G X = 0}`` with named homogeneous coordinates."""

    G: np.ndarray
    labels: tuple[str, ...]
    dual_labels: tuple[str, ...] = ()
    rtol: float = 1e-10

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        if G.shape != (len(self.labels), len(self.labels)):
            raise StructuralError("matrix size does not match the labels")
        if not np.allclose(G, G.T, rtol=0, atol=1e-14 * max(1.0, np.abs(G).max())):
            raise StructuralError("quadric matrix must be symmetric")
        object.__setattr__(self, "G", G)
        if not self.dual_labels:
            object.__setattr__(self, "dual_labels", tuple(f"{l}*" for l in self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.G, compute_uv=False)

    @property
    def rank(self) -> int:
        s = self.singular_values
        return int(np.sum(s > self.rtol * s[0])) if s[0] > 0 else 0

    @property
    def nondegenerate(self) -> bool:
        return self.rank == self.size

    def form(self, X) -> float:
        X = np.asarray(X)
        return X @ self.G @ X

    def polynomial(self) -> Polynomial:
        terms = {}
        n = self.size
        for i in range(n):
            for j in range(n):
                mono = [0] * n
                mono[i] += 1
                mono[j] += 1
                terms[tuple(mono)] = terms.get(tuple(mono), 0.0) + self.G[i, j]
        return Polynomial(self.labels, terms)


def graph_variety(L: LagrangianDensity, x=None, phi=0.0) -> QuadricVariety:
    """Quadric ``Lambda Xphi - Psi Xphi^2 - 1/2 gcheck^ij X_i X_j = 0`` at a base point.

    Coordinates are ``[Lambda : Xphi : X0 : ... : X{N-1}]``.
    """
    if L.kind != QUADRATIC_SCALAR:
        raise UnsupportedKindError(f"graph quadric is only available for {QUADRATIC_SCALAR}, not {L.kind}")
    n = L.n_worldsheet
    x = np.zeros(n) if x is None else np.asarray(x, dtype=float)
    psi = float(L.potential_at(x, np.atleast_1d(phi)))
    G = np.zeros((n + 2, n + 2))
    G[0, 1] = G[1, 0] = 0.5
    G[1, 1] = -psi
    G[2:, 2:] = -0.5 * checked_metric(L.ginv)
    labels = ("Lambda", "Xphi") + tuple(f"X{i}" for i in range(n))
    dual = ("Pi", "Pphi") + tuple(f"P{i}" for i in range(n))
    return QuadricVariety(G, labels, dual)
