"""Generalized Legendre transformation via projective duality.

Quadric graph varieties are dualized exactly by matrix inversion.  Graph
varieties cut out together with Plücker relations are handled through the
parametrization ``P = alpha dF + beta dpi`` of their dual and a membership
oracle against a known surface.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ChartError, ConstraintError, DegeneracyError, MembershipError
from .exterior import PolyForm, Polyvector, basis_indices, is_decomposable, pair, plucker_residuals
from .lagrangian import HomogeneousLagrangian, QuadricVariety
from .phase import PhaseSpace
from .polynomial import Polynomial, monomial_basis


@dataclass(frozen=True, eq=False)
class MomentumPoint:
    """Projective covector ``[Pi : P]`` stored on the chart ``Pi = -1`` when possible."""

    Pi: float
    P: PolyForm
    phase: PhaseSpace | None = None
    multipliers: tuple[float, ...] = ()
    multivalued: bool = False
    at_infinity: bool = False

    def values(self) -> dict[str, float]:
        if self.phase is None:
            raise ValueError("momentum point carries no coordinate names")
        return {self.phase.momentum_of(I): self.P[I] for I in self.phase.indices}

    def pairing(self, xi: Polyvector) -> float:
        return pair(self.P, xi)


@dataclass(frozen=True, eq=False)
class ImplicitSurface:
    """Surface ``{eta = 0}`` in momentum and base coordinates."""

    eta: Polynomial
    phase: PhaseSpace | None = None

    def __call__(self, values) -> float:
        return self.eta(values)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.eta.variables

    @property
    def degree(self) -> int:
        return self.eta.degree

    def relative_residual(self, values) -> float:
        scale = self.eta.term_magnitude(values)
        r = abs(self.eta(values))
        return r / scale if scale > 0 else r

    def canonical(self, rtol: float = 1e-13) -> "ImplicitSurface":
        eta = self.eta.chop(rtol)
        if self.phase is not None:
            eta = eta.with_variables(self.phase.surface_variables)
        return ImplicitSurface(eta, self.phase)

    def distance(self, other: "ImplicitSurface") -> float:
        return self.eta.distance(other.eta)

    def to_dict(self) -> dict:
        out = {"variables": list(self.eta.variables), "terms": self.eta.to_table()}
        if self.phase is not None:
            out["fields"] = list(self.phase.field_names)
            out["worldsheet"] = list(self.phase.worldsheet_names)
            out["momenta"] = list(self.phase.momentum_names)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ImplicitSurface":
        data = json.loads(text)
        phase = None
        if "momenta" in data:
            phase = PhaseSpace(tuple(data["fields"]), tuple(data["worldsheet"]), tuple(data["momenta"]))
        return cls(Polynomial.from_table(data["variables"], data["terms"]), phase)


@dataclass(frozen=True)
class DualParametrization:
    """A point of the dual variety given by a base point and multiplier coefficients."""

    base: object
    point: tuple[float, ...]
    multipliers: tuple[float, ...]


@dataclass(frozen=True)
class RankReport:
    rank: int
    size: int
    singular_values: tuple[float, ...]

    @property
    def deficit(self) -> int:
        return self.size - self.rank

    @property
    def defected(self) -> bool:
        return self.rank < self.size


# --------------------------------------------------------------------------
# quadrics


def normalize_matrix(M: np.ndarray) -> np.ndarray:
    """Scale so the largest entry has magnitude 1.

    The sign is fixed by the first entry (row-major) of at least half the
    maximal magnitude, which keeps the choice stable under rounding noise.
    """
    M = np.asarray(M, dtype=float)
    scale = np.abs(M).max()
    if scale == 0:
        return M.copy()
    flat = M.ravel()
    lead = flat[np.argmax(np.abs(flat) >= 0.5 * scale)]
    return M / (np.sign(lead) * scale)


def detect_degeneracy(Q: QuadricVariety) -> RankReport:
    """Numerical rank of the quadric (threshold ``rtol`` times the largest singular value)."""
    s = Q.singular_values
    return RankReport(Q.rank, Q.size, tuple(float(v) for v in s))


def dual_quadric(Q: QuadricVariety) -> QuadricVariety:
    """Dual quadric, with matrix proportional to the inverse of ``Q.G``."""
    if not Q.nondegenerate:
        raise DegeneracyError(
            f"quadric has rank {Q.rank} < {Q.size}; its dual is not a hypersurface", rank=Q.rank, size=Q.size
        )
    inv = np.linalg.inv(Q.G)
    inv = 0.5 * (inv + inv.T)
    return QuadricVariety(normalize_matrix(inv), Q.dual_labels, Q.labels, Q.rtol)


def double_dual_check(Q: QuadricVariety) -> float:
    """Relative Frobenius distance between ``Q`` and its double dual, both normalized."""
    dd = dual_quadric(dual_quadric(Q))
    a, b = normalize_matrix(dd.G), normalize_matrix(Q.G)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def affine_chart(Qdual: QuadricVariety, lead: str | None = None, lead_coeff: float = 1.0,
                 phase: PhaseSpace | None = None) -> ImplicitSurface:
    """Restrict a dual quadric to ``Pi = -1``.

    The first label is taken as ``Pi``.  The result is rescaled so the linear
    coefficient of ``lead`` (default: second label) equals ``lead_coeff``.
    """
    pi_name = Qdual.labels[0]
    if not np.any(Qdual.G[0]):
        raise ValueError(f"dual quadric does not involve {pi_name}; the chart {pi_name} = -1 is vacuous")
    eta = Qdual.polynomial().substitute(pi_name, -1.0)
    lead = Qdual.labels[1] if lead is None else lead
    c = eta.coefficient({lead: 1})
    if c == 0:
        raise ValueError(f"surface has no linear {lead} term to normalize on")
    eta = (eta * (lead_coeff / c)).chop(1e-14)
    return ImplicitSurface(eta, phase)


def lift_over_base(builder: Callable[[np.ndarray], Polynomial], base_names: Sequence[str], degree: int,
                   seed: int = 20130) -> Polynomial:
    """Assemble a surface known pointwise over the base into one polynomial.

    ``builder(point)`` returns the surface at a base point as a polynomial in
    the momenta.  Each momentum-monomial coefficient is fitted by least squares
    as a polynomial of total degree ``degree`` in the base variables.
    """
    basis = monomial_basis(base_names, degree)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(max(3 * len(basis), 8), len(base_names)))
    design = np.array([[np.prod(p ** np.array(mono)) for mono in basis] for p in pts])
    samples = [builder(p) for p in pts]
    mom_vars = samples[0].variables
    keys = sorted(set().union(*(s.with_variables(mom_vars).terms for s in samples)))
    all_vars = tuple(base_names) + tuple(mom_vars)
    terms: dict[tuple, float] = {}
    for key in keys:
        y = np.array([s.with_variables(mom_vars).terms.get(key, 0.0) for s in samples])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        for mono, c in zip(basis, coef):
            full = tuple(mono) + key
            terms[full] = terms.get(full, 0.0) + c
    return Polynomial(all_vars, terms).chop(1e-12)


# --------------------------------------------------------------------------
# momentum map


def legendre_map(Lam: HomogeneousLagrangian, xi: Polyvector, x=None, phi=None,
                 phase: PhaseSpace | None = None, tol: float = 1e-10) -> MomentumPoint:
    """Momentum ``P_I = dLambda/dX_I`` on the chart ``Pi = -1``.

    For grades with Plücker relations the image is a whole family
    ``P + beta dpi``; the representative with zero multipliers is returned and
    flagged as multivalued.
    """
    m, n = Lam.n_fields, Lam.n_worldsheet
    if xi.dim != m + n or xi.grade != n:
        raise ConstraintError("polyvector does not match the Lagrangian's dimensions")
    if xi[tuple(range(m, m + n))] == 0:
        raise ChartError("polyvector not a graph over the worldsheet")
    if not is_decomposable(xi, tol):
        raise ConstraintError("legendre_map requires a decomposable polyvector")
    grad = Lam.gradient(xi, x, phi)
    constrained = bool(plucker_residuals(Polyvector.basis(m + n, *range(n))))
    return MomentumPoint(
        -1.0,
        PolyForm(m + n, n, grad),
        phase,
        multipliers=(0.0,) if constrained else (),
        multivalued=constrained,
    )


def constrained_dual_sample(F: Polynomial, plucker: Sequence[Polynomial], X, multipliers: Sequence[float],
                            phase: PhaseSpace | None = None, rtol: float = 1e-10) -> MomentumPoint:
    """Point ``alpha dF + sum_k beta_k dpi_k`` of the dual variety at ``X``.

    ``F`` is over ``(Lambda, X...)``; the Plücker polynomials are aligned to
    the same variables.  The result is normalized to ``Pi = -1`` unless the
    ``Lambda``-dual coordinate vanishes, in which case it is flagged as a
    point at infinity.
    """
    names = F.variables
    if isinstance(X, Mapping):
        X = [X[v] for v in names]
    X = np.asarray(X, dtype=float)
    polys = [F] + [p.with_variables(names) for p in plucker]
    for k, p in enumerate(polys):
        scale = max(p.term_magnitude(X), 1e-300)
        if abs(p(X)) > rtol * scale:
            raise MembershipError(f"point is off the variety (equation {k}: residual {abs(p(X)):.3e})")
    if len(multipliers) != len(polys):
        raise ValueError(f"need {len(polys)} multipliers, got {len(multipliers)}")
    P = sum(c * p.gradient(X) for c, p in zip(multipliers, polys))
    Pi = P[0]
    at_inf = abs(Pi) <= 1e-14 * max(np.abs(P).max(), 1e-300)
    if not at_inf:
        P = P / (-Pi)
        Pi = -1.0
    coords = {}
    for name, val in zip(names[1:], P[1:]):
        idx = phase.index_of(name) if phase is not None else (names.index(name) - 1,)
        coords[idx] = float(val)
    dim = phase.target_dim if phase is not None else len(names) - 1
    grade = phase.n_worldsheet if phase is not None else 1
    return MomentumPoint(float(Pi), PolyForm(dim, grade, coords), phase, tuple(multipliers),
                         multivalued=len(polys) > 1, at_infinity=bool(at_inf))


# --------------------------------------------------------------------------
# momentum-map criteria


def crit1_residual(Lam: HomogeneousLagrangian, xi: Polyvector, x=None, phi=None) -> float:
    """Relative gap between the pairing ``<P, xi>`` and ``Lambda(xi)``.

    The scale is the larger of ``|Lambda|`` and the sum of the individual
    products ``|P_I X_I|``, so cancellations in the pairing are not rewarded.
    """
    P = legendre_map(Lam, xi, x, phi)
    lam = Lam(xi, x, phi)
    terms = sum(abs(c * xi[I]) for I, c in P.P.coeffs.items())
    scale = max(abs(lam), terms)
    gap = abs(pair(P.P, xi) - lam)
    return gap / scale if scale > 0 else gap


def pairing_defect(Lam: HomogeneousLagrangian, f: np.ndarray, delta: np.ndarray, eps, x=None, phi=None) -> np.ndarray:
    """``<P(xi_eps), xi> - Lambda(xi)`` along the graph curve ``f + eps delta``.

    This is the double-zero function evaluated on a curve through the surface;
    it must vanish to second order in ``eps``.
    """
    from .exterior import graph_tangent

    xi = graph_tangent(f)
    lam = Lam(xi, x, phi)
    out = []
    for e in np.atleast_1d(eps):
        P = legendre_map(Lam, graph_tangent(f + e * delta), x, phi)
        out.append(pair(P.P, xi) - lam)
    return np.array(out)


def crit2_order(Lam: HomogeneousLagrangian, f: np.ndarray, delta: np.ndarray, eps=None, x=None, phi=None) -> float:
    """Fitted slope of ``log|defect|`` against ``log eps``; stationarity means 2."""
    eps = np.logspace(-2, -4, 5) if eps is None else np.asarray(eps)
    err = np.abs(pairing_defect(Lam, f, delta, eps, x, phi))
    return float(np.polyfit(np.log(eps), np.log(err), 1)[0])
