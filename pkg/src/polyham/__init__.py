"""Worldsheet Hamiltonian formalism on polyvector phase spaces.

Lagrangian densities are homogenized to degree-1 functions on decomposable
polyvectors, Legendre-transformed by projective duality into a phase-space
surface, and turned into equations of motion through the degeneracy of the
canonical form on that surface.
"""
from .errors import (
    ChartError,
    ConfigurationError,
    ConstraintError,
    DegeneracyError,
    MembershipError,
    PolyhamError,
    StructuralError,
    UnsupportedKindError,
)
from .exterior import JetSample, PolyForm, Polyvector, graph_tangent, interior, is_decomposable, plucker_residuals, wedge
from .lagrangian import HomogeneousLagrangian, LagrangianDensity, QuadricVariety, graph_variety, homogenize, jet_from_polyvector
from .legendre import (
    ImplicitSurface,
    MomentumPoint,
    affine_chart,
    constrained_dual_sample,
    detect_degeneracy,
    double_dual_check,
    dual_quadric,
    legendre_map,
)
from .models import ModelSpec, by_name, electrodynamics_1p1, kg_1p1, scalar_ndim
from .polynomial import Polynomial

__version__ = "0.1.0"
