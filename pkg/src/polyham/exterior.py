"""Exterior algebra over R^n with sparse coefficient maps.

Basis k-vectors are labelled by strictly increasing multi-indices
``(i_1 < ... < i_k)``.  Forms use the dual basis, so that
``<dx^I, e_J> = delta_IJ`` for sorted multi-indices.  Axis numbering is up to
the caller; the models in this package always put field axes before
worldsheet axes, and every sign in the library follows from that single
ordering.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .errors import StructuralError

MultiIndex = tuple[int, ...]


def sort_sign(axes: Iterable[int]) -> tuple[int, MultiIndex]:
    """Sort ``axes`` and return ``(sign, sorted_axes)``.

    ``sign`` is the parity of the sorting permutation, or 0 when an axis is
    repeated (the wedge of a repeated basis vector vanishes).
    """
    arr = list(axes)
    sign = 1
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(arr, arr[1:]):
        if a == b:
            return 0, ()
    return sign, tuple(arr)


def check_multi_index(axes: Iterable[int], dim: int) -> MultiIndex:
    """Validate a multi-index: strictly increasing axes in ``[0, dim)``."""
    idx = tuple(int(a) for a in axes)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise StructuralError(f"multi-index {idx} is not strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] >= dim):
        raise StructuralError(f"multi-index {idx} out of range for dim {dim}")
    return idx


@lru_cache(maxsize=None)
def basis_indices(dim: int, grade: int) -> tuple[MultiIndex, ...]:
    """All grade-``grade`` multi-indices over ``dim`` axes, lexicographic."""
    return tuple(itertools.combinations(range(dim), grade))


@lru_cache(maxsize=None)
def index_positions(dim: int, grade: int) -> dict[MultiIndex, int]:
    return {idx: pos for pos, idx in enumerate(basis_indices(dim, grade))}


@dataclass(frozen=True, eq=False)
class Polyvector:
    """Homogeneous element of the k-th exterior power of R^n.

    Only nonzero coefficients are stored; absent entries are zero.  Instances
    are treated as immutable values.
    """

    dim: int
    grade: int
    coeffs: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 0 or self.grade < 0:
            raise StructuralError("dim and grade must be nonnegative")
        clean = {}
        for axes, c in self.coeffs.items():
            if c == 0:
                continue
            idx = check_multi_index(axes, self.dim)
            if len(idx) != self.grade:
                raise StructuralError(f"multi-index {idx} has grade {len(idx)}, expected {self.grade}")
            clean[idx] = c
        if clean and self.grade > self.dim:
            raise StructuralError("nonzero coefficients above the top grade")
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, dim: int, grade: int):
        return cls(dim, grade, {})

    @classmethod
    def basis(cls, dim: int, *axes: int):
        """Basis element ``e_{a1} ^ e_{a2} ^ ...`` (axes in any order)."""
        sign, idx = sort_sign(axes)
        return cls(dim, len(axes), {idx: float(sign)} if sign else {})

    @classmethod
    def from_vector(cls, values):
        values = np.asarray(values)
        return cls(len(values), 1, {(i,): v for i, v in enumerate(values) if v != 0})

    @classmethod
    def from_dense(cls, dim: int, grade: int, values):
        idxs = basis_indices(dim, grade)
        if len(values) != len(idxs):
            raise StructuralError("dense coefficient array has the wrong length")
        return cls(dim, grade, {i: v for i, v in zip(idxs, values) if v != 0})

    def to_dense(self, dtype=float) -> np.ndarray:
        pos = index_positions(self.dim, self.grade)
        out = np.zeros(len(pos), dtype=dtype)
        for idx, c in self.coeffs.items():
            out[pos[idx]] = c
        return out

    def __getitem__(self, axes) -> float:
        return self.coeffs.get(tuple(axes), 0.0)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def _check_same(self, other):
        if self.dim != other.dim or self.grade != other.grade:
            raise StructuralError("operands differ in dim or grade")

    def __add__(self, other):
        self._check_same(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return type(self)(self.dim, self.grade, out)

    def __neg__(self):
        return type(self)(self.dim, self.grade, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return type(self)(self.dim, self.grade, {k: scalar * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polyvector):
            return NotImplemented
        return (self.dim, self.grade, self.coeffs) == (other.dim, other.grade, other.coeffs)

    def allclose(self, other, atol=1e-12) -> bool:
        self._check_same(other)
        return (self - other).max_abs() <= atol

    def __repr__(self):
        terms = " + ".join(f"{c:g}*e{''.join(map(str, k))}" for k, c in sorted(self.coeffs.items()))
        return f"{type(self).__name__}(dim={self.dim}, grade={self.grade}: {terms or '0'})"


class PolyForm(Polyvector):
    """Covariant counterpart of :class:`Polyvector` (a k-form in the dual basis)."""

    covariant = True


Polyvector.covariant = False


def wedge(a: Polyvector, b: Polyvector) -> Polyvector:
    """Exterior product; the result has the type of ``a``.

    When ``a.grade + b.grade`` exceeds the dimension the zero element of that
    grade is returned rather than raising.
    """
    if a.dim != b.dim:
        raise StructuralError(f"wedge of dim {a.dim} with dim {b.dim}")
    out: dict[MultiIndex, float] = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            sign, idx = sort_sign(ia + ib)
            if sign:
                out[idx] = out.get(idx, 0.0) + sign * ca * cb
    return type(a)(a.dim, a.grade + b.grade, out)


def wedge_all(vectors) -> Polyvector:
    """Wedge of a sequence of polyvectors, left to right."""
    it = iter(vectors)
    acc = next(it)
    for v in it:
        acc = wedge(acc, v)
    return acc


def pair(form: Polyvector, vec: Polyvector) -> float:
    """Natural pairing of a k-form with a k-vector."""
    if form.dim != vec.dim or form.grade != vec.grade:
        raise StructuralError("pairing requires equal dim and grade")
    small, big = (form, vec) if len(form.coeffs) <= len(vec.coeffs) else (vec, form)
    return sum(c * big.coeffs.get(k, 0.0) for k, c in small.coeffs.items())


def interior(xi: Polyvector, omega: Polyvector) -> PolyForm:
    """Interior product of a k-vector into a (k+1)-form.

    The result is the 1-form ``eta -> omega(xi ^ eta)``.
    """
    if xi.dim != omega.dim:
        raise StructuralError("interior product dimension mismatch")
    if omega.grade != xi.grade + 1:
        raise StructuralError(f"cannot contract grade {xi.grade} into a {omega.grade}-form")
    out = np.zeros(xi.dim, dtype=np.result_type(*xi.coeffs.values(), *omega.coeffs.values(), float))
    for J, c in xi.coeffs.items():
        for j in range(xi.dim):
            sign, idx = sort_sign(J + (j,))
            if sign:
                w = omega.coeffs.get(idx)
                if w is not None:
                    out[j] += sign * c * w
    return PolyForm(xi.dim, 1, {(j,): v for j, v in enumerate(out) if v != 0})


def _contraction_vector(v: Polyvector, A: MultiIndex) -> Polyvector:
    # u^j = <dx^A ^ dx^j, v>
    out = {}
    for j in range(v.dim):
        sign, idx = sort_sign(A + (j,))
        if sign:
            c = v.coeffs.get(idx)
            if c:
                out[(j,)] = sign * c
    return Polyvector(v.dim, 1, out)


def plucker_residuals(v: Polyvector) -> list[float]:
    """Values of the quadratic Plücker expressions at ``v``.

    Grade 2 uses the coefficients of ``v ^ v``; higher grades use
    ``(i_A v) ^ v = 0`` for every basis (k-1)-form ``dx^A``.  The list is empty
    when every polyvector of this grade is decomposable.
    """
    n, k = v.dim, v.grade
    if k < 1 or k > n:
        raise StructuralError(f"grade {k} outside [1, {n}]")
    if k == 1 or k >= n - 1:
        return []
    if k == 2:
        return list(wedge(v, v).to_dense())
    res: list[float] = []
    for A in basis_indices(n, k - 1):
        res.extend(wedge(_contraction_vector(v, A), v).to_dense())
    return res


def is_decomposable(v: Polyvector, tol: float = 1e-10) -> bool:
    """True iff every Plücker residual is below ``tol * max|coeff|**2``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    scale = v.max_abs() ** 2
    if scale == 0:
        return True
    res = plucker_residuals(v)
    return not res or max(abs(r) for r in res) <= tol * scale


@dataclass(frozen=True)
class JetSample:
    """First jet of a field configuration at a base point.

    ``f[a, i]`` is the derivative of field ``a`` along worldsheet axis ``i``.
    """

    f: np.ndarray
    x: np.ndarray | None = None
    phi: np.ndarray | None = None

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.f))
        object.__setattr__(self, "f", f)
        m, n = f.shape
        object.__setattr__(self, "x", np.zeros(n) if self.x is None else np.asarray(self.x))
        object.__setattr__(self, "phi", np.zeros(m) if self.phi is None else np.asarray(self.phi))

    @property
    def n_fields(self) -> int:
        return self.f.shape[0]

    @property
    def n_worldsheet(self) -> int:
        return self.f.shape[1]


def graph_tangent(jet) -> Polyvector:
    """Tangent polyvector of the graph of a field, with unit volume part.

    Axes ``0..m-1`` are the fields and ``m..m+N-1`` the worldsheet directions;
    the result is ``wedge_i (d/dx^i + sum_a f[a, i] d/dphi^a)``.
    """
    f = jet.f if isinstance(jet, JetSample) else np.atleast_2d(np.asarray(jet))
    m, n = f.shape
    dim = m + n
    vecs = []
    for i in range(n):
        coeffs = {(m + i,): 1.0}
        for a in range(m):
            if f[a, i] != 0:
                coeffs[(a,)] = f[a, i]
        vecs.append(Polyvector(dim, 1, coeffs))
    return wedge_all(vecs)
