"""Sparse multivariate polynomials over named variables.

Used for implicit surfaces, potentials and the graph/Plücker polynomials of
the constrained duals.  Coefficients are plain floats; evaluation also
accepts complex arguments (needed for complex-step derivatives).
"""
from __future__ import annotations

import itertools
import json
from typing import Iterable, Mapping, Sequence

import numpy as np


class Polynomial:
    """Polynomial with monomials stored as exponent tuples aligned to ``variables``."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, float] | None = None):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"repeated variable names in {self.variables}")
        clean: dict[tuple, float] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != len(self.variables) or min(mono, default=0) < 0:
                raise ValueError(f"bad monomial {mono} for variables {self.variables}")
            if c != 0:
                clean[mono] = clean.get(mono, 0.0) + c
        self.terms = {k: v for k, v in clean.items() if v != 0}

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, variables, c: float):
        return cls(variables, {(0,) * len(tuple(variables)): c})

    @classmethod
    def variable(cls, variables, name: str):
        variables = tuple(variables)
        mono = tuple(1 if v == name else 0 for v in variables)
        if sum(mono) != 1:
            raise KeyError(name)
        return cls(variables, {mono: 1.0})

    @classmethod
    def from_monomials(cls, variables, items: Iterable[tuple[Mapping[str, int], float]]):
        """Build from ``({name: power}, coeff)`` pairs."""
        variables = tuple(variables)
        pos = {v: i for i, v in enumerate(variables)}
        terms: dict[tuple, float] = {}
        for powers, c in items:
            mono = [0] * len(variables)
            for name, p in powers.items():
                mono[pos[name]] += p
            key = tuple(mono)
            terms[key] = terms.get(key, 0.0) + c
        return cls(variables, terms)

    # alignment ------------------------------------------------------------
    def with_variables(self, variables: Sequence[str]) -> "Polynomial":
        """Re-express over ``variables`` (a superset of the used variables)."""
        variables = tuple(variables)
        pos = {v: i for i, v in enumerate(variables)}
        terms = {}
        for mono, c in self.terms.items():
            new = [0] * len(variables)
            for name, e in zip(self.variables, mono):
                if e:
                    if name not in pos:
                        raise KeyError(f"variable {name!r} is used but missing from target set")
                    new[pos[name]] = e
            terms[tuple(new)] = c
        return Polynomial(variables, terms)

    def _aligned(self, other: "Polynomial"):
        if other.variables == self.variables:
            return self, other
        merged = self.variables + tuple(v for v in other.variables if v not in self.variables)
        return self.with_variables(merged), other.with_variables(merged)

    @property
    def used_variables(self) -> tuple[str, ...]:
        used = set()
        for mono in self.terms:
            used.update(n for n, e in zip(self.variables, mono) if e)
        return tuple(v for v in self.variables if v in used)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.variables, other)
        a, b = self._aligned(other)
        terms = dict(a.terms)
        for k, v in b.terms.items():
            terms[k] = terms.get(k, 0.0) + v
        return Polynomial(a.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.variables, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(self.variables, {k: other * v for k, v in self.terms.items()})
        a, b = self._aligned(other)
        terms: dict[tuple, float] = {}
        for ka, va in a.terms.items():
            for kb, vb in b.terms.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                terms[k] = terms.get(k, 0.0) + va * vb
        return Polynomial(a.variables, terms)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __pow__(self, n: int):
        out = Polynomial.constant(self.variables, 1.0)
        for _ in range(n):
            out = out * self
        return out

    # calculus / evaluation ----------------------------------------------------
    def diff(self, name: str) -> "Polynomial":
        if name not in self.variables:
            return Polynomial(self.variables)
        i = self.variables.index(name)
        terms = {}
        for mono, c in self.terms.items():
            if mono[i]:
                new = list(mono)
                new[i] -= 1
                terms[tuple(new)] = c * mono[i]
        return Polynomial(self.variables, terms)

    def _values(self, values):
        if isinstance(values, Mapping):
            return [values.get(v, 0.0) if not any(m[i] for m in self.terms) else values[v]
                    for i, v in enumerate(self.variables)]
        values = list(values)
        if len(values) != len(self.variables):
            raise ValueError(f"expected {len(self.variables)} values, got {len(values)}")
        return values

    def __call__(self, values):
        vals = self._values(values)
        total = 0.0
        for mono, c in self.terms.items():
            term = c
            for x, e in zip(vals, mono):
                if e:
                    term = term * x**e
            total = total + term
        return total

    def term_magnitude(self, values) -> float:
        """Sum of absolute values of the individual terms (scale for relative residuals)."""
        vals = self._values(values)
        total = 0.0
        for mono, c in self.terms.items():
            term = abs(c)
            for x, e in zip(vals, mono):
                if e:
                    term *= abs(x) ** e
            total += term
        return total

    def gradient(self, values, names: Sequence[str] | None = None) -> np.ndarray:
        names = self.variables if names is None else names
        return np.array([self.diff(n)(values) for n in names])

    def substitute(self, name: str, value: float) -> "Polynomial":
        """Fix ``name`` to ``value``; the variable is removed from the result."""
        i = self.variables.index(name)
        rest = self.variables[:i] + self.variables[i + 1:]
        terms: dict[tuple, float] = {}
        for mono, c in self.terms.items():
            k = mono[:i] + mono[i + 1:]
            terms[k] = terms.get(k, 0.0) + c * value ** mono[i]
        return Polynomial(rest, terms)

    # inspection ------------------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def coefficient(self, powers: Mapping[str, int] | None = None) -> float:
        powers = powers or {}
        mono = tuple(powers.get(v, 0) for v in self.variables)
        if sum(powers.values()) != sum(mono):
            return 0.0
        return self.terms.get(mono, 0.0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def chop(self, rtol: float = 1e-13) -> "Polynomial":
        """Drop coefficients below ``rtol`` times the largest one."""
        cut = rtol * self.max_abs_coeff()
        return Polynomial(self.variables, {k: v for k, v in self.terms.items() if abs(v) > cut})

    def distance(self, other: "Polynomial") -> float:
        """Largest coefficient difference, matching variables by name."""
        a, b = self._aligned(other)
        keys = set(a.terms) | set(b.terms)
        return max((abs(a.terms.get(k, 0.0) - b.terms.get(k, 0.0)) for k in keys), default=0.0)

    def monomial_labels(self, mono) -> list[str]:
        return [f"{v}:{e}" for v, e in zip(self.variables, mono) if e]

    # serialization -------------------------------------------------------------------
    def to_table(self) -> list[dict]:
        """Canonical coefficient table, sorted lexicographically by monomial."""
        rows = [{"monomial": self.monomial_labels(m), "coeff": float(c)} for m, c in self.terms.items()]
        rows.sort(key=lambda r: r["monomial"])
        return rows

    @classmethod
    def from_table(cls, variables, rows) -> "Polynomial":
        items = []
        for row in rows:
            powers = {}
            for label in row["monomial"]:
                name, _, p = label.rpartition(":")
                powers[name] = int(p)
            items.append((powers, float(row["coeff"])))
        return cls.from_monomials(variables, items)

    def to_json(self) -> str:
        return json.dumps({"variables": list(self.variables), "terms": self.to_table()}, sort_keys=True)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for row in self.to_table():
            mono = "*".join(l.replace(":1", "") if l.endswith(":1") else l.replace(":", "^") for l in row["monomial"])
            parts.append(f"{row['coeff']:+.6g}" + (f"*{mono}" if mono else ""))
        return " ".join(parts)


def monomial_basis(variables: Sequence[str], degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree at most ``degree``."""
    n = len(variables)
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            mono = [0] * n
            for i in combo:
                mono[i] += 1
            out.append(tuple(mono))
    return out
