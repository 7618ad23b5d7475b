"""Coordinate bookkeeping for the polyvector phase space.

The targetspace has the field axes first and the worldsheet axes after them.
Each grade-N multi-index over the targetspace carries one momentum
coordinate; its dual polyvector coordinate uses the same name with an ``X``
prefix instead of ``P``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .exterior import MultiIndex, basis_indices


@dataclass(frozen=True)
class PhaseSpace:
    field_names: tuple[str, ...]
    worldsheet_names: tuple[str, ...]
    momentum_names: tuple[str, ...]

    @classmethod
    def build(cls, field_names, worldsheet_names, namer: Callable[[MultiIndex, tuple[str, ...]], str]):
        fields, ws = tuple(field_names), tuple(worldsheet_names)
        axes = fields + ws
        names = tuple(namer(idx, axes) for idx in basis_indices(len(axes), len(ws)))
        return cls(fields, ws, names)

    @property
    def n_fields(self) -> int:
        return len(self.field_names)

    @property
    def n_worldsheet(self) -> int:
        return len(self.worldsheet_names)

    @property
    def target_names(self) -> tuple[str, ...]:
        return self.field_names + self.worldsheet_names

    @property
    def target_dim(self) -> int:
        return len(self.target_names)

    @property
    def indices(self) -> tuple[MultiIndex, ...]:
        return basis_indices(self.target_dim, self.n_worldsheet)

    @property
    def volume_index(self) -> MultiIndex:
        m = self.n_fields
        return tuple(range(m, m + self.n_worldsheet))

    @property
    def volume_momentum(self) -> str:
        return self.momentum_of(self.volume_index)

    def momentum_of(self, idx: MultiIndex) -> str:
        return self.momentum_names[self.indices.index(tuple(idx))]

    def index_of(self, name: str) -> MultiIndex:
        if name.startswith("X"):
            name = "P" + name[1:]
        return self.indices[self.momentum_names.index(name)]

    @property
    def polyvector_names(self) -> tuple[str, ...]:
        return tuple("X" + n[1:] for n in self.momentum_names)

    @property
    def base_names(self) -> tuple[str, ...]:
        """Variables a potential may depend on: worldsheet coordinates, then fields."""
        return self.worldsheet_names + self.field_names

    @property
    def surface_variables(self) -> tuple[str, ...]:
        return self.base_names + self.momentum_names

    @property
    def coordinate_names(self) -> tuple[str, ...]:
        """Phase-space axes in the order used for polyvectors on phase space."""
        return self.target_names + self.momentum_names

    @property
    def phase_dim(self) -> int:
        return len(self.coordinate_names)

    def graph_index(self, field: int, axis: int) -> MultiIndex:
        """Multi-index of the coordinate obtained by swapping worldsheet ``axis`` for ``field``."""
        m = self.n_fields
        ws = [m + i for i in range(self.n_worldsheet) if i != axis]
        return (field, *ws)


def scalar_phase(n_worldsheet: int) -> PhaseSpace:
    """One scalar field ``phi``; momenta ``Pphi`` (volume) and ``P0 .. P{N-1}``."""
    ws = tuple(f"x{i}" for i in range(n_worldsheet))

    def namer(idx, axes):
        if 0 not in idx:
            return "Pphi"
        missing = [i for i in range(n_worldsheet) if 1 + i not in idx]
        return f"P{missing[0]}"

    return PhaseSpace.build(("phi",), ws, namer)


def ed_phase() -> PhaseSpace:
    """Potentials ``A0, A1`` over ``x0, x1``; momenta named by their axes."""
    return PhaseSpace.build(("A0", "A1"), ("x0", "x1"), lambda idx, axes: "P_" + "".join(axes[i] for i in idx))
