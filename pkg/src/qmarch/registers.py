"""Qubit bookkeeping for marching circuits.

Register order: LCU ancillas on the most significant qubits, then one
sub-register per spatial dimension (x1 first). A reflected dimension
carries one extra qubit at the top of its own sub-register, so the
mirrored half of that coordinate occupies indices N..2N-1 contiguously
and the flattened register stays lexicographic.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RegisterLayout:
    n_anc: int
    coord_widths: tuple[int, ...]
    reflected: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "coord_widths", tuple(self.coord_widths))
        object.__setattr__(self, "reflected", tuple(bool(r) for r in self.reflected))
        if len(self.coord_widths) != len(self.reflected):
            raise ValueError("one reflected flag per dimension required")
        if self.n_anc < 0 or not self.coord_widths or min(self.coord_widths) < 1:
            raise ValueError("invalid register widths")

    @property
    def d(self) -> int:
        return len(self.coord_widths)

    def sub_width(self, dim: int) -> int:
        """Qubits in one dimension's sub-register, reflection qubit included."""
        return self.coord_widths[dim] + (1 if self.reflected[dim] else 0)

    @property
    def n_work(self) -> int:
        return sum(self.sub_width(dim) for dim in range(self.d))

    @property
    def n_total(self) -> int:
        return self.n_anc + self.n_work

    def dim_offset(self, dim: int) -> int:
        """Absolute index of the first qubit of a dimension's sub-register."""
        return self.n_anc + sum(self.sub_width(i) for i in range(dim))

    def refl_qubit(self, dim: int) -> int:
        if not self.reflected[dim]:
            raise ValueError(f"dimension {dim} is not reflected")
        return self.dim_offset(dim)

    def coord_qubits(self, dim: int) -> tuple[int, ...]:
        start = self.dim_offset(dim) + (1 if self.reflected[dim] else 0)
        return tuple(range(start, start + self.coord_widths[dim]))

    @property
    def refl_qubits(self) -> tuple[int, ...]:
        return tuple(self.dim_offset(d) for d in range(self.d) if self.reflected[d])

    @property
    def sub_sizes(self) -> tuple[int, ...]:
        """Grid points per dimension as addressed by the register (doubled where reflected)."""
        return tuple(1 << self.sub_width(d) for d in range(self.d))
