"""Explicit heat-equation marching matrices, shift operators, and LCU weights.

The marching step is A = (1-2d*r_h)*I + r_h * sum over dims of neighbor
couplings; boundary handling only touches the corner entries of each
dimension's 1D coupling block.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .statevector import Circuit, GateOp

SHIFT_KINDS = ("s0", "s0dag", "s1", "s2")
IDENTITY = "i"


class BoundaryType(str, Enum):
    PERIODIC = "periodic"
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"


class StabilityError(ValueError):
    """r_h violates the explicit-scheme bound r_h <= 1/(2d)."""


def stability_check(r_h: float, d: int) -> None:
    """Raise StabilityError unless 0 < r_h <= 1/(2d)."""
    if d not in (1, 2):
        raise ValueError(f"d must be 1 or 2, got {d}")
    if not 0.0 < r_h <= 1.0 / (2 * d):
        raise StabilityError(
            f"r_h = {r_h} outside (0, {1.0 / (2 * d)}] for d = {d}; explicit scheme unstable"
        )


@dataclass(frozen=True)
class MarchingSpec:
    """Grid size (points per dimension), diffusion number, and per-dim boundaries."""

    n_points: int
    r_h: float
    bc: tuple[BoundaryType, ...]

    def __post_init__(self):
        object.__setattr__(self, "bc", tuple(BoundaryType(b) for b in self.bc))
        stability_check(self.r_h, self.d)
        n = self.n_points
        if n < 4 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 4, got {n}")

    @property
    def d(self) -> int:
        return len(self.bc)


@dataclass(frozen=True)
class LcuTerm:
    """One weighted unitary: identity, or a shift placed on one dimension's sub-register."""

    kappa: float
    kind: str
    dim: int = 0

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.kind not in SHIFT_KINDS and self.kind != IDENTITY:
            raise ValueError(f"unknown unitary kind {self.kind!r}")


def shift_matrix(kind: str, n: int) -> np.ndarray:
    """Dense 2^n x 2^n permutation matrix of a shift operator.

    s0 sends e_j to e_{j-1 mod 2^n} (ones on the superdiagonal plus the
    bottom-left corner), s1 swaps every even/odd pair, s2 fixes the two end
    indices and swaps the interior pairs (1,2), (3,4), ...
    """
    if n < 1 or (kind == "s2" and n < 2):
        raise ValueError(f"invalid register size {n} for {kind}")
    size = 1 << n
    m = np.zeros((size, size))
    if kind == "s0":
        m[np.arange(size), (np.arange(size) + 1) % size] = 1.0
    elif kind == "s0dag":
        m[np.arange(size), (np.arange(size) - 1) % size] = 1.0
    elif kind == "s1":
        m[np.arange(size), np.arange(size) ^ 1] = 1.0
    elif kind == "s2":
        m[0, 0] = m[size - 1, size - 1] = 1.0
        for j in range(1, size - 1, 2):
            m[j, j + 1] = m[j + 1, j] = 1.0
    else:
        raise ValueError(f"unknown shift kind {kind!r}")
    return m


def _decrement_ops(n):
    # index decrement: X on the least significant qubit, then a borrow cascade
    return [GateOp.x(t, tuple((c, 1) for c in range(t + 1, n))) for t in range(n - 1, -1, -1)]


def _increment_ops(n):
    return [GateOp.x(t, tuple((c, 1) for c in range(t + 1, n))) for t in range(n)]


def _endpoint_swap_ops(n):
    # swaps |0...0> and |1...1>, fixing everything else
    fan = [GateOp.x(q, ((n - 1, 1),)) for q in range(n - 1)]
    mid = GateOp.x(n - 1, tuple((q, 0) for q in range(n - 1)))
    return fan + [mid] + fan


def shift_circuit(kind: str, n: int) -> Circuit:
    """Circuit whose dense matrix equals shift_matrix(kind, n) exactly."""
    if n < 1 or (kind == "s2" and n < 2):
        raise ValueError(f"invalid register size {n} for {kind}")
    if kind == "s0":
        ops = _decrement_ops(n)
    elif kind == "s0dag":
        ops = _increment_ops(n)
    elif kind == "s1":
        ops = [GateOp.x(n - 1)]
    elif kind == "s2":
        # interior pairing = increment, LSB flip, decrement; the endpoint swap
        # undoes the spurious 0 <-> 2^n-1 exchange that wrap-around introduces
        ops = _endpoint_swap_ops(n) + _increment_ops(n) + [GateOp.x(n - 1)] + _decrement_ops(n)
    else:
        raise ValueError(f"unknown shift kind {kind!r}")
    return Circuit(n, tuple(ops))


def _coupling_1d(bc: BoundaryType, size: int) -> np.ndarray:
    """Neighbor-coupling block for one dimension; corners carry the BC."""
    c = np.eye(size, k=1) + np.eye(size, k=-1)
    if bc is BoundaryType.PERIODIC:
        c[0, size - 1] = c[size - 1, 0] = 1.0
    elif bc is BoundaryType.NEUMANN:
        c[0, 0] = c[size - 1, size - 1] = 1.0
    # Dirichlet: open corners, diagonal untouched
    return c


def marching_matrix(spec: MarchingSpec) -> np.ndarray:
    """Dense one-step operator on the N_x1^d grid, x1 on the most significant axis."""
    n, r = spec.n_points, spec.r_h
    size = n**spec.d
    a = (1.0 - 2 * spec.d * r) * np.eye(size)
    for dim, bc in enumerate(spec.bc):
        c = _coupling_1d(bc, n)
        left = np.eye(n ** dim)
        right = np.eye(n ** (spec.d - dim - 1))
        a += r * np.kron(np.kron(left, c), right)
    return a


def decompose(spec: MarchingSpec) -> list[LcuTerm]:
    """LCU weights and unitaries for the marching matrix, padded to a power of two.

    Weights follow kappa_0 = 1, kappa_shift = r_h/(1-2d*r_h). At the stability
    boundary r_h = 1/(2d) that normalization diverges, so the limiting ratios
    are returned instead (identity weight 0, each shift weight 1); the
    reconstruction A = sum kappa_k U_k / (sum kappa) holds in both regimes.
    """
    kinds = {
        BoundaryType.PERIODIC: ("s0", "s0dag"),
        BoundaryType.NEUMANN: ("s1", "s2"),
    }
    if len(set(spec.bc)) != 1:
        raise ValueError("decompose requires a uniform boundary type across dimensions")
    if spec.bc[0] not in kinds:
        raise ValueError(f"no direct unitary decomposition for {spec.bc[0].value} boundaries")
    denom = 1.0 - 2 * spec.d * spec.r_h
    if denom > 0.0:
        kappa_id, kappa_shift = 1.0, spec.r_h / denom
    else:
        kappa_id, kappa_shift = 0.0, 1.0
    terms = [LcuTerm(kappa_id, IDENTITY)]
    for dim in range(spec.d - 1, -1, -1):  # trailing dimension first
        for kind in kinds[spec.bc[0]]:
            terms.append(LcuTerm(kappa_shift, kind, dim))
    width = 1
    while width < len(terms):
        width *= 2
    terms.extend(LcuTerm(0.0, IDENTITY) for _ in range(width - len(terms)))
    return terms


def term_matrix(term: LcuTerm, n_qubits_per_dim) -> np.ndarray:
    """Dense matrix of one LCU unitary on the full work register."""
    widths = list(n_qubits_per_dim)
    mats = [np.eye(1 << w) for w in widths]
    if term.kind != IDENTITY:
        mats[term.dim] = shift_matrix(term.kind, widths[term.dim])
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out
