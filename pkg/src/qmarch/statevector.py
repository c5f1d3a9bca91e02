"""Dense state-vector simulator with big-endian qubit indexing.

Qubit 0 is the most significant bit of the basis index, so kron(a, b)
places register ``a`` on the high bits. Post-selection keeps states
unnormalized; the squared norm then carries the success probability.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_SQRT1_2 = 1.0 / np.sqrt(2.0)
_KINDS = ("x", "z", "h", "unitary")


@dataclass(frozen=True, eq=False)
class GateOp:
    """A primitive X/Z/H gate or an embedded multi-qubit unitary, with controls.

    ``controls`` holds (qubit, value) pairs; value 0 means the gate fires only
    where that qubit is 0. Targets of ``unitary`` ops are listed most
    significant first, matching the embedded matrix's own index convention.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.targets)) != len(self.targets) or not self.targets:
            raise ValueError("targets must be distinct and non-empty")
        ctrl_qubits = [q for q, _ in self.controls]
        if len(set(ctrl_qubits)) != len(ctrl_qubits):
            raise ValueError("duplicate control qubit")
        if set(ctrl_qubits) & set(self.targets):
            raise ValueError("control overlaps target")
        if any(v not in (0, 1) for _, v in self.controls):
            raise ValueError("control value must be 0 or 1")
        if min(self.targets, default=0) < 0 or min(ctrl_qubits, default=0) < 0:
            raise ValueError("negative qubit index")
        if self.kind == "unitary":
            m = np.asarray(self.matrix, dtype=complex)
            dim = 1 << len(self.targets)
            if m.shape != (dim, dim):
                raise ValueError(f"matrix shape {m.shape} does not fit {len(self.targets)} targets")
            if not np.allclose(m.conj().T @ m, np.eye(dim), atol=1e-10):
                raise ValueError("embedded matrix is not unitary to 1e-10")
            object.__setattr__(self, "matrix", m)
        else:
            if len(self.targets) != 1:
                raise ValueError(f"{self.kind} takes exactly one target")
            if self.matrix is not None:
                raise ValueError(f"{self.kind} takes no matrix")

    @classmethod
    def x(cls, target: int, controls=()) -> "GateOp":
        return cls("x", (target,), tuple(controls))

    @classmethod
    def z(cls, target: int, controls=()) -> "GateOp":
        return cls("z", (target,), tuple(controls))

    @classmethod
    def h(cls, target: int, controls=()) -> "GateOp":
        return cls("h", (target,), tuple(controls))

    @classmethod
    def unitary(cls, matrix, targets, controls=()) -> "GateOp":
        return cls("unitary", tuple(targets), tuple(controls), matrix)

    def with_controls(self, extra) -> "GateOp":
        """Same gate with additional control qubits prepended."""
        return GateOp(self.kind, self.targets, tuple(extra) + self.controls, self.matrix)

    def shifted(self, offset: int) -> "GateOp":
        """Same gate with every qubit index moved by ``offset``."""
        return GateOp(
            self.kind,
            tuple(t + offset for t in self.targets),
            tuple((q + offset, v) for q, v in self.controls),
            self.matrix,
        )

    def adjoint(self) -> "GateOp":
        if self.kind == "unitary":
            return GateOp(self.kind, self.targets, self.controls, self.matrix.conj().T)
        return self  # x, z, h are self-adjoint


@dataclass(frozen=True, eq=False)
class Circuit:
    n_qubits: int
    ops: tuple[GateOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            used = set(op.targets) | {q for q, _ in op.controls}
            if max(used) >= self.n_qubits:
                raise ValueError("op addresses qubit outside register")

    def adjoint(self) -> "Circuit":
        return Circuit(self.n_qubits, tuple(op.adjoint() for op in reversed(self.ops)))

    def shifted(self, offset: int, n_qubits: int) -> "Circuit":
        return Circuit(n_qubits, tuple(op.shifted(offset) for op in self.ops))


@dataclass(eq=False)
class StateVector:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got {self.amps.shape}")
        n2 = float(np.vdot(self.amps, self.amps).real)
        if n2 > 1.0 + 1e-12:
            raise ValueError(f"squared norm {n2} exceeds 1")

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis(n_qubits, 0)


@lru_cache(maxsize=None)
def _matched(n, controls):
    """Basis indices whose control bits all match, ascending."""
    idx = np.arange(1 << n, dtype=np.intp)
    for q, want in controls:
        idx = idx[((idx >> (n - 1 - q)) & 1) == want]
    return idx


@lru_cache(maxsize=None)
def _pairs(n, target, controls):
    i0 = _matched(n, controls + ((target, 0),))
    return i0, i0 + (1 << (n - 1 - target))


@lru_cache(maxsize=None)
def _blocks(n, targets, controls):
    """Row indices for an embedded unitary: one row per target bit pattern."""
    i0 = _matched(n, controls + tuple((t, 0) for t in targets))
    k = len(targets)
    offsets = []
    for v in range(1 << k):
        off = 0
        for i, t in enumerate(targets):
            if (v >> (k - 1 - i)) & 1:
                off += 1 << (n - 1 - t)
        offsets.append(off)
    return np.asarray(offsets, dtype=np.intp)[:, None] + i0[None, :]


def _apply_inplace(amps: np.ndarray, n: int, op: GateOp) -> None:
    # amps may be 1D (a state) or 2D (a stack of columns); axis 0 is the basis index.
    if op.kind == "x":
        i0, i1 = _pairs(n, op.targets[0], op.controls)
        a = amps[i0]
        amps[i0] = amps[i1]
        amps[i1] = a
    elif op.kind == "z":
        i1 = _matched(n, op.controls + ((op.targets[0], 1),))
        amps[i1] = -amps[i1]
    elif op.kind == "h":
        i0, i1 = _pairs(n, op.targets[0], op.controls)
        a, b = amps[i0], amps[i1]
        amps[i0] = (a + b) * _SQRT1_2
        amps[i1] = (a - b) * _SQRT1_2
    else:
        rows = _blocks(n, op.targets, op.controls)
        amps[rows] = np.tensordot(op.matrix, amps[rows], axes=(1, 0))


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    """Apply one gate and return the new state; the input is left untouched."""
    amps = state.amps.copy()
    _apply_inplace(amps, state.n_qubits, op)
    return StateVector(state.n_qubits, amps)


def run_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.n_qubits != state.n_qubits:
        raise ValueError("circuit and state register sizes differ")
    amps = state.amps.copy()
    for op in circuit.ops:
        _apply_inplace(amps, state.n_qubits, op)
    return StateVector(state.n_qubits, amps)


def circuit_to_matrix(circuit: Circuit, max_qubits: int = 12) -> np.ndarray:
    """Dense unitary of the circuit; refuses registers above ``max_qubits``."""
    if circuit.n_qubits > max_qubits:
        raise ValueError(f"{circuit.n_qubits} qubits exceeds densification cap {max_qubits}")
    mat = np.eye(1 << circuit.n_qubits, dtype=complex)
    for op in circuit.ops:
        _apply_inplace(mat, circuit.n_qubits, op)
    return mat


def project_zero(state: StateVector, qubits) -> tuple[StateVector, float]:
    """Project the listed qubits onto |0> without renormalizing.

    Returns the projected state and the success probability, i.e. the ratio
    of squared norms after/before. Raises on a zero-norm input.
    """
    qubits = tuple(qubits)
    before = norm_sq(state)
    if before == 0.0:
        raise ValueError("cannot project a zero-norm state")
    amps = state.amps.copy()
    idx = np.arange(amps.size)
    keep = np.ones(amps.size, dtype=bool)
    for q in qubits:
        keep &= ((idx >> (state.n_qubits - 1 - q)) & 1) == 0
    amps[~keep] = 0.0
    out = StateVector(state.n_qubits, amps)
    return out, norm_sq(out) / before


def kron(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.n_qubits + b.n_qubits, np.kron(a.amps, b.amps))


def inner(a: StateVector, b: StateVector) -> complex:
    return complex(np.vdot(a.amps, b.amps))


def norm_sq(state: StateVector) -> float:
    return float(np.vdot(state.amps, state.amps).real)
