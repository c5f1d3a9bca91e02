"""Prepare/select assembly for linear combinations of unitaries.

The step circuit is V on the ancilla register, the ancilla-controlled
unitaries, then V adjoint; post-selecting the ancillas on |0...0> leaves
(sum_k kappa_k U_k / sum_k kappa_k) applied to the work register.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import (
    Circuit,
    GateOp,
    StateVector,
    kron,
    project_zero,
    run_circuit,
)


@dataclass(frozen=True, eq=False)
class LcuPlan:
    """Weights plus one work-register circuit per unitary (identity = empty circuit)."""

    kappas: np.ndarray
    term_circuits: tuple[Circuit, ...]

    def __post_init__(self):
        k = np.asarray(self.kappas, dtype=float)
        object.__setattr__(self, "kappas", k)
        object.__setattr__(self, "term_circuits", tuple(self.term_circuits))
        m = k.size
        if m < 1 or m & (m - 1):
            raise ValueError(f"term count {m} is not a power of two")
        if len(self.term_circuits) != m:
            raise ValueError("one circuit per weight required")
        if np.any(k < 0) or k.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive sum")
        widths = {c.n_qubits for c in self.term_circuits}
        if len(widths) != 1:
            raise ValueError("term circuits must share one work register size")

    @property
    def n_anc(self) -> int:
        return int(self.kappas.size).bit_length() - 1

    @property
    def n_work(self) -> int:
        return self.term_circuits[0].n_qubits

    @property
    def alpha(self) -> float:
        return float(self.kappas.sum())


def build_prepare(kappas) -> np.ndarray:
    """Unitary whose column 0 is sqrt(kappa_k / sum kappa).

    The completion is a cascade of plane rotations R_{m-1}...R_1, R_j acting
    in the (0, j) coordinate plane with sin(theta_j)^2 = kappa_j / (kappa_0 +
    sum_{i>=j} kappa_i). Deterministic, and column j stays supported on
    indices {0, j, j+1, ...}, which is the completion the closed-form
    ancilla-branch expressions of appendix_blocks assume.
    """
    k = np.asarray(kappas, dtype=float)
    m = k.size
    if m < 1 or m & (m - 1):
        raise ValueError(f"weight count {m} is not a power of two")
    if np.any(k < 0):
        raise ValueError("weights must be nonnegative")
    if k.sum() <= 0:
        raise ValueError("weights must not all vanish")
    v = np.eye(m)
    remaining = k[0] + k[:0:-1].cumsum()[::-1]  # P_j = kappa_0 + sum_{i >= j} kappa_i
    for j in range(1, m):
        p_j = remaining[j - 1]
        p_next = k[0] if j == m - 1 else remaining[j]
        if p_j <= 0.0:
            continue
        s = np.sqrt(k[j] / p_j)
        c = np.sqrt(p_next / p_j)
        row0, rowj = v[0].copy(), v[j].copy()
        v[0] = c * row0 - s * rowj
        v[j] = s * row0 + c * rowj
    return v


def build_select(plan: LcuPlan) -> Circuit:
    """Ancilla-state-k controlled application of each term circuit."""
    n_anc, n_work = plan.n_anc, plan.n_work
    ops = []
    for k, circ in enumerate(plan.term_circuits):
        ctrls = tuple((q, (k >> (n_anc - 1 - q)) & 1) for q in range(n_anc))
        for op in circ.ops:
            ops.append(op.shifted(n_anc).with_controls(ctrls))
    return Circuit(n_anc + n_work, tuple(ops))


def lcu_step_circuit(plan: LcuPlan) -> Circuit:
    if plan.n_anc == 0:  # single-term plan: no prepare/unprepare needed
        return Circuit(plan.n_work, build_select(plan).ops)
    v = build_prepare(plan.kappas)
    anc = tuple(range(plan.n_anc))
    ops = (GateOp.unitary(v, anc),) + build_select(plan).ops + (GateOp.unitary(v.conj().T, anc),)
    return Circuit(plan.n_anc + plan.n_work, ops)


def lcu_apply(state: StateVector, plan: LcuPlan) -> tuple[StateVector, float]:
    """One marching step: returns the unnormalized post-selected state and p_step."""
    if state.n_qubits != plan.n_work:
        raise ValueError("state size does not match the plan's work register")
    if not np.any(state.amps):
        raise ValueError("cannot march a zero state")
    full = kron(StateVector.zero(plan.n_anc), state)
    out = run_circuit(full, lcu_step_circuit(plan))
    projected, p = project_zero(out, range(plan.n_anc))
    work = StateVector(plan.n_work, projected.amps[: 1 << plan.n_work])
    return work, p


def appendix_blocks(kappas, unitaries) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form ancilla-branch operators of a four-term step circuit.

    Returns the work-register operators paired with ancilla outcomes
    |00>, |01>, |10>, |11> when the input ancillas start in |00>. The
    expressions are specific to the build_prepare completion.
    """
    k = np.asarray(kappas, dtype=float)
    if k.size != 4:
        raise ValueError("closed forms cover exactly four terms")
    if np.any(k < 0) or k.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive sum")
    if k[0] + k[2] + k[3] <= 0 or k[0] + k[3] <= 0:
        raise ValueError("degenerate weights make the off-branch closed forms undefined")
    u0, u1, u2, u3 = (np.asarray(u, dtype=complex) for u in unitaries)
    total = k.sum()
    s = k[0] + k[2] + k[3]
    b00 = (k[0] * u0 + k[1] * u1 + k[2] * u2 + k[3] * u3) / total
    b01 = (np.sqrt(k[1] * s) * u1 - np.sqrt(k[1] / s) * (k[2] * u2 + k[3] * u3 + k[0] * u0)) / total
    b10 = np.sqrt(k[2] / (s * total)) * (
        np.sqrt(k[0] + k[3]) * u2 - (k[3] * u3 + k[0] * u0) / np.sqrt(k[0] + k[3])
    )
    b11 = np.sqrt(k[0] * k[3] / ((k[0] + k[3]) * total)) * (u3 - u0)
    return b00, b01, b10, b11
