"""Block encodings: embedding a contraction into a corner of a unitary.

Three constructions are provided. The fixed-sub-block form needs M
Hermitian (or commuting with its defect root) to come out unitary; the
column-completion form works for any nonzero M and owns the
subnormalization alpha = sigma_max(M); the Hamiltonian-dilation form
exponentiates [[0, -iM^h], [iM, 0]] and lands the sine transform of M in
its lower-left corner. The time-marching driver never uses these (its
one-step encoding has alpha = 1 by construction); they exist to make the
probability accounting testable in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .statevector import StateVector


class Placement(str, Enum):
    """Which corner of the enlarged unitary holds the encoded block."""

    UPPER_LEFT = "upper_left"
    LOWER_LEFT = "lower_left"


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    """A unitary ``u`` carrying ``source / alpha`` in one 2x2 block corner.

    ``u`` is (2m x 2m) over ``source`` (m x m); ``alpha`` is the
    subnormalization, never below the spectral norm of ``source``.
    """

    u: np.ndarray
    alpha: float
    placement: Placement
    source: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        src = np.asarray(self.source, dtype=complex)
        if src.ndim != 2 or src.shape[0] != src.shape[1]:
            raise ValueError("source must be square")
        m = src.shape[0]
        if u.shape != (2 * m, 2 * m):
            raise ValueError(f"unitary shape {u.shape} does not dilate a {m}x{m} source")
        defect = np.max(np.abs(u.conj().T @ u - np.eye(2 * m)))
        if defect > 1e-10:
            raise ValueError(f"not unitary: max defect {defect:.3e}")
        if self.alpha < np.linalg.norm(src, 2) - 1e-9:
            raise ValueError("alpha below the spectral norm of the source")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "source", src)

    @property
    def block(self) -> np.ndarray:
        """The encoded corner of ``u`` (rows select the ancilla outcome)."""
        m = self.source.shape[0]
        rows = slice(0, m) if self.placement is Placement.UPPER_LEFT else slice(m, 2 * m)
        return self.u[rows, :m]

    @property
    def postselect_outcome(self) -> int:
        """Ancilla value whose branch holds the block (1 means measure |1>,
        or equivalently apply X and keep |0>)."""
        return 0 if self.placement is Placement.UPPER_LEFT else 1


def _sqrtm_psd(h: np.ndarray) -> np.ndarray:
    """Hermitian square root with eigenvalues clamped at zero."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def _as_contraction(m_mat) -> np.ndarray:
    m_mat = np.asarray(m_mat, dtype=complex)
    if m_mat.ndim != 2 or m_mat.shape[0] != m_mat.shape[1]:
        raise ValueError("matrix must be square")
    norm = np.linalg.norm(m_mat, 2)
    if norm > 1.0 + 1e-10:
        raise ValueError(f"spectral norm {norm:.6g} exceeds 1; pre-scale the input")
    return m_mat


def camps_encode(m_mat) -> BlockEncoding:
    """Encode a pre-scaled M as [[M, R], [R, -M]] with R = sqrt(I - M^h M).

    Unitary only when M is Hermitian or commutes with R, so the result is
    checked numerically and rejected past 1e-8.
    """
    m_mat = _as_contraction(m_mat)
    dim = m_mat.shape[0]
    root = _sqrtm_psd(np.eye(dim) - m_mat.conj().T @ m_mat)
    u = np.block([[m_mat, root], [root, -m_mat]])
    defect = np.max(np.abs(u.conj().T @ u - np.eye(2 * dim)))
    if defect > 1e-8:
        raise ValueError(
            f"fixed-sub-block form is not unitary here (defect {defect:.3e}); "
            "M must be Hermitian or commute with sqrt(I - M^h M)"
        )
    return BlockEncoding(u, 1.0, Placement.UPPER_LEFT, m_mat)


def lin_encode(m_mat, seed: int) -> BlockEncoding:
    """Encode any nonzero M by completing the exact first block-column.

    Column block [s*M; F] with s = 1/sigma_max and F^h F = I - s^2 M^h M is
    orthonormal by construction; the remaining columns are seeded random
    vectors orthogonalized against it. alpha = sigma_max(M).
    """
    m_mat = np.asarray(m_mat, dtype=complex)
    if m_mat.ndim != 2 or m_mat.shape[0] != m_mat.shape[1]:
        raise ValueError("matrix must be square")
    if not np.any(m_mat):
        raise ValueError("cannot encode the zero matrix")
    dim = m_mat.shape[0]
    sigma = np.linalg.norm(m_mat, 2)
    scaled = m_mat / sigma
    f = _sqrtm_psd(np.eye(dim) - scaled.conj().T @ scaled)
    first = np.vstack([scaled, f])
    rng = np.random.default_rng(seed)
    for _ in range(8):
        cand = rng.standard_normal((2 * dim, dim))
        if np.iscomplexobj(m_mat):
            cand = cand + 1j * rng.standard_normal((2 * dim, dim))
        # twice-is-enough reorthogonalization against the fixed block
        for _ in range(2):
            cand -= first @ (first.conj().T @ cand)
        q, r = np.linalg.qr(cand)
        if np.min(np.abs(np.diag(r))) > 1e-8:
            return BlockEncoding(np.hstack([first, q]), float(sigma), Placement.UPPER_LEFT, m_mat)
    raise ValueError("orthonormal completion failed after 8 seeded attempts")


def hamsim_encode(m_mat, theta: float) -> BlockEncoding:
    """Encode exp(-i H theta) for the dilation H = [[0, -iM^h], [iM, 0]].

    The lower-left block is M sin(sqrt(M^h M) theta) / sqrt(M^h M), the sine
    acting on singular values (sin(0)/0 extended to theta). Post-selection
    keeps the ancilla-|1> branch.
    """
    m_mat = _as_contraction(m_mat)
    dim = m_mat.shape[0]
    h = np.zeros((2 * dim, 2 * dim), dtype=complex)
    h[:dim, dim:] = -1j * m_mat.conj().T
    h[dim:, :dim] = 1j * m_mat
    vals, vecs = np.linalg.eigh(h)
    u = (vecs * np.exp(-1j * vals * theta)) @ vecs.conj().T
    return BlockEncoding(u, 1.0, Placement.LOWER_LEFT, m_mat)


def success_probability(be: BlockEncoding, psi) -> float:
    """Post-selection probability ||block . psi||^2 for a normalized psi."""
    amps = psi.amps if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    if amps.shape != (be.source.shape[0],):
        raise ValueError(f"state length {amps.shape} does not match block size {be.source.shape[0]}")
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("input state must be normalized")
    return float(np.linalg.norm(be.block @ amps) ** 2)
