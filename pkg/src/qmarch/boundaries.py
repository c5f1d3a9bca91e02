"""Method-of-images boundary handling.

A reflected dimension doubles its grid through one extra qubit: H plus a
CNOT fan-out entangles the original field with its coordinate mirror
(j -> N-1-j, a plain bit complement), sign-flipped for the odd case.
Evolving the doubled field with the periodic operator and uncomputing the
reflection then realizes Neumann (even) or homogeneous Dirichlet (odd)
dynamics on the original quadrant, at no cost in success probability.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .operators import BoundaryType, _coupling_1d, stability_check
from .registers import RegisterLayout
from .statevector import Circuit, GateOp, StateVector, project_zero


class Reflection(str, Enum):
    NONE = "none"
    EVEN = "even"
    ODD = "odd"


def _normalize_spec(spec) -> tuple[Reflection, ...]:
    spec = tuple(Reflection(s) for s in spec)
    if not spec:
        raise ValueError("empty reflection spec")
    return spec


def _check_layout(spec: tuple[Reflection, ...], layout: RegisterLayout) -> None:
    if len(spec) != layout.d:
        raise ValueError(f"spec covers {len(spec)} dims but layout has {layout.d}")
    for dim, r in enumerate(spec):
        if (r is not Reflection.NONE) != layout.reflected[dim]:
            raise ValueError(f"reflection of dimension {dim} disagrees with the layout")


def reflect_circuit(spec, layout: RegisterLayout) -> Circuit:
    """Prepare (|0>|phi> +/- |1>|mirror(phi)>)/sqrt(2) on each reflected dimension.

    Acts on the full register described by ``layout``; ancillas and
    non-reflected dimensions are untouched.
    """
    spec = _normalize_spec(spec)
    _check_layout(spec, layout)
    if all(r is Reflection.NONE for r in spec):
        raise ValueError("at least one dimension must be reflected")
    ops = []
    for dim, r in enumerate(spec):
        if r is Reflection.NONE:
            continue
        refl = layout.refl_qubit(dim)
        ops.append(GateOp.h(refl))
        if r is Reflection.ODD:
            ops.append(GateOp.z(refl))
        ops.extend(GateOp.x(q, ((refl, 1),)) for q in layout.coord_qubits(dim))
    return Circuit(layout.n_total, tuple(ops))


def classical_mirror(field, spec) -> np.ndarray:
    """Concatenate the field with its per-dimension reversal (negated for odd)."""
    spec = _normalize_spec(spec)
    out = np.asarray(field)
    if out.ndim != len(spec):
        raise ValueError(f"field has {out.ndim} dims, spec {len(spec)}")
    for dim, r in enumerate(spec):
        if r is Reflection.NONE:
            continue
        sign = 1.0 if r is Reflection.EVEN else -1.0
        out = np.concatenate([out, sign * np.flip(out, axis=dim)], axis=dim)
    return out


def restrict_quadrant(field, spec) -> np.ndarray:
    """Keep the first half of every reflected dimension (the domain of interest)."""
    spec = _normalize_spec(spec)
    field = np.asarray(field)
    cut = tuple(
        slice(0, field.shape[dim] // 2) if r is not Reflection.NONE else slice(None)
        for dim, r in enumerate(spec)
    )
    return field[cut]


def effective_matrix(spec, r_h: float, n_points: int) -> np.ndarray:
    """Bounded one-step operator realized by mirror + periodic marching + restrict.

    Columns are read off by marching mirrored basis fields on the doubled
    grid, so this is the exact classical reference for reflection runs.
    """
    spec = _normalize_spec(spec)
    d = len(spec)
    stability_check(r_h, d)
    sizes = [2 * n_points if r is not Reflection.NONE else n_points for r in spec]
    total = int(np.prod(sizes))
    doubled = (1.0 - 2 * d * r_h) * np.eye(total)
    for dim, size in enumerate(sizes):
        c = _coupling_1d(BoundaryType.PERIODIC, size)
        left = np.eye(int(np.prod(sizes[:dim])))
        right = np.eye(int(np.prod(sizes[dim + 1 :])))
        doubled += r_h * np.kron(np.kron(left, c), right)
    size_q = n_points**d
    out = np.zeros((size_q, size_q))
    shape_q = (n_points,) * d
    for j in range(size_q):
        basis = np.zeros(size_q)
        basis[j] = 1.0
        mirrored = classical_mirror(basis.reshape(shape_q), spec)
        evolved = (doubled @ mirrored.ravel()).reshape(mirrored.shape)
        out[:, j] = restrict_quadrant(evolved, spec).ravel()
    return out


def boundary_postselect_probability(state: StateVector, layout: RegisterLayout) -> float:
    """Probability that every reflection qubit reads 0 (1.0 when none exist)."""
    refl = layout.refl_qubits
    if not refl:
        return 1.0
    _, p = project_zero(state, refl)
    return p
