"""End-to-end explicit-heat time marching with probability bookkeeping.

Two quantum backends share one trace schema: ``gate`` executes the
prepare/select/unprepare circuits through the state-vector kernels,
``fast`` applies the identical linear maps as matrix-free stencils.
Reflected dimensions run on a doubled periodic grid entered through the
reflection circuit; the carried state stays unnormalized so its squared
norm is the cumulative success probability, and a single static rescale
by the initial field norm recovers physical amplitudes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .boundaries import (
    Reflection,
    classical_mirror,
    effective_matrix,
    reflect_circuit,
    restrict_quadrant,
)
from .lcu import LcuPlan, lcu_step_circuit
from .operators import (
    IDENTITY,
    BoundaryType,
    MarchingSpec,
    decompose,
    marching_matrix,
    shift_circuit,
    stability_check,
)
from .registers import RegisterLayout
from .statevector import Circuit, StateVector, project_zero, run_circuit

_ABORT_MAGNITUDE = 1e6


class BcMode(str, Enum):
    PERIODIC = "periodic"
    NEUMANN_DIRECT = "neumann_direct"
    NEUMANN_REFLECT = "neumann_reflect"
    DIRICHLET_REFLECT = "dirichlet_reflect"

    @property
    def reflected(self) -> bool:
        return self in (BcMode.NEUMANN_REFLECT, BcMode.DIRICHLET_REFLECT)


class Backend(str, Enum):
    GATE = "gate"
    FAST = "fast"


class DivergenceError(RuntimeError):
    """Field magnitude blew past the abort threshold (or the state collapsed)."""


_CONFIG_KEYS = ("d", "n_points", "r_h", "n_t", "bc", "method", "backend", "snapshots", "seed", "out_dir")


@dataclass(frozen=True)
class ExperimentConfig:
    n_points: int
    r_h: float
    n_t: int
    bc: tuple[BcMode, ...]
    backend: Backend = Backend.FAST
    snapshots: tuple[int, ...] = ()
    seed: int = 0
    out_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "bc", tuple(BcMode(b) for b in self.bc))
        object.__setattr__(self, "backend", Backend(self.backend))
        object.__setattr__(self, "snapshots", tuple(sorted(set(int(s) for s in self.snapshots))))
        stability_check(self.r_h, self.d)
        n = self.n_points
        if n < 4 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 4, got {n}")
        if self.n_t < 0:
            raise ValueError("n_t must be nonnegative")
        if any(s < 0 or s > self.n_t for s in self.snapshots):
            raise ValueError("snapshot steps must lie in [0, n_t]")
        if BcMode.NEUMANN_DIRECT in self.bc and any(b.reflected for b in self.bc):
            raise ValueError("neumann_direct cannot share a run with reflected dimensions")

    @property
    def d(self) -> int:
        return len(self.bc)

    @classmethod
    def from_mapping(cls, data) -> "ExperimentConfig":
        """Build from the flat config mapping (JSON-shaped, string enums)."""
        data = dict(data)
        unknown = sorted(set(data) - set(_CONFIG_KEYS))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        for key in ("n_points", "r_h", "n_t"):
            if key not in data:
                raise ValueError(f"config is missing required key {key!r}")
        bc_raw = data.get("bc", "periodic")
        if isinstance(bc_raw, str):
            bc_raw = [bc_raw]
        method = str(data.get("method", "reflect"))
        if method not in ("reflect", "direct"):
            raise ValueError(f"method must be 'reflect' or 'direct', got {method!r}")
        modes = []
        for raw in bc_raw:
            name = str(raw)
            if name in BcMode._value2member_map_:
                modes.append(BcMode(name))
            elif name == "neumann":
                modes.append(BcMode.NEUMANN_REFLECT if method == "reflect" else BcMode.NEUMANN_DIRECT)
            elif name == "dirichlet":
                if method == "direct":
                    raise ValueError("dirichlet boundaries support only the reflection method")
                modes.append(BcMode.DIRICHLET_REFLECT)
            else:
                raise ValueError(f"unknown boundary condition {name!r}")
        if "d" in data and int(data["d"]) != len(modes):
            raise ValueError(f"d = {data['d']} does not match {len(modes)} bc entries")
        out_dir = data.get("out_dir")
        return cls(
            n_points=int(data["n_points"]),
            r_h=float(data["r_h"]),
            n_t=int(data["n_t"]),
            bc=tuple(modes),
            backend=Backend(str(data.get("backend", "fast"))),
            snapshots=tuple(int(s) for s in data.get("snapshots", ())),
            seed=int(data.get("seed", 0)),
            out_dir=str(out_dir) if out_dir is not None else None,
        )

    def to_mapping(self) -> dict:
        """Flat mapping of effective values (bc carries the resolved method)."""
        return {
            "d": self.d,
            "n_points": self.n_points,
            "r_h": self.r_h,
            "n_t": self.n_t,
            "bc": [b.value for b in self.bc],
            "backend": self.backend.value,
            "snapshots": list(self.snapshots),
            "seed": self.seed,
            "out_dir": self.out_dir,
        }


@dataclass(frozen=True)
class TraceRecord:
    step: int
    p_step: float
    p_cum: float
    eps: float
    boundary_p: float


@dataclass(frozen=True)
class FieldSnapshot:
    step: int
    field: np.ndarray


def initial_condition(config: ExperimentConfig) -> np.ndarray:
    """Gaussian bump exp(-200 sum (x_i - 0.25)^2) at cell centers.

    Cells are x_j = (j + 0.5) dx with dx = 1/(2 n_points), so the domain of
    interest is [0, 0.5]^d and doubling a reflected dimension tiles [0, 1].
    """
    n = config.n_points
    x = (np.arange(n) + 0.5) / (2.0 * n)
    g = np.exp(-200.0 * (x - 0.25) ** 2)
    field = g
    for _ in range(config.d - 1):
        field = np.multiply.outer(field, g)
    return field


def reflection_spec(config: ExperimentConfig) -> tuple[Reflection, ...]:
    table = {
        BcMode.PERIODIC: Reflection.NONE,
        BcMode.NEUMANN_DIRECT: Reflection.NONE,
        BcMode.NEUMANN_REFLECT: Reflection.EVEN,
        BcMode.DIRICHLET_REFLECT: Reflection.ODD,
    }
    return tuple(table[b] for b in config.bc)


def build_layout(config: ExperimentConfig) -> RegisterLayout:
    width = config.n_points.bit_length() - 1
    n_anc = (2 * config.d).bit_length()  # identity + 2 shifts per dim, padded
    flags = tuple(b.reflected for b in config.bc)
    return RegisterLayout(n_anc, (width,) * config.d, flags)


def step_plan(config: ExperimentConfig, layout: RegisterLayout) -> LcuPlan:
    """Marching LCU with each shift widened to its dimension's sub-register.

    Weights come from the uniform periodic decomposition (they depend only
    on r_h and d); direct-Neumann dimensions swap in the involution pair.
    """
    base = decompose(MarchingSpec(config.n_points, config.r_h, (BoundaryType.PERIODIC,) * config.d))
    kappas, circuits = [], []
    for term in base:
        kappas.append(term.kappa)
        if term.kind == IDENTITY:
            circuits.append(Circuit(layout.n_work))
            continue
        if config.bc[term.dim] is BcMode.NEUMANN_DIRECT:
            kind = "s1" if term.kind == "s0" else "s2"
        else:
            kind = term.kind
        sub = shift_circuit(kind, layout.sub_width(term.dim))
        circuits.append(sub.shifted(layout.dim_offset(term.dim) - layout.n_anc, layout.n_work))
    return LcuPlan(np.asarray(kappas), tuple(circuits))


def reference_matrix(config: ExperimentConfig) -> np.ndarray:
    """Dense one-step operator on the domain of interest (the classical oracle)."""
    spec = reflection_spec(config)
    if any(r is not Reflection.NONE for r in spec):
        return effective_matrix(spec, config.r_h, config.n_points)
    table = {BcMode.PERIODIC: BoundaryType.PERIODIC, BcMode.NEUMANN_DIRECT: BoundaryType.NEUMANN}
    bc = tuple(table[b] for b in config.bc)
    return marching_matrix(MarchingSpec(config.n_points, config.r_h, bc))


def _neighbor_sum(field: np.ndarray, axis: int, mode: BcMode) -> np.ndarray:
    up = np.roll(field, 1, axis)
    down = np.roll(field, -1, axis)
    if mode is BcMode.NEUMANN_DIRECT:
        first = [slice(None)] * field.ndim
        last = [slice(None)] * field.ndim
        first[axis], last[axis] = 0, -1
        up[tuple(first)] = field[tuple(first)]
        down[tuple(last)] = field[tuple(last)]
    return up + down


def _stepper(config: ExperimentConfig):
    """Matrix-free one-step map on the run grid (doubled where reflected)."""
    r, d = config.r_h, config.d
    modes = [BcMode.PERIODIC if b.reflected else b for b in config.bc]

    def step(field: np.ndarray) -> np.ndarray:
        out = (1.0 - 2 * d * r) * field
        for axis, mode in enumerate(modes):
            out += r * _neighbor_sum(field, axis, mode)
        return out

    return step


def _run_shape(config: ExperimentConfig) -> tuple[int, ...]:
    return tuple(2 * config.n_points if b.reflected else config.n_points for b in config.bc)


def classical_run(config: ExperimentConfig) -> list[FieldSnapshot]:
    """March the reference field, returning quadrant snapshots at the configured steps.

    Reflected dimensions evolve the mirrored field on the doubled periodic
    grid, which agrees column-for-column with applying the effective
    bounded operator on the domain of interest.
    """
    spec = reflection_spec(config)
    field = classical_mirror(initial_condition(config), spec)
    step = _stepper(config)
    wanted = set(config.snapshots)
    snaps = []
    if 0 in wanted:
        snaps.append(FieldSnapshot(0, restrict_quadrant(field, spec).copy()))
    for t in range(1, config.n_t + 1):
        field = step(field)
        if np.max(np.abs(field)) > _ABORT_MAGNITUDE:
            raise DivergenceError(f"classical field magnitude exceeded {_ABORT_MAGNITUDE:g} at step {t}")
        if t in wanted:
            snaps.append(FieldSnapshot(t, restrict_quadrant(field, spec).copy()))
    return snaps


def _clamp_probability(p: float) -> float:
    # projection ratios are <= 1 exactly; shave off rounding overshoot only
    if 1.0 < p <= 1.0 + 1e-12:
        return 1.0
    return p


def quantum_run(config: ExperimentConfig) -> tuple[list[TraceRecord], list[FieldSnapshot]]:
    """March N_t steps with per-step post-selection bookkeeping.

    Trace rows carry p_step (ancilla projection ratio), p_cum (their running
    product, equal to the squared norm ratio against the initial field),
    eps (l2 distance to the lockstep classical reference after rescaling),
    and boundary_p (reflection-qubit post-selection diagnostic).
    """
    runner = _gate_run if config.backend is Backend.GATE else _fast_run
    return runner(config)[:2]


def _bookkeeper(config: ExperimentConfig):
    """Shared per-step trace/snapshot accounting against the classical lockstep."""
    spec = reflection_spec(config)
    classical = classical_mirror(initial_condition(config), spec)
    step = _stepper(config)
    traces: list[TraceRecord] = []
    snaps: list[FieldSnapshot] = []
    state = {"p_cum": 1.0, "classical": classical}

    def record(t: int, p_step: float, boundary_p: float, quadrant: np.ndarray) -> None:
        if t == 0:
            if 0 in config.snapshots:
                snaps.append(FieldSnapshot(0, quadrant.copy()))
            return
        c = step(state["classical"])
        if np.max(np.abs(c)) > _ABORT_MAGNITUDE:
            raise DivergenceError(f"classical reference diverged at step {t}")
        state["classical"] = c
        p_step = _clamp_probability(p_step)
        state["p_cum"] *= p_step
        eps = float(np.linalg.norm(quadrant - restrict_quadrant(c, spec)))
        traces.append(TraceRecord(t, p_step, state["p_cum"], eps, boundary_p))
        if t in config.snapshots:
            snaps.append(FieldSnapshot(t, quadrant.copy()))

    return traces, snaps, record


def _fast_run(config: ExperimentConfig, on_step=None):
    spec = reflection_spec(config)
    phi0 = initial_condition(config)
    norm0 = float(np.linalg.norm(phi0))
    reflected_axes = [(dim, r) for dim, r in enumerate(spec) if r is not Reflection.NONE]
    scale = norm0 * np.sqrt(2.0 ** len(reflected_axes))
    u = classical_mirror(phi0, spec) / scale
    step = _stepper(config)
    traces, snaps, record = _bookkeeper(config)

    def boundary_p(v: np.ndarray) -> float:
        if not reflected_axes:
            return 1.0
        kept = v
        for dim, r in reflected_axes:
            sign = 1.0 if r is Reflection.EVEN else -1.0
            kept = (kept + sign * np.flip(kept, axis=dim)) / 2.0
        total = float(np.sum(v * v))
        return float(np.sum(kept * kept)) / total if total else 0.0

    def quadrant(v: np.ndarray) -> np.ndarray:
        return restrict_quadrant(v, spec) * norm0 * np.sqrt(2.0 ** len(reflected_axes))

    record(0, 1.0, 1.0, quadrant(u))
    for t in range(1, config.n_t + 1):
        start = time.perf_counter()
        nxt = step(u)
        n_prev = float(np.sum(u * u))
        n_next = float(np.sum(nxt * nxt))
        if n_next == 0.0:
            raise DivergenceError(f"state collapsed to zero at step {t}")
        u = nxt
        record(t, n_next / n_prev, boundary_p(u), quadrant(u))
        if on_step is not None:
            on_step(t, quadrant(u), time.perf_counter() - start)
    return traces, snaps


def _gate_run(config: ExperimentConfig, on_step=None):
    spec = reflection_spec(config)
    layout = build_layout(config)
    plan = step_plan(config, layout)
    circuit = lcu_step_circuit(plan)
    phi0 = initial_condition(config)
    norm0 = float(np.linalg.norm(phi0))
    n_refl = len(layout.refl_qubits)

    amps = np.zeros(1 << layout.n_total, dtype=complex)
    start_field = np.zeros(layout.sub_sizes)
    start_field[tuple(slice(0, config.n_points) for _ in range(config.d))] = phi0 / norm0
    amps[: start_field.size] = start_field.ravel()
    state = StateVector(layout.n_total, amps)

    refl = reflect_circuit(spec, layout) if n_refl else None
    if refl is not None:
        state = run_circuit(state, refl)
    anc = list(range(layout.n_anc))
    traces, snaps, record = _bookkeeper(config)

    def readout(current: StateVector) -> tuple[float, np.ndarray]:
        """Uncompute the reflection on a scratch copy; report (boundary_p, field)."""
        scratch = current
        if refl is not None:
            scratch = run_circuit(current, refl.adjoint())
        kept, ratio = project_zero(scratch, layout.refl_qubits) if n_refl else (scratch, 1.0)
        arr = kept.amps.reshape((1 << layout.n_anc,) + layout.sub_sizes)[0]
        cut = tuple(slice(0, config.n_points) for _ in range(config.d))
        # the uncompute already folded the mirrored halves back, so only the
        # static initial-norm rescale remains
        field = arr[cut].real * norm0
        return ratio, field

    bp, quad = readout(state)
    record(0, 1.0, bp, quad)
    for t in range(1, config.n_t + 1):
        start = time.perf_counter()
        state = run_circuit(state, circuit)
        state, p = project_zero(state, anc)
        if p == 0.0:
            raise DivergenceError(f"state collapsed to zero at step {t}")
        bp, quad = readout(state)
        record(t, p, bp, quad)
        if on_step is not None:
            on_step(t, quad, time.perf_counter() - start)
    return traces, snaps


def gate_step_matrix(config: ExperimentConfig) -> np.ndarray:
    """One-step operator the gate path realizes on the domain of interest.

    Columns are read off by marching each basis field through reflect,
    one LCU step, post-selection, and uncompute; agreement with
    reference_matrix is the alpha = 1 exactness check.
    """
    spec = reflection_spec(config)
    layout = build_layout(config)
    circuit = lcu_step_circuit(step_plan(config, layout))
    refl = reflect_circuit(spec, layout) if layout.refl_qubits else None
    size = config.n_points**config.d
    shape = (config.n_points,) * config.d
    cut = tuple(slice(0, config.n_points) for _ in range(config.d))
    out = np.zeros((size, size))
    for j in range(size):
        start_field = np.zeros(layout.sub_sizes)
        start_field[cut] = np.eye(1, size, j).reshape(shape)
        amps = np.zeros(1 << layout.n_total, dtype=complex)
        amps[: start_field.size] = start_field.ravel()
        state = StateVector(layout.n_total, amps)
        if refl is not None:
            state = run_circuit(state, refl)
        state = run_circuit(state, circuit)
        state, _ = project_zero(state, list(range(layout.n_anc)))
        if refl is not None:
            state = run_circuit(state, refl.adjoint())
            state, _ = project_zero(state, layout.refl_qubits)
        arr = state.amps.reshape((1 << layout.n_anc,) + layout.sub_sizes)[0]
        out[:, j] = arr[cut].real.ravel()
    return out


@dataclass(frozen=True)
class BackendComparison:
    max_deviation: float
    gate_seconds: tuple[float, ...]
    fast_seconds: tuple[float, ...]


def compare_backends(config: ExperimentConfig) -> BackendComparison:
    """Run both backends on one config; report field deviation and step timings."""
    layout = build_layout(config)
    if layout.n_total > 14:
        raise ValueError(f"config needs {layout.n_total} qubits; keep it at 14 or fewer to compare")
    fast_fields: dict[int, np.ndarray] = {}
    fast_times: list[float] = []

    def keep_fast(t, field, seconds):
        fast_fields[t] = field
        fast_times.append(seconds)

    _fast_run(config, on_step=keep_fast)
    worst = 0.0
    gate_times: list[float] = []

    def check_gate(t, field, seconds):
        nonlocal worst
        worst = max(worst, float(np.max(np.abs(field - fast_fields[t]))))
        gate_times.append(seconds)

    _gate_run(config, on_step=check_gate)
    return BackendComparison(worst, tuple(gate_times), tuple(fast_times))


def steady_state_oracle(config: ExperimentConfig) -> float:
    """Cumulative probability at exact steady state, (sum phi)^2 / (N sum phi^2).

    Mean-conserving runs relax to the uniform field at the initial mean;
    any Dirichlet dimension drives the steady state (and thus p_c) to zero.
    """
    if BcMode.DIRICHLET_REFLECT in config.bc:
        return 0.0
    phi0 = initial_condition(config)
    return float(phi0.sum() ** 2 / (phi0.size * np.sum(phi0**2)))
