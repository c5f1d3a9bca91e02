"""HTTP front end for the marching toolkit.

Thin layer: every route parses its body, calls one core entry point, and
maps core exceptions onto a small error vocabulary.  Error responses carry
{"code", "message"} in the detail so clients can branch without parsing
prose.  Codes: "stability" and "invalid_config" are 400s the caller can fix,
"numerical" is a 500 for runs that diverged.
"""

import hashlib
import time

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..blockenc import camps_encode, hamsim_encode, lin_encode, success_probability
from ..march import DivergenceError, ExperimentConfig, quantum_run
from ..operators import BoundaryType, MarchingSpec, StabilityError, marching_matrix
from ..verify import run_checks
from .schemas import (
    CheckPayload,
    EncodeRequest,
    EncodeResponse,
    RunRequest,
    RunResponse,
    SnapshotPayload,
    TracePayload,
    VerifyRequest,
    VerifyResponse,
)

_ENCODERS = {
    "camps": lambda req, m: camps_encode(m),
    "lin": lambda req, m: lin_encode(m, seed=req.seed),
    "hamsim": lambda req, m: hamsim_encode(m, req.theta),
}


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status, {"code": code, "message": message})


def _named_matrix(text: str) -> np.ndarray:
    """Resolve "bc:N:r_h" to the one-dimensional marching matrix."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"spec must look like periodic:8:0.2, got {text!r}")
    bc, n, r_h = parts
    return marching_matrix(MarchingSpec(int(n), float(r_h), (BoundaryType(bc),)))


def create_app() -> FastAPI:
    app = FastAPI(title="qmarch", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        started = time.perf_counter()
        try:
            config = ExperimentConfig.from_mapping(req.to_mapping())
            traces, snaps = quantum_run(config)
        except StabilityError as exc:
            raise _error(400, "stability", str(exc))
        except DivergenceError as exc:
            raise _error(500, "numerical", str(exc))
        except (ValueError, TypeError) as exc:
            raise _error(400, "invalid_config", str(exc))
        return RunResponse(
            config=config.to_mapping(),
            trace=TracePayload(
                step=[t.step for t in traces],
                p_step=[t.p_step for t in traces],
                p_cum=[t.p_cum for t in traces],
                eps=[t.eps for t in traces],
                boundary_p=[t.boundary_p for t in traces],
            ),
            snapshots=[
                SnapshotPayload(
                    step=s.step,
                    shape=list(s.field.shape),
                    values=s.field.ravel().tolist(),
                )
                for s in snaps
            ],
            final_p_cum=traces[-1].p_cum if traces else None,
            max_eps=max((t.eps for t in traces), default=None),
            run_seconds=time.perf_counter() - started,
        )

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        started = time.perf_counter()
        try:
            results = run_checks(req.level)
        except ValueError as exc:
            raise _error(400, "invalid_config", str(exc))
        return VerifyResponse(
            passed=all(r.passed for r in results),
            checks=[CheckPayload(name=r.name, passed=r.passed, detail=r.detail) for r in results],
            run_seconds=time.perf_counter() - started,
        )

    @app.post("/encode", response_model=EncodeResponse)
    def encode(req: EncodeRequest) -> EncodeResponse:
        try:
            if (req.spec is None) == (req.matrix is None):
                raise ValueError("provide exactly one of spec or matrix")
            if req.method not in _ENCODERS:
                raise ValueError(f"unknown encode method {req.method!r}")
            matrix = _named_matrix(req.spec) if req.spec else np.asarray(req.matrix, dtype=float)
            be = _ENCODERS[req.method](req, matrix)
            dim = be.source.shape[0]
            if req.state is None:
                state = np.full(dim, dim**-0.5)
            else:
                state = np.asarray(req.state, dtype=float)
                scale = np.linalg.norm(state)
                if scale == 0.0:
                    raise ValueError("state must be nonzero")
                state = state / scale
            probability = success_probability(be, state)
        except StabilityError as exc:
            raise _error(400, "stability", str(exc))
        except (ValueError, TypeError) as exc:
            raise _error(400, "invalid_config", str(exc))
        eye = np.eye(be.u.shape[0])
        residual = float(np.abs(be.u.conj().T @ be.u - eye).max())
        # digest of the deterministic block column, independent of completion
        column = np.ascontiguousarray(be.u[:, :dim])
        digest = hashlib.sha256(column.tobytes()).hexdigest()
        return EncodeResponse(
            method=req.method,
            dim=dim,
            alpha=be.alpha,
            placement=be.placement.value,
            postselect_outcome=be.postselect_outcome,
            unitarity_residual=residual,
            success_probability=probability,
            first_block_digest=digest,
        )

    return app
