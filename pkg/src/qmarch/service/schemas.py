"""Request and response bodies for the HTTP service.

Run configs travel as flat mappings so the service accepts exactly what the
config files contain; resolution and validation happen in ExperimentConfig.
Trace columns are shipped as parallel arrays to keep payloads compact.
"""

import math

from pydantic import BaseModel, ConfigDict, Field


class RunRequest(BaseModel):
    """One marching experiment, same keys as the JSON config files."""

    # unknown keys flow through so config resolution can name them in errors
    model_config = ConfigDict(extra="allow")

    n_points: int
    r_h: float
    n_t: int
    bc: str | list[str] = "periodic"
    method: str = "reflect"
    backend: str = "fast"
    snapshots: list[int] = Field(default_factory=list)
    seed: int = 0
    d: int | None = None
    out_dir: str | None = None

    def to_mapping(self) -> dict:
        """Flat mapping as ExperimentConfig.from_mapping expects it."""
        data = self.model_dump()
        if data["d"] is None:
            data.pop("d")
        return data


class TracePayload(BaseModel):
    """Per-step bookkeeping, column oriented."""

    step: list[int]
    p_step: list[float]
    p_cum: list[float]
    eps: list[float]
    boundary_p: list[float]


class SnapshotPayload(BaseModel):
    step: int
    shape: list[int]
    values: list[float]  # row major


class RunResponse(BaseModel):
    config: dict
    trace: TracePayload
    snapshots: list[SnapshotPayload]
    final_p_cum: float | None
    max_eps: float | None
    run_seconds: float


class VerifyRequest(BaseModel):
    level: str = "quick"


class CheckPayload(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    passed: bool
    checks: list[CheckPayload]
    run_seconds: float


class EncodeRequest(BaseModel):
    """Build one block encoding and report its diagnostics.

    Exactly one of `spec` ("bc:N:r_h", a named one-dimensional marching
    matrix) or `matrix` (explicit rows) must be given.  `state` defaults to
    the uniform vector; it is normalized before the probability is taken.
    """

    method: str
    spec: str | None = None
    matrix: list[list[float]] | None = None
    theta: float = math.pi / 2
    seed: int = 0
    state: list[float] | None = None


class EncodeResponse(BaseModel):
    method: str
    dim: int
    alpha: float
    placement: str
    postselect_outcome: int
    unitarity_residual: float
    success_probability: float
    first_block_digest: str
