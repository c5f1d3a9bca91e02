"""Command-line front end: run experiments, verify invariants, inspect encoders.

Every command talks to the HTTP service layer, by default an in-process
instance, or a remote one via --server.  Heavy imports stay inside the
commands so the QMARCH_THREADS cap can be exported to the BLAS runtimes
before numpy loads.

Exit codes: 0 success, 2 invalid config, 3 stability violation, 4 numerical
abort, 1 anything else (failed invariants, unreachable server).
"""

import asyncio
import csv
import json
import os
import sys
import time

import click

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

_EXIT_CODES = {"invalid_config": 2, "stability": 3, "numerical": 4}


def _apply_thread_cap() -> None:
    cap = os.environ.get("QMARCH_THREADS")
    if cap:
        for name in _THREAD_VARS:
            os.environ.setdefault(name, cap)


@click.group()
def main() -> None:
    """Quantum time-marching for the explicit heat equation."""
    _apply_thread_cap()


def _fail(code: int, message: str) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _post(server, path: str, body: dict):
    import httpx

    if server:
        try:
            with httpx.Client(base_url=server, timeout=None) as client:
                return client.post(path, json=body)
        except httpx.HTTPError as exc:
            _fail(1, f"cannot reach {server}: {exc}")

    from .service import create_app

    async def call():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport, base_url="http://qmarch") as client:
            return await client.post(path, json=body)

    return asyncio.run(call())


def _payload(resp) -> dict:
    """Unwrap a service response or exit with the mapped code."""
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail")
    except ValueError:
        detail = None
    if isinstance(detail, dict) and "code" in detail:
        code, message = detail["code"], detail.get("message", "")
    else:
        # request-shape errors (422) arrive as a list of field complaints
        code, message = "invalid_config", json.dumps(detail)
    _fail(_EXIT_CODES.get(code, 4), f"{code}: {message}")


def _fmt(value) -> str:
    # shortest decimal that round-trips the double
    return repr(float(value))


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _trace_csv(trace: dict) -> str:
    lines = ["step,p_step,p_cum,eps,boundary_p"]
    rows = zip(trace["step"], trace["p_step"], trace["p_cum"], trace["eps"], trace["boundary_p"])
    for step, p_step, p_cum, eps, boundary_p in rows:
        lines.append(f"{step},{_fmt(p_step)},{_fmt(p_cum)},{_fmt(eps)},{_fmt(boundary_p)}")
    return "\n".join(lines) + "\n"


def _snapshot_csv(shape: list, values: list) -> str:
    # row-major field, one row per leading-axis index
    width = shape[-1] if len(shape) > 1 else 1
    lines = []
    for start in range(0, len(values), width):
        row = values[start : start + width]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except ValueError:
        return raw


def _versions() -> dict:
    import platform

    import numpy

    from . import __version__

    return {
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "qmarch": __version__,
    }


def _read_csv_rows(path: str) -> list:
    with open(path, newline="") as fh:
        rows = [[float(cell) for cell in row] for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON config file")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="override one config key (repeatable, values parsed as JSON)")
@click.option("--out", "out_dir", type=click.Path(), help="output directory (overrides config out_dir)")
@click.option("--seed", type=int, help="override the config seed")
@click.option("--server", help="remote service URL; default runs in process")
def run(config_path, overrides, out_dir, seed, server):
    """Run one experiment and write trace.csv, snapshot CSVs, manifest.json."""
    started = time.perf_counter()
    try:
        with open(config_path) as fh:
            mapping = json.load(fh)
        if not isinstance(mapping, dict):
            raise ValueError("config must be a JSON object")
    except (OSError, ValueError) as exc:
        _fail(2, f"invalid config: {exc}")
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            _fail(2, f"--set expects KEY=VALUE, got {item!r}")
        mapping[key.strip().lower()] = _parse_value(raw)
    if seed is not None:
        mapping["seed"] = seed
    if out_dir is not None:
        mapping["out_dir"] = out_dir
    dest = mapping.get("out_dir") or "."

    payload = _payload(_post(server, "/run", mapping))

    os.makedirs(dest, exist_ok=True)
    outputs = ["trace.csv"]
    _write_atomic(os.path.join(dest, "trace.csv"), _trace_csv(payload["trace"]))
    for snap in payload["snapshots"]:
        name = f"snapshot_{snap['step']}.csv"
        outputs.append(name)
        _write_atomic(os.path.join(dest, name), _snapshot_csv(snap["shape"], snap["values"]))
    manifest = {
        "config": payload["config"],
        "versions": _versions(),
        "wall_seconds": {"run": payload["run_seconds"], "total": time.perf_counter() - started},
        "outputs": outputs,
        "final_p_cum": payload["final_p_cum"],
        "max_eps": payload["max_eps"],
    }
    _write_atomic(os.path.join(dest, "manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    click.echo(
        f"wrote {len(outputs) + 1} files to {dest}; "
        f"final p_cum = {payload['final_p_cum']}, max eps = {payload['max_eps']}"
    )


@main.command()
@click.argument("level_arg", required=False, type=click.Choice(["quick", "full"]))
@click.option("--level", "level_opt", type=click.Choice(["quick", "full"]), help="suite size")
@click.option("--server", help="remote service URL; default runs in process")
def verify(level_arg, level_opt, server):
    """Run the invariant suites and report pass/fail per named check."""
    level = level_opt or level_arg or "quick"
    payload = _payload(_post(server, "/verify", {"level": level}))
    for check in payload["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        click.echo(f"{mark} {check['name']}: {check['detail']}")
    failed = [c for c in payload["checks"] if not c["passed"]]
    if failed:
        _fail(1, f"invariant violated: {failed[0]['name']}")
    click.echo(f"all {len(payload['checks'])} invariants hold ({payload['run_seconds']:.1f}s)")


@main.command()
@click.option("--method", required=True, type=click.Choice(["camps", "lin", "hamsim"]))
@click.option("--spec", "spec_text", help="named marching matrix as bc:N:r_h, e.g. periodic:8:0.2")
@click.option("--matrix", "matrix_path", type=click.Path(), help="CSV file holding a square matrix")
@click.option("--theta", type=float, help="evolution angle (hamsim only)")
@click.option("--seed", type=int, default=0, show_default=True, help="completion seed (lin only)")
@click.option("--state", "state_path", type=click.Path(), help="CSV vector; defaults to the uniform state")
@click.option("--server", help="remote service URL; default runs in process")
def encode(method, spec_text, matrix_path, theta, seed, state_path, server):
    """Build one block encoding and print its diagnostics."""
    body = {"method": method, "seed": seed}
    if theta is not None:
        body["theta"] = theta
    if spec_text:
        body["spec"] = spec_text
    try:
        if matrix_path:
            body["matrix"] = _read_csv_rows(matrix_path)
        if state_path:
            body["state"] = [x for row in _read_csv_rows(state_path) for x in row]
    except (OSError, ValueError) as exc:
        _fail(2, f"invalid matrix/state file: {exc}")
    payload = _payload(_post(server, "/encode", body))
    click.echo(
        f"method={payload['method']} dim={payload['dim']} "
        f"placement={payload['placement']} outcome={payload['postselect_outcome']}"
    )
    click.echo(f"alpha={_fmt(payload['alpha'])}")
    click.echo(f"unitarity_residual={_fmt(payload['unitarity_residual'])}")
    click.echo(f"success_probability={_fmt(payload['success_probability'])}")
    click.echo(f"first_block_digest={payload['first_block_digest']}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Serve the HTTP API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
