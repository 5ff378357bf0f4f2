"""Command-line front end: a thin client over the service API.

Every subcommand builds the same request models the HTTP endpoints accept
and either executes them in-process (default) or posts them to a running
service (``--server http://host:port``).  Exit codes: 0 success, 2 usage or
validation error, 1 runtime error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np
from pydantic import ValidationError

from .service import app as service
from .service.models import (
    CalibrateRequest,
    CellModel,
    DetectRequest,
    FlopsRequest,
    SweepRequest,
    ThresholdTableModel,
)
from .simkit import CSV_HEADER

FLOPS_CSV_HEADER = "shape,algorithm,flops"


class Client:
    """Dispatch requests in-process or to a remote service instance."""

    def __init__(self, server: str | None = None):
        self.server = server.rstrip("/") if server else None

    def _post(self, path: str, payload: dict) -> dict:
        import httpx

        resp = httpx.post(f"{self.server}{path}", json=payload, timeout=None)
        if resp.status_code >= 400:
            detail = resp.json().get("detail", resp.text)
            raise ValueError(f"server rejected request: {detail}")
        return resp.json()

    def calibrate(self, req: CalibrateRequest):
        if self.server:
            return ThresholdTableModel(**self._post("/calibrate", req.model_dump()))
        return service.do_calibrate(req)

    def detect(self, req: DetectRequest):
        if self.server:
            from .service.models import DetectionModel

            return DetectionModel(**self._post("/detect", req.model_dump()))
        return service.do_detect(req)

    def sweep(self, req: SweepRequest):
        if self.server:
            from .service.models import SweepResponse

            return SweepResponse(**self._post("/sweep", req.model_dump()))
        return service.do_sweep(req)

    def flops(self, req: FlopsRequest):
        if self.server:
            from .service.models import FlopsResponse

            return FlopsResponse(**self._post("/flops", req.model_dump()))
        return service.do_flops(req)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sweep_csv(rows) -> str:
    cols = CSV_HEADER.split(",")
    lines = [CSV_HEADER]
    for row in rows:
        data = row.model_dump()
        lines.append(",".join(_fmt(data[c]) for c in cols))
    return "\n".join(lines) + "\n"


def _json_text(model) -> str:
    return json.dumps(model.model_dump(), indent=2, sort_keys=True) + "\n"


def _parse_shape(n: int | None, shape: str | None) -> tuple[int, ...]:
    if (n is None) == (shape is None):
        raise ValueError("provide exactly one of --n or --shape")
    if n is not None:
        if n < 1:
            raise ValueError(f"--n must be >= 1, got {n}")
        return (n,)
    parts = [int(p) for p in shape.lower().split("x")]
    if len(parts) not in (1, 2) or any(p < 1 for p in parts):
        raise ValueError(f"--shape must be N or N1xN2 of positive ints, got {shape!r}")
    return tuple(parts)


def _parse_list(text: str, kind, what: str) -> list:
    try:
        return [kind(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValueError(f"could not parse {what} list {text!r}") from None


def run_guarded(body) -> None:
    """Map validation failures to exit 2 and runtime failures to exit 1."""
    try:
        body()
    except click.ClickException:
        raise
    except (ValueError, ValidationError) as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
    except Exception as exc:  # noqa: BLE001 - last-resort runtime failure
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@click.group()
def main() -> None:
    """GLRT detection toolkit for signals of unknown extent."""


_server_option = click.option(
    "--server", default=None, help="Base URL of a running service; default in-process."
)


@main.command()
@click.option("--pfa", type=float, required=True)
@click.option("--n", "n_total", type=int, required=True)
@click.option("--sizes", default="dyadic", help="'dyadic' or comma-separated sizes.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_server_option
def calibrate(pfa, n_total, sizes, out, server):
    """Export a threshold table as JSON for the given false-alarm target."""

    def body():
        if not (0.0 < pfa < 1.0):
            raise ValueError("pfa must be in (0,1)")
        size_arg = "dyadic" if sizes == "dyadic" else _parse_list(sizes, int, "sizes")
        req = CalibrateRequest(pfa=pfa, n_total=n_total, sizes=size_arg)
        table = Client(server).calibrate(req)
        Path(out).write_text(_json_text(table), encoding="utf-8")
        click.echo(f"wrote {len(table.entries)} thresholds to {out}", err=True)

    run_guarded(body)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--pfa", type=float, default=1e-6, show_default=True)
@click.option(
    "--detector",
    type=click.Choice(["exhaustive", "binary", "oracle"]),
    default="exhaustive",
    show_default=True,
)
@click.option("--region", default=None, help="Oracle hypothesis: a,b or a1,b1,a2,b2.")
@click.option("--table", "table_path", type=click.Path(exists=True, dir_okay=False), default=None)
@_server_option
def detect(input_path, pfa, detector, region, table_path, server):
    """Run one detection on a CSV of powers; prints a JSON detection."""

    def body():
        if not (0.0 < pfa < 1.0):
            raise ValueError("pfa must be in (0,1)")
        powers = np.atleast_1d(np.loadtxt(input_path, delimiter=",", dtype=float))
        table = None
        if table_path is not None:
            table = ThresholdTableModel(**json.loads(Path(table_path).read_text()))
        req = DetectRequest(
            powers=powers.tolist(),
            pfa=pfa,
            detector=detector,
            region=_parse_list(region, int, "region") if region else None,
            table=table,
        )
        result = Client(server).detect(req)
        click.echo(json.dumps(result.model_dump(exclude_none=True), sort_keys=True))

    run_guarded(body)


def _as_csv_text(value) -> str | None:
    """Config lists may be JSON arrays or comma strings; flags are strings."""
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


_CONFIG_KEY_TO_PARAM = {
    "preset": "preset", "n": "n_total", "shape": "shape", "detector": "detectors",
    "snr_db_list": "snr_db_list", "size_list": "size_list",
    "nref_list": "nref_list", "h0": "h0", "trials": "trials", "pfa": "pfa",
    "seed": "seed", "workers": "workers", "out": "out",
}


def _merge_config(ctx, params: dict, config_path: str) -> dict:
    """Overlay JSON-file defaults; explicitly passed flags win."""
    cfg = json.loads(Path(config_path).read_text(encoding="utf-8"))
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    from click.core import ParameterSource

    merged = dict(params)
    for key, value in cfg.items():
        param = _CONFIG_KEY_TO_PARAM.get(key)
        if param is None:
            raise ValueError(f"unknown config key: {key!r}")
        if ctx.get_parameter_source(param) == ParameterSource.COMMANDLINE:
            continue
        if param == "detectors" and isinstance(value, str):
            value = [value]
        merged[param] = value
    return merged


@main.command()
@click.option("--preset", type=click.Choice(["paper1d", "paper2d"]), default=None)
@click.option("--n", "n_total", type=int, default=None)
@click.option("--shape", default=None, help="Grid shape: N or N1xN2.")
@click.option(
    "--detector",
    "detectors",
    multiple=True,
    type=click.Choice(["exhaustive", "binary", "oracle"]),
)
@click.option("--snr-db-list", default=None, help="Comma-separated SNRs in dB.")
@click.option("--size-list", default=None, help="Comma-separated signal sizes.")
@click.option("--nref-list", default=None, help="Noise-estimation sample counts; 'known' for ideal.")
@click.option("--h0", is_flag=True, help="Add noise-only cells (false-alarm measurement).")
@click.option("--trials", type=int, default=None)
@click.option("--pfa", type=float, default=1e-6, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file of sweep parameters; explicit flags override it.",
)
@_server_option
@click.pass_context
def sweep(
    ctx, preset, n_total, shape, detectors, snr_db_list, size_list, nref_list,
    h0, trials, pfa, seed, workers, out, config_path, server,
):
    """Monte Carlo sweep over (detector, size, SNR) cells; writes CSV."""

    def body():
        params = {
            "preset": preset, "n_total": n_total, "shape": shape,
            "detectors": list(detectors), "snr_db_list": snr_db_list,
            "size_list": size_list, "nref_list": nref_list, "h0": h0,
            "trials": trials, "pfa": pfa, "seed": seed, "workers": workers,
            "out": out,
        }
        if config_path is not None:
            params = _merge_config(ctx, params, config_path)
        if params["trials"] is None:
            raise ValueError("trials must be provided (flag or config file)")
        if params["out"] is None:
            raise ValueError("out path must be provided (flag or config file)")
        n_trials = int(params["trials"])
        target_pfa = float(params["pfa"])
        if n_trials < 1:
            raise ValueError(f"trials must be >= 1, got {n_trials}")
        if not (0.0 < target_pfa < 1.0):
            raise ValueError("pfa must be in (0,1)")
        common = {
            "trials": n_trials, "pfa": target_pfa,
            "seed": int(params["seed"]), "workers": params["workers"],
        }
        if params["preset"] is not None:
            req = SweepRequest(preset=params["preset"], **common)
        else:
            shape_arg = params["shape"]
            if isinstance(shape_arg, (list, tuple)):
                shape_arg = "x".join(str(v) for v in shape_arg)
            grid_shape = _parse_shape(params["n_total"], shape_arg)
            dets = list(params["detectors"]) or ["exhaustive", "binary"]
            size_text = _as_csv_text(params["size_list"])
            snr_text = _as_csv_text(params["snr_db_list"])
            sizes = _parse_list(size_text, int, "size") if size_text else []
            snrs = _parse_list(snr_text, float, "snr-db") if snr_text else []
            nrefs: list[int | None] = [None]
            nref_text = _as_csv_text(params["nref_list"])
            if nref_text:
                nrefs = [
                    None if p.strip().lower() == "known" else int(p)
                    for p in nref_text.split(",")
                    if p.strip()
                ]
            cells: list[CellModel] = []
            for det in dets:
                for nref in nrefs:
                    for size in sizes:
                        for db in snrs:
                            cells.append(
                                CellModel(
                                    detector=det, shape=list(grid_shape),
                                    size=size, gamma_db=db, nref=nref,
                                )
                            )
                    if params["h0"]:
                        h0_sizes = sizes if det == "oracle" else [None]
                        for size in h0_sizes:
                            cells.append(
                                CellModel(
                                    detector=det, shape=list(grid_shape),
                                    size=size, gamma_db=None, nref=nref,
                                )
                            )
            if not cells:
                raise ValueError(
                    "no cells: need --size-list and --snr-db-list (or --h0)"
                )
            req = SweepRequest(cells=cells, **common)
        ncells = len(req.cells) if req.cells else "preset"
        click.echo(
            f"sweep: {ncells} cells x {n_trials} trials (pfa={target_pfa})", err=True
        )
        resp = Client(server).sweep(req)
        out_path = Path(params["out"])
        out_path.write_text(_sweep_csv(resp.rows), encoding="utf-8")
        click.echo(f"wrote {len(resp.rows)} rows to {out_path}", err=True)

    run_guarded(body)


@main.command()
@click.option("--shape", required=True, help="Grid shape: N or N1xN2.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option(
    "--skip-exhaustive",
    is_flag=True,
    help="Skip the exhaustive count (runtime cap on large 2D grids).",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_server_option
def flops(shape, seed, skip_exhaustive, out, server):
    """Count detection-time operations per algorithm on one seeded trial."""

    def body():
        grid_shape = _parse_shape(None, shape)
        req = FlopsRequest(shape=list(grid_shape), seed=seed, skip_exhaustive=skip_exhaustive)
        resp = Client(server).flops(req)
        lines = [FLOPS_CSV_HEADER]
        for row in resp.rows:
            click.echo(f"{row.shape:>12}  {row.algorithm:<16} {row.flops:>14,}")
            lines.append(f"{row.shape},{row.algorithm},{row.flops}")
        if skip_exhaustive:
            click.echo("exhaustive count skipped (--skip-exhaustive)", err=True)
        if out:
            Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")

    run_guarded(body)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the detection service."""
    import uvicorn

    uvicorn.run("specdet.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
