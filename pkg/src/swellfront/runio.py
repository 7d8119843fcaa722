"""RunResult emission: CSV time series, JSON document, content hashes.

All numeric output uses round-trip precision (Python repr), so repeated
runs of a deterministic solver produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .frontfix import RunResult, Snapshot

TIMESERIES_HEADER = "t,s,s_t,u_at_a,u_at_s,inflow_flux"


def timeseries_csv_text(result: RunResult) -> str:
    rows = [TIMESERIES_HEADER]
    for i in range(result.times.size):
        rows.append(",".join(repr(float(col[i])) for col in (
            result.times, result.fronts, result.speeds,
            result.u_left, result.u_right, result.flux)))
    return "\n".join(rows) + "\n"


def result_to_json_dict(result: RunResult) -> dict:
    return {
        "solver": result.solver,
        "m": result.m,
        "dt": result.dt,
        "stride": result.stride,
        "coupling": result.coupling,
        "times": result.times.tolist(),
        "fronts": result.fronts.tolist(),
        "speeds": result.speeds.tolist(),
        "u_left": result.u_left.tolist(),
        "u_right": result.u_right.tolist(),
        "flux": result.flux.tolist(),
        "snapshots": [
            {"step_index": s.step_index, "t": s.t, "s": s.s,
             "values": s.values.tolist()}
            for s in result.snapshots
        ],
    }


def result_json_text(result: RunResult) -> str:
    return json.dumps(result_to_json_dict(result), sort_keys=True) + "\n"


def result_from_json_dict(data: dict) -> RunResult:
    try:
        snapshots = tuple(
            Snapshot(step_index=int(s["step_index"]), t=float(s["t"]),
                     s=float(s["s"]), values=np.asarray(s["values"], dtype=float))
            for s in data["snapshots"])
        return RunResult(
            solver=data["solver"], m=int(data["m"]), dt=float(data["dt"]),
            stride=int(data["stride"]), coupling=data["coupling"],
            times=np.asarray(data["times"], dtype=float),
            fronts=np.asarray(data["fronts"], dtype=float),
            speeds=np.asarray(data["speeds"], dtype=float),
            u_left=np.asarray(data["u_left"], dtype=float),
            u_right=np.asarray(data["u_right"], dtype=float),
            flux=np.asarray(data["flux"], dtype=float),
            snapshots=snapshots)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"run result document is malformed: {exc}") from exc


def load_result(path) -> RunResult:
    return result_from_json_dict(json.loads(Path(path).read_text()))


def write_result(result: RunResult, out_dir, csv_name: str = "timeseries.csv",
                 json_name: str = "result.json") -> dict:
    """Write both emission formats; returns {name: path} of what was written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / csv_name
    json_path = out / json_name
    csv_path.write_text(timeseries_csv_text(result))
    json_path.write_text(result_json_text(result))
    return {"timeseries_csv": str(csv_path), "result_json": str(json_path)}


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
