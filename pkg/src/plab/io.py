"""Binary field snapshots and run-directory persistence.

Field file layout (little-endian): magic ``PLAB``, version u32, dim u32,
n u32, box_length f64, then the row-major f64 sample array.  Vector fields
are stored as three scalar files with ``.c1/.c2/.c3`` component suffixes.

A persisted run holds config.json, snapshots/t_<index>.field (the advected
scalar), diagnostics.csv, and family/<q>/t_<index>.field written by the
decomposition experiment.  Reloading a run rebuilds the velocity history by
recomputing velocities (and, on demand, RK4 stage velocities) from the
stored scalars, so companion solves replay the run exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .grid import Grid, SpectralField, VectorField

MAGIC = b"PLAB"
VERSION = 1
_HEADER = struct.Struct("<4sIII d")


def write_field(path, f: SpectralField) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, g.dim, g.n, g.box_length))
        fh.write(np.ascontiguousarray(f.samples, dtype="<f8").tobytes())


def read_field(path) -> SpectralField:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, version, dim, n, box_length = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a field file (bad magic {magic!r})")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    grid = Grid(n, box_length, dim)
    if data.size != n**dim:
        raise ValueError(f"{path}: truncated samples ({data.size} of {n**dim})")
    return SpectralField(grid, data.reshape(grid.shape).copy())


def write_vector_field(path_stem, v: VectorField) -> list:
    paths = []
    for i, comp in enumerate(v.components, start=1):
        p = Path(str(path_stem) + f".c{i}.field")
        write_field(p, comp)
        paths.append(p)
    return paths


def read_vector_field(path_stem, divergence_free: bool = False) -> VectorField:
    comps = [read_field(Path(str(path_stem) + f".c{i}.field")) for i in (1, 2, 3)]
    return VectorField(comps, divergence_free=divergence_free)


# ---------------------------------------------------------------------------
# run directories


def save_run(run_dir, run) -> None:
    """Persist an EulerRun: config, scalar snapshots, diagnostics."""
    run_dir = Path(run_dir)
    (run_dir / "snapshots").mkdir(parents=True, exist_ok=True)
    config = {
        "schema_version": 1,
        "grid": {"n": run.grid.n, "box_length": run.grid.box_length, "dim": run.grid.dim},
        "solver": run.cfg.to_json_dict(),
        "profile": run.profile_params,
        "times": [repr(float(t)) for t in run.times],
    }
    with open(run_dir / "config.json", "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if len(run.alphas) == len(run.times):
        for i, alpha in enumerate(run.alphas):
            write_field(run_dir / "snapshots" / f"t_{i}.field", alpha)
    else:  # endpoints only
        write_field(run_dir / "snapshots" / "t_0.field", run.alphas[0])
        write_field(run_dir / "snapshots" / f"t_{len(run.times) - 1}.field", run.alphas[-1])
    with open(run_dir / "diagnostics.csv", "w", newline="\n") as fh:
        fh.write("\n".join(run.diagnostics.csv_lines()) + "\n")


def load_run(run_dir):
    """Rebuild an EulerRun (with exact stage replay) from a run directory."""
    from .dynamics import (
        DiagnosticsSeries,
        EulerRun,
        SolverConfig,
        VelocityHistory,
        _alpha_rk4_step,
        _velocity_samples,
    )

    run_dir = Path(run_dir)
    with open(run_dir / "config.json") as fh:
        config = json.load(fh)
    grid = Grid(**config["grid"])
    cfg = SolverConfig.from_json_dict(config["solver"])
    times = [float(t) for t in config["times"]]
    alphas = []
    for i in range(len(times)):
        path = run_dir / "snapshots" / f"t_{i}.field"
        if not path.exists():
            raise FileNotFoundError(f"missing snapshot {path}; run was saved endpoints-only")
        alphas.append(read_field(path))

    history = VelocityHistory(grid, dealias=cfg.dealias)
    for t, alpha in zip(times, alphas):
        history.record_snapshot(t, _velocity_samples(grid, alpha.samples))
    dt = (times[-1] - times[0]) / max(len(times) - 1, 1)

    def provider(step, _alphas=alphas, _g=grid, _dt=dt, _da=cfg.dealias):
        return _alpha_rk4_step(_g, _alphas[step].samples, _dt, _da)[1]

    history.stage_provider = provider

    diagnostics = DiagnosticsSeries()
    with open(run_dir / "diagnostics.csv") as fh:
        header = fh.readline().strip().split(",")
        names = header[1:]
        for line in fh:
            vals = line.strip().split(",")
            diagnostics.append(float(vals[0]), dict(zip(names, map(float, vals[1:]))))

    return EulerRun(
        grid=grid,
        cfg=cfg,
        times=times,
        alphas=alphas,
        history=history,
        diagnostics=diagnostics,
        profile_params=config.get("profile", {}),
    )
