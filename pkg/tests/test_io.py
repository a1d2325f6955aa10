import numpy as np
import pytest

from plab.axisym import gaussian_ring, realize_alpha
from plab.dynamics import SolverConfig, evolve
from plab.grid import VectorField, random_band_limited
from plab.io import (
    load_run,
    read_field,
    read_vector_field,
    save_run,
    write_field,
    write_vector_field,
)


def test_field_roundtrip_is_exact(grid32, rng, tmp_path):
    f = random_band_limited(grid32, rng)
    path = tmp_path / "f.field"
    write_field(path, f)
    g = read_field(path)
    assert g.grid == grid32
    assert np.array_equal(g.samples, f.samples)


def test_read_field_rejects_bad_magic(tmp_path):
    path = tmp_path / "bogus.field"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(ValueError, match="magic"):
        read_field(path)


def test_read_field_rejects_wrong_version(grid32, rng, tmp_path):
    f = random_band_limited(grid32, rng)
    path = tmp_path / "f.field"
    write_field(path, f)
    raw = bytearray(path.read_bytes())
    raw[4] = 99
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="version"):
        read_field(path)


def test_read_field_rejects_truncation(grid32, rng, tmp_path):
    f = random_band_limited(grid32, rng)
    path = tmp_path / "f.field"
    write_field(path, f)
    raw = path.read_bytes()
    path.write_bytes(raw[:-16])
    with pytest.raises(ValueError, match="truncated"):
        read_field(path)


def test_vector_field_roundtrip(grid32, rng, tmp_path):
    v = VectorField([random_band_limited(grid32, rng) for _ in range(3)])
    paths = write_vector_field(tmp_path / "v", v)
    assert [p.name for p in paths] == ["v.c1.field", "v.c2.field", "v.c3.field"]
    w = read_vector_field(tmp_path / "v")
    for a, b in zip(v.components, w.components):
        assert np.array_equal(a.samples, b.samples)


@pytest.fixture(scope="module")
def saved_run(grid32, tmp_path_factory):
    alpha0 = realize_alpha(gaussian_ring(amplitude=0.3), grid32, structure_tol=0.05)
    run = evolve(alpha0, SolverConfig(dt=0.05, t_end=0.15))
    run_dir = tmp_path_factory.mktemp("runs") / "ring"
    save_run(run_dir, run)
    return run, run_dir


def test_save_run_layout(saved_run):
    _, run_dir = saved_run
    assert (run_dir / "config.json").is_file()
    assert (run_dir / "diagnostics.csv").is_file()
    assert sorted(p.name for p in (run_dir / "snapshots").iterdir()) == [
        "t_0.field",
        "t_1.field",
        "t_2.field",
        "t_3.field",
    ]


def test_load_run_restores_exactly(saved_run):
    run, run_dir = saved_run
    back = load_run(run_dir)
    assert back.grid == run.grid
    assert back.cfg == run.cfg
    assert back.times == run.times
    for a, b in zip(run.alphas, back.alphas):
        assert np.array_equal(a.samples, b.samples)
    assert back.diagnostics.csv_lines() == run.diagnostics.csv_lines()


def test_load_run_replays_stages_exactly(saved_run):
    run, run_dir = saved_run
    back = load_run(run_dir)
    for step in range(run.cfg.n_steps()):
        a = run.history.stage_samples(step)
        b = back.history.stage_samples(step)
        for ua, ub in zip(a, b):
            for ca, cb in zip(ua, ub):
                assert np.array_equal(ca, cb)


def test_load_run_rejects_endpoints_only_save(grid32, tmp_path):
    alpha0 = realize_alpha(gaussian_ring(amplitude=0.3), grid32, structure_tol=0.05)
    run = evolve(alpha0, SolverConfig(dt=0.05, t_end=0.15))
    run.alphas = [run.alphas[0], run.alphas[-1]]
    save_run(tmp_path / "ep", run)
    with pytest.raises(FileNotFoundError, match="endpoints"):
        load_run(tmp_path / "ep")
