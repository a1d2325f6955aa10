import numpy as np
import pytest

from plab.axisym import gaussian_ring, realize_alpha
from plab.dynamics import (
    CFLViolation,
    DiagnosticsSeries,
    SolverConfig,
    alpha_to_omega,
    block_decay_report,
    evolve,
    evolve_passive_scalar,
    evolve_tilde_family,
    evolve_vorticity_model,
    fit_gronwall_constant,
    transport_estimate_audit,
    velocity_from_alpha,
)
from plab.grid import SpectralField, VectorField, random_band_limited
from plab.norms import INF, BesovParams
from plab.operators import divergence_sup, leray_project


@pytest.fixture(scope="module")
def ring_run(grid32):
    alpha0 = realize_alpha(gaussian_ring(amplitude=0.3), grid32, structure_tol=0.05)
    return evolve(alpha0, SolverConfig(dt=0.05, t_end=0.2))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=1.0, integrator="euler")


def test_solver_config_step_count_and_roundtrip():
    cfg = SolverConfig(dt=0.05, t_end=0.2)
    assert cfg.n_steps() == 4
    again = SolverConfig.from_json_dict(cfg.to_json_dict())
    assert again == cfg


def test_diagnostics_series_rejects_channel_mismatch():
    d = DiagnosticsSeries()
    d.append(0.0, {"a": 1.0})
    with pytest.raises(ValueError):
        d.append(0.1, {"b": 2.0})


def test_diagnostics_csv_deterministic():
    d = DiagnosticsSeries()
    d.append(0.0, {"b": 1.0, "a": 2.0})
    d.append(0.1, {"b": 1.5, "a": 2.5})
    lines = d.csv_lines()
    assert lines[0] == "t,a,b"
    assert lines == d.csv_lines()


def test_zero_datum_stays_zero(grid32):
    alpha0 = SpectralField.zeros(grid32)
    run = evolve(alpha0, SolverConfig(dt=0.1, t_end=0.2))
    assert np.max(np.abs(run.alphas[-1].samples)) == 0.0


def test_cfl_guard_triggers(grid32):
    alpha0 = realize_alpha(gaussian_ring(amplitude=0.3), grid32, structure_tol=0.05)
    with pytest.raises(CFLViolation):
        evolve(alpha0, SolverConfig(dt=1.0, t_end=2.0))


def test_velocity_from_alpha_is_divergence_free(grid32):
    alpha0 = realize_alpha(gaussian_ring(amplitude=0.3), grid32, structure_tol=0.05)
    u = velocity_from_alpha(alpha0)
    assert divergence_sup(u) <= 1e-12 * max(u.sup_norm(), 1.0)


def test_alpha_to_omega_structure(grid32):
    alpha0 = realize_alpha(gaussian_ring(amplitude=0.3), grid32, structure_tol=0.05)
    omega = alpha_to_omega(alpha0)
    x1, x2, _ = grid32.coordinate_arrays()
    w1, w2, w3 = omega.sample_arrays()
    assert np.max(np.abs(w3)) == 0.0
    assert np.max(np.abs(x1 * w1 + x2 * w2)) <= 1e-13


def test_conservation_at_coarse_resolution(ring_run):
    for ch in ("alpha_L2", "energy"):
        s = ring_run.diagnostics.channel(ch)
        assert np.max(np.abs(s - s[0])) / abs(s[0]) <= 1e-3


def test_stage_recomputation_matches_storage(grid32):
    alpha0 = realize_alpha(gaussian_ring(amplitude=0.3), grid32, structure_tol=0.05)
    cfg = SolverConfig(dt=0.05, t_end=0.1)
    stored = evolve(alpha0, cfg, store_stages=True)
    recomputed = evolve(alpha0, cfg, store_stages=False)
    for step in range(cfg.n_steps()):
        a = stored.history.stage_samples(step)
        b = recomputed.history.stage_samples(step)
        for ua, ub in zip(a, b):
            for ca, cb in zip(ua, ub):
                assert np.array_equal(ca, cb)


def test_passive_scalar_frozen_under_zero_velocity(grid32, rng):
    zero_run = evolve(SpectralField.zeros(grid32), SolverConfig(dt=0.05, t_end=0.1))
    f0 = random_band_limited(grid32, rng)
    fields = evolve_passive_scalar(zero_run.history, f0, zero_run.cfg)
    assert np.array_equal(fields[0].samples, f0.samples)
    assert np.max(np.abs(fields[-1].samples - f0.samples)) <= 1e-13


def test_vorticity_model_preserves_divergence(ring_run, rng):
    grid = ring_run.grid
    k_max = grid.k_fundamental * grid.n / 6.0
    om0 = leray_project(
        VectorField([random_band_limited(grid, rng, k_max=k_max, zero_mean=True) for _ in range(3)])
    )
    traj = evolve_vorticity_model(ring_run.history, om0, ring_run.cfg)
    for w in traj:
        assert divergence_sup(w) <= 1e-9 * max(w.sup_norm(), 1e-300)


def test_tilde_family_closure_and_skips(ring_run, pu):
    fam = evolve_tilde_family(ring_run, pu=pu, matrix_times=[0.0, ring_run.times[-1]])
    # coarse-grid closure: the floor is set by the skipped (degenerate) blocks
    # and n = 32 truncation, not by the scheme
    assert max(fam.reconstruction_residuals) <= 5e-2
    assert set(fam.final_blocks) | set(fam.skipped) == set(
        range(-1, ring_run.grid.q_max + 1)
    )


def test_tilde_family_off_tridiagonal_initially_negligible(ring_run, pu):
    fam = evolve_tilde_family(ring_run, pu=pu, matrix_times=[0.0])
    inter = fam.interaction_matrices[0]
    for (j, q), val in inter.items():
        if abs(j - q) > 1:
            assert val <= 1e-12 * fam.initial_block_sup[q]


def test_block_decay_report_requires_recorded_matrix(ring_run, pu):
    fam = evolve_tilde_family(ring_run, pu=pu, matrix_times=[0.0])
    with pytest.raises(KeyError, match="matrix"):
        block_decay_report(fam, ring_run, [ring_run.times[-1]])


def test_fit_gronwall_constant_unit_case():
    ratios = np.ones(5)
    exponents = np.zeros(5)
    assert fit_gronwall_constant(ratios, exponents) == 1.0


def test_fit_gronwall_constant_bounds_growth():
    exponents = np.linspace(0.0, 1.0, 6)
    ratios = 2.0 * np.exp(2.0 * exponents)
    c = fit_gronwall_constant(ratios, exponents)
    assert np.all(ratios <= c * np.exp(c * exponents) * (1.0 + 1e-9))


def test_transport_audit_zero_velocity_constant_is_one(grid32, rng):
    zero_run = evolve(SpectralField.zeros(grid32), SolverConfig(dt=0.05, t_end=0.1))
    f0 = random_band_limited(grid32, rng)
    audit = transport_estimate_audit(
        zero_run.history, f0, BesovParams(0.5, INF, 1.0), zero_run.cfg
    )
    assert abs(audit["fitted_C"] - 1.0) <= 1e-10


def test_transport_audit_rejects_inadmissible_indices(ring_run, rng):
    f0 = random_band_limited(ring_run.grid, rng)
    with pytest.raises(ValueError):
        transport_estimate_audit(
            ring_run.history, f0, BesovParams(1.0, INF, 2.0), ring_run.cfg
        )


def test_run_determinism(grid32):
    alpha0 = realize_alpha(gaussian_ring(amplitude=0.3), grid32, structure_tol=0.05)
    cfg = SolverConfig(dt=0.05, t_end=0.1)
    a = evolve(alpha0, cfg)
    b = evolve(alpha0, cfg)
    assert np.array_equal(a.alphas[-1].samples, b.alphas[-1].samples)
    assert a.diagnostics.csv_lines() == b.diagnostics.csv_lines()
