import numpy as np
import pytest

from plab.axisym import (
    biot_savart,
    build_profile,
    check_axisymmetry,
    dipole,
    gaussian_ring,
    radial_velocity_over_r,
    random_axisym,
    realize,
    realize_alpha,
    swirl_free_vorticity_over_r,
)
from plab.grid import Grid, VectorField, random_band_limited
from plab.operators import curl, divergence_sup, leray_project


def test_profile_radial_velocity_vanishes_on_axis():
    for prof in (gaussian_ring(), dipole(), random_axisym(seed=2)):
        z = np.linspace(-2.0, 2.0, 17)
        assert np.max(np.abs(prof.u_r(np.zeros_like(z), z))) <= 1e-14


def test_build_profile_rejects_unknown_name():
    with pytest.raises(KeyError, match="unknown profile"):
        build_profile("vortex_sheet")


def test_build_profile_forwards_parameters():
    prof = build_profile("gaussian_ring", {"amplitude": 0.25})
    assert prof.params["amplitude"] == 0.25


def test_profile_serializes():
    d = gaussian_ring(amplitude=0.5).to_json_dict()
    assert d["name"] == "gaussian_ring"
    assert d["params"]["amplitude"] == 0.5


def test_realize_rejects_overlapping_periodic_images():
    tight = Grid(16, 2.0, 3)
    with pytest.raises(ValueError, match="periodic images"):
        realize(gaussian_ring(), tight)


def test_realize_requires_3d():
    plane = Grid(16, 2.0 * np.pi, 2)
    with pytest.raises(ValueError, match="3D"):
        realize(gaussian_ring(), plane)


def test_realized_field_is_divergence_free(grid64):
    u = realize(gaussian_ring(amplitude=0.5), grid64)
    assert divergence_sup(u) <= 1e-6 * u.sup_norm()


def test_realized_field_passes_structure_checks(grid64, pu):
    u = realize(gaussian_ring(amplitude=0.5), grid64)
    report = check_axisymmetry(u, pu)
    assert report.field_passes(1e-6)
    assert report.curl_passes(1e-6)
    assert report.blocks_pass(1e-6)


def test_quarter_turn_symmetry_is_lattice_exact(grid32, pu):
    u = realize(gaussian_ring(amplitude=0.5), grid32)
    report = check_axisymmetry(u, pu, check_blocks=False, check_rotation=False)
    assert report.quarter_turn <= 1e-13
    assert report.plane_u1 <= 1e-13
    assert report.plane_u2 <= 1e-13


def test_check_rejects_generic_field(grid32, rng):
    v = VectorField([random_band_limited(grid32, rng) for _ in range(3)])
    report = check_axisymmetry(v, check_blocks=False)
    assert not report.field_passes(1e-3)


def test_swirl_free_quotient_matches_direct_division(grid64):
    u = realize(gaussian_ring(amplitude=0.5), grid64)
    omega = curl(u)
    alpha = swirl_free_vorticity_over_r(omega, structure_tol=1e-3)
    x1, x2, _ = grid64.coordinate_arrays()
    r = np.sqrt(x1**2 + x2**2)
    w1, w2, _ = omega.sample_arrays()
    # angular vorticity over r, off-axis where direct division is stable
    direct = (-w1 * x2 + w2 * x1) / r**2
    off_axis = np.broadcast_to(r > 0.5, alpha.samples.shape)
    direct = np.broadcast_to(direct, alpha.samples.shape)
    assert np.max(np.abs(alpha.samples[off_axis] - direct[off_axis])) <= 1e-10


def test_swirl_free_quotient_rejects_generic_vorticity(grid32, rng):
    omega = leray_project(
        VectorField([random_band_limited(grid32, rng, zero_mean=True) for _ in range(3)])
    )
    with pytest.raises(ValueError, match="swirl-free"):
        swirl_free_vorticity_over_r(omega)


def test_radial_velocity_quotient_is_smooth_near_axis(grid64):
    u = realize(gaussian_ring(amplitude=0.5), grid64)
    q = radial_velocity_over_r(u)
    assert np.all(np.isfinite(q.samples))
    x1, x2, _ = grid64.coordinate_arrays()
    r = np.sqrt(x1**2 + x2**2)
    u1, u2, _ = u.sample_arrays()
    direct = (u1 * x1 + u2 * x2) / r**2
    off_axis = np.broadcast_to(r > 0.5, q.samples.shape)
    direct = np.broadcast_to(direct, q.samples.shape)
    assert np.max(np.abs(q.samples[off_axis] - direct[off_axis])) <= 1e-10


def test_biot_savart_recovers_velocity_from_curl(grid64):
    u = realize(gaussian_ring(amplitude=0.5), grid64)
    omega = leray_project(curl(u))
    u_rec = biot_savart(omega)
    assert (curl(u_rec) - omega).sup_norm() <= 1e-9 * omega.sup_norm()


def test_realize_alpha_consistent_with_curl(grid64):
    prof = gaussian_ring(amplitude=0.5)
    alpha = realize_alpha(prof, grid64, structure_tol=1e-3)
    u = realize(prof, grid64)
    omega = curl(u)
    x1, x2, _ = grid64.coordinate_arrays()
    r2 = x1**2 + x2**2
    w1, w2, _ = omega.sample_arrays()
    direct = (-w1 * x2 + w2 * x1) / r2
    off_axis = np.broadcast_to(r2 > 0.25, alpha.samples.shape)
    direct = np.broadcast_to(direct, alpha.samples.shape)
    assert np.max(np.abs(alpha.samples[off_axis] - direct[off_axis])) <= 1e-10


def test_random_profiles_are_reproducible():
    a = random_axisym(seed=9)
    b = random_axisym(seed=9)
    r = np.linspace(0.0, 2.0, 33)
    z = np.linspace(-2.0, 2.0, 33)
    assert np.array_equal(a.u_r(r, z), b.u_r(r, z))
    assert np.array_equal(a.u_z(r, z), b.u_z(r, z))
