import numpy as np
import pytest

from plab.partition import PartitionOfUnity, build_partition


def test_identity_sums_to_one(pu):
    rho = np.linspace(0.0, 40.0, 40001)
    total = pu.partial_sum(rho, 6)
    assert np.max(np.abs(total - 1.0)) <= 1e-12


def test_chi_is_one_inside_inner_ball(pu):
    rho = np.linspace(0.0, pu.inner_radius, 100)
    assert np.all(pu.chi(rho) == 1.0)


def test_chi_vanishes_beyond_support(pu):
    rho = np.linspace(pu.support_chi, 10.0, 100)
    assert np.all(pu.chi(rho) == 0.0)


def test_default_supports_are_classical(pu):
    assert pu.support_chi == pytest.approx(4.0 / 3.0)
    lo, hi = pu.support_phi
    assert lo == pytest.approx(3.0 / 4.0)
    assert hi == pytest.approx(8.0 / 3.0)


def test_phi_vanishes_outside_annulus(pu):
    lo, hi = pu.support_phi
    rho = np.concatenate([np.linspace(0.0, lo, 50), np.linspace(hi, 12.0, 50)])
    assert np.all(pu.phi(rho) == 0.0)


def test_nonadjacent_annuli_disjoint(pu):
    rho = np.linspace(0.0, 50.0, 5001)
    for q in range(4):
        for qp in range(q + 2, 6):
            overlap = pu.phi(rho / 2.0**q) * pu.phi(rho / 2.0**qp)
            assert np.all(overlap == 0.0)


def test_partial_sum_telescopes_to_rescaled_chi(pu):
    rho = np.linspace(0.0, 30.0, 3001)
    for q_top in (0, 2, 4):
        lhs = pu.partial_sum(rho, q_top)
        rhs = pu.chi(rho / 2.0 ** (q_top + 1))
        assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_profiles_take_values_in_unit_interval(pu):
    rho = np.linspace(0.0, 20.0, 2001)
    for vals in (pu.chi(rho), pu.phi(rho)):
        assert np.all(vals >= 0.0)
        assert np.all(vals <= 1.0)


def test_build_rejects_nonpositive_inner_radius():
    with pytest.raises(ValueError):
        build_partition(inner_radius=0.0)


def test_build_rejects_transition_wider_than_one_octave():
    with pytest.raises(ValueError, match="octave"):
        build_partition(transition_width=1.5)


def test_csv_export(tmp_path, pu):
    path = tmp_path / "profiles.csv"
    pu.to_csv(path, rho_max=4.0, num=64)
    lines = path.read_text().splitlines()
    assert lines[0] == "rho,chi,phi"
    assert len(lines) == 65
    rho, chi, phi = (float(tok) for tok in lines[1].split(","))
    assert chi == 1.0


def test_custom_partition_still_sums_to_one():
    custom = build_partition(inner_radius=1.0, transition_width=0.5)
    rho = np.linspace(0.0, 30.0, 3001)
    assert np.max(np.abs(custom.partial_sum(rho, 5) - 1.0)) <= 1e-12
