import numpy as np
import pytest

from plab.blocks import bernstein_ratio, decompose, delta_q, delta_q_hom, s_q
from plab.grid import random_band_limited, random_wave_packet
from plab.norms import INF


def test_reconstruction_of_band_limited_field(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    dec = decompose(f, pu)
    assert dec.reconstruction_residual <= 1e-10


def test_block_is_frequency_localized(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    kmag = grid32.k_magnitude()
    for q in (0, 1, 2):
        block = delta_q(f, q, pu)
        lo, hi = pu.support_phi
        outside = (kmag < lo * 2.0**q) | (kmag > hi * 2.0**q)
        assert np.max(np.abs(block.coefficients[outside])) <= 1e-14


def test_low_pass_block_is_ball_localized(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    block = delta_q(f, -1, pu)
    outside = grid32.k_magnitude() > pu.support_chi
    assert np.max(np.abs(block.coefficients[outside])) <= 1e-14


def test_partial_sum_equals_sum_of_blocks(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    for q in (1, 2):
        total = delta_q(f, -1, pu).samples.copy()
        for j in range(0, q):
            total += delta_q(f, j, pu).samples
        low = s_q(f, q, pu)
        assert np.max(np.abs(total - low.samples)) <= 1e-12


def test_nonadjacent_blocks_orthogonal(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    b0 = delta_q(f, 0, pu)
    b3 = delta_q(f, 3, pu)
    overlap = np.abs(b0.coefficients) * np.abs(b3.coefficients)
    assert np.max(overlap) == 0.0


def test_q_outside_window_rejected(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    with pytest.raises(ValueError, match="admissible window"):
        delta_q(f, grid32.q_max + 1, pu)
    with pytest.raises(ValueError):
        delta_q(f, -2, pu)


def test_s_q_rejects_negative_index(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    with pytest.raises(ValueError):
        s_q(f, -1, pu)


def test_homogeneous_decomposition_requires_zero_mean(grid32, pu):
    f = random_band_limited(grid32, np.random.default_rng(0))
    shifted = type(f)(grid32, f.samples + 1.0)
    with pytest.raises(ValueError, match="zero-mean"):
        decompose(shifted, pu, homogeneous=True)


def test_homogeneous_decomposition_reconstructs(grid32, pu, rng):
    f = random_band_limited(grid32, rng, k_min=0.5, zero_mean=True)
    dec = decompose(f, pu, homogeneous=True)
    assert dec.homogeneous
    assert dec.reconstruction_residual <= 1e-10


def test_homogeneous_blocks_agree_with_inhomogeneous_at_high_q(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    for q in (1, 2):
        a = delta_q(f, q, pu).samples
        b = delta_q_hom(f, q, pu).samples
        assert np.max(np.abs(a - b)) <= 1e-14


def test_block_norms_table(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    dec = decompose(f, pu)
    sups = dec.block_norms(lambda b: float(np.max(np.abs(b.samples))))
    assert set(sups) == set(range(-1, grid32.q_max + 1))
    assert all(v >= 0.0 for v in sups.values())


def test_bernstein_same_exponent_near_one_for_packets(grid64, pu, rng):
    for q in (1, 2):
        f = random_wave_packet(grid64, q, rng)
        r = bernstein_ratio(f, q, 1, INF, INF, pu)
        assert 0.25 <= r.same_exponent <= 4.0


def test_bernstein_rejects_bad_exponent_order(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    with pytest.raises(ValueError, match="1 <= a <= b"):
        bernstein_ratio(f, 1, 1, INF, 2.0, pu)


def test_bernstein_rejects_vanishing_block(grid32, pu):
    from plab.grid import SpectralField

    f = SpectralField.zeros(grid32)
    with pytest.raises(ValueError, match="vanishes"):
        bernstein_ratio(f, grid32.q_max, 1, 2.0, 2.0, pu)
