import math

import numpy as np
import pytest

from plab.axisym import gaussian_ring, realize
from plab.blocks import delta_q
from plab.grid import Grid, SpectralField, random_band_limited
from plab.norms import (
    INF,
    BesovParams,
    LorentzParams,
    anisotropic_dilate,
    besov_norm,
    dilation_ratio,
    embedding_ratio,
    lebesgue_norm,
    lorentz_norm,
    rearrange,
)


def _indicator(grid, m, rng):
    flat = np.zeros(grid.n**grid.dim)
    flat[rng.choice(flat.size, size=m, replace=False)] = 1.0
    return SpectralField(grid, flat.reshape(grid.shape))


def test_lebesgue_against_manual_quadrature(grid32, rng):
    f = random_band_limited(grid32, rng)
    manual = (np.sum(np.abs(f.samples) ** 2) * grid32.cell_volume) ** 0.5
    assert lebesgue_norm(f, 2.0) == pytest.approx(manual, rel=1e-13)
    assert lebesgue_norm(f, INF) == pytest.approx(np.max(np.abs(f.samples)), rel=1e-13)


def test_rearrangement_is_nonincreasing(grid32, rng):
    f = random_band_limited(grid32, rng)
    r = rearrange(f)
    assert np.all(np.diff(r.thresholds) <= 0.0)
    assert np.all(np.diff(r.measures) > 0.0)
    assert r.total_measure == pytest.approx(f.grid.volume, rel=1e-12)


def test_lorentz_indicator_closed_form(grid32, rng):
    cell = grid32.cell_volume
    for p, q, m in ((2.0, 1.0, 7), (3.0, 1.0, 100), (3.0, 2.0, 50), (1.5, 3.0, 11)):
        f = _indicator(grid32, m, rng)
        expected = (p / q) ** (1.0 / q) * (m * cell) ** (1.0 / p)
        assert lorentz_norm(f, LorentzParams(p, q)) == pytest.approx(expected, rel=1e-10)


def test_lorentz_weak_norm_of_indicator(grid32, rng):
    m = 64
    f = _indicator(grid32, m, rng)
    expected = (m * grid32.cell_volume) ** (1.0 / 3.0)
    assert lorentz_norm(f, LorentzParams(3.0, INF)) == pytest.approx(expected, rel=1e-10)


def test_lorentz_diagonal_matches_lebesgue(grid32, rng):
    f = random_band_limited(grid32, rng)
    for p in (1.0, 2.0, 3.5):
        assert lorentz_norm(f, LorentzParams(p, p)) == pytest.approx(
            lebesgue_norm(f, p), rel=1e-8
        )


def test_besov_single_block_reduces_to_weighted_block_norm(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    block = delta_q(f, 2, pu)
    bp = BesovParams(s=1.5, p=INF, r=1.0)
    norm = besov_norm(block, bp, pu)
    # neighboring multipliers overlap, so the single-q weighted norm is a lower bound
    single = 2.0 ** (2 * 1.5) * np.max(np.abs(block.samples))
    assert norm >= 0.9 * single
    assert norm <= 3.0 * single


def test_besov_scaling_in_s(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    low = besov_norm(f, BesovParams(0.0, INF, 1.0), pu)
    high = besov_norm(f, BesovParams(2.0, INF, 1.0), pu)
    assert high >= low


def test_besov_summability_orders(grid32, pu, rng):
    f = random_band_limited(grid32, rng)
    r1 = besov_norm(f, BesovParams(0.0, INF, 1.0), pu)
    rinf = besov_norm(f, BesovParams(0.0, INF, INF), pu)
    assert rinf <= r1 + 1e-12


def test_embedding_ratio_rejects_supercritical_p(grid64, pu):
    u = realize(gaussian_ring(amplitude=0.5), grid64)
    with pytest.raises(ValueError, match="p < 3"):
        embedding_ratio(u, 3.0, pu)


def test_embedding_ratio_is_positive_and_finite(grid64, pu):
    u = realize(gaussian_ring(amplitude=0.5), grid64)
    ratio = embedding_ratio(u, 2.0, pu)
    assert math.isfinite(ratio)
    assert ratio > 0.0


def test_dilate_identity_at_unit_factor(grid32, rng):
    f = random_band_limited(grid32, rng)
    assert anisotropic_dilate(f, 1.0) is f


def test_dilate_single_mode_matches_closed_form():
    g = Grid(64, 2.0 * np.pi, 2)
    x1, x2 = g.coordinate_arrays()
    f = SpectralField(g, np.cos(4.0 * x1) * np.sin(x2))
    lam = 0.5
    stretched = anisotropic_dilate(f, lam)
    expected = np.cos(4.0 * lam * x1) * np.sin(x2)
    assert np.max(np.abs(stretched.samples - expected)) <= 1e-11


def test_dilate_rejects_unresolvable_factor(grid32, rng):
    f = random_band_limited(grid32, rng)
    with pytest.raises(ValueError, match="resolvable"):
        anisotropic_dilate(f, 0.01)


def test_dilation_ratio_bounded_by_log_factor():
    from plab.partition import build_partition

    g = Grid(128, 2.0 * np.pi, 2)
    pu_local = build_partition()
    rng = np.random.default_rng(3)
    f = random_band_limited(g, rng)
    for lam in (0.5, 0.25):
        ratio = dilation_ratio(f, lam, pu_local)
        assert 0.0 < ratio < 10.0
