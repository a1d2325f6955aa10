import numpy as np
import pytest

from plab.grid import VectorField, random_band_limited
from plab.operators import curl, leray_project, vector_from_curl
from plab.paraproduct import (
    bony_split,
    commutator,
    commutator_gain_ratio,
    commutator_terms,
    dealias,
    paraproduct_summand_localization,
    remainder_divergence_check,
    stretching_norm_bound,
)


def _div_free(grid, rng, k_max=None):
    return leray_project(
        VectorField([random_band_limited(grid, rng, k_max=k_max, zero_mean=True) for _ in range(3)])
    )


def test_bony_split_reconstructs_dealiased_product(grid32, pu, rng):
    u = random_band_limited(grid32, rng)
    v = random_band_limited(grid32, rng)
    split = bony_split(u, v, pu)
    assert split.residual() <= 1e-12


def test_bony_split_components_sum_to_product(grid32, pu, rng):
    u = random_band_limited(grid32, rng)
    v = random_band_limited(grid32, rng)
    s = bony_split(u, v, pu)
    total = s.para_uv.samples + s.para_vu.samples + s.remainder.samples
    assert np.max(np.abs(total - s.product.samples)) <= 1e-12 * np.max(np.abs(s.product.samples))


def test_bony_split_is_ordered(grid32, pu, rng):
    u = random_band_limited(grid32, rng)
    v = random_band_limited(grid32, rng)
    s = bony_split(u, v, pu)
    assert np.max(np.abs(s.para_uv.samples - s.para_vu.samples)) > 1e-8


def test_dealias_removes_high_frequencies(grid32, rng):
    f = random_band_limited(grid32, rng)
    g = dealias(f.pointwise_product(f))
    kmag = grid32.k_magnitude()
    cut = grid32.k_fundamental * grid32.n / 3.0
    high = np.abs(g.coefficients[kmag > max(cut, grid32.reconstruction_radius())])
    if high.size:
        assert np.max(high) <= 1e-14


def test_paraproduct_summand_is_annulus_localized(grid64, pu, rng):
    u = random_band_limited(grid64, rng)
    v = random_band_limited(grid64, rng)
    for q in range(1, grid64.q_max - 1):
        assert paraproduct_summand_localization(u, v, q, pu) <= 1e-10


def test_paraproduct_localization_rejects_boundary_q(grid32, pu, rng):
    u = random_band_limited(grid32, rng)
    with pytest.raises(ValueError, match="q_max"):
        paraproduct_summand_localization(u, u, grid32.q_max, pu)


def test_commutator_terms_sum_to_direct_commutator(grid32, pu, rng):
    u = _div_free(grid32, rng, k_max=grid32.k_fundamental * grid32.n / 6.0)
    f = random_band_limited(grid32, rng, k_max=grid32.k_fundamental * grid32.n / 6.0)
    for q in (0, 2):
        terms = commutator_terms(q, u, f, pu)
        assert terms["mismatch"] <= 1e-12


def test_commutator_rejects_divergent_velocity(grid32, pu, rng):
    u = VectorField([random_band_limited(grid32, rng) for _ in range(3)])
    f = random_band_limited(grid32, rng)
    with pytest.raises(ValueError):
        commutator(1, u, f, pu)


def test_commutator_gain_ratio_finite(grid32, pu, rng):
    u = _div_free(grid32, rng)
    f = random_band_limited(grid32, rng)
    for q in (0, 1, 2):
        ratio = commutator_gain_ratio(q, u, f, 2.0, pu)
        assert np.isfinite(ratio)
        assert ratio >= 0.0


def test_stretching_norm_bound_returns_pair(grid32, pu, rng):
    omega = _div_free(grid32, rng, k_max=grid32.k_fundamental * grid32.n / 6.0)
    u = vector_from_curl(omega)
    lhs, rhs = stretching_norm_bound(omega, u, 2.0, pu)
    assert lhs > 0.0
    assert rhs > 0.0


def test_stretching_norm_bound_rejects_unrelated_pair(grid32, pu, rng):
    omega = _div_free(grid32, rng)
    u = _div_free(grid32, rng)
    with pytest.raises(ValueError):
        stretching_norm_bound(omega, u, 2.0, pu)


def test_remainder_divergence_rewrite_for_band_limited_inputs(grid32, pu, rng):
    # band limits chosen so every product stays below the Nyquist frequency
    omega = _div_free(grid32, rng, k_max=grid32.k_fundamental * grid32.n / 6.0)
    u = vector_from_curl(omega)
    gap = remainder_divergence_check(omega, u, pu)
    assert gap <= 1e-10
