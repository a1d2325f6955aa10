"""Spectral differential operators on periodic vector fields."""

from __future__ import annotations

import numpy as np

from ._fft import fftn, ifftn
from .grid import Grid, SpectralField, VectorField


def gradient(f: SpectralField) -> VectorField:
    if f.grid.dim != 3:
        raise ValueError("gradient as a VectorField needs a 3D grid")
    return VectorField([f.derivative(axis) for axis in range(3)])


def divergence(v: VectorField) -> SpectralField:
    out = v.components[0].derivative(0)
    for axis in (1, 2):
        out = out + v.components[axis].derivative(axis)
    return out


def divergence_sup(v: VectorField) -> float:
    return float(np.max(np.abs(divergence(v).samples)))


def curl(u: VectorField) -> VectorField:
    """Spectral curl; the result is divergence-free to roundoff."""
    g = u.grid
    k1, k2, k3 = g.wavenumber_arrays()
    c1, c2, c3 = (c.coefficients for c in u.components)
    w1 = 1j * (k2 * c3 - k3 * c2)
    w2 = 1j * (k3 * c1 - k1 * c3)
    w3 = 1j * (k1 * c2 - k2 * c1)
    return VectorField(
        [SpectralField.from_coefficients(g, w) for w in (w1, w2, w3)],
        divergence_free=True,
    )


def leray_project(v: VectorField) -> VectorField:
    """Project onto divergence-free fields; the mean flow passes through."""
    g = v.grid
    k1, k2, k3 = g.wavenumber_arrays()
    ksq = k1**2 + k2**2 + k3**2
    ksq_safe = np.where(ksq == 0.0, 1.0, ksq)
    c = [comp.coefficients for comp in v.components]
    kdotc = (k1 * c[0] + k2 * c[1] + k3 * c[2]) / ksq_safe
    out = []
    for k, ci in zip((k1, k2, k3), c):
        out.append(SpectralField.from_coefficients(g, ci - k * kdotc))
    return VectorField(out, divergence_free=True)


def vector_from_curl(omega: VectorField, div_tol: float = 1e-8, mean_tol: float = 1e-10) -> VectorField:
    """Recover the unique mean-zero divergence-free field with the given curl.

    Spectral inversion u_hat = i k x omega_hat / |k|^2 away from k = 0.
    Rejects input whose divergence or mean exceeds the stated tolerances.
    """
    g = omega.grid
    sup = omega.sup_norm()
    if sup > 0:
        dv = divergence_sup(omega)
        if dv > div_tol * sup:
            raise ValueError(f"curl inversion needs a divergence-free field: |div| = {dv:.3e} vs sup {sup:.3e}")
        means = [abs(c.mean) for c in omega.components]
        if max(means) > mean_tol * sup:
            raise ValueError(f"curl inversion needs a mean-zero field: |mean| = {max(means):.3e}")
    k1, k2, k3 = g.wavenumber_arrays()
    ksq = k1**2 + k2**2 + k3**2
    ksq_safe = np.where(ksq == 0.0, 1.0, ksq)
    w1, w2, w3 = (c.coefficients for c in omega.components)
    u1 = 1j * (k2 * w3 - k3 * w2) / ksq_safe
    u2 = 1j * (k3 * w1 - k1 * w3) / ksq_safe
    u3 = 1j * (k1 * w2 - k2 * w1) / ksq_safe
    for u in (u1, u2, u3):
        u[(0, 0, 0)] = 0.0
    return VectorField(
        [SpectralField.from_coefficients(g, u) for u in (u1, u2, u3)],
        divergence_free=True,
    )
