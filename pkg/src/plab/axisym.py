"""Axisymmetric swirl-free fields: construction, structure checks, quotients.

Profiles are specified in the meridian plane as functions of (r, z) built
from a Stokes stream function of the form  psi = r^2 * F(r^2, z)  with F a
sum of Gaussians.  This guarantees exact divergence-freeness in the
continuum, smoothness across the axis (everything is a function of r^2),
and super-exponential decay so the periodic box sees no support wraparound.

The sample grid is offset by half a cell, so no point lies on the axis;
quotients by r use direct division away from the axis and the exact
Taylor-integral form (Gauss quadrature in the dilation parameter) on the
cells nearest to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._fft import fftn, ifftn
from .blocks import delta_q
from .grid import Grid, SpectralField, VectorField, _axis_wavenumbers
from .operators import curl, vector_from_curl
from .partition import PartitionOfUnity, build_partition


# ---------------------------------------------------------------------------
# profiles


@dataclass
class AxisymProfile:
    """Meridian-plane velocity profiles u_r(r, z), u_z(r, z) with compact support."""

    u_r: Callable
    u_z: Callable
    support_radius: float
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        z = np.array([0.3, -0.7, 1.1])
        on_axis = np.max(np.abs(self.u_r(np.zeros_like(z), z)))
        if on_axis > 1e-12:
            raise ValueError(f"u_r must vanish on the axis; got {on_axis:.3e} at r = 0")

    def to_json_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


def _gaussian_sum_profile(modes, name: str, params: dict) -> AxisymProfile:
    """Profile from psi = r^2 * sum_i amp_i * E_i with Gaussian bumps E_i in (r^2, z).

    Each mode is (amp, s0, w2, z0, dz2): E = exp(-(s - s0)^2 / w2 - (z - z0)^2 / dz2)
    with s = r^2.  The meridian components are the exact stream-function
    derivatives, so the realized field is divergence-free in the continuum.
    """
    modes = [tuple(float(v) for v in m) for m in modes]

    def u_r(r, z):
        r = np.asarray(r, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        s = r**2
        out = np.zeros(np.broadcast(r, z).shape)
        for amp, s0, w2, z0, dz2 in modes:
            e = np.exp(-((s - s0) ** 2) / w2 - ((z - z0) ** 2) / dz2)
            out = out + amp * r * e * (2.0 * (z - z0) / dz2)
        return out

    def u_z(r, z):
        r = np.asarray(r, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        s = r**2
        out = np.zeros(np.broadcast(r, z).shape)
        for amp, s0, w2, z0, dz2 in modes:
            e = np.exp(-((s - s0) ** 2) / w2 - ((z - z0) ** 2) / dz2)
            out = out + 2.0 * amp * e * (1.0 - 2.0 * s * (s - s0) / w2)
        return out

    # reach: where every Gaussian factor has dropped below ~1e-15
    reach = 0.0
    for amp, s0, w2, z0, dz2 in modes:
        reach = max(
            reach,
            math.sqrt(max(s0, 0.0) + 6.0 * math.sqrt(w2)),
            abs(z0) + 6.0 * math.sqrt(dz2),
        )
    return AxisymProfile(u_r=u_r, u_z=u_z, support_radius=reach, name=name, params=params)


def gaussian_ring(amplitude: float = 1.0, ring_radius: float = 0.9, width: float = 0.5) -> AxisymProfile:
    """Single vortex ring centered at radius ``ring_radius``."""
    s0 = ring_radius**2
    w2 = (2.0 * ring_radius * width) ** 2
    dz2 = width**2
    return _gaussian_sum_profile(
        [(amplitude, s0, w2, 0.0, dz2)],
        "gaussian_ring",
        {"amplitude": amplitude, "ring_radius": ring_radius, "width": width},
    )


def dipole(amplitude: float = 1.0, ring_radius: float = 0.8, width: float = 0.4, separation: float = 0.5) -> AxisymProfile:
    """Two counter-signed rings stacked along the axis."""
    s0 = ring_radius**2
    w2 = (2.0 * ring_radius * width) ** 2
    dz2 = width**2
    return _gaussian_sum_profile(
        [(amplitude, s0, w2, separation, dz2), (-amplitude, s0, w2, -separation, dz2)],
        "dipole",
        {"amplitude": amplitude, "ring_radius": ring_radius, "width": width, "separation": separation},
    )


def random_axisym(seed: int, n_modes: int = 3, amplitude: float = 1.0, reach: float = 2.2) -> AxisymProfile:
    """Random smooth axisymmetric profile (seeded, reproducible)."""
    rng = np.random.default_rng(seed)
    modes = []
    for _ in range(n_modes):
        r0 = rng.uniform(0.25, 0.45) * reach
        width = rng.uniform(0.17, 0.21) * reach
        z0 = rng.uniform(-0.1, 0.1) * reach
        amp = amplitude * rng.uniform(0.4, 1.0) * rng.choice([-1.0, 1.0])
        modes.append((amp, r0**2, (2.0 * r0 * width) ** 2, z0, width**2))
    return _gaussian_sum_profile(
        modes, "random_axisym", {"seed": seed, "n_modes": n_modes, "amplitude": amplitude, "reach": reach}
    )


PROFILE_BUILDERS = {
    "gaussian_ring": gaussian_ring,
    "dipole": dipole,
    "random_axisym": random_axisym,
}


def build_profile(name: str, params: dict | None = None) -> AxisymProfile:
    if name not in PROFILE_BUILDERS:
        raise KeyError(f"unknown profile {name!r}; available: {sorted(PROFILE_BUILDERS)}")
    return PROFILE_BUILDERS[name](**(params or {}))


# ---------------------------------------------------------------------------
# realization and structure checks


def realize(profile: AxisymProfile, grid: Grid) -> VectorField:
    """Sample the meridian profiles as a Cartesian vector field on the grid."""
    if grid.dim != 3:
        raise ValueError("axisymmetric realization needs a 3D grid")
    # reach <= L/2 keeps every sample at least `reach` away from the nearest
    # periodic image of the axis, so wraparound stays below the decay floor
    if profile.support_radius > grid.box_length / 2.0:
        raise ValueError(
            f"profile reach {profile.support_radius:g} exceeds the half box length "
            f"{grid.box_length / 2.0:g}; periodic images would overlap"
        )
    x1, x2, x3 = grid.coordinate_arrays()
    r = np.sqrt(x1**2 + x2**2)
    ur = profile.u_r(r, x3)
    uz = profile.u_z(r, x3) + np.zeros(grid.shape)
    # r > 0 everywhere on the offset grid
    return VectorField.from_samples(grid, ur * x1 / r, ur * x2 / r, uz, divergence_free=True)


def realize_alpha(profile: AxisymProfile, grid: Grid, structure_tol: float = 1e-3) -> "SpectralField":
    """Sample the angular-vorticity-over-radius scalar of a profile.

    Goes through the Cartesian realization and its curl, so the result is the
    exact band-limited scalar whose induced vorticity matches the grid curl of
    the sampled velocity.  ``structure_tol`` bounds how far the curl may sit
    from swirl-free angular structure (truncation error of the realization).
    """
    from .operators import curl

    return swirl_free_vorticity_over_r(curl(realize(profile, grid)), structure_tol=structure_tol)


def _plane_slice_max(f: SpectralField, axis: int) -> float:
    """max |f| over the coordinate plane x_axis = 0, via exact interpolation."""
    g = f.grid
    k1d = _axis_wavenumbers(g.n, g.box_length)
    x0 = g.axis_coordinates()[0]
    phase = np.exp(1j * (0.0 - x0) * k1d)
    c = np.moveaxis(f.coefficients, axis, 0)
    vals = np.tensordot(phase, c, axes=(0, 0))
    vals = np.real(ifftn(vals) * g.n ** (g.dim - 1))
    return float(np.max(np.abs(vals)))


def _quarter_turn(arr: np.ndarray) -> np.ndarray:
    """Samples of x -> f(R^-1 x) for the quarter turn R: (x1,x2) -> (-x2,x1)."""
    return arr.transpose(1, 0, 2)[::-1]


def _quarter_turn_violation(v: VectorField) -> float:
    s1, s2, s3 = v.sample_arrays()
    d1 = -_quarter_turn(s2) - s1
    d2 = _quarter_turn(s1) - s2
    d3 = _quarter_turn(s3) - s3
    return float(max(np.max(np.abs(d1)), np.max(np.abs(d2)), np.max(np.abs(d3))))


def _angular_violation(v: VectorField) -> float:
    x1, x2, _ = v.grid.coordinate_arrays()
    s1, s2, _ = v.sample_arrays()
    return float(np.max(np.abs(x2 * s1 - x1 * s2)))


def _rotation_violation(v: VectorField, n_points: int = 64, seed: int = 7) -> float:
    """Continuous-angle check: meridian components agree at rotated sample points."""
    g = v.grid
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-g.box_length / 5.0, g.box_length / 5.0, size=(n_points, 3))
    eta = rng.uniform(0.3, 2.8)
    ce, se = math.cos(eta), math.sin(eta)
    rot = pts.copy()
    rot[:, 0] = ce * pts[:, 0] - se * pts[:, 1]
    rot[:, 1] = se * pts[:, 0] + ce * pts[:, 1]
    vals = [c.evaluate(np.vstack([pts, rot])) for c in v.components]
    u1, u2, u3 = (np.split(val, 2) for val in vals)
    r = np.hypot(pts[:, 0], pts[:, 1])
    ur_orig = (pts[:, 0] * u1[0] + pts[:, 1] * u2[0]) / r
    rr = np.hypot(rot[:, 0], rot[:, 1])
    ur_rot = (rot[:, 0] * u1[1] + rot[:, 1] * u2[1]) / rr
    return float(max(np.max(np.abs(ur_rot - ur_orig)), np.max(np.abs(u3[1] - u3[0]))))


@dataclass
class BlockChecks:
    plane_u1: float
    plane_u2: float
    quarter_turn: float
    angular: float


@dataclass
class AxisymmetryReport:
    """Normalized structural violations for a field, its curl, and its dyadic blocks.

    All entries are divided by the sup of the relevant field.  The block-level
    ``angular`` entry is reported but is wraparound-limited on a periodic box
    (the frequency-localized kernel decays slowly in space), so the discretely
    exact block checks are the coordinate-plane and quarter-turn ones.
    """

    sup: float
    angular: float
    rotation: float
    quarter_turn: float
    plane_u1: float
    plane_u2: float
    curl_sup: float
    curl_omega3: float
    curl_angular_moment: float
    curl_plane_w1: float
    curl_plane_w2: float
    blocks: dict

    def max_field_violation(self) -> float:
        return max(self.angular, self.rotation, self.quarter_turn, self.plane_u1, self.plane_u2)

    def max_curl_violation(self) -> float:
        return max(self.curl_omega3, self.curl_angular_moment, self.curl_plane_w1, self.curl_plane_w2)

    def max_block_violation(self) -> float:
        """Worst discretely exact block check (plane vanishing + quarter turn)."""
        if not self.blocks:
            return 0.0
        return max(max(b.plane_u1, b.plane_u2, b.quarter_turn) for b in self.blocks.values())

    def field_passes(self, tol: float) -> bool:
        return self.max_field_violation() <= tol

    def curl_passes(self, tol: float) -> bool:
        return self.max_curl_violation() <= tol

    def blocks_pass(self, tol: float) -> bool:
        return self.max_block_violation() <= tol


def check_axisymmetry(
    v: VectorField,
    pu: PartitionOfUnity | None = None,
    check_blocks: bool = True,
    check_rotation: bool = True,
) -> AxisymmetryReport:
    """Report all swirl-free axisymmetry violations of a vector field."""
    g = v.grid
    sup = v.sup_norm()
    if sup == 0.0:
        sup = 1.0
    w = curl(v)
    wsup = max(w.sup_norm(), 1e-300)
    x1, x2, _ = g.coordinate_arrays()
    w1, w2, w3 = w.sample_arrays()
    blocks: dict = {}
    if check_blocks:
        if pu is None:
            pu = build_partition()
        for q in range(-1, g.q_max + 1):
            bv = VectorField([delta_q(c, q, pu) for c in v.components])
            bsup = bv.sup_norm()
            if bsup <= 1e-7 * sup:
                # degenerate block: the spectral filter carries O(eps * sup)
                # roundoff, so normalizing by a block this small measures
                # noise, not structure
                blocks[q] = BlockChecks(0.0, 0.0, 0.0, 0.0)
                continue
            blocks[q] = BlockChecks(
                plane_u1=_plane_slice_max(bv.components[0], 0) / bsup,
                plane_u2=_plane_slice_max(bv.components[1], 1) / bsup,
                quarter_turn=_quarter_turn_violation(bv) / bsup,
                angular=_angular_violation(bv) / bsup,
            )
    return AxisymmetryReport(
        sup=sup,
        angular=_angular_violation(v) / sup,
        rotation=_rotation_violation(v) / sup if check_rotation else 0.0,
        quarter_turn=_quarter_turn_violation(v) / sup,
        plane_u1=_plane_slice_max(v.components[0], 0) / sup,
        plane_u2=_plane_slice_max(v.components[1], 1) / sup,
        curl_sup=wsup,
        curl_omega3=float(np.max(np.abs(w3))) / wsup,
        curl_angular_moment=float(np.max(np.abs(x1 * w1 + x2 * w2))) / wsup,
        curl_plane_w1=_plane_slice_max(w.components[0], 1) / wsup,
        curl_plane_w2=_plane_slice_max(w.components[1], 0) / wsup,
        blocks=blocks,
    )


def biot_savart(omega: VectorField) -> VectorField:
    """Velocity recovery from vorticity: mean-zero divergence-free u with curl u = omega."""
    return vector_from_curl(omega, div_tol=1e-8, mean_tol=1e-8)


# ---------------------------------------------------------------------------
# quotients by r


def _gauss01(n: int = 8) -> tuple:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def _near_axis_columns(grid: Grid, cutoff: float) -> np.ndarray:
    x = grid.axis_coordinates()
    a, b = np.meshgrid(x, x, indexing="ij")
    return np.argwhere(np.hypot(a, b) < cutoff)


def _eval_at_scaled_columns(coeffs: np.ndarray, grid: Grid, pts: np.ndarray) -> np.ndarray:
    """Evaluate a field (given by coefficients) at ((a, b, z_j)) for a batch of
    meridian positions ``pts`` of shape (m, 2), for every grid z; returns (m, n)."""
    k1d = _axis_wavenumbers(grid.n, grid.box_length)
    x0 = grid.axis_coordinates()[0]
    p1 = np.exp(1j * np.outer(pts[:, 0] - x0, k1d))
    p2 = np.exp(1j * np.outer(pts[:, 1] - x0, k1d))
    zvec = np.einsum("ma,mb,abk->mk", p1, p2, coeffs, optimize=True)
    return np.real(ifftn(zvec, axes=(1,)) * grid.n)


def _quotient_by_r_squared(f1: SpectralField, f2: SpectralField, mode: str) -> np.ndarray:
    """(x1 f2 - x2 f1) / r^2 ("angular") or (x1 f1 + x2 f2) / r^2 ("radial").

    Direct division away from the axis; within two cells of it, the numerator
    components are rewritten through the Taylor integral
    f(x1, x2, z) = int_0^1 (x1 d1 f + x2 d2 f)(tau x1, tau x2, z) dtau,
    evaluated spectrally at the scaled points with 8-node Gauss quadrature.
    """
    grid = f1.grid
    x1, x2, _ = grid.coordinate_arrays()
    r2 = x1**2 + x2**2
    if mode == "angular":
        num = x1 * f2.samples - x2 * f1.samples
    elif mode == "radial":
        num = x1 * f1.samples + x2 * f2.samples
    else:  # pragma: no cover
        raise ValueError(mode)
    out = num / r2

    cutoff = 2.0 * grid.spacing
    cols = _near_axis_columns(grid, cutoff)
    if cols.size == 0:
        return out
    x = grid.axis_coordinates()
    ab = np.stack([x[cols[:, 0]], x[cols[:, 1]]], axis=1)  # (m, 2)
    taus, weights = _gauss01(8)
    m = ab.shape[0]
    pts = (taus[:, None, None] * ab[None, :, :]).reshape(-1, 2)  # (8*m, 2)

    derivs = {}
    for name, fld, axis in (("d1f1", f1, 0), ("d2f1", f1, 1), ("d1f2", f2, 0), ("d2f2", f2, 1)):
        derivs[name] = _eval_at_scaled_columns(fld.derivative(axis).coefficients, grid, pts).reshape(
            len(taus), m, grid.n
        )

    a = ab[:, 0][None, :, None]
    b = ab[:, 1][None, :, None]
    if mode == "angular":
        integrand = a * (a * derivs["d1f2"] + b * derivs["d2f2"]) - b * (
            a * derivs["d1f1"] + b * derivs["d2f1"]
        )
    else:
        integrand = a * (a * derivs["d1f1"] + b * derivs["d2f1"]) + b * (
            a * derivs["d1f2"] + b * derivs["d2f2"]
        )
    taylor = np.tensordot(weights, integrand, axes=(0, 0))  # (m, n)
    rr2 = ab[:, 0] ** 2 + ab[:, 1] ** 2
    out[cols[:, 0], cols[:, 1], :] = taylor / rr2[:, None]
    return out


def swirl_free_vorticity_over_r(omega: VectorField, structure_tol: float = 1e-6) -> SpectralField:
    """The advected quantity: angular vorticity component divided by r.

    Rejects input without the swirl-free vorticity structure (vanishing
    vertical component and angular moment), for which the quotient would be
    singular on the axis.
    """
    g = omega.grid
    sup = omega.sup_norm()
    if sup > 0.0:
        x1, x2, _ = g.coordinate_arrays()
        w1, w2, w3 = omega.sample_arrays()
        viol = max(float(np.max(np.abs(w3))), float(np.max(np.abs(x1 * w1 + x2 * w2))))
        if viol > structure_tol * sup:
            raise ValueError(
                f"vorticity lacks the swirl-free structure (violation {viol:.3e} "
                f"vs tolerance {structure_tol:g} * sup): quotient by r would be singular"
            )
    return SpectralField(g, _quotient_by_r_squared(omega.components[0], omega.components[1], "angular"))


def radial_velocity_over_r(u: VectorField) -> SpectralField:
    """u^r / r with the same axis-safe evaluation."""
    return SpectralField(u.grid, _quotient_by_r_squared(u.components[0], u.components[1], "radial"))
