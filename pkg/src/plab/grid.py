"""Periodic-box grids and spectral fields.

Fields live on a uniform grid over the cube [-L/2, L/2)^dim with samples
offset by half a cell, so no sample sits on a coordinate axis (in
particular none on the symmetry axis r = 0).  Each field is carried
jointly as real samples and (lazily computed) Fourier coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from ._fft import fftn, ifftn


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: ``n`` samples per axis on a cube of side ``box_length``."""

    n: int
    box_length: float = 2.0 * np.pi
    dim: int = 3

    def __post_init__(self):
        if self.n < 16 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if self.box_length <= 0:
            raise ValueError("box_length must be positive")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return self.box_length**self.dim

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def q_max(self) -> int:
        """Top dyadic index with a fully representable annulus."""
        return int(math.log2(self.n)) - 2

    @property
    def k_fundamental(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def k_nyquist(self) -> float:
        return np.pi * self.n / self.box_length

    def axis_coordinates(self) -> np.ndarray:
        """Sample coordinates along one axis (half-cell offset)."""
        return _axis_coords(self.n, self.box_length)

    def coordinate_arrays(self) -> tuple:
        """Broadcastable coordinate arrays, one per axis."""
        return _coord_arrays(self.n, self.box_length, self.dim)

    def wavenumber_arrays(self) -> tuple:
        """Broadcastable angular wavenumber arrays, one per axis."""
        return _wavenumber_arrays(self.n, self.box_length, self.dim)

    def k_magnitude(self) -> np.ndarray:
        return _k_magnitude(self.n, self.box_length, self.dim)

    def dealias_mask(self) -> np.ndarray:
        """Boolean mask of the 2/3-rule band (per-axis |k| index < n/3)."""
        return _dealias_mask(self.n, self.box_length, self.dim)

    def reconstruction_radius(self, inner_radius: float = 0.75) -> float:
        """Largest |k| below which the dyadic blocks up to q_max resum exactly."""
        return 2.0 ** (self.q_max + 1) * inner_radius


@lru_cache(maxsize=32)
def _axis_coords(n: int, box_length: float) -> np.ndarray:
    h = box_length / n
    x = -0.5 * box_length + (np.arange(n) + 0.5) * h
    x.setflags(write=False)
    return x


@lru_cache(maxsize=32)
def _coord_arrays(n: int, box_length: float, dim: int) -> tuple:
    x = _axis_coords(n, box_length)
    out = []
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = n
        a = x.reshape(shape)
        out.append(a)
    return tuple(out)

@lru_cache(maxsize=32)
def _axis_wavenumbers(n: int, box_length: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=box_length / n)
    k.setflags(write=False)
    return k


@lru_cache(maxsize=32)
def _wavenumber_arrays(n: int, box_length: float, dim: int) -> tuple:
    k = _axis_wavenumbers(n, box_length)
    out = []
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = n
        out.append(k.reshape(shape))
    return tuple(out)


@lru_cache(maxsize=32)
def _k_magnitude(n: int, box_length: float, dim: int) -> np.ndarray:
    ks = _wavenumber_arrays(n, box_length, dim)
    m = np.sqrt(sum(k**2 for k in ks))
    m.setflags(write=False)
    return m


@lru_cache(maxsize=32)
def _dealias_mask(n: int, box_length: float, dim: int) -> np.ndarray:
    idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    keep = idx < n / 3.0
    mask = np.ones((n,) * dim, dtype=bool)
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = n
        mask &= keep.reshape(shape)
    mask.setflags(write=False)
    return mask


class SpectralField:
    """Real scalar field on a periodic grid with cached Fourier coefficients.

    Coefficients use the convention ``c = fftn(samples) / n**dim`` so the
    zero mode carries the mean; they refer to the basis
    ``exp(i k . (x - x0))`` with ``x0`` the first sample coordinate.
    """

    __slots__ = ("grid", "_samples", "_coeffs")

    def __init__(self, grid: Grid, samples: np.ndarray):
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape != grid.shape:
            raise ValueError(f"samples shape {samples.shape} != grid shape {grid.shape}")
        self.grid = grid
        self._samples = samples
        self._coeffs = None

    @classmethod
    def from_coefficients(cls, grid: Grid, coeffs: np.ndarray) -> "SpectralField":
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        samples = np.real(ifftn(coeffs * grid.n**grid.dim))
        f = cls(grid, samples)
        f._coeffs = coeffs
        return f

    @classmethod
    def from_function(cls, grid: Grid, func: Callable) -> "SpectralField":
        return cls(grid, func(*grid.coordinate_arrays()) + np.zeros(grid.shape))

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape))

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @property
    def coefficients(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = fftn(self._samples) / self.grid.n**self.grid.dim
        return self._coeffs

    @property
    def mean(self) -> float:
        return float(np.mean(self._samples))

    def apply_multiplier(self, multiplier: np.ndarray) -> "SpectralField":
        """Apply a Fourier multiplier given as an array over the frequency lattice."""
        return SpectralField.from_coefficients(self.grid, self.coefficients * multiplier)

    def apply_radial_multiplier(self, profile: Callable) -> "SpectralField":
        return self.apply_multiplier(profile(self.grid.k_magnitude()))

    def derivative(self, axis: int) -> "SpectralField":
        k = self.grid.wavenumber_arrays()[axis]
        return SpectralField.from_coefficients(self.grid, 1j * k * self.coefficients)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the trigonometric interpolant at arbitrary points.

        ``points`` has shape (npts, dim).  Cost is O(npts * n**dim); meant
        for modest point sets (rotation and axis-plane checks).
        """
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        g = self.grid
        x0 = g.axis_coordinates()[0]
        k1d = _axis_wavenumbers(g.n, g.box_length)
        c = self.coefficients
        # contract one axis at a time: phases are separable
        for axis in range(g.dim):
            phase = np.exp(1j * np.outer(points[:, axis] - x0, k1d))
            c = np.einsum("pk,k...->p...", phase, c) if axis == 0 else np.einsum(
                "pk,pk...->p...", phase, c
            )
        return np.real(c)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self._samples + other._samples)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self._samples - other._samples)

    def __mul__(self, c: float) -> "SpectralField":
        return SpectralField(self.grid, self._samples * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self._samples)

    def pointwise_product(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self._samples * other._samples)

    def _check_same_grid(self, other: "SpectralField") -> None:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")


class VectorField:
    """Three scalar components on a shared 3D grid."""

    __slots__ = ("grid", "components", "divergence_free")

    def __init__(self, components: Sequence[SpectralField], divergence_free: bool = False):
        components = tuple(components)
        if len(components) != 3:
            raise ValueError("VectorField needs exactly 3 components")
        grid = components[0].grid
        if grid.dim != 3:
            raise ValueError("VectorField requires a 3D grid")
        for c in components[1:]:
            if c.grid != grid:
                raise ValueError("components live on different grids")
        self.grid = grid
        self.components = components
        self.divergence_free = divergence_free

    @classmethod
    def from_samples(cls, grid: Grid, s1, s2, s3, divergence_free: bool = False) -> "VectorField":
        return cls(
            (SpectralField(grid, s1), SpectralField(grid, s2), SpectralField(grid, s3)),
            divergence_free=divergence_free,
        )

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls.from_samples(grid, *(np.zeros(grid.shape) for _ in range(3)))

    def sample_arrays(self) -> tuple:
        return tuple(c.samples for c in self.components)

    def magnitude(self) -> np.ndarray:
        s1, s2, s3 = self.sample_arrays()
        return np.sqrt(s1**2 + s2**2 + s3**2)

    def sup_norm(self) -> float:
        return float(np.max(self.magnitude()))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField([a - b for a, b in zip(self.components, other.components)])

    def __mul__(self, c: float) -> "VectorField":
        return VectorField([f * c for f in self.components])

    __rmul__ = __mul__


def random_wave_packet(
    grid: Grid,
    q: int,
    rng: np.random.Generator,
    carrier_scale: float = 1.5,
    width: float = 2.0,
) -> SpectralField:
    """Modulated bump concentrated at scale 2^-q with carrier near 2^q.

    A randomly placed periodized Gaussian envelope of width ``width * 2^-q``
    times a plane-wave carrier at a lattice point near ``carrier_scale * 2^q``.
    Unlike a dense random spectrum, these packets saturate the mixed-norm
    derivative inequalities, so their observed constants collapse across q.
    """
    if q < 0 or q > grid.q_max:
        raise ValueError(f"q must lie in [0, {grid.q_max}]")
    x = grid.coordinate_arrays()
    x0 = rng.uniform(0.0, grid.box_length, grid.dim)
    sigma = width * 2.0**-q
    half = grid.box_length / 2.0
    r2 = sum(((xi - c + half) % grid.box_length - half) ** 2 for xi, c in zip(x, x0))
    direction = rng.standard_normal(grid.dim)
    direction /= np.linalg.norm(direction)
    carrier = np.round(carrier_scale * 2.0**q * direction)
    if not carrier.any():
        carrier[0] = round(carrier_scale * 2.0**q)
    phase = sum(k * xi for k, xi in zip(carrier, x)) + rng.uniform(0.0, 2.0 * np.pi)
    return SpectralField(grid, np.exp(-r2 / (2.0 * sigma**2)) * np.cos(phase))


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    k_max: float | None = None,
    k_min: float = 0.0,
    zero_mean: bool = False,
) -> SpectralField:
    """Random real field with spectrum supported in ``k_min < |k| <= k_max``."""
    if k_max is None:
        k_max = min(grid.reconstruction_radius(), grid.k_fundamental * grid.n / 3.0)
    kmag = grid.k_magnitude()
    keep = (kmag <= k_max) & (kmag > k_min if k_min > 0 else np.ones_like(kmag, bool))
    noise = rng.standard_normal(grid.shape)
    coeffs = fftn(noise) / grid.n**grid.dim
    coeffs = np.where(keep, coeffs, 0.0)
    if zero_mean:
        coeffs[(0,) * grid.dim] = 0.0
    f = SpectralField.from_coefficients(grid, coeffs)
    sup = float(np.max(np.abs(f.samples)))
    return f * (1.0 / sup) if sup > 0 else f
