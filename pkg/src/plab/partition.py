"""Dyadic radial partition of unity on frequency space.

The low-pass profile ``chi`` equals 1 on a ball and vanishes beyond a
slightly larger one; the annular profile is the octave difference
``phi(rho) = chi(rho/2) - chi(rho)``, so the family telescopes exactly:

    chi(rho) + sum_{q=0..Q} phi(2^-q rho) = chi(2^-(Q+1) rho).

All four structural guarantees (summation to 1, two-octave support
disjointness, chi/phi separation, homogeneous-window summation) follow
from the support radii alone and hold to machine precision.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, exp(-1/t)-glued between."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        g0 = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        g1 = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return g0 / (g0 + g1)


@dataclass(frozen=True)
class PartitionOfUnity:
    """Radial profiles chi (low-pass ball) and phi (annulus), with support data."""

    inner_radius: float
    outer_radius: float

    @property
    def support_chi(self) -> float:
        """chi vanishes for rho >= support_chi."""
        return self.outer_radius

    @property
    def support_phi(self) -> tuple:
        """phi vanishes outside [inner, outer] = [inner_radius, 2*outer_radius]."""
        return (self.inner_radius, 2.0 * self.outer_radius)

    def chi(self, rho) -> np.ndarray:
        rho = np.abs(np.asarray(rho, dtype=np.float64))
        return 1.0 - _smoothstep((rho - self.inner_radius) / (self.outer_radius - self.inner_radius))

    def phi(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.float64)
        return self.chi(rho / 2.0) - self.chi(rho)

    def partial_sum(self, rho, q_top: int) -> np.ndarray:
        """chi(rho) + sum_{q=0..q_top} phi(2^-q rho); telescopes to chi(2^-(q_top+1) rho)."""
        rho = np.asarray(rho, dtype=np.float64)
        out = self.chi(rho)
        for q in range(q_top + 1):
            out = out + self.phi(rho / 2.0**q)
        return out

    def homogeneous_band(self, q_low: int, q_high: int) -> tuple:
        """Radial band on which sum_{q_low..q_high} phi(2^-q rho) = 1 identically."""
        return (2.0**q_low * self.outer_radius, 2.0**q_high * self.inner_radius * 2.0)

    def to_csv(self, path, rho_max: float, num: int = 512) -> None:
        """Audit table (rho, chi, phi)."""
        rho = np.linspace(0.0, rho_max, num)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rho", "chi", "phi"])
            for r, c, p in zip(rho, self.chi(rho), self.phi(rho)):
                writer.writerow([repr(float(r)), repr(float(c)), repr(float(p))])


def build_partition(inner_radius: float = 0.75, transition_width: float = 7.0 / 9.0) -> PartitionOfUnity:
    """Construct the dyadic partition profiles.

    ``chi`` equals 1 on ``rho <= inner_radius`` and vanishes beyond
    ``inner_radius * (1 + transition_width)``.  The defaults give the
    classical supports {rho <= 4/3} for chi and {3/4 <= rho <= 8/3} for phi.

    Raises ``ValueError`` when the transition does not fit inside one
    octave, which would break support disjointness of non-adjacent annuli.
    """
    if inner_radius <= 0:
        raise ValueError("inner_radius must be positive")
    if transition_width <= 0:
        raise ValueError("transition_width must be positive")
    outer = inner_radius * (1.0 + transition_width)
    if not outer < 2.0 * inner_radius:
        raise ValueError(
            "transition too wide: outer radius "
            f"{outer:g} must stay below one octave (2 * inner = {2*inner_radius:g}); "
            "non-adjacent annuli would overlap"
        )
    return PartitionOfUnity(inner_radius=inner_radius, outer_radius=outer)


def homogeneous_window(grid_k_min: float, q_max: int, pu: PartitionOfUnity) -> tuple:
    """Dyadic window [q_low, q_max] whose annuli cover all nonzero grid frequencies."""
    q_low = int(math.floor(math.log2(grid_k_min / (2.0 * pu.outer_radius))))
    return (q_low, q_max)
