"""Dyadic frequency blocks (Littlewood-Paley operators) and diagnostics."""

from __future__ import annotations

import itertools
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, SpectralField
from .partition import PartitionOfUnity, homogeneous_window


def _check_q(grid: Grid, q: int) -> None:
    if not (-1 <= q <= grid.q_max):
        raise ValueError(f"dyadic index q={q} outside admissible window [-1, {grid.q_max}]")


def delta_q(f: SpectralField, q: int, pu: PartitionOfUnity) -> SpectralField:
    """Frequency block isolating the annulus |k| ~ 2^q (low-pass ball for q = -1)."""
    _check_q(f.grid, q)
    kmag = f.grid.k_magnitude()
    mult = pu.chi(kmag) if q == -1 else pu.phi(kmag / 2.0**q)
    return f.apply_multiplier(mult)


def delta_q_hom(f: SpectralField, q: int, pu: PartitionOfUnity) -> SpectralField:
    """Homogeneous block: the annulus multiplier at any integer q (no low-pass)."""
    kmag = f.grid.k_magnitude()
    return f.apply_multiplier(pu.phi(kmag / 2.0**q))


def s_q(f: SpectralField, q: int, pu: PartitionOfUnity) -> SpectralField:
    """Low-pass partial sum of blocks up to q-1; equals the ball multiplier chi(2^-q |k|)."""
    if q < 0:
        raise ValueError("s_q requires q >= 0")
    kmag = f.grid.k_magnitude()
    return f.apply_multiplier(pu.chi(kmag / 2.0**q))


@dataclass
class DyadicDecomposition:
    """Indexed family of frequency blocks with reconstruction metadata."""

    blocks: "OrderedDict[int, SpectralField]"
    q_max: int
    homogeneous: bool
    reconstruction_residual: float
    q_low: int = -1
    truncated_low_frequency: bool = False

    def resum(self) -> SpectralField:
        out = None
        for b in self.blocks.values():
            out = b if out is None else out + b
        return out

    def block_norms(self, norm) -> "OrderedDict[int, float]":
        return OrderedDict((q, norm(b)) for q, b in self.blocks.items())


def decompose(f: SpectralField, pu: PartitionOfUnity, homogeneous: bool = False) -> DyadicDecomposition:
    """Split a field into its dyadic blocks over the grid-representable window.

    The homogeneous variant uses annulus multipliers on a finite window
    [q_low, q_max] and requires zero mean (the torus analogue of working
    modulo polynomials); the low-frequency truncation is recorded.
    """
    grid = f.grid
    qmax = grid.q_max
    blocks: "OrderedDict[int, SpectralField]" = OrderedDict()
    if homogeneous:
        if abs(f.mean) > 1e-12 * max(1.0, float(np.max(np.abs(f.samples)))):
            raise ValueError(
                "homogeneous decomposition requires a zero-mean field: on the torus "
                "the decomposition is only defined modulo constants"
            )
        q_low, _ = homogeneous_window(grid.k_fundamental, qmax, pu)
        for q in range(q_low, qmax + 1):
            blocks[q] = delta_q_hom(f, q, pu)
    else:
        q_low = -1
        for q in range(-1, qmax + 1):
            blocks[q] = delta_q(f, q, pu)
    total = None
    for b in blocks.values():
        total = b if total is None else total + b
    sup = float(np.max(np.abs(f.samples)))
    residual = float(np.max(np.abs(total.samples - f.samples))) / sup if sup > 0 else 0.0
    return DyadicDecomposition(
        blocks=blocks,
        q_max=qmax,
        homogeneous=homogeneous,
        reconstruction_residual=residual,
        q_low=q_low,
        truncated_low_frequency=homogeneous,
    )


@dataclass
class BernsteinRatios:
    """Observed constants in the derivative inequalities for one block.

    ``same_exponent`` is sup over |alpha| = k of
    ||d^alpha block||_La / (2^(qk) ||block||_La); the two-sided homogeneous
    inequality brackets it between C^-k and C^k.  ``mixed`` additionally
    carries the 2^(q d (1/a - 1/b)) gain from La to Lb.
    """

    same_exponent: float
    mixed: float

    def as_pair(self) -> tuple:
        return (self.same_exponent, self.mixed)


def _lp_norm_array(a: np.ndarray, p: float, cell: float) -> float:
    if np.isinf(p):
        return float(np.max(np.abs(a)))
    return float((np.sum(np.abs(a) ** p) * cell) ** (1.0 / p))


def bernstein_ratio(
    f: SpectralField, q: int, k: int, a: float, b: float, pu: PartitionOfUnity
) -> BernsteinRatios:
    """Measure the derivative-growth constants of one dyadic block.

    Returns the pair of observed constants (same-exponent and mixed-norm);
    the caller asserts that they collapse to a uniform bracket across q.
    """
    if not (1 <= a <= b):
        raise ValueError("need 1 <= a <= b (use inf for the sup norm)")
    grid = f.grid
    block = delta_q(f, q, pu)
    cell = grid.cell_volume
    base = _lp_norm_array(block.samples, a, cell)
    if base == 0.0:
        raise ValueError(f"block q={q} vanishes; Bernstein ratio undefined")
    sup_da = 0.0
    sup_db = 0.0
    for alpha in itertools.combinations_with_replacement(range(grid.dim), k):
        d = block
        for axis in alpha:
            d = d.derivative(axis)
        sup_da = max(sup_da, _lp_norm_array(d.samples, a, cell))
        sup_db = max(sup_db, _lp_norm_array(d.samples, b, cell))
    scale = 2.0 ** float(q)
    inv_a = 0.0 if np.isinf(a) else 1.0 / a
    inv_b = 0.0 if np.isinf(b) else 1.0 / b
    same = sup_da / (scale**k * base)
    mixed = sup_db / (scale ** (k + grid.dim * (inv_a - inv_b)) * base)
    return BernsteinRatios(same_exponent=same, mixed=mixed)
