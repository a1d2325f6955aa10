"""Bony calculus: paraproducts, remainder, and transport commutators.

All splits are computed as pointwise products of dyadic blocks, grouped so
that each block pair (j, q) is counted exactly once.  Since the block family
telescopes exactly and every term is evaluated on samples, the identities
here hold to roundoff — provided the inputs are first truncated so that the
finite block window reconstructs them exactly.  ``dealias`` performs that
truncation (2/3-rule cube intersected with the reconstruction ball; cube
corners above the top annulus are unreachable by the block window).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import delta_q
from .grid import Grid, SpectralField, VectorField
from .norms import INF, BesovParams, besov_norm, lebesgue_norm
from .operators import divergence_sup, gradient
from .partition import PartitionOfUnity, build_partition


def dealias(f: SpectralField) -> SpectralField:
    """Truncate to the 2/3-rule cube intersected with the reconstruction ball."""
    g = f.grid
    mask = g.dealias_mask() & (g.k_magnitude() <= g.reconstruction_radius())
    return SpectralField.from_coefficients(g, f.coefficients * mask)


def _dealias_vector(u: VectorField) -> VectorField:
    return VectorField([dealias(c) for c in u.components], divergence_free=u.divergence_free)


def _block_samples(f: SpectralField, pu: PartitionOfUnity) -> list:
    """Sample arrays of Delta_q f for q = -1 .. q_max (index shifted by +1)."""
    return [delta_q(f, q, pu).samples for q in range(-1, f.grid.q_max + 1)]


def _partial_sums(blocks: list) -> list:
    """cums[m] = samples of S_m f = sum_{q <= m-1} Delta_q f, m = 0 .. len(blocks)."""
    cums = [np.zeros_like(blocks[0])]
    for b in blocks:
        cums.append(cums[-1] + b)
    return cums


@dataclass
class BonySplit:
    """uv = para_uv + para_vu + remainder, all on shared samples."""

    para_uv: SpectralField
    para_vu: SpectralField
    remainder: SpectralField
    product: SpectralField

    def residual(self) -> float:
        """Relative sup-norm defect of the three-term identity."""
        total = self.para_uv.samples + self.para_vu.samples + self.remainder.samples
        scale = max(float(np.max(np.abs(self.product.samples))), 1e-300)
        return float(np.max(np.abs(total - self.product.samples))) / scale


def bony_split(u: SpectralField, v: SpectralField, pu: PartitionOfUnity | None = None) -> BonySplit:
    """Low-high / high-low / resonant split of the pointwise product uv."""
    if u.grid != v.grid:
        raise ValueError("bony_split requires fields on the same grid")
    if pu is None:
        pu = build_partition()
    u = dealias(u)
    v = dealias(v)
    grid = u.grid
    bu = _block_samples(u, pu)
    bv = _block_samples(v, pu)
    su = _partial_sums(bu)  # su[m] = S_m u, m = q + 1 in block index
    sv = _partial_sums(bv)
    nq = len(bu)  # blocks q = -1 .. q_max at offset q + 1

    para_uv = np.zeros(grid.shape)
    para_vu = np.zeros(grid.shape)
    remainder = np.zeros(grid.shape)
    for i in range(nq):  # i = q + 1
        q = i - 1
        if q >= 1:
            para_uv += su[q] * bv[i]  # S_{q-1} u * Delta_q v
            para_vu += sv[q] * bu[i]
        tilde = sum(bv[j] for j in range(max(i - 1, 0), min(i + 2, nq)))
        remainder += bu[i] * tilde
    return BonySplit(
        para_uv=SpectralField(grid, para_uv),
        para_vu=SpectralField(grid, para_vu),
        remainder=SpectralField(grid, remainder),
        product=u.pointwise_product(v),
    )


def paraproduct_summand_localization(
    u: SpectralField, v: SpectralField, q: int, pu: PartitionOfUnity | None = None
) -> float:
    """Fraction of spectral energy of S_{q-1}u * Delta_q v outside 2^q [1/12, 10/3].

    The annulus follows from support arithmetic: supp(S_{q-1}u)^ lies in the
    ball (2/3) 2^q and supp(Delta_q v)^ in 2^q [3/4, 8/3].  Only meaningful
    for q <= q_max - 2: above that the product reaches past the Nyquist
    frequency and folds back into the measured band.
    """
    if pu is None:
        pu = build_partition()
    grid = u.grid
    if not 1 <= q <= grid.q_max - 2:
        raise ValueError(f"localization check needs 1 <= q <= q_max - 2 = {grid.q_max - 2}")
    from .blocks import s_q

    u = dealias(u)
    v = dealias(v)
    term = s_q(u, q - 1, pu).samples * delta_q(v, q, pu).samples
    c = SpectralField(grid, term).coefficients
    kmag = grid.k_magnitude()
    scale = 2.0**q
    outside = (kmag < scale / 12.0) | (kmag > scale * 10.0 / 3.0)
    total = float(np.sum(np.abs(c) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(c[outside]) ** 2)) / total


# ---------------------------------------------------------------------------
# transport commutator


def _advect(u: VectorField, f: SpectralField) -> np.ndarray:
    s1, s2, s3 = u.sample_arrays()
    return (
        s1 * f.derivative(0).samples
        + s2 * f.derivative(1).samples
        + s3 * f.derivative(2).samples
    )


def _check_div_free(u: VectorField):
    sup = u.sup_norm()
    if sup == 0.0:
        return
    dv = divergence_sup(u)
    if dv > 1e-8 * sup:
        raise ValueError(
            f"commutator requires divergence-free velocity; got ||div u|| = {dv:.3e} "
            f"(relative {dv / sup:.3e})"
        )


def commutator(q: int, u: VectorField, f: SpectralField, pu: PartitionOfUnity | None = None) -> SpectralField:
    """[Delta_q, u . grad] f computed directly (block of transport minus transport of block)."""
    if pu is None:
        pu = build_partition()
    _check_div_free(u)
    u = _dealias_vector(u)
    f = dealias(f)
    transport = SpectralField(f.grid, _advect(u, f))
    direct = delta_q(transport, q, pu).samples - _advect(u, delta_q(f, q, pu))
    return SpectralField(f.grid, direct)


def commutator_terms(
    q: int, u: VectorField, f: SpectralField, pu: PartitionOfUnity | None = None
) -> dict:
    """Four-term split of [Delta_q, u . grad] f.

    Terms (summed over the velocity index j):
      r1 = Delta_q R(u^j, d_j f)
      r2 = Delta_q T_{d_j f} u^j
      r3 = - T'_{Delta_q d_j f} u^j   with T'_a b = sum_q S_{q+2} a * Delta_q b
      r4 = [Delta_q, T_{u^j}] d_j f
    Their sum equals the direct commutator; ``mismatch`` records the relative
    sup-norm gap.
    """
    if pu is None:
        pu = build_partition()
    _check_div_free(u)
    u = _dealias_vector(u)
    f = dealias(f)
    grid = f.grid
    nq = grid.q_max + 2  # blocks -1 .. q_max

    r1 = np.zeros(grid.shape)
    r2 = np.zeros(grid.shape)
    r3 = np.zeros(grid.shape)
    r4 = np.zeros(grid.shape)
    for j in range(3):
        uj = u.components[j]
        djf = f.derivative(j)
        buj = _block_samples(uj, pu)
        bdf = _block_samples(djf, pu)
        suj = _partial_sums(buj)
        bq_djf = delta_q(djf, q, pu)

        rem = np.zeros(grid.shape)
        t_df_u = np.zeros(grid.shape)
        t_u_df = np.zeros(grid.shape)
        t_u_bqdf = np.zeros(grid.shape)
        bq_djf_blocks = _block_samples(bq_djf, pu)
        tprime = np.zeros(grid.shape)
        sdf = _partial_sums(bdf)
        s_bqdf = _partial_sums(bq_djf_blocks)
        for i in range(nq):  # i = q' + 1
            qp = i - 1
            tilde = sum(bdf[m] for m in range(max(i - 1, 0), min(i + 2, nq)))
            rem += buj[i] * tilde
            if qp >= 1:
                t_df_u += sdf[qp] * buj[i]  # T_{d_j f} u^j
                t_u_df += suj[qp] * bdf[i]  # T_{u^j} d_j f
                t_u_bqdf += suj[qp] * bq_djf_blocks[i]  # T_{u^j} Delta_q d_j f
            # T'_{Delta_q d_j f} u^j: S_{q'+2}(Delta_q d_j f) * Delta_{q'} u^j
            tprime += s_bqdf[min(qp + 3, nq)] * buj[i]

        r1 += delta_q(SpectralField(grid, rem), q, pu).samples
        r2 += delta_q(SpectralField(grid, t_df_u), q, pu).samples
        r3 -= tprime
        r4 += delta_q(SpectralField(grid, t_u_df), q, pu).samples - t_u_bqdf

    direct = commutator(q, u, f, pu).samples
    total = r1 + r2 + r3 + r4
    scale = max(float(np.max(np.abs(direct))), 1e-300)
    return {
        "r1": SpectralField(grid, r1),
        "r2": SpectralField(grid, r2),
        "r3": SpectralField(grid, r3),
        "r4": SpectralField(grid, r4),
        "direct": SpectralField(grid, direct),
        "mismatch": float(np.max(np.abs(total - direct))) / scale,
    }


def commutator_gain_ratio(
    q: int, u: VectorField, f: SpectralField, p: float = 2.0, pu: PartitionOfUnity | None = None
) -> float:
    """2^{-q} ||[Delta_q, u.grad]f||_{L^p} / (||f||_{B^{-1}_{p,inf}} ||u||_{B^1_{inf,1}})."""
    if pu is None:
        pu = build_partition()
    comm = commutator(q, u, f, pu)
    lhs = 2.0 ** (-q) * lebesgue_norm(comm, p)
    nf = besov_norm(f, BesovParams(s=-1.0, p=p, r=INF), pu)
    nu = besov_norm(u, BesovParams(s=1.0, p=INF, r=1.0), pu)
    denom = nf * nu
    if denom == 0.0:
        return 0.0
    return lhs / denom


# ---------------------------------------------------------------------------
# stretching term and remainder divergence rewrite


def stretching_norm_bound(
    omega: VectorField, u: VectorField, p: float, pu: PartitionOfUnity | None = None
) -> tuple:
    """(||omega.grad u||_{B^{3/p}_{p,1}}, ||omega||_{B^{3/p}_{p,1}} ||grad u||_inf).

    omega must be the curl of u to tolerance.
    """
    from .operators import curl

    if pu is None:
        pu = build_partition()
    w = curl(u)
    scale = max(w.sup_norm(), omega.sup_norm(), 1e-300)
    gap = max(
        float(np.max(np.abs(a.samples - b.samples))) for a, b in zip(w.components, omega.components)
    )
    if gap > 1e-6 * scale:
        raise ValueError(f"omega is not the curl of u (relative gap {gap / scale:.3e})")
    s = 0.0 if math.isinf(p) else 3.0 / p
    bp = BesovParams(s=s, p=p, r=1.0)

    w1, w2, w3 = omega.sample_arrays()
    stretched = []
    for comp in u.components:
        d0, d1, d2 = (comp.derivative(a).samples for a in range(3))
        stretched.append(SpectralField(u.grid, w1 * d0 + w2 * d1 + w3 * d2))
    stretch = VectorField(stretched)

    grad_sup = 0.0
    sq = np.zeros(u.grid.shape)
    for comp in u.components:
        for a in range(3):
            sq += comp.derivative(a).samples ** 2
    grad_sup = float(np.sqrt(np.max(sq)))

    lhs = besov_norm(stretch, bp, pu)
    rhs = besov_norm(omega, bp, pu) * grad_sup
    return (lhs, rhs)


def remainder_divergence_check(omega: VectorField, u: VectorField, pu: PartitionOfUnity | None = None) -> float:
    """Relative gap between sum_j R(w^j, d_j u^i) and sum_j d_j R(w^j, u^i).

    Equal in the continuum when div omega = 0 (the remainder commutes with the
    divergence rewrite); discretely limited by aliasing of the highest blocks,
    so smooth well-resolved inputs are expected.
    """
    if pu is None:
        pu = build_partition()
    _check_div_free(VectorField(omega.components))
    grid = omega.grid
    worst = 0.0
    for comp_u in u.components:
        direct = np.zeros(grid.shape)
        rewritten = np.zeros(grid.shape)
        for j in range(3):
            wj = omega.components[j]
            bw = _block_samples(wj, pu)
            bdu = _block_samples(comp_u.derivative(j), pu)
            bu_ = _block_samples(comp_u, pu)
            nq = len(bw)
            rem_d = np.zeros(grid.shape)
            rem_u = np.zeros(grid.shape)
            for i in range(nq):
                t_d = sum(bdu[m] for m in range(max(i - 1, 0), min(i + 2, nq)))
                t_u = sum(bu_[m] for m in range(max(i - 1, 0), min(i + 2, nq)))
                rem_d += bw[i] * t_d
                rem_u += bw[i] * t_u
            direct += rem_d
            rewritten += SpectralField(grid, rem_u).derivative(j).samples
        scale = max(float(np.max(np.abs(direct))), 1e-300)
        worst = max(worst, float(np.max(np.abs(direct - rewritten))) / scale)
    return worst
