"""Pseudo-spectral evolution of the swirl-free axisymmetric system.

The primary unknown is the advected scalar alpha (the angular vorticity
divided by r), transported by the velocity it induces.  The linear
companion solves (general vorticity model, tilde family, passive transport)
are driven by exactly the velocities the alpha run produced at every RK4
stage, so linearity-based closure identities hold to roundoff rather than
to O(dt^2); stage fields are either stored (small grids) or recomputed on
demand from the stored alpha trajectory (large grids, to bound memory).
Histories restored from disk without either fall back to linear
interpolation in time.

Internally the steppers work on raw sample arrays with real-input FFTs;
``SpectralField`` objects appear only at the API boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._fft import fft_workers
from .axisym import radial_velocity_over_r
from .grid import Grid, SpectralField, VectorField
from .norms import INF, BesovParams, LorentzParams, besov_norm, lebesgue_norm, lorentz_norm
from .operators import divergence_sup
from .partition import PartitionOfUnity, build_partition

from scipy import fft as _sfft


class CFLViolation(RuntimeError):
    def __init__(self, step: int, t: float, cfl: float, cfl_max: float):
        self.step = step
        self.t = t
        self.cfl = cfl
        super().__init__(
            f"CFL number {cfl:.3f} exceeds limit {cfl_max:.3f} at step {step} (t = {t:.4f})"
        )


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    dealias: bool = True
    integrator: str = "rk4"
    cfl_max: float = 0.5

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.integrator != "rk4":
            raise ValueError(f"unsupported integrator {self.integrator!r}")

    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    def to_json_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_end": self.t_end,
            "dealias": self.dealias,
            "integrator": self.integrator,
            "cfl_max": self.cfl_max,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SolverConfig":
        return cls(**d)


@dataclass
class DiagnosticsSeries:
    times: list = field(default_factory=list)
    channels: dict = field(default_factory=dict)

    def append(self, t: float, values: dict):
        if self.channels and set(values) != set(self.channels):
            raise ValueError("diagnostics channels changed between steps")
        self.times.append(t)
        for name, v in values.items():
            self.channels.setdefault(name, []).append(float(v))

    def channel(self, name: str) -> np.ndarray:
        return np.asarray(self.channels[name])

    def integral(self, name: str) -> np.ndarray:
        """Cumulative trapezoid of a channel against the time axis."""
        t = np.asarray(self.times)
        v = self.channel(name)
        out = np.zeros_like(v)
        if len(t) > 1:
            out[1:] = np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))
        return out

    def csv_lines(self) -> list:
        names = sorted(self.channels)
        lines = ["t," + ",".join(names)]
        for i, t in enumerate(self.times):
            row = [repr(float(t))] + [repr(self.channels[n][i]) for n in names]
            lines.append(",".join(row))
        return lines


# ---------------------------------------------------------------------------
# sample-array spectral kernels (real-input transforms)


@lru_cache(maxsize=8)
def _rfft_geometry(n: int, box_length: float):
    """Wavenumbers, inverse Laplacian, and 2/3 mask on the rfft lattice."""
    k0 = 2.0 * math.pi / box_length
    full = k0 * np.fft.fftfreq(n, d=1.0 / n)
    half = k0 * np.arange(n // 2 + 1)
    k1 = full[:, None, None]
    k2 = full[None, :, None]
    k3 = half[None, None, :]
    ksq = k1**2 + k2**2 + k3**2
    inv_ksq = np.where(ksq == 0.0, 0.0, 1.0 / np.where(ksq == 0.0, 1.0, ksq))
    cut = n // 3
    idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    keep1 = (idx < cut)[:, None, None]
    keep2 = (idx < cut)[None, :, None]
    keep3 = (np.arange(n // 2 + 1) < cut)[None, None, :]
    mask = keep1 & keep2 & keep3
    return k1, k2, k3, inv_ksq, mask


def _rfftn(a):
    return _sfft.rfftn(a, workers=fft_workers())


def _irfftn(c, n):
    return _sfft.irfftn(c, s=(n, n, n), workers=fft_workers())


def _velocity_samples(grid: Grid, alpha_s: np.ndarray) -> tuple:
    """Sample arrays of the velocity induced by alpha.

    The realized vorticity (-x2 a, x1 a, 0) is 2/3-truncated (the coordinate
    factors are not band-limited; keeping their near-Nyquist tail makes the
    divergence convention-dependent on the Nyquist planes), Leray-projected,
    and inverted spectrally.
    """
    n = grid.n
    k1, k2, k3, inv_ksq, mask = _rfft_geometry(n, grid.box_length)
    x1, x2, _x3 = grid.coordinate_arrays()
    w1 = _rfftn(-x2 * alpha_s) * mask
    w2 = _rfftn(x1 * alpha_s) * mask
    # w3 = 0 identically
    kdw = (k1 * w1 + k2 * w2) * inv_ksq
    w1 -= k1 * kdw
    w2 -= k2 * kdw
    w3 = -k3 * kdw
    # u_hat = i k x w_hat / |k|^2
    u1 = _irfftn(1j * (k2 * w3 - k3 * w2) * inv_ksq, n)
    u2 = _irfftn(1j * (k3 * w1 - k1 * w3) * inv_ksq, n)
    u3 = _irfftn(1j * (k1 * w2 - k2 * w1) * inv_ksq, n)
    return (u1, u2, u3)


def _advect_scalar(grid: Grid, u_s: tuple, f_s: np.ndarray, dealias: bool) -> np.ndarray:
    """-(u . grad) f on samples, optionally 2/3-dealiased."""
    n = grid.n
    k1, k2, k3, _inv, mask = _rfft_geometry(n, grid.box_length)
    c = _rfftn(f_s)
    out = -(
        u_s[0] * _irfftn(1j * k1 * c, n)
        + u_s[1] * _irfftn(1j * k2 * c, n)
        + u_s[2] * _irfftn(1j * k3 * c, n)
    )
    if dealias:
        out = _irfftn(_rfftn(out) * mask, n)
    return out


def _gradient_samples(grid: Grid, f_s: np.ndarray) -> tuple:
    n = grid.n
    k1, k2, k3, _inv, _m = _rfft_geometry(n, grid.box_length)
    c = _rfftn(f_s)
    return (
        _irfftn(1j * k1 * c, n),
        _irfftn(1j * k2 * c, n),
        _irfftn(1j * k3 * c, n),
    )


def _alpha_rk4_step(grid: Grid, alpha_s: np.ndarray, dt: float, dealias: bool, keep_stages: bool = True):
    """One RK4 step of the self-consistent alpha equation.

    Returns (new alpha samples, 4-tuple of stage velocity sample triples, or
    None with ``keep_stages=False``, which frees each stage velocity as soon
    as its tendency is formed — the large-grid memory path).  The byte-exact
    reproducibility of this function is what makes stage recomputation
    equivalent to stage storage.
    """
    u1 = _velocity_samples(grid, alpha_s)
    k1 = _advect_scalar(grid, u1, alpha_s, dealias)
    if not keep_stages:
        u1 = None
    a2 = alpha_s + 0.5 * dt * k1
    u2 = _velocity_samples(grid, a2)
    k2 = _advect_scalar(grid, u2, a2, dealias)
    if not keep_stages:
        u2 = None
    a3 = alpha_s + 0.5 * dt * k2
    u3 = _velocity_samples(grid, a3)
    k3 = _advect_scalar(grid, u3, a3, dealias)
    if not keep_stages:
        u3 = None
    a4 = alpha_s + dt * k3
    u4 = _velocity_samples(grid, a4)
    k4 = _advect_scalar(grid, u4, a4, dealias)
    if not keep_stages:
        u4 = None
    new = alpha_s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return new, ((u1, u2, u3, u4) if keep_stages else None)


def alpha_to_omega(alpha: SpectralField) -> VectorField:
    """Cartesian vorticity of the swirl-free field with angular component r*alpha."""
    g = alpha.grid
    x1, x2, _ = g.coordinate_arrays()
    return VectorField.from_samples(
        g, -x2 * alpha.samples, x1 * alpha.samples, np.zeros(g.shape), divergence_free=True
    )


def velocity_from_alpha(alpha: SpectralField) -> VectorField:
    return VectorField.from_samples(
        alpha.grid, *_velocity_samples(alpha.grid, alpha.samples), divergence_free=True
    )


# ---------------------------------------------------------------------------
# velocity history


class VelocityHistory:
    """Velocities of an accepted run, as sample triples per accepted time.

    Stage velocities are served from storage, from a recompute provider, or
    (last resort, for histories restored from disk) by linear interpolation
    in time between accepted snapshots.
    """

    def __init__(self, grid: Grid, dealias: bool = True):
        self.grid = grid
        self.dealias = dealias
        self.times: list = []
        self.u_samples: list = []  # triples of sample arrays
        self.stages: list = []  # per step: 4-tuple of triples
        self.stage_provider = None  # callable step -> 4-tuple of triples
        self._provider_cache = (None, None)

    def record_snapshot(self, t: float, u_s: tuple):
        self.times.append(t)
        self.u_samples.append(u_s)

    def record_stages(self, stage_fields: tuple):
        self.stages.append(stage_fields)

    def snapshot_vector(self, index: int) -> VectorField:
        return VectorField.from_samples(self.grid, *self.u_samples[index], divergence_free=True)

    def stage_samples(self, step: int) -> tuple:
        if self.stages:
            return self.stages[step]
        if self.stage_provider is not None:
            key, val = self._provider_cache
            if key != step:
                val = self.stage_provider(step)
                self._provider_cache = (step, val)
            return val
        return self._interpolated_stages(step)

    def _samples_at(self, t: float) -> tuple:
        times = self.times
        if t <= times[0]:
            return self.u_samples[0]
        if t >= times[-1]:
            return self.u_samples[-1]
        i = int(np.searchsorted(times, t, side="right")) - 1
        t0, t1 = times[i], times[i + 1]
        w = (t - t0) / (t1 - t0)
        a, b = self.u_samples[i], self.u_samples[i + 1]
        return tuple((1 - w) * x + w * y for x, y in zip(a, b))

    def velocity_at(self, t: float) -> VectorField:
        return VectorField.from_samples(self.grid, *self._samples_at(t), divergence_free=True)

    def _interpolated_stages(self, step: int) -> tuple:
        t0, t1 = self.times[step], self.times[step + 1]
        mid = self._samples_at(0.5 * (t0 + t1))
        return (self.u_samples[step], mid, mid, self.u_samples[step + 1])


# ---------------------------------------------------------------------------
# the alpha run


@dataclass
class EulerState:
    t: float
    alpha: SpectralField
    u: VectorField


@dataclass
class EulerRun:
    grid: Grid
    cfg: SolverConfig
    times: list
    alphas: list  # SpectralField per accepted time (may hold only endpoints)
    history: VelocityHistory
    diagnostics: DiagnosticsSeries
    profile_params: dict = field(default_factory=dict)

    def omega_at(self, index: int) -> VectorField:
        return alpha_to_omega(self.alphas[index])


DEFAULT_CHANNELS = (
    "alpha_L1",
    "alpha_L2",
    "alpha_Linf",
    "alpha_L31",
    "energy",
    "omega_inf",
    "u_inf",
    "grad_u_inf",
)
HEAVY_CHANNELS = ("omega_Binf1", "u_B1inf1", "ur_over_r_inf")


def _grad_sup(u: VectorField) -> float:
    sq = np.zeros(u.grid.shape)
    for comp in u.components:
        for d in _gradient_samples(u.grid, comp.samples):
            sq += d**2
    return float(np.sqrt(np.max(sq)))


def _diagnostics_values(alpha: SpectralField, u: VectorField, channels, pu: PartitionOfUnity) -> dict:
    vals = {}
    for ch in channels:
        if ch == "alpha_L1":
            vals[ch] = lebesgue_norm(alpha, 1.0)
        elif ch == "alpha_L2":
            vals[ch] = lebesgue_norm(alpha, 2.0)
        elif ch == "alpha_Linf":
            vals[ch] = lebesgue_norm(alpha, INF)
        elif ch == "alpha_L31":
            vals[ch] = lorentz_norm(alpha, LorentzParams(3.0, 1.0))
        elif ch == "energy":
            vals[ch] = math.sqrt(sum(lebesgue_norm(c, 2.0) ** 2 for c in u.components))
        elif ch == "omega_inf":
            vals[ch] = alpha_to_omega(alpha).sup_norm()
        elif ch == "u_inf":
            vals[ch] = u.sup_norm()
        elif ch == "grad_u_inf":
            vals[ch] = _grad_sup(u)
        elif ch == "omega_Binf1":
            vals[ch] = besov_norm(alpha_to_omega(alpha), BesovParams(0.0, INF, 1.0), pu)
        elif ch == "u_B1inf1":
            vals[ch] = besov_norm(u, BesovParams(1.0, INF, 1.0), pu)
        elif ch == "ur_over_r_inf":
            vals[ch] = float(np.max(np.abs(radial_velocity_over_r(u).samples)))
        else:
            raise KeyError(f"unknown diagnostics channel {ch!r}")
    return vals


def evolve(
    alpha0: SpectralField,
    cfg: SolverConfig,
    channels=DEFAULT_CHANNELS,
    pu: PartitionOfUnity | None = None,
    profile_params: dict | None = None,
    store_fields: bool = True,
    store_stages: bool | None = None,
    store_velocities: bool | None = None,
) -> EulerRun:
    """Advance the advected scalar with self-consistent RK4 and record diagnostics.

    ``store_stages`` defaults to True on small grids (n <= 64); on larger
    grids stage velocities are recomputed from the stored alpha trajectory
    when a companion solve asks for them (requires ``store_fields``).
    ``store_velocities`` (default: follow ``store_fields``) controls whether
    per-step velocity snapshots are retained; diagnostics-only large-grid
    runs turn both off to keep memory flat.
    """
    if pu is None:
        pu = build_partition()
    grid = alpha0.grid
    if store_stages is None:
        store_stages = grid.n <= 64
    if store_velocities is None:
        store_velocities = store_fields
    history = VelocityHistory(grid, dealias=cfg.dealias)
    diagnostics = DiagnosticsSeries()
    alpha_s = np.array(alpha0.samples)
    u_s = _velocity_samples(grid, alpha_s)
    if store_velocities:
        history.record_snapshot(0.0, u_s)
    diagnostics.append(
        0.0,
        _diagnostics_values(
            SpectralField(grid, alpha_s), VectorField.from_samples(grid, *u_s), channels, pu
        ),
    )
    times = [0.0]
    alphas = [SpectralField(grid, alpha_s)]
    alpha_samples_per_step = [alpha_s]

    n_steps = cfg.n_steps()
    dt = cfg.t_end / n_steps
    for step in range(n_steps):
        t = step * dt
        sup = float(np.sqrt(np.max(u_s[0] ** 2 + u_s[1] ** 2 + u_s[2] ** 2)))
        cfl = dt * sup / grid.spacing
        if cfl > cfg.cfl_max:
            raise CFLViolation(step, t, cfl, cfg.cfl_max)
        alpha_s, stages = _alpha_rk4_step(grid, alpha_s, dt, cfg.dealias, keep_stages=store_stages)
        u_s = _velocity_samples(grid, alpha_s)
        if store_stages:
            history.record_stages(stages)
        if store_velocities:
            history.record_snapshot((step + 1) * dt, u_s)
        diagnostics.append(
            (step + 1) * dt,
            _diagnostics_values(
                SpectralField(grid, alpha_s), VectorField.from_samples(grid, *u_s), channels, pu
            ),
        )
        times.append((step + 1) * dt)
        if store_fields:
            alphas.append(SpectralField(grid, alpha_s))
            alpha_samples_per_step.append(alpha_s)

    if not store_fields:
        alphas.append(SpectralField(grid, alpha_s))  # endpoints only
    elif not store_stages:

        def provider(step, _samples=alpha_samples_per_step, _g=grid, _dt=dt, _da=cfg.dealias):
            return _alpha_rk4_step(_g, _samples[step], _dt, _da)[1]

        history.stage_provider = provider

    return EulerRun(
        grid=grid,
        cfg=cfg,
        times=times,
        alphas=alphas,
        history=history,
        diagnostics=diagnostics,
        profile_params=dict(profile_params or {}),
    )


# ---------------------------------------------------------------------------
# linear companion solves driven by a velocity history


class _Passenger:
    """A field evolved linearly under the history's velocity: transport
    (optionally plus stretching) of a list of component sample arrays."""

    __slots__ = ("components", "stretch")

    def __init__(self, components: list, stretch: bool):
        self.components = [np.array(c) for c in components]
        self.stretch = stretch


def _passenger_rhs(grid: Grid, u_s: tuple, grads: tuple | None, p: _Passenger, dealias: bool) -> list:
    n = grid.n
    k1, k2, k3, _inv, mask = _rfft_geometry(n, grid.box_length)
    out = []
    for i, comp in enumerate(p.components):
        c = _rfftn(comp)
        rhs = -(
            u_s[0] * _irfftn(1j * k1 * c, n)
            + u_s[1] * _irfftn(1j * k2 * c, n)
            + u_s[2] * _irfftn(1j * k3 * c, n)
        )
        if p.stretch:
            du = grads[i]  # gradient of u component i
            rhs += p.components[0] * du[0] + p.components[1] * du[1] + p.components[2] * du[2]
        if dealias:
            rhs = _irfftn(_rfftn(rhs) * mask, n)
        out.append(rhs)
    return out


def _replay(history: VelocityHistory, passengers: list, cfg: SolverConfig, callback) -> None:
    """Drive the passengers through the history's time grid with shared stages.

    ``callback(index, t)`` fires after every accepted time (including 0) with
    the passengers holding their current states.
    """
    grid = history.grid
    need_grads = any(p.stretch for p in passengers)
    n_hist = len(history.times) - 1
    n_steps = min(n_hist, cfg.n_steps())
    dt = (history.times[-1] - history.times[0]) / max(n_hist, 1)
    callback(0, history.times[0])
    for step in range(n_steps):
        stage_u = history.stage_samples(step)
        stage_grads = None
        if need_grads:
            stage_grads = [
                tuple(_gradient_samples(grid, u_s[i]) for i in range(3)) for u_s in stage_u
            ]
        for p in passengers:
            w0 = p.components
            g1 = stage_grads[0] if need_grads else None
            k1 = _passenger_rhs(grid, stage_u[0], g1, p, cfg.dealias)
            p.components = [a + 0.5 * dt * b for a, b in zip(w0, k1)]
            k2 = _passenger_rhs(grid, stage_u[1], stage_grads[1] if need_grads else None, p, cfg.dealias)
            p.components = [a + 0.5 * dt * b for a, b in zip(w0, k2)]
            k3 = _passenger_rhs(grid, stage_u[2], stage_grads[2] if need_grads else None, p, cfg.dealias)
            p.components = [a + dt * b for a, b in zip(w0, k3)]
            k4 = _passenger_rhs(grid, stage_u[3], stage_grads[3] if need_grads else None, p, cfg.dealias)
            p.components = [
                a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
                for a, b1, b2, b3, b4 in zip(w0, k1, k2, k3, k4)
            ]
        callback(step + 1, history.times[step + 1])


def evolve_vorticity_model(
    history: VelocityHistory, omega0: VectorField, cfg: SolverConfig, callback=None
) -> list:
    """General vorticity model (transport plus stretching under a frozen velocity).

    Returns the full trajectory, or — when ``callback`` is given — streams
    each accepted state to it and returns an empty list, keeping the memory
    footprint flat on large grids.
    """
    if omega0.grid != history.grid:
        raise ValueError("omega0 grid does not match the velocity history grid")
    u0 = history.snapshot_vector(0)
    sup = u0.sup_norm()
    if sup > 0 and divergence_sup(u0) > 1e-6 * sup:
        raise ValueError("velocity history is not divergence-free")
    p = _Passenger([c.samples for c in omega0.components], stretch=True)
    out = []

    def cb(index, t):
        w = VectorField.from_samples(
            history.grid, *[np.array(c) for c in p.components],
            divergence_free=omega0.divergence_free,
        )
        if callback is None:
            out.append(w)
        else:
            callback(w)

    _replay(history, [p], cfg, cb)
    return out


def evolve_passive_scalar(history: VelocityHistory, f0: SpectralField, cfg: SolverConfig) -> list:
    p = _Passenger([f0.samples], stretch=False)
    out = []

    def cb(index, t):
        out.append(SpectralField(history.grid, np.array(p.components[0])))

    _replay(history, [p], cfg, cb)
    return out


# ---------------------------------------------------------------------------
# tilde family


@dataclass
class TildeFamilyTrajectory:
    times: list
    initial_block_sup: dict  # q -> ||Delta_q omega_0||_inf
    skipped: list  # degenerate q values
    reconstruction_residuals: list  # relative sup-norm of omega - sum_q per time
    block_sup_series: dict  # q -> list of ||tilde-omega_q(t)||_inf
    interaction_matrices: dict  # time index -> {(j, q): ||Delta_j tilde-omega_q||_inf}
    final_blocks: dict  # q -> VectorField at the final time
    blocks: dict | None = None  # q -> full trajectory (kept on small grids only)


def evolve_tilde_family(
    run: EulerRun,
    pu: PartitionOfUnity | None = None,
    cfg: SolverConfig | None = None,
    matrix_times: list | None = None,
    keep_fields: bool | None = None,
) -> TildeFamilyTrajectory:
    """One linear transport-stretching solve per dyadic block of omega_0.

    All blocks ride through a single time loop sharing each step's stage
    velocities; per-time family diagnostics (reconstruction residual, block
    sups, and — at ``matrix_times`` — the full block-interaction matrix) are
    computed on the fly so nothing but the current states is retained.
    """
    from .blocks import delta_q as _dq

    if pu is None:
        pu = build_partition()
    if cfg is None:
        cfg = run.cfg
    if len(run.alphas) != len(run.times):
        raise ValueError("tilde family needs a run with stored fields (store_fields=True)")
    grid = run.grid
    if keep_fields is None:
        keep_fields = grid.n <= 64
    if matrix_times is None:
        matrix_times = [run.times[0], run.times[-1]]
    matrix_indices = {int(np.argmin(np.abs(np.asarray(run.times) - t))) for t in matrix_times}

    omega0 = run.omega_at(0)
    scale = max(omega0.sup_norm(), 1e-300)
    passengers = {}
    initial_sup = {}
    skipped = []
    for q in range(-1, grid.q_max + 1):
        comps = [_dq(c, q, pu).samples for c in omega0.components]
        sup = float(np.sqrt(np.max(comps[0] ** 2 + comps[1] ** 2 + comps[2] ** 2)))
        if sup < 1e-14 * scale:
            skipped.append(q)
            continue
        initial_sup[q] = sup
        passengers[q] = _Passenger(comps, stretch=True)

    residuals = []
    sup_series = {q: [] for q in passengers}
    matrices = {}
    kept = {q: [] for q in passengers} if keep_fields else None

    def cb(index, t):
        target = run.omega_at(index)
        total = [np.zeros(grid.shape) for _ in range(3)]
        for q, p in passengers.items():
            for i in range(3):
                total[i] += p.components[i]
            sup_series[q].append(
                float(np.sqrt(np.max(p.components[0] ** 2 + p.components[1] ** 2 + p.components[2] ** 2)))
            )
            if kept is not None:
                kept[q].append(
                    VectorField.from_samples(grid, *[np.array(c) for c in p.components])
                )
        tscale = max(target.sup_norm(), 1e-300)
        gap = max(
            float(np.max(np.abs(total[i] - target.components[i].samples))) for i in range(3)
        )
        residuals.append(gap / tscale)
        if index in matrix_indices:
            m = {}
            for q, p in passengers.items():
                w = VectorField.from_samples(grid, *p.components)
                for j in range(-1, grid.q_max + 1):
                    bj = VectorField([_dq(c, j, pu) for c in w.components])
                    m[(j, q)] = bj.sup_norm()
            matrices[index] = m

    _replay(run.history, list(passengers.values()), cfg, cb)
    final = {
        q: VectorField.from_samples(grid, *[np.array(c) for c in p.components])
        for q, p in passengers.items()
    }
    return TildeFamilyTrajectory(
        times=list(run.times),
        initial_block_sup=initial_sup,
        skipped=skipped,
        reconstruction_residuals=residuals,
        block_sup_series=sup_series,
        interaction_matrices=matrices,
        final_blocks=final,
        blocks=kept,
    )


DECAY_FLOOR = -60.0


@dataclass
class BlockDecayReport:
    times: list
    matrices: list  # per time: dict (j, q) -> m(j, q) = log2 ratio (floored)
    envelopes: list  # b(t) = max over (j, q) of m + |j - q|
    u_integrals: list  # U(t) at the report times (trapezoid of the u_B1inf1 channel)
    excluded: list


def block_decay_report(
    family: TildeFamilyTrajectory, run: EulerRun, report_times: list
) -> BlockDecayReport:
    """Normalized block-interaction decay m(j,q) and its envelope offsets b(t)."""
    if "u_B1inf1" in run.diagnostics.channels:
        u_cum = run.diagnostics.integral("u_B1inf1")
    else:
        u_cum = np.zeros(len(run.times))
    matrices = []
    envelopes = []
    u_vals = []
    for t in report_times:
        idx = int(np.argmin(np.abs(np.asarray(family.times) - t)))
        if idx not in family.interaction_matrices:
            raise KeyError(
                f"no interaction matrix recorded near t = {t}; pass matrix_times to evolve_tilde_family"
            )
        inter = family.interaction_matrices[idx]
        m = {}
        env = -math.inf
        for (j, q), val in inter.items():
            base = family.initial_block_sup[q]
            mval = math.log2(val / base) if val > 0 else DECAY_FLOOR
            mval = max(mval, DECAY_FLOOR)
            m[(j, q)] = mval
            if mval > DECAY_FLOOR:
                env = max(env, mval + abs(j - q))
        matrices.append(m)
        envelopes.append(env)
        u_vals.append(float(u_cum[idx]))
    return BlockDecayReport(
        times=list(report_times),
        matrices=matrices,
        envelopes=envelopes,
        u_integrals=u_vals,
        excluded=list(family.skipped),
    )


# ---------------------------------------------------------------------------
# transport estimate audit


def _admissible(s: float, r: float) -> str:
    """Which exponent functional applies: 'U1' (interior) or 'U' (endpoints)."""
    if -1.0 < s < 1.0:
        return "U1"
    if (s == -1.0 and math.isinf(r)) or (s == 1.0 and r == 1.0):
        return "U"
    raise ValueError(
        f"inadmissible regularity (s={s}, r={r}): need -1 < s < 1, or the "
        f"endpoint pairs (-1, inf) / (1, 1)"
    )


def fit_gronwall_constant(ratios: np.ndarray, exponents: np.ndarray) -> float:
    """Smallest C >= 0 with ratio_t <= C * exp(C * exponent_t) for all t (bisection)."""
    ratios = np.asarray(ratios)
    exponents = np.asarray(exponents)

    def ok(c):
        return bool(np.all(ratios <= c * np.exp(c * exponents)))

    hi = 1.0
    while not ok(hi):
        hi *= 2.0
        if hi > 1e12:
            return math.inf
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def transport_estimate_audit(
    history: VelocityHistory,
    f0: SpectralField,
    bp: BesovParams,
    cfg: SolverConfig,
    pu: PartitionOfUnity | None = None,
) -> dict:
    """Evolve a passive scalar and fit the Gronwall constant of its Besov growth."""
    if pu is None:
        pu = build_partition()
    kind = _admissible(bp.s, bp.r)
    fields = evolve_passive_scalar(history, f0, cfg)
    times = np.asarray(history.times)
    norms = np.array([besov_norm(f, bp, pu) for f in fields])
    base = norms[0]
    if base == 0.0:
        raise ValueError("initial datum has zero norm")

    if kind == "U1":
        rate = np.array(
            [_grad_sup(history.snapshot_vector(i)) for i in range(len(times))]
        )
    else:
        rate = np.array(
            [
                besov_norm(history.snapshot_vector(i), BesovParams(1.0, INF, 1.0), pu)
                for i in range(len(times))
            ]
        )
    exponent = np.zeros(len(times))
    if len(times) > 1:
        exponent[1:] = np.cumsum(0.5 * (rate[1:] + rate[:-1]) * np.diff(times))
    c = fit_gronwall_constant(norms / base, exponent)
    return {
        "fitted_C": c,
        "exponent_kind": kind,
        "norms": norms,
        "exponent": exponent,
        "times": times,
    }
