"""Experiment registry, scenario configuration, and plot-data emission.

A scenario (JSON, schema-versioned) names a grid, a meridian profile, solver
settings, and a list of registered experiment keys.  ``run_scenario`` executes
the experiments in order, persists every artifact under the scenario output
directory, and returns one report per experiment.  All randomness derives from
the scenario seed and all floats are serialized via ``repr``, so repeated runs
are byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as pio
from .axisym import (
    biot_savart,
    build_profile,
    check_axisymmetry,
    radial_velocity_over_r,
    random_axisym,
    realize,
    realize_alpha,
    swirl_free_vorticity_over_r,
)
from .blocks import bernstein_ratio, decompose
from .dynamics import (
    DEFAULT_CHANNELS,
    HEAVY_CHANNELS,
    SolverConfig,
    alpha_to_omega,
    block_decay_report,
    evolve,
    evolve_tilde_family,
    evolve_vorticity_model,
    fit_gronwall_constant,
    transport_estimate_audit,
    velocity_from_alpha,
)
from .grid import Grid, SpectralField, VectorField, random_band_limited, random_wave_packet
from .norms import (
    INF,
    BesovParams,
    LorentzParams,
    dilation_ratio,
    embedding_ratio,
    lebesgue_norm,
    lorentz_norm,
)
from .operators import curl, divergence_sup, leray_project
from .paraproduct import bony_split, paraproduct_summand_localization
from .partition import build_partition

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# scenario and report types


@dataclass
class Scenario:
    name: str
    grid: dict = field(default_factory=lambda: {"n": 32, "box_length": 2.0 * math.pi})
    profile: dict = field(default_factory=lambda: {"name": "gaussian_ring", "params": {}})
    solver: dict = field(default_factory=lambda: {"dt": 0.05, "t_end": 0.2})
    experiments: list = field(default_factory=list)
    output_dir: str = "runs/out"
    seed: int = 0
    options: dict = field(default_factory=dict)  # per-experiment overrides

    def __post_init__(self):
        for key in self.experiments:
            if key not in REGISTRY:
                raise KeyError(f"unknown experiment key {key!r}; available: {sorted(REGISTRY)}")

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "grid": self.grid,
            "profile": self.profile,
            "solver": self.solver,
            "experiments": list(self.experiments),
            "output_dir": str(self.output_dir),
            "seed": self.seed,
            "options": self.options,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        version = d.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported scenario schema version {version!r}")
        return cls(**d)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass
class ExperimentReport:
    key: str
    fitted_constants: dict = field(default_factory=dict)
    pass_flags: dict = field(default_factory=dict)
    artifact_paths: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.pass_flags.values())

    def to_json_dict(self) -> dict:
        return {
            "key": self.key,
            "fitted_constants": {k: repr(float(v)) for k, v in sorted(self.fitted_constants.items())},
            "pass_flags": {k: bool(v) for k, v in sorted(self.pass_flags.items())},
            "artifact_paths": [str(p) for p in self.artifact_paths],
        }


# ---------------------------------------------------------------------------
# shared per-scenario context


class _Context:
    """Caches the expensive shared resources of one scenario run."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.out = Path(scenario.output_dir)
        self.pu = build_partition()
        self._grid = None
        self._run = None

    @property
    def grid(self) -> Grid:
        if self._grid is None:
            self._grid = Grid(**self.scenario.grid)
        return self._grid

    def opts(self, key: str) -> dict:
        return self.scenario.options.get(key, {})

    def rng(self, key: str) -> np.random.Generator:
        return np.random.default_rng([self.scenario.seed, sorted(REGISTRY).index(key)])

    def profile(self):
        p = self.scenario.profile
        return build_profile(p["name"], p.get("params", {}))

    def solver_config(self, **overrides) -> SolverConfig:
        d = dict(self.scenario.solver)
        d.update(overrides)
        return SolverConfig.from_json_dict(d)

    def run(self, channels=None, store_fields=True):
        """The scenario's Euler run (profile + grid + solver), computed once."""
        if self._run is None:
            alpha0 = realize_alpha(self.profile(), self.grid, structure_tol=0.05)
            self._run = evolve(
                alpha0,
                self.solver_config(),
                channels=channels or DEFAULT_CHANNELS + HEAVY_CHANNELS,
                pu=self.pu,
                profile_params=self.scenario.profile,
                store_fields=store_fields,
            )
        return self._run

    def artifact_dir(self, key: str) -> Path:
        d = self.out / key
        d.mkdir(parents=True, exist_ok=True)
        return d


def _write_csv(path: Path, header: list, rows: list) -> Path:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, (int, float, np.floating)) else str(v) for v in row) + "\n")
    return path


def _write_report(ctx: _Context, report: ExperimentReport) -> None:
    path = ctx.artifact_dir(report.key) / "report.json"
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    report.artifact_paths.append(path)


def _log_least_squares(x: np.ndarray, y: np.ndarray) -> tuple:
    """Slope/intercept/residual of a least-squares line through (x, log y)."""
    ly = np.log(np.maximum(y, 1e-300))
    coeffs, res, _, _ = np.linalg.lstsq(np.column_stack([x, np.ones_like(x)]), ly, rcond=None)
    residual = float(res[0]) if len(res) else 0.0
    return float(coeffs[0]), float(coeffs[1]), residual


def _profile_corpus(rng_seedable_key: str, ctx: _Context, count: int) -> list:
    """Named profiles plus seeded random ones, a deterministic flow corpus."""
    corpus = [build_profile("gaussian_ring"), build_profile("dipole")]
    base = 1000 * ctx.scenario.seed
    for i in range(count - len(corpus)):
        corpus.append(random_axisym(seed=base + i))
    return corpus[:count]


# ---------------------------------------------------------------------------
# experiments


def _partition_audit(ctx: _Context) -> ExperimentReport:
    pu = ctx.pu
    rho = np.linspace(0.0, 16.0, 20001)
    chi = pu.chi(rho)
    # chi(rho) + sum_q phi(rho / 2^q) telescopes to 1 for every rho >= 0
    total = pu.partial_sum(rho, 7)
    violation = float(np.max(np.abs(total - 1.0)))
    support_ok = (
        float(np.max(np.abs(chi[rho > pu.support_chi]))) == 0.0
        and float(np.max(np.abs(pu.phi(rho)[(rho < pu.support_phi[0]) | (rho > pu.support_phi[1])]))) == 0.0
    )
    rows = [(r, c, p) for r, c, p in zip(rho[::100], chi[::100], pu.phi(rho[::100]))]
    art = _write_csv(ctx.artifact_dir("partition_audit") / "profiles.csv", ["rho", "chi", "phi"], rows)
    report = ExperimentReport(
        key="partition_audit",
        fitted_constants={"max_identity_violation": violation},
        pass_flags={"identity_1e-12": violation <= 1e-12, "supports_exact": support_ok},
        artifact_paths=[art],
    )
    return report


def _bernstein_sweep(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("bernstein_sweep")
    grid = Grid(opts.get("n", ctx.grid.n), ctx.grid.box_length, 3)
    rng = ctx.rng("bernstein_sweep")
    n_fields = opts.get("n_fields", 5)
    pairs = ((INF, INF), (2.0, INF))
    qs = list(range(0, grid.q_max))
    observed = {pair: {q: 0.0 for q in qs} for pair in pairs}
    for q in qs:
        for _ in range(n_fields):
            # packets saturate the mixed inequality; random spectra do not
            f = random_wave_packet(grid, q, rng)
            for a, b in pairs:
                r = bernstein_ratio(f, q, 1, a, b, ctx.pu)
                val = r.same_exponent if a == b else r.mixed
                observed[(a, b)][q] = max(observed[(a, b)][q], val)
    rows = [(q, observed[(INF, INF)][q], observed[(2.0, INF)][q]) for q in qs]
    art = _write_csv(
        ctx.artifact_dir("bernstein_sweep") / "ratios.csv", ["q", "inf_inf", "two_inf"], rows
    )
    constants = {}
    flags = {}
    for (a, b), per_q in observed.items():
        vals = np.array([per_q[q] for q in qs])
        spread = float(vals.max() / vals.min())
        tag = f"{'inf' if a == INF else int(a)}_{'inf' if b == INF else int(b)}"
        constants[f"spread_{tag}"] = spread
        constants[f"max_{tag}"] = float(vals.max())
        flags[f"factor4_{tag}"] = spread <= 4.0
    return ExperimentReport("bernstein_sweep", constants, flags, [art])


def _bony_audit(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("bony_audit")
    grid = Grid(opts.get("n", ctx.grid.n), ctx.grid.box_length, 3)
    rng = ctx.rng("bony_audit")
    n_pairs = opts.get("n_pairs", 10)
    worst = 0.0
    for _ in range(n_pairs):
        u = random_band_limited(grid, rng)
        v = random_band_limited(grid, rng)
        worst = max(worst, bony_split(u, v, ctx.pu).residual())
    leak = 0.0
    f = random_band_limited(grid, rng)
    g = random_band_limited(grid, rng)
    q_hi = grid.q_max - 2
    for q in range(1, q_hi + 1):
        leak = max(leak, paraproduct_summand_localization(f, g, q, ctx.pu))
    art = _write_csv(
        ctx.artifact_dir("bony_audit") / "residuals.csv",
        ["max_split_residual", "max_localization_leak"],
        [(worst, leak)],
    )
    return ExperimentReport(
        "bony_audit",
        {"max_split_residual": worst, "max_localization_leak": leak},
        {"split_1e-10": worst <= 1e-10, "localization_1e-10": leak <= 1e-10},
        [art],
    )


def _indicator_field(grid: Grid, m: int, rng) -> SpectralField:
    flat = np.zeros(grid.n**grid.dim)
    idx = rng.choice(flat.size, size=m, replace=False)
    flat[idx] = 1.0
    return SpectralField(grid, flat.reshape(grid.shape))


def _lorentz_suite(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("lorentz_suite")
    grid = Grid(opts.get("n", ctx.grid.n), ctx.grid.box_length, 3)
    rng = ctx.rng("lorentz_suite")
    cell = grid.cell_volume
    triples = [
        (p, q, m)
        for p in (1.0, 2.0, 3.0, 4.0)
        for q, m in ((1.0, 5), (2.0, 64), (3.0, 1000))
    ]
    worst_indicator = 0.0
    rows = []
    for p, q, m in triples:
        f = _indicator_field(grid, m, rng)
        measured = lorentz_norm(f, LorentzParams(p, q))
        expected = (p / q) ** (1.0 / q) * (m * cell) ** (1.0 / p)
        gap = abs(measured - expected) / expected
        worst_indicator = max(worst_indicator, gap)
        rows.append((p, q, m, measured, expected, gap))
    worst_diag = 0.0
    for p in (1.0, 2.0, 3.0, 4.0):
        f = random_band_limited(grid, rng)
        lpp = lorentz_norm(f, LorentzParams(p, p))
        lp = lebesgue_norm(f, p)
        worst_diag = max(worst_diag, abs(lpp - lp) / lp)
    # product inequality: ||f g||_{L^{3/2,1}} <= C ||f||_{L^{3,1}} ||g||_{L^{3,inf}}
    n_pairs = opts.get("n_pairs", 50)
    fitted = 0.0
    for _ in range(n_pairs):
        f = random_band_limited(grid, rng)
        g = random_band_limited(grid, rng)
        num = lorentz_norm(f.pointwise_product(g), LorentzParams(1.5, 1.0))
        den = lorentz_norm(f, LorentzParams(3.0, 1.0)) * lorentz_norm(g, LorentzParams(3.0, INF))
        if den > 0:
            fitted = max(fitted, num / den)
    art = _write_csv(
        ctx.artifact_dir("lorentz_suite") / "indicator.csv",
        ["p", "q", "m", "measured", "expected", "relative_gap"],
        rows,
    )
    return ExperimentReport(
        "lorentz_suite",
        {
            "max_indicator_gap": worst_indicator,
            "max_diagonal_gap": worst_diag,
            "product_fitted_C": fitted,
        },
        {
            "indicator_1e-6": worst_indicator <= 1e-6,
            "diagonal_1e-8": worst_diag <= 1e-8,
            "product_C_le_1": fitted <= 1.0 + 1e-8,
        },
        [art],
    )


def _embedding_sweep(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("embedding_sweep")
    grid = Grid(opts.get("n", ctx.grid.n), ctx.grid.box_length, 3)
    corpus = _profile_corpus("embedding_sweep", ctx, opts.get("n_flows", 4))
    ps = opts.get("p_values", (2.0, 2.5))
    rows = []
    worst = 0.0
    for i, prof in enumerate(corpus):
        u = realize(prof, grid)
        for p in ps:
            ratio = embedding_ratio(u, p, ctx.pu)
            worst = max(worst, ratio)
            rows.append((i, p, ratio))
    art = _write_csv(ctx.artifact_dir("embedding_sweep") / "ratios.csv", ["flow", "p", "ratio"], rows)
    return ExperimentReport(
        "embedding_sweep",
        {"fitted_C": worst},
        {"ratio_finite": math.isfinite(worst) and worst > 0.0},
        [art],
    )


def _geometry_audit(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("geometry_audit")
    grid = Grid(opts.get("n", ctx.grid.n), ctx.grid.box_length, 3)
    tol = opts.get("tol", 1e-8)
    corpus = _profile_corpus("geometry_audit", ctx, opts.get("n_flows", 3))
    rows = []
    field_worst = curl_worst = block_worst = roundtrip_worst = 0.0
    for i, prof in enumerate(corpus):
        u = realize(prof, grid)
        report = check_axisymmetry(u, ctx.pu, check_blocks=True)
        field_worst = max(field_worst, report.max_field_violation())
        curl_worst = max(curl_worst, report.max_curl_violation())
        block_worst = max(block_worst, report.max_block_violation())
        # omega -> u -> curl closes spectrally; the residual is pure roundoff
        omega = leray_project(curl(u))
        u_rec = biot_savart(omega)
        gap = (curl(u_rec) - omega).sup_norm() / omega.sup_norm()
        roundtrip_worst = max(roundtrip_worst, gap)
        rows.append((i, report.max_field_violation(), report.max_curl_violation(),
                     report.max_block_violation(), gap))
    art = _write_csv(
        ctx.artifact_dir("geometry_audit") / "violations.csv",
        ["flow", "field", "curl", "blocks", "biot_savart_roundtrip"],
        rows,
    )
    return ExperimentReport(
        "geometry_audit",
        {
            "max_field_violation": field_worst,
            "max_curl_violation": curl_worst,
            "max_block_violation": block_worst,
            "max_roundtrip_gap": roundtrip_worst,
        },
        {
            "field_checks": field_worst <= tol,
            "curl_checks": curl_worst <= tol,
            "block_checks": block_worst <= tol,
            "roundtrip_1e-9": roundtrip_worst <= 1e-9,
        },
        [art],
    )


def _model_v_suite(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("model_v_suite")
    run = ctx.run()
    grid = run.grid
    rng = ctx.rng("model_v_suite")
    cfg = ctx.solver_config(t_end=opts.get("t_end", run.cfg.t_end))
    tol = opts.get("tol", 1e-6)
    # band-limited so products stay alias-free; the preservation is then exact
    k_max = grid.k_fundamental * grid.n / 6.0
    comps = [random_band_limited(grid, rng, k_max=k_max) for _ in range(3)]
    om0 = leray_project(VectorField(comps))
    # both solves are streamed: keeping the trajectories would scale the
    # footprint with the number of steps on large grids
    worst = {"div": 0.0, "ang": 0.0}

    def on_div(w):
        worst["div"] = max(worst["div"], divergence_sup(w) / max(w.sup_norm(), 1e-300))

    evolve_vorticity_model(run.history, om0, cfg, callback=on_div)
    # angular initial data: Omega_0 x e_theta = 0
    om_ang = alpha_to_omega(run.alphas[0])
    x1, x2, _ = grid.coordinate_arrays()

    def on_ang(w):
        w1, w2, w3 = w.sample_arrays()
        bad = max(np.max(np.abs(x1 * w1 + x2 * w2)), np.max(np.abs(w3)))
        worst["ang"] = max(worst["ang"], bad / max(w.sup_norm(), 1e-300))

    evolve_vorticity_model(run.history, om_ang, cfg, callback=on_ang)
    div_worst, ang_worst = worst["div"], worst["ang"]
    art = _write_csv(
        ctx.artifact_dir("model_v_suite") / "preservation.csv",
        ["max_relative_divergence", "max_relative_nonangular"],
        [(div_worst, ang_worst)],
    )
    return ExperimentReport(
        "model_v_suite",
        {"max_relative_divergence": div_worst, "max_relative_nonangular": ang_worst},
        {"divergence_preserved": div_worst <= tol, "angular_preserved": ang_worst <= tol},
        [art],
    )


def _drifts(run) -> dict:
    out = {}
    for ch in ("alpha_L2", "alpha_Linf", "alpha_L31", "energy"):
        series = run.diagnostics.channel(ch)
        out[ch] = float(np.max(np.abs(series - series[0])) / abs(series[0]))
    return out


def _conservation_run(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("conservation_run")
    run = ctx.run()
    drifts = _drifts(run)
    constants = {f"drift_{k}": v for k, v in drifts.items()}
    flags = {f"{k}_within_1pct": v <= 0.01 for k, v in drifts.items()}
    arts = []
    refined_n = opts.get("refined_n")
    if refined_n:
        fine = Grid(refined_n, ctx.grid.box_length, 3)
        alpha0 = realize_alpha(ctx.profile(), fine, structure_tol=0.05)
        fine_run = evolve(
            alpha0,
            ctx.solver_config(dt=opts.get("refined_dt", run.cfg.dt)),
            channels=DEFAULT_CHANNELS,
            pu=ctx.pu,
            store_fields=False,
        )
        fine_drifts = _drifts(fine_run)
        for k, v in fine_drifts.items():
            constants[f"refined_drift_{k}"] = v
            flags[f"{k}_refined_smaller"] = v < drifts[k]
        arts.append(
            _write_csv(
                ctx.artifact_dir("conservation_run") / "refined_diagnostics.csv",
                ["line"],
                [(line,) for line in fine_run.diagnostics.csv_lines()],
            )
        )
    run_dir = ctx.artifact_dir("conservation_run") / "run"
    pio.save_run(run_dir, run)
    arts.append(run_dir / "diagnostics.csv")
    return ExperimentReport("conservation_run", constants, flags, arts)


def _biot_savart_bound(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("biot_savart_bound")
    n_flows = opts.get("n_flows", 10)
    n_coarse = opts.get("n", 64)
    n_fine = opts.get("refined_n", 2 * n_coarse)
    corpus = _profile_corpus("biot_savart_bound", ctx, n_flows)

    def ratio(prof, n):
        g = Grid(n, ctx.grid.box_length, 3)
        u = realize(prof, g)
        alpha = swirl_free_vorticity_over_r(curl(u), structure_tol=0.05)
        num = float(np.max(np.abs(radial_velocity_over_r(u).samples)))
        den = lorentz_norm(alpha, LorentzParams(3.0, 1.0))
        return num / den

    rows = []
    worst = stability = 0.0
    for i, prof in enumerate(corpus):
        coarse = ratio(prof, n_coarse)
        fine = ratio(prof, n_fine)
        rows.append((i, coarse, fine, fine / coarse))
        worst = max(worst, coarse, fine)
        stability = max(stability, fine / coarse, coarse / fine)
    art = _write_csv(
        ctx.artifact_dir("biot_savart_bound") / "ratios.csv",
        ["flow", "coarse", "fine", "refinement_ratio"],
        rows,
    )
    return ExperimentReport(
        "biot_savart_bound",
        {"fitted_C": worst, "max_refinement_ratio": stability},
        {"bounded": math.isfinite(worst), "refinement_factor2": stability <= 2.0},
        [art],
    )


def _vorticity_growth(ctx: _Context) -> ExperimentReport:
    run = ctx.run()
    t = np.asarray(run.times)
    rows = []
    constants = {}
    flags = {}
    for ch in ("omega_inf", "u_inf", "ur_over_r_inf"):
        if ch not in run.diagnostics.channels:
            continue
        series = run.diagnostics.channel(ch)
        slope, intercept, resid = _log_least_squares(t, series)
        constants[f"log_slope_{ch}"] = slope
        constants[f"fit_residual_{ch}"] = resid
        flags[f"{ch}_finite"] = bool(np.all(np.isfinite(series)))
        rows.append((ch, slope, intercept, resid))
    art = _write_csv(
        ctx.artifact_dir("vorticity_growth") / "growth_fits.csv",
        ["channel", "log_slope", "log_intercept", "residual"],
        rows,
    )
    return ExperimentReport("vorticity_growth", constants, flags, [art])


def _decomposition_suite(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("decomposition_suite")
    run = ctx.run()
    report_times = opts.get("report_times")
    if report_times is None:
        report_times = [run.times[-1] / 4.0, run.times[-1] / 2.0, run.times[-1]]
    family = evolve_tilde_family(run, pu=ctx.pu, matrix_times=[0.0] + list(report_times))
    closure = float(np.max(family.reconstruction_residuals))
    inter0 = family.interaction_matrices[0]
    off_tri = max(
        (val / family.initial_block_sup[q] for (j, q), val in inter0.items() if abs(j - q) > 1),
        default=0.0,
    )
    decay = block_decay_report(family, run, report_times)
    # single fitted C across q for the exponential block-sup growth bound
    ratios, exponents = [], []
    u_cum = (
        run.diagnostics.integral("u_B1inf1")
        if "u_B1inf1" in run.diagnostics.channels
        else np.zeros(len(run.times))
    )
    for q, series in family.block_sup_series.items():
        base = family.initial_block_sup[q]
        for i, val in enumerate(series):
            ratios.append(val / base)
            exponents.append(u_cum[i])
    fitted_c = fit_gronwall_constant(np.asarray(ratios), np.asarray(exponents))
    arts = []
    arts.append(
        _write_csv(
            ctx.artifact_dir("decomposition_suite") / "closure.csv",
            ["t", "reconstruction_residual"],
            list(zip(family.times, family.reconstruction_residuals)),
        )
    )
    for t_req, matrix in zip(decay.times, decay.matrices):
        rows = [(j, q, m) for (j, q), m in sorted(matrix.items())]
        arts.append(
            _write_csv(
                ctx.artifact_dir("decomposition_suite") / f"decay_matrix_t{t_req}.csv",
                ["j", "q", "m"],
                rows,
            )
        )
    arts.append(
        _write_csv(
            ctx.artifact_dir("decomposition_suite") / "envelopes.csv",
            ["t", "b", "U"],
            list(zip(decay.times, decay.envelopes, decay.u_integrals)),
        )
    )
    tol = opts.get("closure_tol", 1e-6)
    return ExperimentReport(
        "decomposition_suite",
        {
            "max_closure_residual": closure,
            "max_off_tridiagonal_t0": float(off_tri),
            "fitted_C": fitted_c,
            **{f"envelope_t{t}": b for t, b in zip(decay.times, decay.envelopes)},
        },
        {
            "closure": closure <= tol,
            "off_tridiagonal_1e-12": off_tri <= 1e-12,
            "envelopes_finite": all(math.isfinite(b) for b in decay.envelopes),
            "fitted_C_finite": math.isfinite(fitted_c),
        },
        arts,
    )


def _norm_growth(ctx: _Context) -> ExperimentReport:
    run = ctx.run()
    rows = []
    constants = {}
    flags = {}
    for ch in HEAVY_CHANNELS:
        if ch not in run.diagnostics.channels:
            flags[f"{ch}_tracked"] = False
            continue
        series = run.diagnostics.channel(ch)
        constants[f"max_{ch}"] = float(np.max(series))
        constants[f"growth_{ch}"] = float(series[-1] / series[0]) if series[0] > 0 else INF
        flags[f"{ch}_finite"] = bool(np.all(np.isfinite(series)))
        for t, v in zip(run.times, series):
            rows.append((ch, t, v))
    art = _write_csv(ctx.artifact_dir("norm_growth") / "series.csv", ["channel", "t", "value"], rows)
    return ExperimentReport("norm_growth", constants, flags, [art])


def _dilation_audit(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("dilation_audit")
    # 2D plane fields: cheap, and n = 256 resolves the smallest factor 2^-6
    grid = Grid(opts.get("n", 256), ctx.grid.box_length, opts.get("dim", 2))
    rng = ctx.rng("dilation_audit")
    n_fields = opts.get("n_fields", 10)
    lams = [2.0**-j for j in range(1, 7)]
    fields = [random_band_limited(grid, rng) for _ in range(n_fields)]
    rows = []
    per_lam = []
    for lam in lams:
        worst = max(dilation_ratio(f, lam, ctx.pu) for f in fields)
        per_lam.append(worst)
        rows.append((lam, worst))
    slope, _, _ = _log_least_squares(-np.log2(np.asarray(lams)), np.asarray(per_lam))
    art = _write_csv(ctx.artifact_dir("dilation_audit") / "fitted.csv", ["lambda", "fitted_C"], rows)
    return ExperimentReport(
        "dilation_audit",
        {"max_fitted_C": float(max(per_lam)), "trend_log_slope": slope},
        {
            "bounded": math.isfinite(max(per_lam)),
            # no growth trend: the fitted constant must not increase with 1/lambda
            "no_trend": slope <= 0.05,
        },
        [art],
    )


def _transport_audit(ctx: _Context) -> ExperimentReport:
    opts = ctx.opts("transport_audit")
    run = ctx.run()
    grid = run.grid
    rng = ctx.rng("transport_audit")
    f0 = random_band_limited(grid, rng, k_max=grid.k_fundamental * grid.n / 6.0)
    cases = [(-1.0, INF), (0.5, 1.0), (1.0, 1.0)]
    rows = []
    constants = {}
    flags = {}
    for s, r in cases:
        bp = BesovParams(s=s, p=INF, r=r)
        audit = transport_estimate_audit(run.history, f0, bp, run.cfg, ctx.pu)
        tag = f"s{s}_r{'inf' if r == INF else r}"
        constants[f"fitted_C_{tag}"] = audit["fitted_C"]
        flags[f"finite_{tag}"] = math.isfinite(audit["fitted_C"])
        rows.append((s, r, audit["fitted_C"], audit["exponent_kind"]))
    # u = 0 recovers the exact conservation constant
    zero_run = evolve(
        SpectralField(grid, np.zeros(grid.shape)),
        ctx.solver_config(),
        channels=("alpha_L2",),
        pu=ctx.pu,
    )
    audit0 = transport_estimate_audit(zero_run.history, f0, BesovParams(0.5, INF, 1.0), zero_run.cfg, ctx.pu)
    constants["fitted_C_u0"] = audit0["fitted_C"]
    flags["u0_exactly_1"] = abs(audit0["fitted_C"] - 1.0) <= 1e-10
    art = _write_csv(
        ctx.artifact_dir("transport_audit") / "fitted.csv",
        ["s", "r", "fitted_C", "exponent_kind"],
        rows,
    )
    return ExperimentReport("transport_audit", constants, flags, [art])


REGISTRY = {
    "partition_audit": _partition_audit,
    "bernstein_sweep": _bernstein_sweep,
    "bony_audit": _bony_audit,
    "lorentz_suite": _lorentz_suite,
    "embedding_sweep": _embedding_sweep,
    "geometry_audit": _geometry_audit,
    "model_v_suite": _model_v_suite,
    "conservation_run": _conservation_run,
    "biot_savart_bound": _biot_savart_bound,
    "vorticity_growth": _vorticity_growth,
    "decomposition_suite": _decomposition_suite,
    "norm_growth": _norm_growth,
    "dilation_audit": _dilation_audit,
    "transport_audit": _transport_audit,
}


def run_scenario(scenario) -> list:
    """Execute a scenario (path or Scenario) and persist all artifacts."""
    if not isinstance(scenario, Scenario):
        scenario = Scenario.load(scenario)
    ctx = _Context(scenario)
    ctx.out.mkdir(parents=True, exist_ok=True)
    scenario.save(ctx.out / "scenario.json")
    reports = []
    for key in scenario.experiments:
        report = REGISTRY[key](ctx)
        _write_report(ctx, report)
        reports.append(report)
    with open(ctx.out / "reports.json", "w") as fh:
        json.dump([r.to_json_dict() for r in reports], fh, indent=2, sort_keys=True)
        fh.write("\n")
    return reports


# ---------------------------------------------------------------------------
# plot-data emission


_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Render every .dat series (t value) and .trip heatmap (j q value) here.\"\"\"
import sys
from pathlib import Path

try:
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib not installed; the .dat/.trip files are plain text")

here = Path(__file__).parent
for dat in sorted(here.glob("*.dat")):
    rows = [line.split() for line in dat.read_text().splitlines()[1:]]
    if not rows:
        continue
    t = [float(r[0]) for r in rows]
    v = [float(r[1]) for r in rows]
    plt.figure()
    plt.plot(t, v)
    plt.xlabel("t")
    plt.title(dat.stem)
    plt.savefig(dat.with_suffix(".png"))
    plt.close()
for trip in sorted(here.glob("*.trip")):
    rows = [line.split() for line in trip.read_text().splitlines()[1:]]
    if not rows:
        continue
    js = sorted({int(r[0]) for r in rows})
    qs = sorted({int(r[1]) for r in rows})
    grid = [[float("nan")] * len(qs) for _ in js]
    for j, q, v in rows:
        grid[js.index(int(j))][qs.index(int(q))] = float(v)
    plt.figure()
    plt.imshow(grid, origin="lower")
    plt.colorbar()
    plt.xlabel("q")
    plt.ylabel("j")
    plt.title(trip.stem)
    plt.savefig(trip.with_suffix(".png"))
    plt.close()
print("done")
"""


def emit_plots(run_dir) -> list:
    """Write per-channel (t, value) data files and a generic plotting script.

    Consumes diagnostics.csv and any decay-matrix CSVs found under run_dir;
    keeps the artifact free of rendering dependencies.
    """
    run_dir = Path(run_dir)
    diag = None
    for cand in [run_dir / "diagnostics.csv"] + sorted(run_dir.glob("**/diagnostics.csv")):
        if cand.exists():
            diag = cand
            break
    plots = run_dir / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    written = []
    if diag is None:
        print(f"warning: no diagnostics.csv under {run_dir}; emitting script only")
    else:
        lines = diag.read_text().splitlines()
        header = lines[0].split(",")
        columns = list(zip(*[line.split(",") for line in lines[1:]])) if len(lines) > 1 else []
        if not columns:
            print(f"warning: empty diagnostics in {diag}")
        else:
            t = columns[0]
            for name, col in zip(header[1:], columns[1:]):
                path = plots / f"{name}.dat"
                path.write_text("t value\n" + "\n".join(f"{a} {b}" for a, b in zip(t, col)) + "\n")
                written.append(path)
    for matrix_csv in sorted(run_dir.glob("**/decay_matrix_*.csv")):
        rows = [line.split(",") for line in matrix_csv.read_text().splitlines()[1:]]
        path = plots / (matrix_csv.stem + ".trip")
        path.write_text("j q value\n" + "\n".join(f"{int(float(j))} {int(float(q))} {v}" for j, q, v in rows) + "\n")
        written.append(path)
    script = plots / "render.py"
    script.write_text(_PLOT_SCRIPT)
    script.chmod(0o755)
    written.append(script)
    return written
