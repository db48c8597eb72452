"""Monte Carlo campaigns tracing the phase-transition curves at desk scale.

A campaign is a pure map over (n, kappa, trial) tuples — each trial samples
a matrix, solves the equilibrium and classifies it feasible / infeasible /
degenerate — followed by an order-independent integer reduction.  Trial
sub-seeds are pure functions of (master_seed, point, trial), and each trial
runs under a single-threaded BLAS context, so campaign output is bitwise
identical for any worker count.

Curve points report the raw proportion of feasible solutions among valid
(non-degenerate) trials, a 95% Wilson-interval half-width, and the number of
excluded degenerate trials.  Display smoothing (Savitzky-Golay) is emitted
as a separate column and never alters the raw data.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.optimize
from threadpoolctl import threadpool_limits

from .ensembles import (
    EnsembleSpec,
    GrowthVector,
    SeedScheme,
    derive_seed,
    sample_matrix,
    uniform_growth_vector,
    vector_stats,
)
from .equilibrium import AlphaRule, solve_equilibrium
from .errors import ConfigurationError, DegenerateTrialError
from .evt import h1, h2
from .stability import stability_metrics

#: 97.5% standard-normal quantile (95% two-sided Wilson interval).
WILSON_Z = 1.959963984540054

#: exact CSV column order; campaign-specific columns append after these.
CSV_BASE_COLUMNS = (
    "n",
    "abscissa",
    "trials",
    "degenerate",
    "feasible_count",
    "proportion",
    "half_width",
    "smoothed_proportion",
)

_GUMBEL_SPAN_01_09 = 3.0843993917263486  # G^{-1}(0.9) - G^{-1}(0.1), G the Gumbel CDF


# ----------------------------------------------------------------------
# basic statistics
# ----------------------------------------------------------------------

def wilson_half_width(successes: int, valid: int, z: float = WILSON_Z) -> float:
    """Half-width of the 95% Wilson score interval for a binomial proportion.

    With zero valid observations the interval degenerates to center 1/2,
    half-width 1/2 (maximal uncertainty).
    """
    if valid < 0 or successes < 0 or successes > max(valid, 0):
        raise ConfigurationError("need 0 <= successes <= valid")
    if valid == 0:
        return 0.5
    p = successes / valid
    z2 = z * z
    return float(z * math.sqrt(p * (1.0 - p) / valid + z2 / (4.0 * valid * valid)) / (1.0 + z2 / valid))


def savitzky_golay(series: Sequence[float], window: int, degree: int) -> np.ndarray:
    """Least-squares local polynomial smoothing.

    Endpoints are handled by truncating the window to the valid index range
    and refitting (no mirror padding), so polynomial reproduction up to
    `degree` holds exactly at the boundaries too.
    """
    y = np.asarray(series, dtype=np.float64)
    if window % 2 == 0 or window <= degree or degree < 0:
        raise ConfigurationError(
            f"window must be odd and > degree >= 0, got window={window} degree={degree}"
        )
    if y.ndim != 1 or y.size < window:
        raise ConfigurationError(f"series length {y.size} is shorter than window {window}")
    h = window // 2
    out = np.empty_like(y)
    for i in range(y.size):
        lo = max(0, i - h)
        hi = min(y.size, i + h + 1)
        t = np.arange(lo, hi, dtype=np.float64) - i
        V = np.vander(t, degree + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(V, y[lo:hi], rcond=None)
        out[i] = coef[0]
    return out


# ----------------------------------------------------------------------
# campaign data model
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    """One abscissa of a phase-transition curve."""

    n: int
    abscissa: float
    trials: int
    degenerate: int
    feasible_count: int

    def __post_init__(self):
        if not 0 <= self.degenerate <= self.trials:
            raise ConfigurationError("need 0 <= degenerate <= trials")
        if not 0 <= self.feasible_count <= self.trials - self.degenerate:
            raise ConfigurationError("feasible_count exceeds valid trials")

    @property
    def valid(self) -> int:
        return self.trials - self.degenerate

    @property
    def proportion(self) -> float:
        return self.feasible_count / self.valid if self.valid else 0.0

    @property
    def half_width(self) -> float:
        return wilson_half_width(self.feasible_count, self.valid)


@dataclass
class Curve:
    """Curve points (fixed n for kappa sweeps) plus display smoothing and extras."""

    points: list[CurvePoint]
    smoothed: np.ndarray
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def abscissae(self) -> np.ndarray:
        return np.array([p.abscissa for p in self.points])

    @property
    def proportions(self) -> np.ndarray:
        return np.array([p.proportion for p in self.points])


@dataclass(frozen=True)
class CampaignConfig:
    """Sweep parameters for a feasibility campaign.

    `growth` is one of ``ones``, ``uniform13`` or ``file:<path>``; kappa
    values resolve to alpha = kappa * sqrt(log n) per grid point.  With
    `common_rng` the same matrices are reused across kappa for a given
    trial index (variance reduction; off by default — every (kappa, trial)
    pair is sampled independently).
    """

    ensemble: str = "gaussian"
    n_list: tuple[int, ...] = (500, 2000, 5000)
    kappa_grid: tuple[float, ...] = ()
    trials: int = 500
    alpha_rule: AlphaRule = AlphaRule("critical")
    growth: str = "ones"
    master_seed: int = 1
    smoothing: tuple[int, int] | None = (11, 3)
    workers: int = 1
    common_rng: bool = False

    def __post_init__(self):
        if not self.n_list:
            raise ConfigurationError("n_list must be nonempty")
        if any(n < 2 for n in self.n_list):
            raise ConfigurationError("all n must be >= 2")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        grid = tuple(float(k) for k in self.kappa_grid)
        if grid and any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError("kappa_grid must be strictly increasing")
        object.__setattr__(self, "kappa_grid", grid)
        if self.smoothing is not None:
            window, degree = self.smoothing
            if window % 2 == 0 or window <= degree or degree < 0:
                raise ConfigurationError("smoothing window must be odd and > degree >= 0")
        if not self.growth.startswith("file:") and self.growth not in ("ones", "uniform13"):
            raise ConfigurationError(f"unknown growth spec {self.growth!r}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")


def resolve_growth(growth: str, n: int) -> GrowthVector:
    """Materialize the growth vector named by a config string for dimension n."""
    if growth == "ones":
        return GrowthVector.ones(n)
    if growth == "uniform13":
        return uniform_growth_vector(n)
    if growth.startswith("file:"):
        vec = GrowthVector.from_file(growth[5:])
        if len(vec) != n:
            raise ConfigurationError(
                f"growth file has {len(vec)} components but n = {n}"
            )
        return vec
    raise ConfigurationError(f"unknown growth spec {growth!r}")


# ----------------------------------------------------------------------
# trial execution (worker side)
# ----------------------------------------------------------------------

def _feasibility_chunk(task) -> tuple[int, int, int]:
    """Run trials [t0, t1) of one curve point; returns (point_key, feasible, degenerate).

    Pure function of the task tuple; BLAS is pinned to one thread so the
    per-trial arithmetic is identical no matter where the chunk runs.
    """
    point_key, kind, n, alpha, growth, rvalues, point_seed, t0, t1 = task
    spec = EnsembleSpec(kind, n)
    r = GrowthVector(np.asarray(rvalues)) if rvalues is not None else resolve_growth(growth, n)
    feasible = degenerate = 0
    with threadpool_limits(limits=1):
        for t in range(t0, t1):
            A = sample_matrix(spec, SeedScheme(point_seed, t))
            try:
                sol = solve_equilibrium(A, alpha, r)
            except DegenerateTrialError:
                degenerate += 1
                continue
            if sol.feasible:
                feasible += 1
    return point_key, feasible, degenerate


def _chunk_ranges(trials: int, chunks: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(trials / chunks))
    return [(t0, min(t0 + size, trials)) for t0 in range(0, trials, size)]


def _run_point_tasks(tasks: list, workers: int) -> Iterable[tuple[int, int, int]]:
    if workers <= 1:
        return map(_feasibility_chunk, tasks)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_feasibility_chunk, tasks, chunksize=1))


def _sweep(
    cfg: CampaignConfig,
    points: list[tuple[int, float, float]],  # (n, abscissa, alpha) in output order
    point_seed_index: Sequence[int],
) -> list[CurvePoint]:
    """Run all trials for the given points and assemble CurvePoints in order."""
    file_growth = cfg.growth.startswith("file:")
    tasks = []
    for key, (n, _, alpha) in enumerate(points):
        rvalues = resolve_growth(cfg.growth, n).values if file_growth else None
        point_seed = derive_seed(cfg.master_seed, point_seed_index[key])
        per_point_chunks = max(1, min(cfg.workers * 2, cfg.trials))
        for t0, t1 in _chunk_ranges(cfg.trials, per_point_chunks):
            tasks.append((key, cfg.ensemble, n, alpha, cfg.growth, rvalues, point_seed, t0, t1))

    feas = [0] * len(points)
    degen = [0] * len(points)
    for key, f, d in _run_point_tasks(tasks, cfg.workers):
        feas[key] += f
        degen[key] += d

    return [
        CurvePoint(n=n, abscissa=abscissa, trials=cfg.trials, degenerate=degen[k], feasible_count=feas[k])
        for k, (n, abscissa, _) in enumerate(points)
    ]


def _smooth(cfg: CampaignConfig, proportions: np.ndarray) -> np.ndarray:
    if cfg.smoothing is None:
        return proportions.copy()
    window, degree = cfg.smoothing
    return savitzky_golay(proportions, window, degree)


# ----------------------------------------------------------------------
# campaigns
# ----------------------------------------------------------------------

def feasibility_curve(cfg: CampaignConfig) -> list[Curve]:
    """Proportion of feasible equilibria vs kappa, one curve per n.

    alpha = kappa * sqrt(log n) at every grid point.  Degenerate trials are
    excluded from the proportion denominator and reported per point.
    """
    if not cfg.kappa_grid:
        raise ConfigurationError("feasibility_curve needs a nonempty kappa_grid")
    curves = []
    width = len(cfg.kappa_grid)
    for i, n in enumerate(cfg.n_list):
        points = [(n, k, k * math.sqrt(math.log(n))) for k in cfg.kappa_grid]
        if cfg.common_rng:
            seed_index = [i] * width  # same matrices across kappa within one n
        else:
            seed_index = [i * width + j for j in range(width)]
        pts = _sweep(cfg, points, seed_index)
        curves.append(Curve(points=pts, smoothed=_smooth(cfg, np.array([p.proportion for p in pts]))))
    return curves


def critical_scan(
    n_list: Sequence[int],
    trials: int,
    ensemble: str = "gaussian",
    seed: int = 1,
    workers: int = 1,
    smoothing: tuple[int, int] | None = None,
) -> Curve:
    """Proportion feasible at the critical scaling alpha = sqrt(2 log n) per n.

    The curve carries companion columns with both heuristics h1(n), h2(n).
    """
    cfg = CampaignConfig(
        ensemble=ensemble,
        n_list=tuple(n_list),
        kappa_grid=(),
        trials=trials,
        alpha_rule=AlphaRule("critical"),
        master_seed=seed,
        smoothing=smoothing,
        workers=workers,
    )
    points = [(n, float(n), math.sqrt(2.0 * math.log(n))) for n in cfg.n_list]
    pts = _sweep(cfg, points, list(range(len(points))))
    curve = Curve(points=pts, smoothed=_smooth(cfg, np.array([p.proportion for p in pts])))
    ns = np.array([float(p.n) for p in pts])
    curve.extras["h1"] = np.array([h1(int(v)) for v in ns])
    curve.extras["h2"] = np.array([h2(int(v)) for v in ns])
    return curve


def nh_thresholds(n: int, growth: str = "uniform13") -> tuple[float, float]:
    """(t1, t2) = sqrt(2) sigma_r / r_max, sqrt(2) sigma_r / r_min for the growth vector at n."""
    r_min, r_max, sigma_r = vector_stats(resolve_growth(growth, n))
    return math.sqrt(2.0) * sigma_r / r_max, math.sqrt(2.0) * sigma_r / r_min


def nh_feasibility_curve(cfg: CampaignConfig) -> list[Curve]:
    """Feasibility sweep for the non-homogeneous system (growth vector r != 1).

    Same kappa sweep as :func:`feasibility_curve`; each curve carries
    constant columns with the transition thresholds t1 = sqrt(2) sigma_r /
    r_max and t2 = sqrt(2) sigma_r / r_min, the edges of the buffer zone in
    kappa units.
    """
    if cfg.growth == "ones":
        raise ConfigurationError("non-homogeneous campaign needs growth != 'ones'")
    curves = feasibility_curve(cfg)
    for n, curve in zip(cfg.n_list, curves):
        t1, t2 = nh_thresholds(n, cfg.growth)
        m = len(curve.points)
        curve.extras["t1"] = np.full(m, t1)
        curve.extras["t2"] = np.full(m, t2)
    return curves


# ----------------------------------------------------------------------
# transition band width
# ----------------------------------------------------------------------

def transition_band_width(
    abscissae: Sequence[float],
    proportions: Sequence[float],
    trials: int | None = None,
    lo: float = 0.1,
    hi: float = 0.9,
) -> float:
    """Width in kappa of the [lo, hi] proportion band of a transition curve.

    The raw proportions are fitted with the limiting extreme-value shape of
    the transition, p = exp(-exp(-(a*kappa + b))), by weighted least squares;
    the band width is then the fitted quantile span (e.g. 3.0844/a for
    [0.1, 0.9]).  This uses every grid point instead of interpolating two
    noisy crossings, and stays defined when a crossing falls between points.
    """
    x = np.asarray(abscissae, dtype=np.float64)
    p = np.asarray(proportions, dtype=np.float64)
    if x.size != p.size or x.size < 3:
        raise ConfigurationError("need at least 3 (abscissa, proportion) pairs")
    if not 0.0 < lo < hi < 1.0:
        raise ConfigurationError("need 0 < lo < hi < 1")
    interior = (p > 0.02) & (p < 0.98)
    if interior.sum() >= 2:
        yc = -np.log(-np.log(np.clip(p[interior], 1e-6, 1.0 - 1e-6)))
        a0, b0 = np.polyfit(x[interior], yc, 1)
    else:
        a0, b0 = 4.0 / (x[-1] - x[0]), -2.0 * (x[0] + x[-1]) / (x[-1] - x[0])
    if trials:
        sigma = np.sqrt(np.maximum(p * (1.0 - p), 0.25 / trials) / trials)
    else:
        sigma = np.ones_like(p)

    def residuals(theta):
        a, b = theta
        return (np.exp(-np.exp(-(a * x + b))) - p) / sigma

    fit = scipy.optimize.least_squares(residuals, x0=(a0, b0), method="lm")
    a = float(fit.x[0])
    if a <= 0.0:
        raise ConfigurationError("transition fit produced a non-increasing curve")
    span = (-math.log(-math.log(hi))) - (-math.log(-math.log(lo)))
    return span / a


# ----------------------------------------------------------------------
# stability and EVT campaign runners (CLI surfaces)
# ----------------------------------------------------------------------

def _stability_chunk(task):
    kind, n, alpha, growth, seed, t0, t1, collect_eigs = task
    spec = EnsembleSpec(kind, n)
    r = resolve_growth(growth, n)
    rows, eigs, degenerate = [], {}, 0
    with threadpool_limits(limits=1):
        for t in range(t0, t1):
            A = sample_matrix(spec, SeedScheme(seed, t))
            try:
                sol = solve_equilibrium(A, alpha, r)
            except DegenerateTrialError:
                degenerate += 1
                continue
            rep = stability_metrics(sol.x, A, alpha, r)
            rows.append((t, n, alpha, rep.max_re, rep.match_dist, rep.rho_plus, rep.stable))
            if collect_eigs:
                eigs[t] = rep.eigenvalues
    return rows, eigs, degenerate


def run_stability_trials(
    n: int,
    trials: int,
    alpha_rule: AlphaRule,
    ensemble: str = "gaussian",
    growth: str = "ones",
    seed: int = 1,
    workers: int = 1,
    collect_eigs: bool = False,
):
    """Seeded stability trials; returns (rows, eigenvalues-by-trial, degenerate count).

    Row schema: (trial, n, alpha, max_re, match_dist, rho_plus, stable).
    Degenerate trials are excluded (counted), so rows cover valid trials only.
    """
    alpha = alpha_rule.resolve(n)
    point_seed = derive_seed(seed, 0)
    chunks = _chunk_ranges(trials, max(1, min(workers * 2, trials)))
    tasks = [(ensemble, n, alpha, growth, point_seed, t0, t1, collect_eigs) for t0, t1 in chunks]
    if workers <= 1:
        parts = [_stability_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_stability_chunk, tasks, chunksize=1))
    rows, eigs, degenerate = [], {}, 0
    for part_rows, part_eigs, part_degen in parts:
        rows.extend(part_rows)
        eigs.update(part_eigs)
        degenerate += part_degen
    return rows, eigs, degenerate


# ----------------------------------------------------------------------
# CSV emission
# ----------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return repr(float(value))


def curves_to_csv(curves: Sequence[Curve]) -> str:
    """Render curves as the canonical campaign CSV body (deterministic bytes)."""
    if not curves:
        raise ConfigurationError("no curves to write")
    extra_names = list(curves[0].extras.keys())
    for c in curves:
        if list(c.extras.keys()) != extra_names:
            raise ConfigurationError("curves disagree on extra columns")
    lines = [",".join(CSV_BASE_COLUMNS + tuple(extra_names))]
    for curve in curves:
        for j, pt in enumerate(curve.points):
            row = [
                _fmt(pt.n),
                _fmt(pt.abscissa),
                _fmt(pt.trials),
                _fmt(pt.degenerate),
                _fmt(pt.feasible_count),
                _fmt(pt.proportion),
                _fmt(pt.half_width),
                _fmt(curve.smoothed[j]),
            ]
            row += [_fmt(curve.extras[name][j]) for name in extra_names]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def rows_to_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Generic deterministic CSV body for non-curve subcommands."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"
