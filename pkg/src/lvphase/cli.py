"""Command-line entry point: campaign orchestration, CSV + SVG emission, manifests.

Subcommands::

    feasibility-curve   proportion feasible vs kappa (alpha = kappa sqrt(log n))
    critical-scan       proportion feasible at alpha = sqrt(2 log n) vs n, with h1/h2
    nh-curve            non-homogeneous sweep with buffer-zone thresholds t1/t2
    stability           Jacobian spectrum metrics per trial
    evt-check           KS distance of normalized Gaussian extremes to the Gumbel law
    lv-sim              one perturbed Lotka-Volterra trajectory around equilibrium

Every output CSV pairs with a ``.meta.json`` sidecar holding the resolved
run manifest (subcommand, config, seed, workers, version, output paths);
re-running with the manifest's settings reproduces the CSV bytes at any
worker count.  Exit codes: 0 success, 1 runtime failure, 2 usage/config
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .ensembles import SeedScheme
from .equilibrium import AlphaRule, solve_equilibrium
from .errors import ConfigurationError
from .evt import empirical_gumbel_check
from .experiments import (
    CampaignConfig,
    Curve,
    critical_scan,
    curves_to_csv,
    feasibility_curve,
    nh_feasibility_curve,
    nh_thresholds,
    resolve_growth,
    rows_to_csv,
    run_stability_trials,
)
from .stability import lv_integrate, perturbed_state
from .svgplot import PlotCurve, PlotSpec, render

_ENSEMBLE_ALIASES = {"gaussian": "gaussian", "bernoulli": "bernoulli_pm1", "logconcave": "logconcave"}
SQRT2 = math.sqrt(2.0)


@dataclass
class RunManifest:
    """Resolved run description, serialized verbatim into the metadata sidecar."""

    subcommand: str
    config: dict
    master_seed: int
    worker_count: int
    version: str = __version__
    outputs: list = field(default_factory=list)


def parse_float_grid(text: str) -> tuple[float, ...]:
    """Grid syntax: 'start:stop:step' (inclusive endpoints within 1e-9) or 'a,b,c'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"expected start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigurationError(f"need stop >= start and step > 0 in {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 9) for i in range(count))
    return tuple(float(p) for p in text.split(","))


def parse_int_list(text: str) -> tuple[int, ...]:
    """Integer list 'a,b,c' or integer grid 'start:stop:step'."""
    if ":" in text:
        vals = parse_float_grid(text)
        ints = tuple(int(round(v)) for v in vals)
    else:
        ints = tuple(int(p) for p in text.strip().split(","))
    if any(v < 1 for v in ints):
        raise ConfigurationError(f"dimensions must be >= 1 in {text!r}")
    return ints


def parse_alpha_rule(text: str) -> AlphaRule:
    """'critical', 'kappa:X', 'absolute:X' or 'multiple:X'."""
    name, _, param = text.partition(":")
    mode = {
        "critical": "critical",
        "kappa": "kappa_sqrt_log",
        "kappa_sqrt_log": "kappa_sqrt_log",
        "absolute": "absolute",
        "multiple": "multiple_of_critical",
        "multiple_of_critical": "multiple_of_critical",
    }.get(name)
    if mode is None:
        raise ConfigurationError(f"unknown alpha rule {text!r}")
    if mode == "critical":
        return AlphaRule("critical")
    if not param:
        raise ConfigurationError(f"alpha rule {name!r} needs a parameter, e.g. {name}:2.0")
    return AlphaRule(mode, float(param))


def _resolve_ensemble(name: str) -> str:
    try:
        return _ENSEMBLE_ALIASES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown ensemble {name!r}; expected {sorted(_ENSEMBLE_ALIASES)}"
        ) from None


def _resolve_workers(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("LVPHASE_WORKERS")
    return max(1, int(env)) if env else 1


def _meta_path(out: str) -> str:
    return (out[:-4] if out.endswith(".csv") else out) + ".meta.json"


def _write_outputs(manifest: RunManifest, csv_body: str, out: str,
                   run_info: dict, svg_body: str | None = None) -> None:
    paths = [out]
    with open(out, "w", newline="") as fh:
        fh.write(csv_body)
    if svg_body is not None:
        svg_path = (out[:-4] if out.endswith(".csv") else out) + ".svg"
        with open(svg_path, "w", newline="") as fh:
            fh.write(svg_body)
        paths.append(svg_path)
    meta = _meta_path(out)
    paths.append(meta)
    manifest.outputs = paths
    payload = {
        "artifact": "lvphase",
        "manifest": asdict(manifest),
        "run": dict(run_info, csv_sha256=hashlib.sha256(csv_body.encode()).hexdigest()),
    }
    with open(meta, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _smoothing_from_args(args, n_points: int):
    if args.sg_window == 0:
        return None
    if args.sg_window % 2 == 0 or args.sg_window <= args.sg_degree:
        raise ConfigurationError("--sg-window must be odd and greater than --sg-degree (0 disables)")
    if n_points < args.sg_window:
        raise ConfigurationError(
            f"grid has {n_points} points, shorter than --sg-window {args.sg_window} (0 disables)"
        )
    return (args.sg_window, args.sg_degree)


def _curve_plot(curves: list[Curve], labels: list[str], x_label: str,
                rules: dict[str, float], ref_lines=None) -> str:
    plot_curves = [
        PlotCurve(
            label=label,
            x=c.abscissae,
            raw=c.proportions,
            smoothed=np.asarray(c.smoothed),
            half_width=np.array([p.half_width for p in c.points]),
        )
        for c, label in zip(curves, labels)
    ]
    spec = PlotSpec(curves=plot_curves, x_label=x_label, rules=rules, ref_lines=ref_lines or {})
    return render(spec)


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------

def _cmd_feasibility(args) -> None:
    kappa = parse_float_grid(args.kappa)
    cfg = CampaignConfig(
        ensemble=_resolve_ensemble(args.ensemble),
        n_list=parse_int_list(args.n),
        kappa_grid=kappa,
        trials=args.trials,
        alpha_rule=AlphaRule("kappa_sqrt_log", kappa[0]),
        growth=args.growth,
        master_seed=args.seed,
        smoothing=_smoothing_from_args(args, len(kappa)),
        workers=_resolve_workers(args.workers),
        common_rng=args.common_rng,
    )
    t0 = time.perf_counter()
    curves = feasibility_curve(cfg) if args.growth == "ones" else nh_feasibility_curve(cfg)
    wall = time.perf_counter() - t0
    run_info: dict = {"wall_time_s": round(wall, 3),
                      "degenerate_total": sum(p.degenerate for c in curves for p in c.points)}
    rules = {"kappa*=sqrt(2)": SQRT2}
    if args.growth != "ones":
        t1, t2 = nh_thresholds(cfg.n_list[0], cfg.growth)
        rules = {"t1": t1, "t2": t2}
        run_info["thresholds"] = {"t1": t1, "t2": t2}
    svg = None
    if args.plot:
        svg = _curve_plot(curves, [f"n={n}" for n in cfg.n_list], "kappa", rules)
    manifest = RunManifest(args.subcommand, _config_dict(cfg), args.seed, cfg.workers)
    _write_outputs(manifest, curves_to_csv(curves), args.out, run_info, svg)


def _cmd_critical_scan(args) -> None:
    n_list = parse_int_list(args.n)
    smoothing = _smoothing_from_args(args, len(n_list))
    workers = _resolve_workers(args.workers)
    ensemble = _resolve_ensemble(args.ensemble)
    t0 = time.perf_counter()
    curve = critical_scan(n_list, args.trials, ensemble=ensemble, seed=args.seed,
                          workers=workers, smoothing=smoothing)
    wall = time.perf_counter() - t0
    svg = None
    if args.plot:
        ref = {name: (curve.abscissae, curve.extras[name]) for name in ("h1", "h2")}
        svg = _curve_plot([curve], ["simulated"], "n", {}, ref)
    cfg = {"ensemble": ensemble, "n_list": list(n_list), "trials": args.trials,
           "alpha_rule": "critical", "smoothing": smoothing}
    manifest = RunManifest(args.subcommand, cfg, args.seed, workers)
    run_info = {"wall_time_s": round(wall, 3),
                "degenerate_total": sum(p.degenerate for p in curve.points)}
    _write_outputs(manifest, curves_to_csv([curve]), args.out, run_info, svg)


def _cmd_stability(args) -> None:
    rule = parse_alpha_rule(args.alpha_rule)
    workers = _resolve_workers(args.workers)
    ensemble = _resolve_ensemble(args.ensemble)
    t0 = time.perf_counter()
    rows, eigs, degenerate = run_stability_trials(
        n=args.n, trials=args.trials, alpha_rule=rule, ensemble=ensemble,
        growth=args.growth, seed=args.seed, workers=workers,
        collect_eigs=args.eigs_out is not None,
    )
    wall = time.perf_counter() - t0
    if args.eigs_out is not None:
        eig_rows = [(t, float(v.real), float(v.imag)) for t in sorted(eigs) for v in eigs[t]]
        with open(args.eigs_out, "w", newline="") as fh:
            fh.write(rows_to_csv(("trial", "re", "im"), eig_rows))
    cfg = {"n": args.n, "trials": args.trials, "alpha_rule": args.alpha_rule,
           "ensemble": ensemble, "growth": args.growth}
    manifest = RunManifest(args.subcommand, cfg, args.seed, workers)
    body = rows_to_csv(("trial", "n", "alpha", "max_re", "match_dist", "rho_plus", "stable"), rows)
    _write_outputs(manifest, body, args.out,
                   {"wall_time_s": round(wall, 3), "degenerate_total": degenerate})


def _cmd_evt_check(args) -> None:
    n_list = parse_int_list(args.n)
    which_list = ("max", "min") if args.which == "both" else (args.which,)
    t0 = time.perf_counter()
    rows = []
    for n in n_list:
        for which in which_list:
            ks = empirical_gumbel_check(n, args.trials, which=which,
                                        seed=args.seed, method=args.method)
            rows.append((n, args.trials, which, ks))
    wall = time.perf_counter() - t0
    cfg = {"n_list": list(n_list), "trials": args.trials, "which": args.which,
           "method": args.method}
    manifest = RunManifest(args.subcommand, cfg, args.seed, _resolve_workers(args.workers))
    body = rows_to_csv(("n", "trials", "which", "ks_distance"), rows)
    _write_outputs(manifest, body, args.out, {"wall_time_s": round(wall, 3)})


def _cmd_lv_sim(args) -> None:
    rule = parse_alpha_rule(args.alpha_rule)
    alpha = rule.resolve(args.n)
    from .ensembles import EnsembleSpec, sample_matrix

    spec = EnsembleSpec(_resolve_ensemble(args.ensemble), args.n)
    A = sample_matrix(spec, SeedScheme(args.seed, 0))
    growth = resolve_growth(args.growth, args.n)
    t0 = time.perf_counter()
    sol = solve_equilibrium(A, alpha, growth)
    x0 = sol.x if args.perturb == 0.0 else perturbed_state(
        sol.x, args.perturb, SeedScheme(args.seed, 1).generator()
    )
    traj = lv_integrate(A, alpha, growth, x0, t_end=args.t_end, dt=args.dt, stride=args.stride)
    wall = time.perf_counter() - t0
    dist = np.linalg.norm(traj.states - sol.x[None, :], axis=1)
    rows = [
        (t, float(s.min()), float(s.max()), float(d))
        for t, s, d in zip(traj.times, traj.states, dist)
    ]
    cfg = {"n": args.n, "alpha_rule": args.alpha_rule, "ensemble": spec.kind,
           "growth": args.growth, "t_end": args.t_end, "dt": args.dt,
           "stride": args.stride, "perturb": args.perturb}
    manifest = RunManifest(args.subcommand, cfg, args.seed, 1)
    body = rows_to_csv(("t", "min_x", "max_x", "dist_to_equilibrium"), rows)
    _write_outputs(manifest, body, args.out,
                   {"wall_time_s": round(wall, 3), "alpha": alpha,
                    "equilibrium_feasible": sol.feasible})


def _config_dict(cfg: CampaignConfig) -> dict:
    d = asdict(cfg)
    d["alpha_rule"] = {"mode": cfg.alpha_rule.mode, "parameter": cfg.alpha_rule.parameter}
    d["n_list"] = list(cfg.n_list)
    d["kappa_grid"] = list(cfg.kappa_grid)
    d["smoothing"] = list(cfg.smoothing) if cfg.smoothing else None
    return d


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, default_out: str) -> None:
    p.add_argument("--seed", type=int, default=1, help="master seed (u64)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $LVPHASE_WORKERS or 1)")
    p.add_argument("--out", default=default_out, help="output CSV path")


def _add_curve_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, default=500, help="Monte Carlo trials per point")
    p.add_argument("--ensemble", default="gaussian",
                   choices=sorted(_ENSEMBLE_ALIASES), help="entry law")
    p.add_argument("--plot", action="store_true", help="also write an SVG rendering")
    p.add_argument("--sg-window", type=int, default=11,
                   help="Savitzky-Golay window (odd; 0 disables smoothing)")
    p.add_argument("--sg-degree", type=int, default=3, help="Savitzky-Golay degree")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lvphase",
        description="Feasibility/stability phase-transition simulations for large "
                    "random Lotka-Volterra systems.",
    )
    parser.add_argument("--version", action="version", version=f"lvphase {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("feasibility-curve", help="proportion feasible vs kappa")
    p.add_argument("--n", default="500,2000,5000", help="dimensions, e.g. 500,2000")
    p.add_argument("--kappa", default="0.5:2.5:0.05", help="kappa grid start:stop:step")
    p.add_argument("--growth", default="ones", help="ones | uniform13 | file:<path>")
    p.add_argument("--common-rng", action="store_true",
                   help="reuse matrices across kappa (variance reduction)")
    _add_curve_common(p)
    _add_common(p, "feasibility-curve.csv")
    p.set_defaults(func=_cmd_feasibility)

    p = sub.add_parser("critical-scan", help="proportion feasible at alpha = sqrt(2 log n)")
    p.add_argument("--n", default="50:14050:200", help="dimensions list or range")
    _add_curve_common(p)
    p.set_defaults(sg_window=11)
    _add_common(p, "critical-scan.csv")
    p.set_defaults(func=_cmd_critical_scan)

    p = sub.add_parser("nh-curve", help="non-homogeneous feasibility sweep")
    p.add_argument("--n", default="2000")
    p.add_argument("--kappa", default="0.5:3.5:0.05")
    p.add_argument("--growth", default="uniform13", help="uniform13 | file:<path>")
    p.add_argument("--common-rng", action="store_true")
    _add_curve_common(p)
    _add_common(p, "nh-curve.csv")
    p.set_defaults(func=_cmd_feasibility)

    p = sub.add_parser("stability", help="Jacobian spectrum metrics per trial")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--alpha-rule", default="multiple:2",
                   help="critical | kappa:X | absolute:X | multiple:X")
    p.add_argument("--ensemble", default="gaussian", choices=sorted(_ENSEMBLE_ALIASES))
    p.add_argument("--growth", default="ones")
    p.add_argument("--eigs-out", default=None, help="also write eigenvalue scatter CSV")
    _add_common(p, "stability.csv")
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("evt-check", help="KS distance of Gaussian extremes to the Gumbel law")
    p.add_argument("--n", default="100,10000,1000000")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--which", default="max", choices=("max", "min", "both"))
    p.add_argument("--method", default="auto", choices=("auto", "direct", "quantile"))
    _add_common(p, "evt-check.csv")
    p.set_defaults(func=_cmd_evt_check)

    p = sub.add_parser("lv-sim", help="integrate one perturbed trajectory")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--alpha-rule", default="multiple:2")
    p.add_argument("--ensemble", default="gaussian", choices=sorted(_ENSEMBLE_ALIASES))
    p.add_argument("--growth", default="ones")
    p.add_argument("--t-end", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--perturb", type=float, default=0.1,
                   help="relative perturbation magnitude of the equilibrium start")
    _add_common(p, "lv-sim.csv")
    p.set_defaults(func=_cmd_lv_sim)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse signals usage errors with code 2
        return int(exc.code or 0)
    try:
        args.func(args)
    except ConfigurationError as exc:
        print(f"lvphase: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: diagnostic + exit 1
        print(f"lvphase: error: {exc}", file=sys.stderr)
        return 1
    return 0


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
