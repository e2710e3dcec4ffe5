"""Command-line front end: solve, sweep, svd, and plot subcommands.

The driver executes the three-step algorithm behind every case:
measure the domain radii, select (N, alpha) from (k, delta), then solve
the regularized normal equation and report relative errors.

Configuration is a single JSON document::

    {
      "curve": "kite",                  // or "circle:R", "ellipse:a,b",
                                        // or {"x1_cos": [...], ...}
      "k": 1.0,                         // number or list
      "delta": 1e-16,                   // number or list, in [0, 1)
      "eta": 5.0,
      "tau0": "auto",                   // number, or auto from tau_min
      "seeds": [1, 2, ..., 10],
      "M_q": "auto",                    // quadrature size, even
      "grid_resolution": 200,
      "direction": [0.5, 0.8660254037844386],
      "output_dir": "fbm_out"
    }

Exit codes: 0 success, 2 configuration/validation failure, 3 numerical
failure. On failure a machine-readable record {"error": code, ...} is
printed to stderr. With a single thread, identical configs produce
byte-identical outputs; FBM_THREADS or --threads enables parallel sweep
cells (results are still written in deterministic order).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .assembly import (WaveProblem, add_noise, assemble_operator, make_problem,
                       plane_wave_data)
from .errors import FbmError, NumericalError, ValidationError
from .fields import (ErrorReport, InteriorGrid, PlaneWave, build_interior_grid,
                     error_report, evaluate_field)
from .geometry import (BoundaryCurve, DomainRadii, QuadratureRule,
                       build_quadrature, compute_radii, curve_point,
                       default_node_count, named_curve)
from .tikhonov import (CoefficientVector, RegularizationPlan, select_parameters,
                       svd, svd_decay_study, tikhonov_solve)

logger = logging.getLogger(__name__)

_DEFAULT_DIRECTION = (0.5, math.sqrt(3.0) / 2.0)
_DEFAULT_SEEDS = tuple(range(1, 11))


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------
@dataclass
class ExperimentConfig:
    curve: BoundaryCurve
    curve_spec: object
    k_list: list
    delta_list: list
    eta: float = 5.0
    tau0: object = "auto"            # float or "auto"
    seeds: list = field(default_factory=lambda: list(_DEFAULT_SEEDS))
    node_count: object = "auto"      # int or "auto"
    grid_resolution: int = 200
    direction: np.ndarray = field(
        default_factory=lambda: np.array(_DEFAULT_DIRECTION))
    output_dir: str = "fbm_out"


def _as_number_list(value, name: str, *, lower=None, upper=None,
                    lower_open=False, upper_open=False) -> list:
    items = value if isinstance(value, list) else [value]
    if not items:
        raise ValidationError("empty_list", f"{name} must not be empty")
    out = []
    for item in items:
        try:
            x = float(item)
        except (TypeError, ValueError) as exc:
            raise ValidationError("bad_field", f"{name} must be numeric") from exc
        if lower is not None and (x <= lower if lower_open else x < lower):
            raise ValidationError("bad_field", f"{name}={x} below allowed range")
        if upper is not None and (x >= upper if upper_open else x > upper):
            raise ValidationError("bad_field", f"{name}={x} above allowed range")
        out.append(x)
    return out


def _parse_curve(spec) -> BoundaryCurve:
    if isinstance(spec, str):
        return named_curve(spec)
    if isinstance(spec, dict):
        try:
            return BoundaryCurve(
                x1_cos=spec.get("x1_cos", [0.0]),
                x1_sin=spec.get("x1_sin", [0.0]),
                x2_cos=spec.get("x2_cos", [0.0]),
                x2_sin=spec.get("x2_sin", [0.0]),
                name=spec.get("name", "custom"))
        except (TypeError, ValueError) as exc:
            raise ValidationError("bad_curve_spec", str(exc)) from exc
    raise ValidationError("bad_curve_spec",
                          "curve must be a name or a coefficient object")


def build_config(raw: dict) -> ExperimentConfig:
    """Validate a raw JSON document into an ExperimentConfig."""
    if not isinstance(raw, dict):
        raise ValidationError("bad_config", "configuration must be a JSON object")
    for req in ("curve", "k", "delta"):
        if req not in raw:
            raise ValidationError("missing_field", f"configuration needs {req!r}")
    curve = _parse_curve(raw["curve"])
    k_list = _as_number_list(raw["k"], "k", lower=0.0, lower_open=True)
    delta_list = _as_number_list(raw["delta"], "delta", lower=0.0,
                                 upper=1.0, upper_open=True)

    eta = float(raw.get("eta", 5.0))
    if eta <= 1.0:
        raise ValidationError("eta_too_small", f"eta must exceed 1, got {eta}")

    tau0 = raw.get("tau0", "auto")
    if tau0 != "auto":
        try:
            tau0 = float(tau0)
        except (TypeError, ValueError) as exc:
            raise ValidationError("bad_field", "tau0 must be a number or 'auto'") from exc

    seeds = raw.get("seeds", list(_DEFAULT_SEEDS))
    if not isinstance(seeds, list) or not seeds:
        raise ValidationError("seeds_empty", "seeds must be a nonempty list")
    try:
        seeds = [int(s) for s in seeds]
    except (TypeError, ValueError) as exc:
        raise ValidationError("bad_field", "seeds must be integers") from exc

    node_count = raw.get("M_q", "auto")
    if node_count != "auto":
        if not isinstance(node_count, int) or node_count < 8 or node_count % 2:
            raise ValidationError("bad_quadrature_size",
                                  f"M_q must be an even integer >= 8, got {node_count}")

    grid_resolution = raw.get("grid_resolution", 200)
    if not isinstance(grid_resolution, int) or grid_resolution < 32:
        raise ValidationError("grid_too_coarse",
                              f"grid_resolution must be an integer >= 32, got {grid_resolution}")

    direction = np.asarray(raw.get("direction", _DEFAULT_DIRECTION), dtype=float)
    if direction.shape != (2,):
        raise ValidationError("bad_field", "direction must be a 2-vector")
    if abs(np.hypot(direction[0], direction[1]) - 1.0) > 1e-9:
        raise ValidationError("direction_not_unit",
                              f"|direction| = {np.hypot(*direction)!r}, need 1")

    return ExperimentConfig(curve=curve, curve_spec=raw["curve"],
                            k_list=k_list, delta_list=delta_list, eta=eta,
                            tau0=tau0, seeds=seeds, node_count=node_count,
                            grid_resolution=grid_resolution,
                            direction=direction,
                            output_dir=str(raw.get("output_dir", "fbm_out")))


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ValidationError("config_unreadable", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError("config_not_json", f"{path}: {exc}") from exc
    return build_config(raw)


def resolve_tau0(config: ExperimentConfig, radii: DomainRadii) -> float:
    """Numeric tau0; "auto" takes 1.02*tau_min rounded up to two decimals,
    except for the built-in kite whose canonical value is 2.2."""
    if config.tau0 != "auto":
        return float(config.tau0)
    if config.curve.name == "kite":
        return 2.2
    return math.ceil(1.02 * radii.tau_min * 100.0) / 100.0


# ---------------------------------------------------------------------------
# Single-case pipeline
# ---------------------------------------------------------------------------
@dataclass
class CaseResult:
    plan: RegularizationPlan
    problem: WaveProblem
    rule: QuadratureRule
    coefficients: CoefficientVector
    report: ErrorReport
    mu_min: float
    seed: int


def _bound_exponents(plan: RegularizationPlan) -> dict:
    # asymptotic error-bound exponents implied by the selection rule;
    # reported for cross-reading only, nothing computable checks them
    lam = plan.eta * math.log(plan.tau0)
    sigma = None
    if plan.branch == "large_k" and plan.tau_min > 1.0:
        sigma = 3.5 + 11.0 * math.log(plan.tau0) / (2.0 * math.log(plan.tau_min))
    return {"bound_exponent_lambda": lam, "bound_exponent_sigma": sigma}


def case_metadata(result: CaseResult, grid: InteriorGrid,
                  config: ExperimentConfig) -> dict:
    return {
        **_bound_exponents(result.plan),
        "k": result.problem.k,
        "delta": result.plan.delta,
        "eta": result.plan.eta,
        "tau0": result.plan.tau0,
        "tau_min": result.plan.tau_min,
        "branch": result.plan.branch,
        "N": result.plan.N,
        "alpha": result.plan.alpha,
        "M_q": result.rule.size,
        "grid_resolution": grid.resolution,
        "grid_excluded_fraction": grid.excluded_fraction,
        "seed": result.seed,
        "m_overridden": result.problem.m_overridden,
        "M": result.problem.M,
        "r_in": result.problem.r_in,
        "r_ex": result.problem.r_ex,
        "mu_min": result.mu_min,
        "curve": config.curve.name,
        "direction": list(map(float, config.direction)),
        "column_order": "n=-N..N",
        "noise_model": "complex gaussian, exact relative L2(Gamma) norm",
        "version": __version__,
    }


def solve_case(curve: BoundaryCurve, radii: DomainRadii, k: float,
               delta: float, seed: int, *, eta: float, tau0: float,
               direction: np.ndarray, grid: InteriorGrid,
               node_count: int | None = None,
               n_override: int | None = None,
               alpha_override: float | None = None) -> CaseResult:
    """Run plan -> assemble -> data -> noise -> solve -> report once.

    ``n_override``/``alpha_override`` bypass the selection rule (used by
    convergence studies); everything else follows the standard pipeline.
    """
    plan = select_parameters(k, delta, eta, radii, tau0)
    if n_override is not None or alpha_override is not None:
        plan = RegularizationPlan(
            delta=plan.delta, delta_eff=plan.delta_eff, eta=plan.eta,
            tau0=plan.tau0, tau_min=plan.tau_min, branch=plan.branch,
            N=plan.N if n_override is None else int(n_override),
            alpha=plan.alpha if alpha_override is None else float(alpha_override))
    problem = make_problem(curve, radii, k, tau0, plan.N)
    rule = build_quadrature(curve, node_count or default_node_count(plan.N))
    operator = assemble_operator(problem, rule)
    system = svd(operator)
    data = plane_wave_data(problem, rule, direction)
    noisy = add_noise(data, delta, seed, rule)
    coeffs = tikhonov_solve(system, noisy, plan.alpha)
    exact = PlaneWave(k=k, direction=direction)
    report = error_report(problem, coeffs, exact, grid, rule)
    return CaseResult(plan=plan, problem=problem, rule=rule,
                      coefficients=coeffs, report=report,
                      mu_min=system.mu_min, seed=seed)


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------
def _meta_lines(meta: dict) -> list[str]:
    return [f"# {key}={json.dumps(value)}" for key, value in meta.items()]


def _write_text(path: str, lines: list[str]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def write_report_json(path: str, report: ErrorReport) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(report.as_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_coefficients_csv(path: str, coeffs: CoefficientVector,
                           meta: dict) -> None:
    lines = _meta_lines(meta)
    lines.append("n,real,imag")
    n_order = coeffs.order
    for i, value in enumerate(coeffs.coeffs):
        lines.append(f"{i - n_order},{float(value.real)!r},{float(value.imag)!r}")
    _write_text(path, lines)


_SWEEP_COLUMNS = ("row_type,k,delta,seed,N,alpha,M_q,m_overridden,mu_min,"
                  "rel_l2_interior,rel_h1semi_interior,rel_l2_boundary,"
                  "rel_l2_normal_derivative,error")


def _sweep_row(result: CaseResult) -> str:
    rep = result.report
    return ",".join([
        "cell", repr(result.problem.k), repr(result.plan.delta),
        str(result.seed), str(result.plan.N), repr(result.plan.alpha),
        str(result.rule.size), str(int(result.problem.m_overridden)),
        repr(result.mu_min), repr(rep.rel_l2_interior),
        repr(rep.rel_h1semi_interior), repr(rep.rel_l2_boundary),
        repr(rep.rel_l2_normal_derivative), ""])


def _failed_row(k: float, delta: float, seed: int, code: str) -> str:
    return ",".join(["cell", repr(k), repr(delta), str(seed)]
                    + [""] * 9 + [code])


def _median_row(k: float, delta: float, group: list[CaseResult]) -> str:
    med = lambda pick: np.median([pick(r) for r in group])
    first = group[0]
    return ",".join([
        "median", repr(k), repr(delta), "", str(first.plan.N),
        repr(first.plan.alpha), str(first.rule.size),
        str(int(first.problem.m_overridden)),
        f"{med(lambda r: r.mu_min):.6e}",
        f"{med(lambda r: r.report.rel_l2_interior):.6e}",
        f"{med(lambda r: r.report.rel_h1semi_interior):.6e}",
        f"{med(lambda r: r.report.rel_l2_boundary):.6e}",
        f"{med(lambda r: r.report.rel_l2_normal_derivative):.6e}", ""])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def _single(values: list, what: str) -> float:
    if len(values) != 1:
        raise ValidationError("expected_single_case",
                              f"this command needs a single {what}, got {values}")
    return values[0]


def _prepare(config: ExperimentConfig):
    radii = compute_radii(config.curve)
    tau0 = resolve_tau0(config, radii)
    grid = build_interior_grid(config.curve, radii, config.grid_resolution)
    node_count = None if config.node_count == "auto" else int(config.node_count)
    return radii, tau0, grid, node_count


def run_solve(config: ExperimentConfig, out_dir: str) -> dict:
    """Solve a single (k, delta) case and write report + coefficients."""
    k = _single(config.k_list, "k")
    delta = _single(config.delta_list, "delta")
    radii, tau0, grid, node_count = _prepare(config)
    result = solve_case(config.curve, radii, k, delta, config.seeds[0],
                        eta=config.eta, tau0=tau0,
                        direction=config.direction, grid=grid,
                        node_count=node_count)
    meta = case_metadata(result, grid, config)
    report = ErrorReport(**{**result.report.as_dict(), "metadata": meta})
    write_report_json(os.path.join(out_dir, "report.json"), report)
    write_coefficients_csv(os.path.join(out_dir, "coefficients.csv"),
                           result.coefficients, meta)
    logger.info("solve: k=%g delta=%g N=%d -> interior %.3e, boundary %.3e",
                k, delta, result.plan.N, report.rel_l2_interior,
                report.rel_l2_boundary)
    return report.as_dict()


def _sweep_pair(config: ExperimentConfig, radii, tau0, grid, node_count,
                k: float, delta: float):
    """All seeds of one (k, delta) cell; assembly and SVD are shared."""
    rows: list[str] = []
    group: list[CaseResult] = []
    try:
        plan = select_parameters(k, delta, config.eta, radii, tau0)
        problem = make_problem(config.curve, radii, k, tau0, plan.N)
        rule = build_quadrature(config.curve,
                                node_count or default_node_count(plan.N))
        system = svd(assemble_operator(problem, rule))
        data = plane_wave_data(problem, rule, config.direction)
        exact = PlaneWave(k=k, direction=config.direction)
    except FbmError as exc:
        logger.warning("sweep cell (k=%g, delta=%g) failed: %s", k, delta, exc)
        return [_failed_row(k, delta, seed, exc.code) for seed in config.seeds], []
    for seed in config.seeds:
        try:
            noisy = add_noise(data, delta, seed, rule)
            coeffs = tikhonov_solve(system, noisy, plan.alpha)
            report = error_report(problem, coeffs, exact, grid, rule)
            result = CaseResult(plan=plan, problem=problem, rule=rule,
                                coefficients=coeffs, report=report,
                                mu_min=system.mu_min, seed=seed)
            rows.append(_sweep_row(result))
            group.append(result)
        except FbmError as exc:
            logger.warning("sweep cell (k=%g, delta=%g, seed=%d) failed: %s",
                           k, delta, seed, exc)
            rows.append(_failed_row(k, delta, seed, exc.code))
    if group:
        rows.append(_median_row(k, delta, group))
    return rows, group


def run_sweep(config: ExperimentConfig, out_dir: str, threads: int = 1) -> str:
    """Sweep the (k, delta, seed) lattice into one CSV table."""
    radii, tau0, grid, node_count = _prepare(config)
    pairs = [(k, delta) for k in config.k_list for delta in config.delta_list]
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(
                lambda pair: _sweep_pair(config, radii, tau0, grid, node_count,
                                         *pair), pairs))
    else:
        outcomes = [_sweep_pair(config, radii, tau0, grid, node_count, k, delta)
                    for k, delta in pairs]

    all_rows = [row for rows, _ in outcomes for row in rows]
    if not any(group for _, group in outcomes):
        raise NumericalError("all_cells_failed", "every sweep cell failed")
    meta = {
        "command": "sweep", "curve": config.curve.name,
        "k": config.k_list, "delta": config.delta_list, "eta": config.eta,
        "tau0": tau0, "tau_min": radii.tau_min,
        "M_q": config.node_count, "grid_resolution": config.grid_resolution,
        "seeds": config.seeds, "direction": list(map(float, config.direction)),
        "column_order": "n=-N..N",
        "noise_model": "complex gaussian, exact relative L2(Gamma) norm",
        "version": __version__,
    }
    path = os.path.join(out_dir, "sweep.csv")
    _write_text(path, _meta_lines(meta) + [_SWEEP_COLUMNS] + all_rows)
    logger.info("sweep: wrote %d rows to %s", len(all_rows), path)
    return path


def run_svd_study(config: ExperimentConfig, out_dir: str, n_list) -> str:
    """Record mu_min against truncation order N, with the fitted slope."""
    k = _single(config.k_list, "k")
    radii = compute_radii(config.curve)
    tau0 = resolve_tau0(config, radii)
    node_count = None if config.node_count == "auto" else int(config.node_count)
    study = svd_decay_study(config.curve, radii, k, tau0, n_list,
                            node_count=node_count)
    products = study.bound_products(tau0)
    meta = {
        "command": "svd", "curve": config.curve.name, "k": k,
        "eta": config.eta, "tau0": tau0, "tau_min": radii.tau_min,
        "M_q": config.node_count, "version": __version__,
    }
    lines = _meta_lines(meta)
    lines.append("N,mu_min,bound_product")
    for n_exp, mu, prod in zip(study.orders, study.mu_min, products):
        lines.append(f"{int(n_exp)},{float(mu)!r},{float(prod)!r}")
    slope = "n/a" if study.slope is None else repr(study.slope)
    lines.append(f"# fitted_slope={slope}")
    path = os.path.join(out_dir, "svd_study.csv")
    _write_text(path, lines)
    logger.info("svd study: %d orders, slope %s", study.orders.size, slope)
    return path


def run_trace_plot(config: ExperimentConfig, out_dir: str, k: float,
                   delta: float, seed: int, samples: int = 512) -> tuple[str, str]:
    """Write Re u and Re u_N sampled on the boundary as (t, value) files."""
    radii, tau0, grid, node_count = _prepare(config)
    result = solve_case(config.curve, radii, k, delta, seed,
                        eta=config.eta, tau0=tau0,
                        direction=config.direction, grid=grid,
                        node_count=node_count)
    t = 2.0 * np.pi * np.arange(samples) / samples
    points = curve_point(config.curve, t)
    exact = PlaneWave(k=k, direction=config.direction)
    u_exact = np.real(exact.value(points))
    u_numeric = np.real(evaluate_field(result.problem, result.coefficients,
                                       points))
    meta = case_metadata(result, grid, config)
    meta["command"] = "plot"
    paths = (os.path.join(out_dir, "trace_exact.txt"),
             os.path.join(out_dir, "trace_numeric.txt"))
    for path, series in zip(paths, (u_exact, u_numeric)):
        lines = _meta_lines(meta)
        lines.extend(f"{float(ti)!r} {float(vi)!r}" for ti, vi in zip(t, series))
        _write_text(path, lines)
    logger.info("plot: wrote %d samples, max gap %.3e", samples,
                float(np.max(np.abs(u_exact - u_numeric))))
    return paths


# ---------------------------------------------------------------------------
# Argument parsing and entry point
# ---------------------------------------------------------------------------
def _parse_order_list(text: str) -> list[int]:
    """Parse "4..24:2" (inclusive range with step) or "4,6,8"."""
    try:
        if ".." in text:
            start_part, _, rest = text.partition("..")
            stop_part, _, step_part = rest.partition(":")
            step = int(step_part) if step_part else 1
            return list(range(int(start_part), int(stop_part) + 1, step))
        return [int(item) for item in text.split(",")]
    except ValueError as exc:
        raise ValidationError("bad_order_list",
                              f"cannot parse order list {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbm",
        description="Fourier-Bessel solver for the 2D Helmholtz impedance problem")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to JSON config")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("-v", "--verbose", action="store_true")

    p_solve = sub.add_parser("solve", help="solve a single (k, delta) case")
    common(p_solve)

    p_sweep = sub.add_parser("sweep", help="sweep over k, delta, and seeds")
    common(p_sweep)
    p_sweep.add_argument("--threads", type=int, default=None,
                         help="parallel sweep cells (default 1 or FBM_THREADS)")

    p_svd = sub.add_parser("svd", help="smallest-singular-value decay study")
    common(p_svd)
    p_svd.add_argument("--N", required=True, dest="orders",
                       help="orders, e.g. 4..24:2 or 4,8,12")

    p_plot = sub.add_parser("plot", help="boundary trace data for plotting")
    common(p_plot)
    p_plot.add_argument("--k", type=float, required=True)
    p_plot.add_argument("--delta", type=float, required=True)
    p_plot.add_argument("--seed", type=int, default=1)
    return parser


def _thread_count(cli_value: int | None) -> int:
    if cli_value is not None:
        return max(1, cli_value)
    env = os.environ.get("FBM_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer FBM_THREADS=%r", env)
    return 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        out_dir = args.out or config.output_dir
        if args.command == "solve":
            run_solve(config, out_dir)
        elif args.command == "sweep":
            run_sweep(config, out_dir, threads=_thread_count(args.threads))
        elif args.command == "svd":
            run_svd_study(config, out_dir, _parse_order_list(args.orders))
        elif args.command == "plot":
            run_trace_plot(config, out_dir, args.k, args.delta, args.seed)
        return 0
    except ValidationError as exc:
        print(json.dumps({"error": exc.code, "message": exc.message}),
              file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(json.dumps({"error": exc.code, "message": exc.message}),
              file=sys.stderr)
        return 3
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(json.dumps({"error": "numerical_failure", "message": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
