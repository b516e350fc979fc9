"""Command-line harness.

Exit codes: 0 converged (or all checks passed), 1 validation failure,
2 max-iterations, 3 line-search-stalled, 4 not-positive-definite,
5 domain-error, 64 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from gradnewton import conformal, diagnostics, problems
from gradnewton.errors import GradNewtonError, InvalidInputError
from gradnewton.linalg import ConstraintSpec, eigen_bounds
from gradnewton.oracle import gradient_check_error, hessian_check_error
from gradnewton.solver import SolverConfig, SolveResult, Status, solve, solve_armijo_baseline
from gradnewton.traceio import dump_summary, summary_dict, with_energies, write_trace_csv

log = logging.getLogger("gradnewton")

EXIT_CODES = {
    Status.CONVERGED: 0,
    Status.MAX_ITERATIONS: 2,
    Status.STALLED: 3,
    Status.NOT_PD: 4,
    Status.DOMAIN_ERROR: 5,
}
EXIT_VALIDATION_FAILED = 1
EXIT_USAGE = 64

VARIANTS = ("energy-free", "energy-free-no-first-cond", "armijo")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclasses.dataclass
class Problem:
    name: str
    factory: object  # zero-arg callable returning a fresh oracle
    x0: np.ndarray
    mesh: conformal.TriangleMesh | None = None
    theta_hat: np.ndarray | None = None

    def oracle(self):
        return self.factory()


def _resolve_mesh_path(arg: str) -> Path:
    p = Path(arg)
    if p.exists():
        return p
    if arg in ("tetrahedron", "icosahedron"):
        return conformal.builtin_mesh_path(arg)
    raise UsageError(f"mesh file not found: {arg}")


def build_problem(args) -> Problem:
    if args.mesh is not None:
        if args.problem is not None:
            raise UsageError("--problem and --mesh are mutually exclusive")
        mesh = conformal.load_mesh(_resolve_mesh_path(args.mesh))
        spec = args.curvature or "uniform"
        if spec not in ("uniform", "perturbed") and not spec.startswith("perturbed:") \
                and not Path(spec).exists():
            raise UsageError(f"curvature file not found: {spec}")
        theta_hat = conformal.load_targets(spec, mesh, seed=args.seed)
        x0 = np.zeros(mesh.n_vertices)
        return Problem(
            f"mesh:{args.mesh}",
            lambda: conformal.ConformalProblem(mesh, theta_hat),
            x0,
            mesh,
            theta_hat,
        )
    if args.curvature is not None:
        raise UsageError("--curvature requires --mesh")
    name = args.problem or "quadratic-diag"
    _, x0 = problems.get_fixture(name, seed=args.seed)
    return Problem(name, lambda: problems.get_fixture(name, seed=args.seed)[0], x0)


def parse_x0(text: str | None, default: np.ndarray) -> np.ndarray:
    if text is None:
        return default
    try:
        x0 = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"bad --x0 {text!r}; expected comma-separated numbers") from None
    if x0.shape != default.shape:
        raise UsageError(f"--x0 has {x0.size} entries, problem dimension is {default.size}")
    return x0


def solver_config(args, use_first_condition: bool = True) -> SolverConfig:
    return SolverConfig(
        alpha=args.alpha,
        epsilon=args.epsilon,
        max_iterations=args.max_iter,
        use_first_condition=use_first_condition,
    )


def run_variant(variant: str, oracle, x0, args) -> tuple[SolveResult, SolverConfig]:
    if variant == "armijo":
        if not oracle.has_energy:
            raise UsageError("the armijo variant needs a problem with an energy")
        cfg = solver_config(args)
        return solve_armijo_baseline(oracle, x0, cfg), cfg
    cfg = solver_config(args, use_first_condition=(variant == "energy-free"))
    return solve(oracle, x0, cfg), cfg


def analyze(result: SolveResult, oracle, cfg: SolverConfig):
    """Bounds and convergence report; ``None`` unless the run converged."""
    if not result.converged:
        return None, None
    bounds = diagnostics.estimate_bounds(oracle, result)
    report = diagnostics.classify_convergence(result, bounds, cfg, oracle)
    return bounds, report


def _variant_from_args(args) -> str:
    if args.no_first_condition:
        if args.variant == "armijo":
            raise UsageError("--no-first-condition does not apply to the armijo variant")
        return "energy-free-no-first-cond"
    return args.variant


def cmd_solve(args) -> int:
    problem = build_problem(args)
    x0 = parse_x0(args.x0, problem.x0)
    oracle = problem.oracle()
    variant = _variant_from_args(args)
    result, cfg = run_variant(variant, oracle, x0, args)
    bounds, report = analyze(result, oracle, cfg)
    diag = None if bounds is None else diagnostics.report_to_dict(bounds, report)
    if args.trace_out:
        write_trace_csv(with_energies(result, oracle), args.trace_out)
    summary = summary_dict(result, diag, problem=problem.name, variant=variant)
    text = dump_summary(summary, args.summary_out)
    if not args.summary_out:
        sys.stdout.write(text)
    if not result.converged:
        print(f"solve ended with status {result.status.value}: {result.message}", file=sys.stderr)
    return EXIT_CODES[result.status]


def _rate_text(report) -> str:
    if report is None:
        return "-"
    if report.p is not None:
        return f"{report.rate} (p={report.p:.2f})"
    if report.linear_rate is not None:
        return f"{report.rate} (ratio={report.linear_rate:.3f})"
    return report.rate


def cmd_compare(args) -> int:
    problem = build_problem(args)
    x0 = parse_x0(args.x0, problem.x0)
    variants = args.variants or [
        v for v in VARIANTS if v != "armijo" or problem.oracle().has_energy
    ]
    rows = []
    worst = 0
    for variant in variants:
        oracle = problem.oracle()
        result, cfg = run_variant(variant, oracle, x0, args)
        _, report = analyze(result, oracle, cfg)
        c = result.counters
        rows.append([
            variant, result.status.value, str(result.iterations), str(c.energy_evals),
            str(c.gradient_evals), str(c.hessian_evals), f"{result.final_grad_norm:.3e}",
            _rate_text(report),
        ])
        worst = max(worst, EXIT_CODES[result.status])
    header = ["variant", "status", "iterations", "energy_evals", "gradient_evals",
              "hessian_evals", "final_grad_norm", "rate"]
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(cell.ljust(wd) for cell, wd in zip(r, widths)).rstrip())
    return worst


def validation_checks(problem: Problem, seed: int = 0, samples: int = 5):
    """Yield ``(name, passed, detail)`` for every applicable oracle check."""
    oracle = problem.oracle()
    rng = np.random.default_rng(seed)
    n = oracle.dimension
    if problem.mesh is not None:
        points = [rng.uniform(-0.1, 0.1, n) for _ in range(samples)]
    else:
        scale = 0.1 * max(1.0, float(np.abs(problem.x0).max()))
        points = [problem.x0 + rng.uniform(-scale, scale, n) for _ in range(samples)]

    if oracle.has_energy:
        err = max(gradient_check_error(oracle, u) for u in points)
        yield "gradient-fd", err <= 1e-5, f"max rel err {err:.2e} (tol 1e-5)"
    err = max(hessian_check_error(oracle, u) for u in points)
    yield "hessian-fd", err <= 1e-4, f"max rel err {err:.2e} (tol 1e-4)"
    asym = max(float(np.abs(oracle.hessian(u) - oracle.hessian(u).T).max()) for u in points)
    yield "symmetry", asym <= 1e-12, f"max |H - H^T| {asym:.2e}"

    constraint = getattr(oracle, "natural_constraint", ConstraintSpec.none())
    lo = min(eigen_bounds(oracle.hessian(u), constraint)[0] for u in points)
    yield "positive-definite", lo > 0.0, f"min reduced eigenvalue {lo:.3e}"

    if problem.mesh is not None:
        null = max(float(np.abs(oracle.hessian(u) @ np.ones(n)).max()) for u in points)
        yield "nullspace", null <= 1e-10, f"max |H 1| {null:.2e}"
        gb = conformal.check_gauss_bonnet(problem.mesh, problem.theta_hat)
        yield "gauss-bonnet", gb.feasible, f"defect {gb.defect:+.3e} (tol {conformal.GAUSS_BONNET_TOL:g})"


def cmd_validate(args) -> int:
    problem = build_problem(args)
    ok = True
    for name, passed, detail in validation_checks(problem, seed=args.seed):
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'}  {name:<18} {detail}")
    return 0 if ok else EXIT_VALIDATION_FAILED


def cmd_demo_counterexample(args) -> int:
    oracle_a = problems.make_cubic(args.eps)
    oracle_b = problems.make_cubic(args.eps)
    x0 = np.array([args.x0])
    if args.x0 > 0:
        print("warning: x0 > 0; the full step is only rejected when approaching 0 from below",
              file=sys.stderr)
    base = dict(alpha=args.alpha, epsilon=args.epsilon, max_iterations=args.max_iter)
    with_cond = solve(oracle_a, x0, SolverConfig(use_first_condition=True, **base))
    sign_only = solve(oracle_b, x0, SolverConfig(use_first_condition=False, **base))

    def column(result):
        xs = [float(p[0]) for p in result.path]
        out = []
        for rec in result.trace:
            x, x_next = xs[rec.k], xs[rec.k + 1]
            ratio = abs(x_next) / abs(x) if x != 0 else float("nan")
            out.append((rec.step, x_next, ratio))
        return out

    a, b = column(with_cond), column(sign_only)
    onset = diagnostics.quadratic_onset(with_cond)
    print(f"f(x) = x^2 + {args.eps:g} x^3, x0 = {args.x0:g}, alpha = {args.alpha:g}")
    print(f"{'k':>3}  {'t (first cond)':>14} {'x_k+1':>12} {'|ratio|':>9}   "
          f"{'t (sign only)':>13} {'x_k+1':>12} {'|ratio|':>9}")
    for k in range(max(len(a), len(b))):
        left = "{:>14g} {:>12.4e} {:>9.4f}".format(*a[k]) if k < len(a) else " " * 37
        right = "{:>13g} {:>12.4e} {:>9.4f}".format(*b[k]) if k < len(b) else ""
        mark = " <- full steps from here" if onset is not None and k == onset else ""
        print(f"{k:>3}  {left}   {right}{mark}")
    print(f"first condition: {with_cond.status.value} in {with_cond.iterations} iterations")
    print(f"sign only:       {sign_only.status.value} in {sign_only.iterations} iterations")
    return max(EXIT_CODES[with_cond.status], EXIT_CODES[sign_only.status])


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", help="analytic fixture: " + ", ".join(problems.FIXTURE_NAMES))
    p.add_argument("--mesh", help="OBJ or lenmesh file, or 'tetrahedron' / 'icosahedron'")
    p.add_argument("--curvature", help="'uniform', 'perturbed[:MAG]', or a file of angle sums")
    p.add_argument("--seed", type=int, default=0)


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x0", help="comma-separated starting point")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradnewton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run one solve, write trace CSV and JSON summary")
    _add_common(p)
    _add_solver(p)
    p.add_argument("--variant", choices=VARIANTS, default="energy-free")
    p.add_argument("--no-first-condition", action="store_true")
    p.add_argument("--trace-out")
    p.add_argument("--summary-out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run several variants side by side")
    _add_common(p)
    _add_solver(p)
    p.add_argument("--variants", nargs="+", choices=VARIANTS)
    p.add_argument("--csv-out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="finite-difference and invariant checks")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("demo-counterexample", help="x^2 + eps x^3 with and without the first condition")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--x0", type=float, default=-0.5)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=cmd_demo_counterexample)
    return parser


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("GRADNEWTON_LOG", "WARNING").upper(), None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidInputError, OSError) as exc:
        print(f"gradnewton: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GradNewtonError as exc:
        print(f"gradnewton: error: {exc}", file=sys.stderr)
        return EXIT_CODES[Status.DOMAIN_ERROR]


if __name__ == "__main__":
    sys.exit(main())
