"""Command-line entry point: every experiment as a seeded CSV/JSON run.

Exit codes: 0 success, 1 runtime failure, 2 usage error.  Values starting
with a minus sign must be attached to their flag, e.g. ``--mu=-0.5,0``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

from shadowlab import angular, classic, estimators, montecarlo
from shadowlab.errors import ConfigurationError, DegenerateRayError, DomainError, SimulationError
from shadowlab.geometry import TWO_PI, PlanePoint, PolarPoint, polar_to_cartesian

DEFAULT_SAMPLES = 100_000

COMMANDS = (
    "shadow-mean",
    "shadow-risk",
    "risk-curve",
    "density-eval",
    "density-gof",
    "posterior-mean",
    "bayes-opt",
    "poisson-demo",
    "gaussian-demo",
)


class UsageError(Exception):
    pass


class _Exit(Exception):
    def __init__(self, status: int):
        self.status = status


# -- rendering ---------------------------------------------------------------


def format_number(v) -> str:
    """Shortest round-trip text for a number; integral floats drop the ``.0``."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        r = repr(v)
        return r[:-2] if r.endswith(".0") else r
    return str(v)


def render_table(rows: Sequence, columns: Sequence[str], fmt: str, single: bool = False) -> bytes:
    """Render rows (dicts or sequences in ``columns`` order) as CSV or JSON bytes.

    CSV always carries a header and uses ``\\n`` line endings.  JSON is one
    object when ``single`` is set, otherwise an array; keys follow ``columns``.
    """
    records = [r if isinstance(r, dict) else dict(zip(columns, r)) for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in records:
            w.writerow([format_number(r[c]) for c in columns])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        objs = [{c: r[c] for c in columns} for r in records]
        payload = objs[0] if single and len(objs) == 1 else objs
        return (json.dumps(payload, allow_nan=False) + "\n").encode("utf-8")
    raise UsageError(f"unknown format {fmt!r}")


# -- argument parsing --------------------------------------------------------


def _floats(text: str) -> list:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def _pair(text: str) -> tuple:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two numbers 'a,b', got {text!r}")
    return tuple(vals)


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _build_parser(out, err) -> argparse.ArgumentParser:
    class Parser(argparse.ArgumentParser):
        def _print_message(self, message, file=None):
            if message:
                stream = err if file is sys.stderr else out
                stream.write(message.encode("utf-8"))

        def exit(self, status=0, message=None):
            if message:
                err.write(message.encode("utf-8"))
            raise _Exit(status)

        def error(self, message):
            self.print_usage(sys.stderr)
            self.exit(2, f"{self.prog}: error: {message}\n")

    common = Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (64-bit unsigned, default 0)")
    common.add_argument("--stream-id", type=int, default=0, help="RNG stream id (default 0)")
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="Monte Carlo draws / replications")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=1, help="threads; results do not depend on it")

    source = Parser(add_help=False)
    g = source.add_mutually_exclusive_group()
    g.add_argument("--mu", type=_pair, metavar="X,Y", help="source location, Cartesian (default 0,0)")
    g.add_argument("--mu-polar", type=_pair, metavar="RHO,PHI", help="source location, polar")

    parser = Parser(prog="shadowlab", description="Shadow-on-a-disk estimation experiments.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=Parser)
    sub.required = True

    p = sub.add_parser("shadow-mean", parents=[common, source], help="Monte Carlo mean of the shadow point")
    p = sub.add_parser("shadow-risk", parents=[common, source], help="Monte Carlo risk of c*X")
    p.add_argument("--c", type=_finite, default=estimators.BAYES_C)
    p = sub.add_parser("risk-curve", parents=[common], help="risk of c*X over a c x rho grid")
    p.add_argument("--c-values", type=_floats, default=[estimators.UNBIASED_C, estimators.BAYES_C, 0.0])
    p.add_argument("--rho-values", type=_floats, default=[0.0, 0.5, 1.0])
    p = sub.add_parser("density-eval", parents=[common, source], help="angle density and CDF on a grid")
    p.add_argument("--theta", type=_floats, help="angles in [0, 2*pi]; default an even grid")
    p.add_argument("--points", type=int, default=16, help="grid size when --theta is absent")
    p = sub.add_parser("density-gof", parents=[common, source], help="chi-square test of simulated angles")
    p.add_argument("--bins", type=int, default=36)
    p.add_argument("--source", choices=("geometric", "inverse_cdf"), default="geometric")
    p = sub.add_parser("posterior-mean", parents=[common], help="posterior mean of the source by quadrature")
    p.add_argument("--theta", type=_floats, default=[0.0])
    p.add_argument("--panels", type=int, default=estimators.POSTERIOR_PANELS)
    p = sub.add_parser("bayes-opt", parents=[common], help="grid minimisation of the Bayes risk of c*X")
    p.add_argument("--c-lo", type=_finite, default=-1.0)
    p.add_argument("--c-hi", type=_finite, default=0.0)
    p.add_argument("--step", type=_finite, default=1e-3)
    p = sub.add_parser("poisson-demo", parents=[common], help="unbiased (-1)^x vs MLE exp(-2x)")
    p.add_argument("--x", type=int, default=3)
    p.add_argument("--lam", type=_finite, help="rate for exact MSEs and the unbiasedness partial sum")
    p.add_argument("--terms", type=int, default=80, help="partial-sum length")
    p = sub.add_parser("gaussian-demo", parents=[common], help="S^2 vs T^2 by simulation")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--sigma2", type=_finite, default=1.0)
    return parser


def _require(cond: bool, what: str):
    if not cond:
        raise UsageError(f"precondition violated: {what}")


def _source(args) -> PlanePoint:
    if args.mu_polar is not None:
        rho, phi = args.mu_polar
        _require(0.0 <= rho <= 1.0, "rho in --mu-polar must lie in [0, 1]")
        return polar_to_cartesian(PolarPoint.normalized(rho, phi))
    x, y = args.mu if args.mu is not None else (0.0, 0.0)
    p = PlanePoint(x, y)
    _require(p.in_disk(), "--mu must lie in the closed unit disk (x^2 + y^2 <= 1)")
    return p


def _stream(args) -> montecarlo.RandomStream:
    for name in ("seed", "stream_id"):
        v = getattr(args, name)
        _require(0 <= v < 2**64, f"--{name.replace('_', '-')} must be a 64-bit unsigned integer")
    return montecarlo.RandomStream(args.seed, args.stream_id)


def _samples(args, minimum: int = montecarlo.MIN_SAMPLES) -> int:
    _require(args.samples >= minimum, f"--samples must be >= {minimum}")
    _require(args.workers >= 1, "--workers must be >= 1")
    return args.samples


# -- commands ----------------------------------------------------------------


def _shadow_mean(args):
    mu, n, rng = _source(args), _samples(args), _stream(args)
    r = montecarlo.estimate_mean_shadow(mu, n, rng, args.workers)
    row = (r.mean.x, r.mean.y, r.std_error[0], r.std_error[1], r.n_samples)
    return [row], ("mean_x", "mean_y", "se_x", "se_y", "n"), True


def _shadow_risk(args):
    mu, n, rng = _source(args), _samples(args), _stream(args)
    r = montecarlo.estimate_shadow_risk(mu, args.c, n, rng, args.workers)
    rho = min(math.hypot(mu.x, mu.y), 1.0)
    row = (args.c, mu.x, mu.y, r.mean, r.std_error, r.n_samples, float(estimators.shadow_mse(args.c, rho)))
    return [row], ("c", "mu_x", "mu_y", "mean", "std_error", "n", "closed_form"), True


def _risk_curve(args):
    n, rng = _samples(args), _stream(args)
    _require(all(0.0 <= r <= 1.0 for r in args.rho_values), "--rho-values must lie in [0, 1]")
    rows = montecarlo.risk_curve(args.c_values, args.rho_values, n, rng, args.workers)
    return rows, montecarlo.RISK_CURVE_COLUMNS, False


def _density_eval(args):
    law = angular.AngularLaw.from_point(_source(args))
    if args.theta is not None:
        thetas = args.theta
        _require(all(0.0 <= t <= TWO_PI for t in thetas), "--theta values must lie in [0, 2*pi]")
    else:
        _require(args.points >= 1, "--points must be >= 1")
        thetas = [TWO_PI * k / args.points for k in range(args.points)]
    rows = [(t, angular.density(law, t), angular.cdf(law, t)) for t in thetas]
    return rows, ("theta", "density", "cdf"), False


def _density_gof(args):
    mu, rng = _source(args), _stream(args)
    _require(args.bins >= 2, "--bins must be >= 2")
    n = _samples(args, max(montecarlo.MIN_SAMPLES, 50 * args.bins))
    r = montecarlo.chi_square_gof(mu, n, args.bins, args.source, rng, args.workers)
    from scipy.stats import chi2

    critical = float(chi2.ppf(0.999, r.dof))
    row = (r.statistic, r.dof, r.bins, r.n_samples, critical, r.statistic < critical)
    return [row], ("statistic", "dof", "bins", "n", "critical_999", "passes"), True


def _posterior_mean(args):
    _require(args.panels >= 8, "--panels must be >= 8")
    rows = []
    for t in args.theta:
        m = estimators.posterior_mean_numeric(estimators.PosteriorLaw(t), args.panels)
        rows.append((t, m.x, m.y, -math.cos(t) / 4.0, -math.sin(t) / 4.0))
    return rows, ("theta", "mean_x", "mean_y", "closed_x", "closed_y"), False


def _bayes_opt(args):
    _require(args.step > 0, "--step must be > 0")
    _require(args.c_lo <= args.c_hi, "--c-lo must not exceed --c-hi")
    c_star, risk = estimators.minimize_bayes_risk(args.c_lo, args.c_hi, args.step)
    return [(c_star, risk)], ("c_star", "risk"), True


def _poisson_demo(args):
    _require(args.x >= 0, "--x must be a non-negative integer")
    cols = ["x", "unbiased_estimate", "mle_estimate"]
    row = [args.x, classic.unbiased_delta(args.x), classic.mle_estimate(args.x)]
    if args.lam is not None:
        _require(args.lam >= 0, "--lam must be >= 0")
        _require(args.terms >= 1, "--terms must be >= 1")
        lam = args.lam
        cols += ["lam", "target", "partial_sum", "mse_unbiased", "mse_mle", "mse_unbiased_series", "mse_mle_series"]
        row += [
            lam,
            math.exp(-2.0 * lam),
            classic.unbiasedness_partial_sum(lam, args.terms),
            classic.poisson_estimator_mse("unbiased", lam),
            classic.poisson_estimator_mse("mle", lam),
            classic.poisson_estimator_mse_series("unbiased", lam),
            classic.poisson_estimator_mse_series("mle", lam),
        ]
    return [row], tuple(cols), True


def _gaussian_demo(args):
    _require(args.n >= 2, "--n must be >= 2")
    _require(args.sigma2 > 0, "--sigma2 must be > 0")
    reps, rng = _samples(args), _stream(args)
    res = montecarlo.simulate_variance_estimators(args.n, args.sigma2, reps, rng, args.workers)
    exact_s, exact_t = classic.variance_estimator_mse(args.n, args.sigma2)
    cols = ["n", "sigma2", "reps"]
    row = [args.n, args.sigma2, reps]
    for key in ("mean_s2", "mean_t2", "mse_s2", "mse_t2"):
        cols += [key, "se_" + key]
        row += [res[key].mean, res[key].std_error]
    cols += ["exact_mse_s2", "exact_mse_t2"]
    row += [exact_s, exact_t]
    return [row], tuple(cols), True


_DISPATCH = {
    "shadow-mean": _shadow_mean,
    "shadow-risk": _shadow_risk,
    "risk-curve": _risk_curve,
    "density-eval": _density_eval,
    "density-gof": _density_gof,
    "posterior-mean": _posterior_mean,
    "bayes-opt": _bayes_opt,
    "poisson-demo": _poisson_demo,
    "gaussian-demo": _gaussian_demo,
}


def run(argv: Sequence[str], out=None, err=None) -> int:
    """Run one command; write data to ``out`` and diagnostics to ``err`` (bytes)."""
    out = out if out is not None else sys.stdout.buffer
    err = err if err is not None else sys.stderr.buffer
    parser = _build_parser(out, err)
    try:
        args = parser.parse_args(list(argv))
        rows, columns, single = _DISPATCH[args.command](args)
        data = render_table(rows, columns, args.format, single=single)
    except _Exit as e:
        return e.status
    except UsageError as e:
        err.write(f"shadowlab: error: {e}\n".encode("utf-8"))
        return 2
    except (ConfigurationError, DomainError, DegenerateRayError, SimulationError) as e:
        err.write(f"shadowlab: {type(e).__name__}: {e}\n".encode("utf-8"))
        return 1
    out.write(data)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
