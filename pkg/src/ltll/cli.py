"""Command-line surface: fit, simulate, ellipse, and moments commands.

Every command is deterministic given its flags, seed, and input files.  The
seed comes from --seed, falling back to the LTLL_SEED environment variable,
then to a fixed default.  Output files are written atomically (temp file plus
rename).  Exit codes: 0 success, 1 error, 2 boundary-degenerate fit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .datasets import BUNDLED_DATASETS, DatasetFile, apply_truncation, load_csv
from .distribution import LTLLParams, log_likelihood, mc_moments
from .mcmc import McmcConfig, PriorSpec, credible_ellipse, run_chain
from .mle import confidence_ellipse, fit_mle
from .numerics import RngStream
from .simulation import (
    SAMPLE_SIZE_GRID,
    TRUNCATION_GRID,
    Scenario,
    atomic_write_text,
    sample_size_sweep,
    sample_size_trends,
    table1_csv,
    table2_csv,
    table3_csv,
    truncation_sweep,
    truncation_trends,
)

DEFAULT_SEED = 20240

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BOUNDARY = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for
    # boundary fits here, so remap usage problems onto the error code.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _grid_spec(text: str):
    lo, hi, count = text.split(":")
    return float(lo), float(hi), int(count)


def build_parser() -> _Parser:
    parser = _Parser(prog="ltll", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="RNG master seed (falls back to $LTLL_SEED, then %d)" % DEFAULT_SEED)
        p.add_argument("--out", default=None, help="output path (default: stdout where sensible)")
        p.add_argument("--config", default=None,
                       help="JSON file whose keys mirror the long flags; explicit flags win")

    def add_data(p):
        p.add_argument("--data", required=True,
                       help="CSV path, or a bundled dataset name: %s" % ", ".join(BUNDLED_DATASETS))
        p.add_argument("--column", default=None,
                       help="column header name or 0-based index (default: first column)")
        p.add_argument("--xl", type=float, default=0.0, help="left-truncation point (default 0)")
        p.add_argument("--units", default=None, help="opaque unit label echoed into outputs")

    def add_mcmc(p):
        p.add_argument("--prior", default="1.0,0.01,1.0,0.01",
                       help="Gamma prior hyperparameters a1,b1,a2,b2")
        p.add_argument("--iters", type=int, default=20000)
        p.add_argument("--burnin", type=int, default=5000)
        p.add_argument("--thin", type=int, default=5)
        p.add_argument("--steps", default="0.1,0.1",
                       help="log-space proposal std devs: step_alpha,step_beta")
        p.add_argument("--chains", type=int, default=1)

    p_fit = sub.add_parser("fit", help="fit the distribution to a dataset")
    add_data(p_fit)
    add_mcmc(p_fit)
    p_fit.add_argument("--method", choices=["mle", "bayes", "both"], default="both")
    p_fit.add_argument("--format", choices=["json", "csv"], default="json")
    add_common(p_fit)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo study and emit table CSVs")
    p_sim.add_argument("--sweep", choices=["truncation", "n"], required=True)
    p_sim.add_argument("--truth", default="2.0,3.0", help="true alpha,beta")
    p_sim.add_argument("--xl", type=float, default=1.0,
                       help="truncation point for the sample-size sweep (default 1.0)")
    p_sim.add_argument("--n", type=int, default=1000, help="sample size per replicate")
    p_sim.add_argument("--replicates", type=int, default=1000)
    p_sim.add_argument("--fast", action="store_true", help="CI profile: 200 replicates")
    p_sim.add_argument("--levels", default=None,
                       help="truncation levels, e.g. 0.1,0.3,0.5,0.7,1.0")
    p_sim.add_argument("--sizes", default=None, help="sample sizes, e.g. 50,100,500,1000")
    p_sim.add_argument("--workers", type=int, default=1)
    add_mcmc(p_sim)
    add_common(p_sim)

    p_ell = sub.add_parser("ellipse", help="emit joint 95%% region polylines for a dataset fit")
    add_data(p_ell)
    add_mcmc(p_ell)
    p_ell.add_argument("--method", choices=["wald", "credible", "both"], default="both")
    p_ell.add_argument("--level", type=float, default=0.95, help="confidence/credibility level")
    p_ell.add_argument("--npoints", type=int, default=256)
    add_common(p_ell)

    p_mom = sub.add_parser("moments", help="Monte Carlo moment surfaces over a parameter grid")
    p_mom.add_argument("--alpha-grid", default="1.0:4.0:7", help="lo:hi:count")
    p_mom.add_argument("--beta-grid", default="1.5:5.0:8", help="lo:hi:count")
    p_mom.add_argument("--xl", type=float, default=0.70)
    p_mom.add_argument("--draws", type=int, default=20000)
    add_common(p_mom)

    return parser


def _apply_config(argv):
    """Expand --config JSON into synthetic flags; explicit flags win."""
    if "--config" not in argv:
        return argv
    path = argv[argv.index("--config") + 1]
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("--config file must hold a JSON object")
    extra = []
    for key, value in cfg.items():
        flag = "--" + str(key).replace("_", "-")
        if flag in argv:
            continue
        if isinstance(value, bool):
            if value:
                extra.append(flag)
        else:
            extra.extend([flag, str(value)])
    return argv + extra


def _seed_of(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("LTLL_SEED")
    return int(env) if env else DEFAULT_SEED


def _load_dataset(args) -> DatasetFile:
    if args.data in BUNDLED_DATASETS:
        return BUNDLED_DATASETS[args.data]()
    column = args.column
    if isinstance(column, str) and column.lstrip("-").isdigit():
        column = int(column)
    return load_csv(args.data, column)


def _mcmc_config(args, seed: int) -> McmcConfig:
    sa, sb = _float_list(args.steps)
    return McmcConfig(iterations=args.iters, burn_in=args.burnin, thin=args.thin,
                      step_alpha=sa, step_beta=sb, seed=seed, chains=args.chains)


def _prior(args) -> PriorSpec:
    a1, b1, a2, b2 = _float_list(args.prior)
    return PriorSpec(a1, b1, a2, b2)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)


def _pareto_note(fit) -> str:
    return (
        "fit degenerated to the Pareto boundary (beta0 <= beta_C): "
        f"density f(x) = (b/x_L) * (x/x_L)^-(b+1) for x > x_L = {fit.x_l:g}, "
        f"with b = beta0 = {fit.beta:.6g}; the scale alpha is not identified."
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    seed = _seed_of(args)
    data = _load_dataset(args)
    trunc = apply_truncation(data, args.xl)
    sample = trunc.sample
    methods = ["mle", "bayes"] if args.method == "both" else [args.method]

    results = []
    boundary_only = True
    for method in methods:
        doc: dict = {"method": method}
        if method == "mle":
            fit = fit_mle(sample)
            doc.update(
                alpha=fit.alpha, beta=fit.beta,
                ci_alpha=list(fit.ci_alpha) if fit.ci_alpha else None,
                ci_beta=list(fit.ci_beta) if fit.ci_beta else None,
                boundary=fit.boundary, loglik=fit.loglik,
            )
            if fit.boundary:
                print(_pareto_note(fit), file=sys.stderr)
            else:
                boundary_only = False
        else:
            res = run_chain(sample, prior=_prior(args), cfg=_mcmc_config(args, seed))
            doc.update(
                alpha=res.mean[0], beta=res.mean[1],
                ci_alpha=list(res.ci_alpha), ci_beta=list(res.ci_beta),
                boundary=False,
                loglik=log_likelihood(sample, res.mean[0], res.mean[1]),
                acceptance_rate=res.acceptance_rate,
                ess=[res.ess_alpha, res.ess_beta],
            )
            boundary_only = False
        doc.update(x_L=sample.x_l, n=sample.n, seed=seed, data=data.path)
        if args.units:
            doc["units"] = args.units
        results.append(doc)

    payload = results[0] if len(results) == 1 else results
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, allow_nan=False) + "\n", args.out)
    else:
        _emit(_fit_csv(results), args.out)
    return EXIT_BOUNDARY if boundary_only else EXIT_OK


_FIT_CSV_HEADER = ("method,alpha,beta,alpha_ci_l,alpha_ci_u,beta_ci_l,beta_ci_u,"
                   "x_L,n,boundary,loglik,acceptance_rate,ess_alpha,ess_beta")


def _fit_csv(results) -> str:
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return str(v).lower()
        if isinstance(v, float):
            return format(v, ".10g")
        return str(v)

    lines = [_FIT_CSV_HEADER]
    for doc in results:
        ca = doc.get("ci_alpha") or (None, None)
        cb = doc.get("ci_beta") or (None, None)
        ess = doc.get("ess") or (None, None)
        lines.append(",".join(cell(v) for v in [
            doc["method"], doc["alpha"], doc["beta"], ca[0], ca[1], cb[0], cb[1],
            doc["x_L"], doc["n"], doc["boundary"], doc["loglik"],
            doc.get("acceptance_rate"), ess[0], ess[1],
        ]))
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    seed = _seed_of(args)
    alpha, beta = _float_list(args.truth)
    replicates = 200 if args.fast else args.replicates
    base = Scenario(
        true_params=LTLLParams(alpha, beta, args.xl), n=args.n, replicates=replicates,
        prior=_prior(args), mcmc=_mcmc_config(args, seed), master_seed=seed,
    )
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)

    if args.sweep == "truncation":
        levels = _float_list(args.levels) if args.levels else list(TRUNCATION_GRID)
        res = truncation_sweep(base, levels, workers=args.workers)
        atomic_write_text(os.path.join(out_dir, "table1_truncation.csv"), table1_csv(res))
        atomic_write_text(os.path.join(out_dir, "table2_truncation.csv"), table2_csv(res))
        checks = truncation_trends(res)
    else:
        sizes = [int(v) for v in _float_list(args.sizes)] if args.sizes else list(SAMPLE_SIZE_GRID)
        res = sample_size_sweep(base, sizes, workers=args.workers)
        atomic_write_text(os.path.join(out_dir, "table3_sample_size.csv"), table3_csv(res))
        checks = sample_size_trends(res)

    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}]")
    boundary_total = sum(lv.metrics.mle.failures for lv in res)
    if boundary_total:
        print(f"note: {boundary_total} replicate(s) hit the Pareto boundary "
              "and were excluded from MLE aggregates", file=sys.stderr)
    return EXIT_OK


def cmd_ellipse(args) -> int:
    seed = _seed_of(args)
    data = _load_dataset(args)
    sample = apply_truncation(data, args.xl).sample
    gamma = 1.0 - args.level
    methods = ["wald", "credible"] if args.method == "both" else [args.method]
    stem = args.out or "ellipse"

    fit = fit_mle(sample)
    if fit.boundary:
        print(_pareto_note(fit), file=sys.stderr)
        return EXIT_BOUNDARY

    for method in methods:
        if method == "wald":
            ell = confidence_ellipse(fit, gamma, args.npoints)
        else:
            res = run_chain(sample, prior=_prior(args), cfg=_mcmc_config(args, seed))
            ell = credible_ellipse(res, gamma, args.npoints)
        rows = "\n".join(f"{p[0]:.10g},{p[1]:.10g}" for p in ell.points)
        atomic_write_text(f"{stem}_{method}.csv", "alpha,beta\n" + rows + "\n")
        sidecar = {
            "method": method,
            "center": [ell.center[0], ell.center[1]],
            "level": ell.level,
            "threshold": ell.threshold,
            "matrix": {"a11": ell.matrix.a11, "a12": ell.matrix.a12, "a22": ell.matrix.a22},
            "area": ell.area,
            "n": sample.n,
            "x_L": sample.x_l,
            "seed": seed,
        }
        if args.units:
            sidecar["units"] = args.units
        atomic_write_text(f"{stem}_{method}.json", json.dumps(sidecar, indent=2) + "\n")
    return EXIT_OK


def cmd_moments(args) -> int:
    seed = _seed_of(args)
    a_lo, a_hi, a_n = _grid_spec(args.alpha_grid)
    b_lo, b_hi, b_n = _grid_spec(args.beta_grid)
    alphas = np.linspace(a_lo, a_hi, a_n)
    betas = np.linspace(b_lo, b_hi, b_n)
    lines = ["alpha,beta,mean,variance,skewness,kurtosis"]
    cell = 0
    for a in alphas:
        for b in betas:
            m = mc_moments(LTLLParams(float(a), float(b), args.xl), args.draws,
                           RngStream(seed, cell))
            lines.append(",".join(format(v, ".10g") for v in (a, b, *m)))
            cell += 1
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "ellipse": cmd_ellipse,
    "moments": cmd_moments,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_apply_config(argv))
        return _COMMANDS[args.command](args)
    except SystemExit:
        raise
    except BrokenPipeError:
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"ltll: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
