"""Command-line surface.

Subcommands: explain, ptg, compare-sampling, calibrate, stability,
sensitivity. Every artifact is CSV (or the JSON explanation document) with a
provenance comment line embedding the resolved configuration and seed, so a
rerun with the same flags reproduces it byte for byte. Exit codes: 0 ok,
1 runtime failure, 2 usage error. The default output directory is taken
from $CREDEXP_OUTDIR, falling back to the working directory.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import evaluation
from .blackbox import load_csv_dataset, model_from_spec
from .evaluation import (
    SuiteCase,
    focused_bayes_explainer,
    ground_truth_phi,
    heteroscedastic_case,
    lipschitz_stability,
    prior_sensitivity_grid,
    ptg_suite,
    random_wls_explainer,
    synthetic_suite,
)
from .explain import build_perturbation_set, explain
from .kernels import ProximityKernel
from .posterior import PriorConfig, fit
from .ptg import PtgInputs, estimate_ptg
from .sampling import SamplingConfig, run_focused, run_random
from .space import InstanceContext, bits_to_string

__all__ = ["main"]


def _suite_registry() -> dict:
    reg = {c.name: c for c in synthetic_suite()}
    reg.update({c.name: c for c in ptg_suite()})
    hc = heteroscedastic_case()
    reg[hc.name] = hc
    return reg


def _resolve_case(args) -> SuiteCase:
    """Turn --model/--data/--instance flags into a SuiteCase."""
    reg = _suite_registry()
    if args.model in reg:
        return reg[args.model]
    if not os.path.exists(args.model):
        raise ValueError(f"--model {args.model!r} is neither a bundled case nor a file")
    with open(args.model) as fh:
        spec = json.load(fh)
    model = model_from_spec(spec, base_dir=os.path.dirname(os.path.abspath(args.model)))

    names = ()
    if args.data:
        header, data = load_csv_dataset(args.data)
        names = tuple(header)
        baseline = data.mean(axis=0)
        if args.instance is None:
            raise ValueError("--instance is required with --data")
        x = data[int(args.instance)]
    else:
        if args.instance is None:
            raise ValueError("--instance is required when --model is a file")
        x = np.array([float(v) for v in str(args.instance).split(",")])
        baseline = np.zeros_like(x)
    ctx = InstanceContext(x_original=x, baseline=baseline, feature_names=names)
    name = spec.get("name", spec.get("kind", "model"))
    return SuiteCase(name=name, group=name, make_model=lambda: model, ctx=ctx)


def _kernel(args) -> ProximityKernel:
    return ProximityKernel(
        kind=args.kernel,
        width=args.kernel_width,
        distance=args.distance,
        clamp_weight=args.clamp_weight,
    )


def _prior(args) -> PriorConfig:
    return PriorConfig(n0=args.prior_n0, sigma0_sq=args.prior_sigma0)


def _config_line(args, command: str) -> str:
    # the output directory does not influence artifact content, so it stays
    # out of the provenance line to keep reruns byte-identical anywhere
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out") and v is not None}
    return f"# credexp {command} config={json.dumps(cfg, sort_keys=True)}"


def _write_csv(path: str, provenance: str, columns, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(provenance + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else (repr(v) if isinstance(v, float) else str(v)) for v in row) + "\n")
    print(path)


def _outdir(args) -> str:
    out = args.out or os.environ.get("CREDEXP_OUTDIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _plot_explanation(doc: dict, path: str):
    """Bar chart of importances (sorted by magnitude) with interval whiskers."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    order = np.argsort(-np.abs(np.asarray(doc["phi_hat"])))
    names = [doc["feature_names"][i] for i in order]
    phi = np.asarray(doc["phi_hat"])[order]
    lo = np.asarray(doc["interval_low"])[order]
    hi = np.asarray(doc["interval_high"])[order]
    fig, ax = plt.subplots(figsize=(6, 0.5 * len(names) + 1.2))
    y = np.arange(len(names))[::-1]
    colors = ["#2a9d8f" if v >= 0 else "#e76f51" for v in phi]
    ax.barh(y, phi, color=colors, alpha=0.85)
    ax.errorbar(phi, y, xerr=[phi - lo, hi - phi], fmt="none", ecolor="black", capsize=3)
    ax.set_yticks(y, names)
    ax.axvline(0.0, color="gray", lw=0.8)
    ax.set_xlabel(f"importance with {doc['alpha']:.0%} credible interval")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(path)


def cmd_explain(args) -> int:
    case = _resolve_case(args)
    kernel = _kernel(args)
    pset = build_perturbation_set(
        case.ctx, case.make_model(), kernel, args.budget, seed=args.seed
    )
    post = fit(pset, prior=_prior(args), alpha=args.alpha)
    doc = post.to_dict()
    out = _outdir(args)
    path = os.path.join(out, "explanation.json")
    with open(path, "w") as fh:
        fh.write(_config_line(args, "explain") + "\n")
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(path)
    if args.dump_perturbations:
        bits = pset.Z[:, 1:] if pset.has_intercept else pset.Z
        rows = [
            (bits_to_string(bits[i].astype(int)), float(pset.Pi[i]), float(pset.Y[i]))
            for i in range(pset.N)
        ]
        _write_csv(
            os.path.join(out, "perturbations.csv"),
            _config_line(args, "explain"),
            ["bits", "weight", "label"],
            rows,
        )
    if args.plot:
        _plot_explanation(doc, os.path.join(out, "explanation.svg"))
    return 0


def cmd_ptg(args) -> int:
    case = _resolve_case(args)
    kernel = _kernel(args)
    model = case.make_model()
    seed_post = explain(
        case.ctx, model, kernel, n_perturbations=args.S,
        alpha=args.alpha, prior=_prior(args), seed=args.seed,
    )
    columns = ["W", "S", "s_sq_S", "pi_bar_S", "m", "raw", "G", "total"]
    if args.verify:
        columns += ["observed", "ratio"]
    rows = []
    for W in [float(w) for w in args.target_width.split(",")]:
        est = estimate_ptg(
            PtgInputs(s_sq_S=seed_post.s_sq, pi_bar_S=seed_post.pi_bar, S=seed_post.N,
                      W=W, alpha=args.alpha, convention=args.ptg_convention)
        )
        row = (W, seed_post.N, seed_post.s_sq, seed_post.pi_bar,
               est.multiplier, est.raw, est.G, est.total)
        if args.verify:
            rerun = explain(case.ctx, model, kernel, n_perturbations=est.total,
                            alpha=args.alpha, prior=_prior(args), seed=args.seed + 50_021)
            observed = float(np.median(rerun.interval_widths()))
            if args.ptg_convention == "half":
                observed /= 2.0
            row = row + (observed, observed / W)
        rows.append(row)
    _write_csv(
        os.path.join(_outdir(args), "ptg.csv"),
        _config_line(args, "ptg"),
        columns,
        rows,
    )
    return 0


def cmd_compare_sampling(args) -> int:
    case = _resolve_case(args)
    kernel = _kernel(args)
    prior = _prior(args)
    intercept = {"auto": None, "on": True, "off": False}[args.intercept]
    reference = None
    if args.gt_n:
        reference = ground_truth_phi(case, kernel, args.gt_n, prior=prior, cache={},
                                     intercept=intercept)
    strategies = ("focused", "random") if args.strategy == "both" else (args.strategy,)
    rows = []
    for s in range(args.seeds):
        seed = args.seed + s
        for strategy in strategies:
            cfg = SamplingConfig(
                strategy=strategy, S=args.S, B=args.B, A=args.A, budget_N=args.budget,
                stop_width=args.stop_width, stop_alpha=args.alpha,
                temperature=args.temperature, seed=seed, intercept=intercept,
            )
            runner = run_focused if strategy == "focused" else run_random
            _, trace = runner(case.ctx, case.make_model(), kernel, cfg,
                              prior=prior, reference=reference)
            for rec in trace.records:
                rows.append((strategy, seed, rec.queries_so_far, rec.max_ci_width,
                             rec.error_density, rec.l1_to_ref))
    _write_csv(
        os.path.join(_outdir(args), "compare_sampling.csv"),
        _config_line(args, "compare-sampling"),
        ["strategy", "seed", "queries", "max_ci_width", "error_density", "l1_to_ref"],
        rows,
    )
    return 0


def cmd_calibrate(args) -> int:
    kernel = _kernel(args)
    report = evaluation.coverage_calibration(
        synthetic_suite(), kernel, N_fit=args.n_fit, N_gt=args.gt_n,
        alpha=args.alpha, seeds=range(args.seeds), prior=_prior(args), gt_cache={},
    )
    rows = [
        (case, group, seed, nf, nc, nc / nf)
        for case, group, seed, nf, nc in report.rows
    ]
    rows.append(("OVERALL", "all", -1, report.trials, report.covered, report.coverage))
    _write_csv(
        os.path.join(_outdir(args), "calibration.csv"),
        _config_line(args, "calibrate"),
        ["case", "group", "seed", "n_features", "n_covered", "coverage"],
        rows,
    )
    summary = os.path.join(_outdir(args), "calibration_summary.json")
    with open(summary, "w") as fh:
        json.dump(
            {
                "alpha": report.alpha,
                "N_fit": report.N_fit,
                "N_gt": report.N_gt,
                "trials": report.trials,
                "coverage": report.coverage,
                "binomial_se": report.se,
                "per_dataset": {k: {"coverage": v[0], "trials": v[1]}
                                for k, v in sorted(report.per_dataset.items())},
            },
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")
    print(summary)
    return 0


def cmd_stability(args) -> int:
    kernel = _kernel(args)
    prior = _prior(args)
    cases = [c for c in synthetic_suite() if not c.group.startswith("toy")][: args.instances]
    report = lipschitz_stability(
        random_wls_explainer(kernel, args.budget, alpha=args.alpha, prior=prior),
        focused_bayes_explainer(kernel, args.budget, S=args.S, B=args.B, A=args.A,
                                temperature=args.temperature, alpha=args.alpha, prior=prior),
        cases, epsilon=args.epsilon, n_neighbors=args.neighbors, seed=args.seed,
    )
    rows = list(report.rows)
    rows.append(("MEDIAN", float(np.median([r[1] for r in report.rows])),
                 float(np.median([r[2] for r in report.rows])), report.median_improvement))
    _write_csv(
        os.path.join(_outdir(args), "stability.csv"),
        _config_line(args, "stability"),
        ["case", "lipschitz_random_wls", "lipschitz_focused_bayes", "percent_improvement"],
        rows,
    )
    summary = os.path.join(_outdir(args), "stability_summary.json")
    with open(summary, "w") as fh:
        json.dump(
            {
                "epsilon": report.epsilon,
                "n_neighbors": report.n_neighbors,
                "instances": len(report.rows),
                "median_percent_improvement": report.median_improvement,
            },
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")
    print(summary)
    return 0


def cmd_sensitivity(args) -> int:
    kernel = _kernel(args)
    n0s = [float(v) for v in args.n0_grid.split(",")]
    s0s = [float(v) for v in args.sigma0_grid.split(",")]
    report = prior_sensitivity_grid(
        n0s, s0s, synthetic_suite(), kernel, N_fit=args.n_fit, N_gt=args.gt_n,
        alpha=args.alpha, seeds=range(args.seeds),
    )
    rows = [
        (n0, s0, float(report.coverage[i, j]))
        for i, n0 in enumerate(report.n0_values)
        for j, s0 in enumerate(report.sigma0_values)
    ]
    _write_csv(
        os.path.join(_outdir(args), "sensitivity.csv"),
        _config_line(args, "sensitivity"),
        ["n0", "sigma0_sq", "coverage"],
        rows,
    )
    summary = os.path.join(_outdir(args), "sensitivity_summary.json")
    with open(summary, "w") as fh:
        json.dump(
            {
                "n0_values": report.n0_values,
                "sigma0_values": report.sigma0_values,
                "trials_per_cell": report.trials,
                "coverage": [[float(v) for v in row] for row in report.coverage],
            },
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")
    print(summary)
    return 0


def _add_common(p: argparse.ArgumentParser, needs_model: bool):
    if needs_model:
        p.add_argument("--model", required=True,
                       help="bundled case name (e.g. linear_logit/x0) or model spec JSON path")
        p.add_argument("--data", help="numeric CSV with header; supplies instance rows and baselines")
        p.add_argument("--instance", help="row index into --data, or comma-separated feature values")
    p.add_argument("--kernel", choices=["exponential", "shapley"], default="exponential")
    p.add_argument("--kernel-width", type=float, default=None,
                   help="exponential kernel width (default 0.75*sqrt(d))")
    p.add_argument("--distance", choices=["cosine", "l2"], default="cosine")
    p.add_argument("--clamp-weight", type=float, default=1e6)
    p.add_argument("--prior-n0", type=float, default=1e-6)
    p.add_argument("--prior-sigma0", type=float, default=1e-6)
    p.add_argument("--alpha", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory (default $CREDEXP_OUTDIR or '.')")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="credexp",
                                     description="Bayesian local explanations with uncertainty")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="fit one explanation and write its document")
    _add_common(p, needs_model=True)
    p.add_argument("--budget", type=int, default=200, help="number of perturbations")
    p.add_argument("--plot", action="store_true", help="also write an SVG bar chart")
    p.add_argument("--dump-perturbations", action="store_true",
                   help="write the sampled design as a bits/weight/label CSV")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("ptg", help="estimate perturbations-to-go for target interval widths")
    _add_common(p, needs_model=True)
    p.add_argument("--S", type=int, default=200, help="seed perturbations")
    p.add_argument("--target-width", default="0.05,0.1,0.2,0.4",
                   help="comma-separated list of target widths W")
    p.add_argument("--ptg-convention", choices=["full", "half"], default="full")
    p.add_argument("--verify", action="store_true",
                   help="rerun with each estimated total and record the observed width")
    p.set_defaults(func=cmd_ptg)

    p = sub.add_parser("compare-sampling", help="race focused vs random acquisition")
    _add_common(p, needs_model=True)
    p.add_argument("--strategy", choices=["focused", "random", "both"], default="both")
    p.add_argument("--S", type=int, default=50)
    p.add_argument("--B", type=int, default=10)
    p.add_argument("--A", type=int, default=500)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--stop-width", type=float, default=None)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--intercept", choices=["auto", "on", "off"], default="auto",
                   help="intercept column in the surrogate design (auto = kernel default)")
    p.add_argument("--seeds", type=int, default=1, help="number of paired seeds")
    p.add_argument("--gt-n", type=int, default=None,
                   help="random-perturbation budget for an L1 reference fit")
    p.set_defaults(func=cmd_compare_sampling)

    p = sub.add_parser("calibrate", help="coverage calibration on the bundled suite")
    _add_common(p, needs_model=False)
    p.add_argument("--n-fit", type=int, default=100)
    p.add_argument("--gt-n", type=int, default=10_000)
    p.add_argument("--seeds", type=int, default=5)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("stability", help="local Lipschitz comparison of two explainers")
    _add_common(p, needs_model=False)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--S", type=int, default=50)
    p.add_argument("--B", type=int, default=10)
    p.add_argument("--A", type=int, default=500)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--neighbors", type=int, default=25)
    p.add_argument("--instances", type=int, default=6)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("sensitivity", help="coverage across a variance-prior grid")
    _add_common(p, needs_model=False)
    p.add_argument("--n0-grid", default="1e-5,1e-1,1,10,100")
    p.add_argument("--sigma0-grid", default="1e-5,1e-1,1,10,100")
    p.add_argument("--n-fit", type=int, default=100)
    p.add_argument("--gt-n", type=int, default=10_000)
    p.add_argument("--seeds", type=int, default=3)
    p.set_defaults(func=cmd_sensitivity)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as err:
        print(f"error: code=runtime message={err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
