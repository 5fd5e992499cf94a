"""Experiment harness: calibration, budget accuracy, sampling efficiency,
stability, and prior sensitivity on a bundled desk-scale suite.

Every experiment is a pure function of its configuration and seed list.
Ground-truth importances are surrogate fits with a large perturbation budget
(N_gt), cached per (case, kernel, N_gt) so repeated experiments share them.
"""

import zlib
from dataclasses import dataclass

import numpy as np

from .blackbox import linear_logit, sparse_linear, toy_surface_model, xor_nonlinear
from .explain import build_perturbation_set, explain
from .kernels import ProximityKernel
from .posterior import PosteriorExplanation, PriorConfig, fit
from .ptg import PtgInputs, estimate_ptg
from .sampling import SamplingConfig, run_focused, run_random
from .space import InstanceContext

__all__ = [
    "SuiteCase",
    "synthetic_suite",
    "ptg_suite",
    "heteroscedastic_case",
    "ground_truth_phi",
    "CalibrationReport",
    "coverage_calibration",
    "PtgCalibrationReport",
    "ptg_calibration",
    "EfficiencyReport",
    "sampling_efficiency",
    "BiasReport",
    "sampling_bias",
    "StabilityReport",
    "lipschitz_stability",
    "SensitivityReport",
    "prior_sensitivity_grid",
    "random_wls_explainer",
    "focused_bayes_explainer",
]


@dataclass(frozen=True)
class SuiteCase:
    """One (black box, explained instance) pair of the bundled suite."""

    name: str
    group: str
    make_model: callable
    ctx: InstanceContext

    def seed_base(self) -> int:
        return zlib.crc32(self.name.encode()) & 0x7FFFFFFF


def _bits_context(d: int, names=None) -> InstanceContext:
    """Context whose original space is the unit hypercube corner: bit k keeps
    coordinate k at 1, clears it to 0 otherwise."""
    return InstanceContext(
        x_original=np.ones(d),
        baseline=np.zeros(d),
        feature_names=tuple(names) if names else tuple(f"f{i}" for i in range(d)),
    )


def synthetic_suite() -> list:
    """Bundled calibration suite: a noisy logit-linear model (d=5), a noisy
    sparse linear model (d=4, 3 active), a noisy XOR surface (d=5) and one
    instance of each 2-d toy surface.

    Label noise keeps the noise model roughly well specified; dimensions stay
    small because the coalition-size kernel concentrates its interior mass
    away from the Bernoulli(0.5) bulk (difference-direction information per
    perturbation is (d-1)/(d 2^d)), so large d leaves the N_fit = 100
    posterior prior-dominated under that kernel.
    """
    cases = []

    beta5 = np.array([1.2, -0.8, 0.5, -0.3, 0.9])
    for tag, x, base in (
        ("x0", np.ones(5), np.zeros(5)),
        ("x1", np.array([1.0, 1.0, 0.0, 1.0, 0.0]), np.full(5, 0.5)),
    ):
        ctx = InstanceContext(x_original=x, baseline=base)
        cases.append(
            SuiteCase(
                f"linear_logit/{tag}",
                "linear_logit",
                lambda: linear_logit(beta5, noise_sd=2.5, noise_seed=5),
                ctx,
            )
        )

    beta4 = np.zeros(4)
    beta4[[0, 2, 3]] = [0.15, 0.17, -0.13]
    for tag, x, base in (
        ("x0", np.ones(4), np.zeros(4)),
        ("x1", np.array([0.0, 1.0, 0.0, 1.0]), np.full(4, 0.3)),
    ):
        ctx = InstanceContext(x_original=x, baseline=base)
        cases.append(
            SuiteCase(
                f"sparse_linear/{tag}",
                "sparse_linear",
                lambda: sparse_linear(beta4, intercept=0.3, noise_sd=0.25, noise_seed=9),
                ctx,
            )
        )

    lin5 = np.array([0.02, 0.02, 0.1, 0.05, 0.02])
    for tag, x, base in (
        ("x0", np.ones(5), np.zeros(5)),
        ("x1", np.array([0.0, 1.0, 1.0, 0.0, 1.0]), np.full(5, 0.2)),
    ):
        ctx = InstanceContext(x_original=x, baseline=base)
        cases.append(
            SuiteCase(
                f"xor_nonlinear/{tag}",
                "xor_nonlinear",
                lambda: xor_nonlinear(
                    d=5, base=0.2, amplitude=0.3, linear=lin5, noise_sd=0.25, noise_seed=7
                ),
                ctx,
            )
        )

    for surface, x, base in (
        ("linear", np.array([4.0, 2.0]), np.array([1.0, 1.0])),
        ("nonlinear", np.array([1.2, 4.0]), np.array([0.5, 0.5])),
    ):
        ctx = InstanceContext(x_original=x, baseline=base, feature_names=("x1", "x2"))
        cases.append(
            SuiteCase(
                f"toy_{surface}/x0",
                f"toy_{surface}",
                lambda s=surface: toy_surface_model(s),
                ctx,
            )
        )
    return cases


def ptg_suite() -> list:
    """Cases with enough local misfit / label noise that every budget target
    in the calibration sweep needs more than the seed perturbations."""
    cases = []
    for tag, amp in (("a", 0.8), ("b", 0.7)):
        ctx = _bits_context(5)
        cases.append(
            SuiteCase(
                f"ptg_xor_{tag}",
                "ptg_xor",
                lambda a=amp: xor_nonlinear(d=5, base=0.1, amplitude=a),
                ctx,
            )
        )
    beta = np.array([0.4, -0.3, 0.25, -0.2, 0.3])
    cases.append(
        SuiteCase(
            "ptg_noisy_logit",
            "ptg_noisy_logit",
            lambda: linear_logit(beta, noise_sd=2.5, noise_seed=11),
            _bits_context(5),
        )
    )
    return cases


def heteroscedastic_case(d: int = 16, noise_lo: float = 0.05, noise_hi: float = 0.5) -> SuiteCase:
    """Logit-linear surface with two feature groups; perturbations keeping
    second-group features pick up 10x the label noise of the first group."""
    half = d // 2
    beta = np.concatenate([np.linspace(0.5, 0.8, half), np.linspace(-0.7, -0.4, d - half)])
    scales = np.concatenate([np.full(half, noise_lo), np.full(d - half, noise_hi)])
    return SuiteCase(
        "hetero_logit",
        "hetero_logit",
        lambda: linear_logit(beta, noise_sd=scales, noise_seed=23),
        _bits_context(d),
    )


# --- ground-truth fits -------------------------------------------------------

_GT_CACHE: dict = {}


def ground_truth_phi(
    case: SuiteCase,
    kernel: ProximityKernel,
    N_gt: int,
    prior: PriorConfig | None = None,
    cache: dict | None = None,
    intercept: bool | None = None,
) -> np.ndarray:
    """Reference importances from a large random-perturbation fit."""
    cache = _GT_CACHE if cache is None else cache
    key = (case.name, kernel.kind, kernel.width, kernel.distance, N_gt, intercept)
    if key not in cache:
        seed = case.seed_base() + 777_001
        pset = build_perturbation_set(
            case.ctx, case.make_model(), kernel, N_gt, seed=seed, intercept=intercept
        )
        cache[key] = fit(pset, prior=prior).feature_phi
    return cache[key]


# --- coverage calibration ----------------------------------------------------


@dataclass
class CalibrationReport:
    alpha: float
    N_fit: int
    N_gt: int
    trials: int
    covered: int
    per_dataset: dict
    rows: list  # (case, group, seed, n_features, n_covered)

    @property
    def coverage(self) -> float:
        return self.covered / self.trials if self.trials else float("nan")

    @property
    def se(self) -> float:
        """Binomial Monte Carlo error of the coverage estimate."""
        p = self.coverage
        return float(np.sqrt(p * (1 - p) / self.trials)) if self.trials else float("nan")


def coverage_calibration(
    cases,
    kernel: ProximityKernel,
    N_fit: int = 100,
    N_gt: int = 10_000,
    alpha: float = 0.95,
    seeds=range(5),
    prior: PriorConfig | None = None,
    gt_cache: dict | None = None,
) -> CalibrationReport:
    """Fraction of ground-truth importances inside the level-alpha credible
    intervals of small-budget fits; the intercept is excluded."""
    if N_gt < 10 * N_fit:
        raise ValueError("N_gt must dominate N_fit (>= 10x)")
    rows = []
    covered = trials = 0
    per_dataset: dict = {}
    for case in cases:
        phi_star = ground_truth_phi(case, kernel, N_gt, cache=gt_cache)
        model = case.make_model()
        for s in seeds:
            fit_seed = (case.seed_base() + 1_000_003 * (int(s) + 1)) % (2**31)
            post = explain(
                case.ctx, model, kernel, n_perturbations=N_fit, alpha=alpha,
                prior=prior, seed=fit_seed,
            )
            ivals = post.feature_intervals
            inside = (phi_star >= ivals[:, 0]) & (phi_star <= ivals[:, 1])
            rows.append((case.name, case.group, int(s), inside.size, int(inside.sum())))
            covered += int(inside.sum())
            trials += inside.size
            grp = per_dataset.setdefault(case.group, [0, 0])
            grp[0] += int(inside.sum())
            grp[1] += inside.size
    per_dataset = {g: (c / t, t) for g, (c, t) in per_dataset.items()}
    return CalibrationReport(
        alpha=alpha, N_fit=N_fit, N_gt=N_gt, trials=trials, covered=covered,
        per_dataset=per_dataset, rows=rows,
    )


# --- budget (perturbations-to-go) calibration --------------------------------


@dataclass
class PtgCalibrationReport:
    S: int
    alpha: float
    convention: str
    rows: list  # (case, seed, W, G, total, observed, ratio, capped)

    def median_ratio(self, W: float) -> float:
        ratios = [r[6] for r in self.rows if r[2] == W]
        return float(np.median(ratios)) if ratios else float("nan")

    @property
    def targets(self) -> list:
        return sorted({r[2] for r in self.rows})


def _observed_width(post: PosteriorExplanation, alpha: float, convention: str) -> float:
    """Median across features of the realized interval width, expressed in
    the convention the budget estimate used ('half' = half-width)."""
    w = float(np.median(post.interval_widths(alpha)))
    return w if convention == "full" else w / 2.0


def ptg_calibration(
    cases,
    kernel: ProximityKernel,
    S: int = 200,
    targets=(0.05, 0.1, 0.2, 0.4),
    alpha: float = 0.95,
    seeds=range(20),
    convention: str = "full",
    prior: PriorConfig | None = None,
) -> PtgCalibrationReport:
    """Estimate the extra perturbations needed for each target width from an
    S-perturbation seed fit, rerun with the estimated total budget, and
    record observed vs desired width."""
    if not targets:
        raise ValueError("targets must be nonempty")
    rows = []
    for case in cases:
        model = case.make_model()
        for s in seeds:
            seed = (case.seed_base() + 7_919 * (int(s) + 1)) % (2**31)
            seed_post = explain(
                case.ctx, model, kernel, n_perturbations=S, alpha=alpha, prior=prior, seed=seed
            )
            for W in targets:
                est = estimate_ptg(
                    PtgInputs(
                        s_sq_S=seed_post.s_sq, pi_bar_S=seed_post.pi_bar, S=seed_post.N,
                        W=float(W), alpha=alpha, convention=convention,
                    )
                )
                rerun = explain(
                    case.ctx, model, kernel, n_perturbations=est.total, alpha=alpha,
                    prior=prior, seed=(seed + 50_021) % (2**31),
                )
                observed = _observed_width(rerun, alpha, convention)
                rows.append(
                    (case.name, int(s), float(W), est.G, est.total,
                     observed, observed / float(W), est.capped)
                )
    return PtgCalibrationReport(S=S, alpha=alpha, convention=convention, rows=rows)


# --- sampling efficiency race -------------------------------------------------


@dataclass
class EfficiencyReport:
    stop_width: float
    rows: list  # (seed, queries_focused, queries_random)

    def median_queries(self, which: str) -> float:
        idx = 1 if which == "focused" else 2
        return float(np.median([r[idx] for r in self.rows]))

    @property
    def median_saving(self) -> float:
        """Fractional query saving of focused over random, medians compared."""
        rnd = self.median_queries("random")
        return 1.0 - self.median_queries("focused") / rnd if rnd else float("nan")


def sampling_efficiency(
    case: SuiteCase,
    kernel: ProximityKernel,
    stop_width: float = 0.1,
    seeds=range(20),
    S: int = 50,
    B: int = 10,
    A: int = 500,
    budget_N: int = 4000,
    temperature: float = 1e-5,
    alpha: float = 0.95,
    prior: PriorConfig | None = None,
    intercept: bool | None = False,
) -> EfficiencyReport:
    """Paired race: queries needed by each strategy until the widest credible
    interval is at most stop_width. Runs that exhaust the budget count the
    full budget.

    The experiment defaults to the intercept-free surrogate (the generative
    model carries no intercept term) and a sharp selection temperature: with
    an intercept column the candidate-variance signal is nearly flat in
    coalition size and the acquisition degenerates to mild design
    rebalancing, while intercept-free it tracks row informativeness.
    """
    rows = []
    for s in seeds:
        seed = (case.seed_base() + 104_729 * (int(s) + 1)) % (2**31)
        common = dict(
            S=S, B=B, A=A, budget_N=budget_N, stop_width=stop_width,
            stop_alpha=alpha, temperature=temperature, seed=seed, intercept=intercept,
        )
        counts = {}
        for strategy, runner in (("focused", run_focused), ("random", run_random)):
            _, trace = runner(
                case.ctx, case.make_model(), kernel,
                SamplingConfig(strategy=strategy, **common), prior=prior,
            )
            reached = trace.queries_to_width(stop_width)
            counts[strategy] = reached if reached is not None else budget_N
        rows.append((int(s), counts["focused"], counts["random"]))
    return EfficiencyReport(stop_width=stop_width, rows=rows)


# --- focused-sampling bias ----------------------------------------------------


@dataclass
class BiasReport:
    N_gt: int
    rows: list  # (seed, l1_focused, l1_random)

    @property
    def median_ratio(self) -> float:
        ratios = [f / r if r > 0 else float("inf") for _, f, r in self.rows]
        return float(np.median(ratios))


def sampling_bias(
    case: SuiteCase,
    kernel: ProximityKernel,
    budget_N: int = 400,
    N_gt: int = 10_000,
    seeds=range(20),
    S: int = 50,
    B: int = 10,
    A: int = 500,
    temperature: float = 1e-5,
    alpha: float = 0.95,
    prior: PriorConfig | None = None,
    intercept: bool | None = False,
) -> BiasReport:
    """L1 distance of each strategy's budget-exhausted explanation to the
    large-budget reference, per paired seed; configured like the efficiency
    race so the two experiments audit the same acquisition behavior."""
    if N_gt < 10 * budget_N:
        raise ValueError("N_gt must be >= 10 * budget_N")
    phi_gt = ground_truth_phi(case, kernel, N_gt, prior=prior, intercept=intercept)
    rows = []
    for s in seeds:
        seed = (case.seed_base() + 15_485_863 * (int(s) + 1)) % (2**31)
        common = dict(
            S=S, B=B, A=A, budget_N=budget_N, stop_width=None,
            stop_alpha=alpha, temperature=temperature, seed=seed, intercept=intercept,
        )
        l1 = {}
        for strategy, runner in (("focused", run_focused), ("random", run_random)):
            post, _ = runner(
                case.ctx, case.make_model(), kernel,
                SamplingConfig(strategy=strategy, **common), prior=prior,
            )
            l1[strategy] = float(np.abs(post.feature_phi - phi_gt).sum())
        rows.append((int(s), l1["focused"], l1["random"]))
    return BiasReport(N_gt=N_gt, rows=rows)


# --- local Lipschitz stability -------------------------------------------------


@dataclass
class StabilityReport:
    epsilon: float
    n_neighbors: int
    rows: list  # (case, L_a, L_b, percent_change)

    @property
    def median_improvement(self) -> float:
        """Median percent reduction of explainer B's constant vs A's."""
        return float(np.median([r[3] for r in self.rows]))


def random_wls_explainer(kernel: ProximityKernel, budget: int, alpha: float = 0.95,
                         prior: PriorConfig | None = None):
    """Point-estimate surrogate fit from one random batch of perturbations."""

    def run(model, ctx, seed):
        return explain(ctx, model, kernel, n_perturbations=budget, alpha=alpha,
                       prior=prior, seed=seed).feature_phi

    return run


def focused_bayes_explainer(kernel: ProximityKernel, budget: int, S: int = 50, B: int = 10,
                            A: int = 500, temperature: float = 1.0, alpha: float = 0.95,
                            prior: PriorConfig | None = None, intercept: bool | None = None):
    """Posterior-mean explanation from the focused acquisition loop at the
    same total query budget (algorithm-default selection settings)."""

    def run(model, ctx, seed):
        cfg = SamplingConfig(strategy="focused", S=S, B=B, A=A, budget_N=budget,
                             stop_width=None, stop_alpha=alpha,
                             temperature=temperature, seed=seed, intercept=intercept)
        post, _ = run_focused(ctx, model, kernel, cfg, prior=prior)
        return post.feature_phi

    return run


def lipschitz_stability(
    explainer_a,
    explainer_b,
    cases,
    epsilon: float = 0.1,
    n_neighbors: int = 25,
    seed: int = 0,
    scales=None,
) -> StabilityReport:
    """Largest explanation-change to input-change ratio over an eps-ball.

    Inputs are normalized to unit scale before the ball is sampled (scales
    defaults to 1 per original feature, matching the bundled suite whose
    features live on [0, 1] or are pre-normalized). Each neighbor is
    explained with a seed derived from (case, neighbor), identically for
    both explainers, so a self-comparison returns exactly zero change.
    """
    rows = []
    for case in cases:
        model = case.make_model()
        sc = np.ones(case.ctx.d_orig) if scales is None else np.asarray(scales, dtype=float)
        rng = np.random.default_rng((case.seed_base() + seed) % (2**31))
        base_seed = (case.seed_base() + 31 * seed) % (2**31)
        phi_a0 = explainer_a(model, case.ctx, base_seed)
        phi_b0 = explainer_b(model, case.ctx, base_seed)
        lip_a = lip_b = 0.0
        drawn = 0
        while drawn < n_neighbors:
            delta = rng.uniform(-epsilon, epsilon, size=case.ctx.d_orig)
            dist = float(np.linalg.norm(delta))
            if dist < 1e-9:
                continue  # degenerate neighbor, resample
            drawn += 1
            x_j = case.ctx.x_original + delta * sc
            ctx_j = InstanceContext(
                x_original=x_j, baseline=case.ctx.baseline,
                feature_names=case.ctx.feature_names, groups=case.ctx.groups,
            )
            nb_seed = (base_seed + 613 * drawn) % (2**31)
            phi_aj = explainer_a(model, ctx_j, nb_seed)
            phi_bj = explainer_b(model, ctx_j, nb_seed)
            lip_a = max(lip_a, float(np.linalg.norm(phi_a0 - phi_aj)) / dist)
            lip_b = max(lip_b, float(np.linalg.norm(phi_b0 - phi_bj)) / dist)
        pct = 100.0 * (lip_a - lip_b) / lip_a if lip_a > 0 else 0.0
        rows.append((case.name, lip_a, lip_b, pct))
    return StabilityReport(epsilon=epsilon, n_neighbors=n_neighbors, rows=rows)


# --- prior sensitivity ----------------------------------------------------------


@dataclass
class SensitivityReport:
    n0_values: list
    sigma0_values: list
    coverage: np.ndarray  # (len(n0), len(sigma0))
    trials: int

    def cell(self, n0: float, sigma0_sq: float) -> float:
        i = self.n0_values.index(n0)
        j = self.sigma0_values.index(sigma0_sq)
        return float(self.coverage[i, j])


def prior_sensitivity_grid(
    n0_values,
    sigma0_values,
    cases,
    kernel: ProximityKernel,
    N_fit: int = 100,
    N_gt: int = 10_000,
    alpha: float = 0.95,
    seeds=range(5),
    gt_cache: dict | None = None,
) -> SensitivityReport:
    """Coverage of the calibration experiment across a grid of variance-prior
    hyperparameters; ground-truth fits are shared across cells."""
    n0_values = list(n0_values)
    sigma0_values = list(sigma0_values)
    if not n0_values or not sigma0_values:
        raise ValueError("grids must be nonempty")
    gt_cache = {} if gt_cache is None else gt_cache
    cov = np.zeros((len(n0_values), len(sigma0_values)))
    trials = 0
    for i, n0 in enumerate(n0_values):
        for j, s0 in enumerate(sigma0_values):
            rep = coverage_calibration(
                cases, kernel, N_fit=N_fit, N_gt=N_gt, alpha=alpha, seeds=seeds,
                prior=PriorConfig(n0=n0, sigma0_sq=s0), gt_cache=gt_cache,
            )
            cov[i, j] = rep.coverage
            trials = rep.trials
    return SensitivityReport(
        n0_values=n0_values, sigma0_values=sigma0_values, coverage=cov, trials=trials
    )
