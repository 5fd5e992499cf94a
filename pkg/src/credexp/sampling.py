"""Perturbation acquisition: random baseline and variance-focused batches.

Both strategies seed the fit with S random perturbations and then add
batches of B until the budget runs out or the widest credible interval
drops below a stop width. The focused strategy scores a query-free pool of
A candidate perturbations by posterior-predictive variance and samples the
batch (without replacement) from a softmax over those variances, so queries
concentrate where the current surrogate is least sure of the label.

Each batch is folded into the running sufficient statistics and the
posterior refit in O(d^2); raw rows are never re-solved.
"""

from dataclasses import dataclass, field

import numpy as np

from .blackbox import BitQueryCache, BlackBoxModel, ModelFault
from .explain import build_perturbation_set
from .kernels import ProximityKernel, proximity_weights
from .posterior import (
    PosteriorExplanation,
    PriorConfig,
    SufficientStats,
    fit,
    predictive_variance,
)
from .space import InstanceContext

__all__ = ["SamplingConfig", "BatchRecord", "SamplingTrace", "run_random", "run_focused", "bias_check"]


@dataclass(frozen=True)
class SamplingConfig:
    strategy: str = "random"  # 'random' or 'focused'
    S: int = 50
    B: int = 10
    A: int = 500
    budget_N: int = 500
    stop_width: float | None = None
    stop_alpha: float = 0.95
    temperature: float = 1.0
    seed: int = 0
    intercept: bool | None = None  # None = kernel default

    def __post_init__(self):
        if self.strategy not in ("random", "focused"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.S < 1 or self.B < 1:
            raise ValueError("S and B must be >= 1")
        if self.B > self.A:
            raise ValueError("batch size B must not exceed pool size A")
        if self.budget_N < self.S:
            raise ValueError("budget_N must be >= S")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class BatchRecord:
    queries_so_far: int
    max_ci_width: float
    error_density: float
    l1_to_ref: float | None = None


@dataclass
class SamplingTrace:
    strategy: str
    seed: int
    records: list = field(default_factory=list)

    def add(self, post: PosteriorExplanation, queries: int, reference=None):
        l1 = None
        if reference is not None:
            l1 = float(np.abs(post.feature_phi - reference).sum())
        self.records.append(
            BatchRecord(
                queries_so_far=queries,
                max_ci_width=post.max_width(),
                error_density=post.error_density_at_zero,
                l1_to_ref=l1,
            )
        )

    def queries_to_width(self, width: float) -> int | None:
        """Queries at the first record whose max CI width is <= width."""
        for rec in self.records:
            if rec.max_ci_width <= width:
                return rec.queries_so_far
        return None


def _softmax_select(rng, variances: np.ndarray, B: int, temperature: float) -> np.ndarray:
    v = variances / temperature
    v = v - v.max()  # stability shift; constant variances give uniform p
    p = np.exp(v)
    if (p > 0).sum() < B:
        # temperature so sharp the softmax underflows: take the top-B
        return np.argsort(-variances, kind="stable")[:B]
    p /= p.sum()
    return rng.choice(variances.size, size=B, replace=False, p=p)


def _run(
    ctx: InstanceContext,
    model: BlackBoxModel,
    kernel: ProximityKernel,
    cfg: SamplingConfig,
    prior: PriorConfig | None,
    reference,
    focused: bool,
    cache: BitQueryCache | None,
) -> tuple[PosteriorExplanation, SamplingTrace]:
    rng = np.random.default_rng(cfg.seed)
    cache = cache or BitQueryCache(model, ctx)
    start_requests = cache.request_count
    pset = build_perturbation_set(
        ctx, model, kernel, cfg.S, seed=cfg.seed, cache=cache, intercept=cfg.intercept
    )
    stats = SufficientStats.from_set(pset)
    meta = dict(
        has_intercept=pset.has_intercept,
        y_offset=pset.y_offset,
        has_clamp_rows=pset.has_clamp_rows,
        feature_names=pset.feature_names,
        kernel_info=pset.kernel_info,
        seed=cfg.seed,
    )

    def refit() -> PosteriorExplanation:
        post = fit(stats, prior=prior, alpha=cfg.stop_alpha)
        for key, val in meta.items():
            setattr(post, key, val)
        return post

    def queries() -> int:
        return cache.request_count - start_requests

    post = refit()
    trace = SamplingTrace(strategy=cfg.strategy, seed=cfg.seed, records=[])
    trace.add(post, queries(), reference)

    def stopped() -> bool:
        return cfg.stop_width is not None and post.max_width() <= cfg.stop_width

    while not stopped() and queries() + cfg.B <= cfg.budget_N:
        if focused:
            pool = rng.integers(0, 2, size=(cfg.A, ctx.d), dtype=np.uint8)
            variances = predictive_variance(post, pool)
            picks = _softmax_select(rng, variances, cfg.B, cfg.temperature)
            batch = pool[picks]
        else:
            batch = rng.integers(0, 2, size=(cfg.B, ctx.d), dtype=np.uint8)
        try:
            labels = cache.query_bits(batch)
        except ModelFault as fault:
            fault.partial_trace = trace  # everything fit before the failure
            raise
        rows = batch.astype(float)
        if pset.has_intercept:
            rows = np.hstack([np.ones((cfg.B, 1)), rows])
        stats.add(rows, proximity_weights(kernel, batch), labels - pset.y_offset)
        post = refit()
        trace.add(post, queries(), reference)

    return post, trace


def run_random(ctx, model, kernel, cfg: SamplingConfig, prior=None, reference=None, cache=None):
    """Random-acquisition baseline; see module docstring."""
    if cfg.strategy != "random":
        raise ValueError("cfg.strategy must be 'random'")
    return _run(ctx, model, kernel, cfg, prior, reference, focused=False, cache=cache)


def run_focused(ctx, model, kernel, cfg: SamplingConfig, prior=None, reference=None, cache=None):
    """Variance-focused acquisition; see module docstring."""
    if cfg.strategy != "focused":
        raise ValueError("cfg.strategy must be 'focused'")
    if cfg.S + (2 if kernel.kind == "shapley" else 0) <= 2:
        raise ValueError("focused sampling needs N > 2 after the seed fit")
    return _run(ctx, model, kernel, cfg, prior, reference, focused=True, cache=cache)


def bias_check(
    ctx: InstanceContext,
    model: BlackBoxModel,
    kernel: ProximityKernel,
    cfg: SamplingConfig,
    N_gt: int,
    prior: PriorConfig | None = None,
) -> tuple[list, list, np.ndarray]:
    """Per-batch L1 distance to a large-budget reference fit, for both
    strategies on paired seeds. Returns (focused_curve, random_curve, phi_gt)
    where a curve is a list of (queries, l1) pairs."""
    if N_gt < 10 * cfg.budget_N:
        raise ValueError("N_gt must be >= 10 * budget_N")
    gt_seed = cfg.seed + 999_983  # distinct stream for the reference fit
    pset = build_perturbation_set(ctx, model, kernel, N_gt, seed=gt_seed, intercept=cfg.intercept)
    phi_gt = fit(pset, prior=prior, alpha=cfg.stop_alpha).feature_phi

    base = dict(
        S=cfg.S, B=cfg.B, A=cfg.A, budget_N=cfg.budget_N,
        stop_width=None, stop_alpha=cfg.stop_alpha,
        temperature=cfg.temperature, seed=cfg.seed,
    )
    _, tr_f = run_focused(ctx, model, kernel, SamplingConfig(strategy="focused", **base),
                          prior=prior, reference=phi_gt)
    _, tr_r = run_random(ctx, model, kernel, SamplingConfig(strategy="random", **base),
                         prior=prior, reference=phi_gt)

    def curve(tr):
        return [(r.queries_so_far, r.l1_to_ref) for r in tr.records]

    return curve(tr_f), curve(tr_r), phi_gt
