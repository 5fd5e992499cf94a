"""One-call assembly: sample perturbations, label them, weight them, fit.

The exponential kernel fits with an intercept column by default (needed for
calibrated residuals on non-centered surfaces). The shapley kernel drops the
intercept; instead the base value phi0 = f(baseline) is pinned outside the
regression (labels are offset by it) and two clamp-weighted anchor rows, the
empty and the full coalition, softly enforce phi0 = f(empty) and
phi0 + sum(phi) = f(x).
"""

import numpy as np

from .blackbox import BitQueryCache, BlackBoxModel
from .kernels import ProximityKernel, proximity_weights
from .posterior import PerturbationSet, PosteriorExplanation, PriorConfig, fit
from .space import InstanceContext, sample_perturbations

__all__ = ["build_perturbation_set", "explain"]


def build_perturbation_set(
    ctx: InstanceContext,
    model: BlackBoxModel,
    kernel: ProximityKernel,
    n: int,
    seed: int,
    cache: BitQueryCache | None = None,
    intercept: bool | None = None,
) -> PerturbationSet:
    """Sample n Bernoulli(0.5) perturbations, query the model, weight them.

    With the shapley kernel the set additionally carries the two anchor rows
    (empty/full coalition) at clamp weight, so N = n + 2 there.
    """
    cache = cache or BitQueryCache(model, ctx)
    bits = sample_perturbations(ctx, n, seed)
    labels = cache.query_bits(bits)
    names = ctx.feature_names

    if kernel.kind == "shapley":
        d = ctx.d
        anchors = np.vstack([np.zeros(d, dtype=np.uint8), np.ones(d, dtype=np.uint8)])
        anchor_labels = cache.query_bits(anchors)
        f_empty = float(anchor_labels[0])
        Z = np.vstack([bits, anchors]).astype(float)
        Pi = np.concatenate([proximity_weights(kernel, bits), [kernel.clamp_weight] * 2])
        Y = np.concatenate([labels, anchor_labels])
        return PerturbationSet(
            Z=Z,
            Pi=Pi,
            Y=Y,
            has_intercept=False,
            y_offset=f_empty,
            has_clamp_rows=True,
            feature_names=names,
            kernel_info=kernel.describe(d),
            seed=seed,
        )

    use_intercept = True if intercept is None else intercept
    Z = bits.astype(float)
    if use_intercept:
        Z = np.hstack([np.ones((n, 1)), Z])
        names = ("(intercept)",) + tuple(names)
    Pi = proximity_weights(kernel, bits)
    return PerturbationSet(
        Z=Z,
        Pi=Pi,
        Y=labels,
        has_intercept=use_intercept,
        feature_names=names,
        kernel_info=kernel.describe(ctx.d),
        seed=seed,
    )


def explain(
    ctx: InstanceContext,
    model: BlackBoxModel,
    kernel: ProximityKernel | None = None,
    n_perturbations: int = 200,
    alpha: float = 0.95,
    prior: PriorConfig | None = None,
    seed: int = 0,
    cache: BitQueryCache | None = None,
) -> PosteriorExplanation:
    """Fit a local explanation with random Bernoulli(0.5) sampling."""
    kernel = kernel or ProximityKernel()
    pset = build_perturbation_set(ctx, model, kernel, n_perturbations, seed, cache=cache)
    return fit(pset, prior=prior, alpha=alpha)
