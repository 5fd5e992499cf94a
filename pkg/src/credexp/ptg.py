"""Perturbations-to-go: closed-form estimate of how many additional
perturbations a fit needs before the credible intervals reach a target
width.

For Bernoulli(0.5) designs the marginal variance of an importance after N
weighted perturbations is approximately 4 s^2 / (pi_bar * N), so hitting a
target width W at confidence alpha requires

    N = 4 s^2_S / (pi_bar_S * (W / m)^2),      G = N - S,

where s^2_S and pi_bar_S come from a seed fit on S perturbations and m is
the two-tailed normal multiplier at alpha ('full' reads W as the full
central-interval width, m = 2q; 'half' reads it as q * sd, m = q).
"""

import math
from dataclasses import dataclass

from .blackbox import BitQueryCache, BlackBoxModel
from .distributions import normal_two_tailed_multiplier
from .explain import explain
from .kernels import ProximityKernel
from .posterior import PosteriorExplanation, PriorConfig
from .space import InstanceContext

__all__ = ["PtgInputs", "PtgEstimate", "estimate_ptg", "seed_then_estimate", "DEFAULT_G_CAP"]

DEFAULT_G_CAP = 10**6


@dataclass(frozen=True)
class PtgInputs:
    s_sq_S: float
    pi_bar_S: float
    S: int
    W: float
    alpha: float = 0.95
    convention: str = "full"

    def __post_init__(self):
        if self.S < 10:
            raise ValueError("seed count S must be >= 10")
        if not self.W > 0:
            raise ValueError("target width W must be positive")
        if not self.pi_bar_S > 0:
            raise ValueError("pi_bar_S must be positive")
        if self.s_sq_S < 0:
            raise ValueError("s_sq_S must be nonnegative")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")


@dataclass(frozen=True)
class PtgEstimate:
    """G additional perturbations (ceil of raw, clamped at 0 and at the cap)."""

    G: int
    total: int
    raw: float
    multiplier: float
    capped: bool = False


def estimate_ptg(inputs: PtgInputs, cap: int = DEFAULT_G_CAP) -> PtgEstimate:
    m = normal_two_tailed_multiplier(inputs.alpha, inputs.convention)
    raw = 4.0 * inputs.s_sq_S / (inputs.pi_bar_S * (inputs.W / m) ** 2) - inputs.S
    G = max(0, math.ceil(raw))
    capped = G > cap
    if capped:
        G = cap
    return PtgEstimate(G=G, total=inputs.S + G, raw=raw, multiplier=m, capped=capped)


def seed_then_estimate(
    ctx: InstanceContext,
    model: BlackBoxModel,
    kernel: ProximityKernel,
    S: int,
    W: float,
    alpha: float = 0.95,
    seed: int = 0,
    prior: PriorConfig | None = None,
    convention: str = "full",
    cache: BitQueryCache | None = None,
) -> tuple[PosteriorExplanation, PtgEstimate]:
    """Fit S random perturbations, then estimate the remaining budget."""
    if S < 10:
        raise ValueError("seed count S must be >= 10")
    post = explain(ctx, model, kernel, n_perturbations=S, alpha=alpha, prior=prior, seed=seed, cache=cache)
    # post.N counts anchor rows too under the shapley kernel
    inputs = PtgInputs(
        s_sq_S=post.s_sq, pi_bar_S=post.pi_bar, S=post.N, W=W, alpha=alpha, convention=convention
    )
    return post, estimate_ptg(inputs)
