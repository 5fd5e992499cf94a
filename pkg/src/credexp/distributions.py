"""Probability primitives used by the posterior.

Only three families are needed: the scaled inverse chi-square (variance
posterior), the three-parameter Student's t (marginal importances, error
term, predictive), and standard normal quantiles. Densities and quantiles
are delegated to scipy; sampling composes the families the same way the
model does (draw a variance, then a conditional normal).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import ndtri

__all__ = [
    "ScaledInvChiSq",
    "StudentT3",
    "sample_scaled_inv_chisq",
    "sample_student_t3",
    "student_t_pdf",
    "student_t_interval",
    "normal_two_tailed_multiplier",
]


@dataclass(frozen=True)
class ScaledInvChiSq:
    """Scaled inverse chi-square with dof nu and scale tau^2.

    Equivalent to nu * tau^2 / X with X ~ chi^2(nu).
    """

    dof: float
    scale: float

    def __post_init__(self):
        if not self.dof > 0 or not self.scale > 0:
            raise ValueError("dof and scale must be positive")

    def mean(self) -> float:
        if self.dof <= 2:
            return math.inf
        return self.dof * self.scale / (self.dof - 2)


@dataclass(frozen=True)
class StudentT3:
    """Location-scale Student's t: dof, location, squared scale."""

    dof: float
    location: float
    scale_sq: float

    def __post_init__(self):
        if not self.dof > 0 or not self.scale_sq > 0:
            raise ValueError("dof and scale_sq must be positive")

    def variance(self) -> float:
        if self.dof <= 2:
            return math.inf
        return self.scale_sq * self.dof / (self.dof - 2)


def sample_scaled_inv_chisq(dist: ScaledInvChiSq, rng_seed, n: int) -> np.ndarray:
    """n draws of dof*scale / chi2(dof); strictly positive, seed-deterministic.

    rng_seed may be an int seed or a numpy Generator to draw from an
    existing stream.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    chi2 = rng.chisquare(dist.dof, size=n)
    return dist.dof * dist.scale / chi2


def sample_student_t3(dist: StudentT3, rng_seed, n: int) -> np.ndarray:
    """Draws via the variance-mixture route: v ~ ScaledInvChiSq(dof, scale_sq),
    then x | v ~ Normal(location, v)."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    v = sample_scaled_inv_chisq(ScaledInvChiSq(dist.dof, dist.scale_sq), rng, n)
    return dist.location + rng.standard_normal(n) * np.sqrt(v)


def student_t_pdf(dist: StudentT3, value) -> np.ndarray | float:
    """Density of the location-scale t at value (scalar or array)."""
    s = math.sqrt(dist.scale_sq)
    out = stats.t.pdf((np.asarray(value, dtype=float) - dist.location) / s, df=dist.dof) / s
    return float(out) if np.ndim(value) == 0 else out


def student_t_interval(dist: StudentT3, alpha: float) -> tuple:
    """Central interval containing probability mass alpha."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    q = stats.t.ppf((1 + alpha) / 2, df=dist.dof)
    half = q * math.sqrt(dist.scale_sq)
    return (dist.location - half, dist.location + half)


def normal_two_tailed_multiplier(alpha: float, convention: str = "full") -> float:
    """Two-tailed standard-normal multiplier at confidence level alpha.

    With q = Phi^-1((1+alpha)/2): 'full' returns 2q (multiplies a standard
    deviation into a full central-interval width), 'half' returns q.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    q = float(ndtri((1 + alpha) / 2))
    if convention == "full":
        return 2.0 * q
    if convention == "half":
        return q
    raise ValueError(f"unknown convention {convention!r}")
