"""Proximity weighting of perturbations.

Two weighting rules are supported:

* exponential kernel  w(z) = exp(-D(x, z)^2 / width^2)  with D the cosine or
  L2 distance between the all-ones reference vector and the perturbation;
* coalition-size kernel  w(z) = (d-1) / (C(d,|z|) * |z| * (d-|z|))  whose
  weighted least-squares solution recovers additive game values. The rule is
  infinite at |z| in {0, d}; those rows get a large finite clamp weight
  instead, which softly pins the base value and the additivity constraint.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ProximityKernel", "exponential_weight", "shapley_weight", "proximity_weights"]

log = logging.getLogger(__name__)

DEFAULT_CLAMP_WEIGHT = 1e6


@dataclass(frozen=True)
class ProximityKernel:
    """Weighting rule. kind is 'exponential' or 'shapley'.

    width/distance apply to the exponential kernel only; width defaults to
    0.75*sqrt(d) at weight time when left as None. clamp_weight applies to
    the shapley kernel only (>= 1e4).
    """

    kind: str = "exponential"
    width: float | None = None
    distance: str = "cosine"
    clamp_weight: float = DEFAULT_CLAMP_WEIGHT

    def __post_init__(self):
        if self.kind not in ("exponential", "shapley"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.width is not None and not self.width > 0:
            raise ValueError("width must be positive")
        if self.distance not in ("cosine", "l2"):
            raise ValueError(f"unknown distance {self.distance!r}")
        if self.clamp_weight < 1e4:
            raise ValueError("clamp_weight must be >= 1e4")

    def effective_width(self, d: int) -> float:
        return self.width if self.width is not None else 0.75 * math.sqrt(d)

    def describe(self, d: int) -> dict:
        """Stable descriptor for artifact provenance."""
        if self.kind == "exponential":
            return {
                "kind": self.kind,
                "width": self.effective_width(d),
                "distance": self.distance,
            }
        return {"kind": self.kind, "clamp_weight": self.clamp_weight}


def _distance(x_bits: np.ndarray, Z: np.ndarray, metric: str) -> np.ndarray:
    x = np.asarray(x_bits, dtype=float)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if metric == "l2":
        return np.linalg.norm(Z - x[None, :], axis=1)
    # cosine distance; a zero-norm vector is treated as maximally distant
    norms = np.linalg.norm(Z, axis=1) * np.linalg.norm(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = (Z @ x) / norms
    D = 1.0 - cos
    degenerate = norms == 0
    if degenerate.any():
        log.debug("cosine distance on %d zero-norm vector(s); treating D=1", degenerate.sum())
        D[degenerate] = 1.0
    return D


def exponential_weight(kernel: ProximityKernel, x_bits: np.ndarray, z: np.ndarray) -> float:
    """exp(-D(x_bits, z)^2 / width^2); x_bits is the all-ones reference."""
    if kernel.kind != "exponential":
        raise ValueError("exponential_weight requires an exponential kernel")
    d = np.asarray(x_bits).size
    D = _distance(x_bits, z, kernel.distance)[0]
    return float(np.exp(-(D**2) / kernel.effective_width(d) ** 2))


def shapley_weight(kernel: ProximityKernel, d: int, k: int) -> float:
    """Coalition-size weight for |z| = k out of d features.

    Interior sizes use (d-1)/(C(d,k)*k*(d-k)); k in {0, d} returns the clamp
    weight that stands in for the rule's infinities.
    """
    if kernel.kind != "shapley":
        raise ValueError("shapley_weight requires a shapley kernel")
    if d < 2:
        raise ValueError("shapley kernel needs d >= 2")
    if not 0 <= k <= d:
        raise ValueError("coalition size out of range")
    if k in (0, d):
        return float(kernel.clamp_weight)
    return (d - 1) / (math.comb(d, k) * k * (d - k))


def proximity_weights(kernel: ProximityKernel, Z: np.ndarray) -> np.ndarray:
    """Vector of weights for a matrix of binary perturbations (one row each)."""
    Z = np.atleast_2d(np.asarray(Z))
    d = Z.shape[1]
    if kernel.kind == "exponential":
        x_bits = np.ones(d)
        D = _distance(x_bits, Z, kernel.distance)
        return np.exp(-(D**2) / kernel.effective_width(d) ** 2)
    sizes = Z.sum(axis=1).astype(int)
    table = np.array([shapley_weight(kernel, d, k) for k in range(d + 1)])
    return table[sizes]
