"""Bayesian weighted least-squares surrogate fit.

The model: each black-box label y for a perturbation z is phi^T z plus
Gaussian noise with variance sigma^2 / pi(z); phi has a unit-variance normal
prior given sigma^2, and sigma^2 a scaled inverse chi-square prior (n0,
sigma0^2). Everything is conjugate, so with Pi = diag of proximity weights:

    V_phi   = (Z^T Pi Z + I)^-1
    phi_hat = V_phi (Z^T Pi y)
    s^2     = [ (y - Z phi_hat)^T Pi (y - Z phi_hat) + phi_hat^T phi_hat ] / N
    sigma^2 | data ~ ScaledInvChiSq(n0 + N, (n0 sigma0^2 + N s^2) / (n0 + N))
    phi_i   | data ~ t(nu = n0 + N, phi_hat_i, V_ii * tau^2)   (sigma^2 out)

where tau^2 is the sigma^2 posterior scale. The fit is expressed in
sufficient statistics (A = Z^T Pi Z, b = Z^T Pi y, yy = y^T Pi y) so batches
can be accumulated and refit in O(d^2) without touching old rows.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .distributions import (
    ScaledInvChiSq,
    StudentT3,
    sample_scaled_inv_chisq,
    student_t_interval,
    student_t_pdf,
)

__all__ = [
    "PriorConfig",
    "PerturbationSet",
    "SufficientStats",
    "PosteriorExplanation",
    "fit",
    "credible_intervals",
    "error_uncertainty",
    "predictive_variance",
    "shap_additivity_residual",
]


@dataclass(frozen=True)
class PriorConfig:
    """Variance prior (n0, sigma0^2); the tiny defaults are uninformative."""

    n0: float = 1e-6
    sigma0_sq: float = 1e-6

    def __post_init__(self):
        if self.n0 < 0:
            raise ValueError("n0 must be >= 0")
        if not self.sigma0_sq > 0:
            raise ValueError("sigma0_sq must be positive")


@dataclass(eq=False)
class PerturbationSet:
    """Design matrix Z (binary, optionally with a leading intercept column),
    proximity weights Pi, and raw black-box labels Y in [0, 1].

    y_offset is subtracted from Y before fitting; the additive-game path
    uses it to pin the base value phi0 = f(baseline) outside the regression
    so that stored labels stay raw probabilities.
    """

    Z: np.ndarray
    Pi: np.ndarray
    Y: np.ndarray
    has_intercept: bool = False
    y_offset: float = 0.0
    has_clamp_rows: bool = False
    feature_names: tuple = ()
    kernel_info: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        Pi = np.asarray(self.Pi, dtype=float).ravel()
        Y = np.asarray(self.Y, dtype=float).ravel()
        if Z.shape[0] < 1:
            raise ValueError("need at least one perturbation")
        if Pi.shape[0] != Z.shape[0] or Y.shape[0] != Z.shape[0]:
            raise ValueError("Z, Pi and Y row counts disagree")
        if not np.all(np.isfinite(Pi)) or np.any(Pi < 0):
            raise ValueError("weights must be finite and nonnegative")
        if not np.all(np.isfinite(Y)):
            raise ValueError("labels must be finite")
        if Y.min() < -1e-9 or Y.max() > 1 + 1e-9:
            raise ValueError("labels must lie in [0, 1]")
        self.Z, self.Pi, self.Y = Z, Pi, Y

    @property
    def N(self) -> int:
        return self.Z.shape[0]


class SufficientStats:
    """Accumulator for A = Z^T Pi Z, b = Z^T Pi y, yy = y^T Pi y."""

    def __init__(self, n_coeffs: int):
        self.A = np.zeros((n_coeffs, n_coeffs))
        self.b = np.zeros(n_coeffs)
        self.yy = 0.0
        self.N = 0
        self.pi_sum = 0.0

    def add(self, Z: np.ndarray, Pi: np.ndarray, Y: np.ndarray) -> "SufficientStats":
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        Pi = np.asarray(Pi, dtype=float).ravel()
        Y = np.asarray(Y, dtype=float).ravel()
        if not (np.all(np.isfinite(Pi)) and np.all(np.isfinite(Y))):
            raise ValueError("non-finite labels or weights")
        Zw = Z * Pi[:, None]
        self.A += Zw.T @ Z
        self.b += Zw.T @ Y
        self.yy += float(Y @ (Pi * Y))
        self.N += Z.shape[0]
        self.pi_sum += float(Pi.sum())
        return self

    @classmethod
    def from_set(cls, pset: PerturbationSet) -> "SufficientStats":
        stats = cls(pset.Z.shape[1])
        return stats.add(pset.Z, pset.Pi, pset.Y - pset.y_offset)

    @property
    def pi_bar(self) -> float:
        return self.pi_sum / self.N if self.N else 0.0


@dataclass(eq=False)
class PosteriorExplanation:
    """Fitted posterior: mean importances, covariance factor, noise scale,
    and the derived credible intervals / error density."""

    phi_hat: np.ndarray
    V_phi: np.ndarray
    s_sq: float
    nu: float
    sigma_post: ScaledInvChiSq
    intervals: np.ndarray  # (n_coeffs, 2)
    alpha: float
    error_density_at_zero: float
    perfect_fit: bool
    N: int
    pi_bar: float
    prior: PriorConfig
    has_intercept: bool = False
    y_offset: float = 0.0
    has_clamp_rows: bool = False
    feature_names: tuple = ()
    kernel_info: dict = field(default_factory=dict)
    seed: int | None = None

    @property
    def n_coeffs(self) -> int:
        return self.phi_hat.size

    @property
    def feature_slice(self) -> slice:
        """Coefficient range excluding the intercept column, if any."""
        return slice(1, None) if self.has_intercept else slice(0, None)

    @property
    def feature_phi(self) -> np.ndarray:
        return self.phi_hat[self.feature_slice]

    @property
    def feature_intervals(self) -> np.ndarray:
        return self.intervals[self.feature_slice]

    def interval_widths(self, alpha: float | None = None) -> np.ndarray:
        """Full central-interval widths per non-intercept feature."""
        ivals = self.intervals if alpha in (None, self.alpha) else credible_intervals(self, alpha)
        ivals = ivals[self.feature_slice]
        return ivals[:, 1] - ivals[:, 0]

    def max_width(self, alpha: float | None = None) -> float:
        return float(self.interval_widths(alpha).max())

    def design_row(self, z: np.ndarray) -> np.ndarray:
        """Bit vector(s) -> design row(s) consistent with the fitted matrix."""
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = np.atleast_2d(z)
        if self.has_intercept:
            Z = np.hstack([np.ones((Z.shape[0], 1)), Z])
        if Z.shape[1] != self.n_coeffs:
            raise ValueError("perturbation does not match the fitted design")
        return Z[0] if single else Z

    def to_dict(self) -> dict:
        names = list(self.feature_names[self.feature_slice]) if self.feature_names else [
            f"f{i}" for i in range(len(self.feature_phi))
        ]
        fields = {
            "feature_names": names,
            "phi_hat": [float(v) for v in self.feature_phi],
            "interval_low": [float(v) for v in self.feature_intervals[:, 0]],
            "interval_high": [float(v) for v in self.feature_intervals[:, 1]],
            "alpha": self.alpha,
            "s_sq": self.s_sq,
            "nu": self.nu,
            "error_density_at_zero": self.error_density_at_zero,
            "N": self.N,
            "kernel": dict(self.kernel_info),
            "seed": self.seed,
        }
        if self.has_intercept:
            fields["intercept"] = float(self.phi_hat[0])
            fields["intercept_interval"] = [float(v) for v in self.intervals[0]]
        if self.y_offset:
            fields["phi0"] = self.y_offset
        return fields


def fit(data, prior: PriorConfig | None = None, alpha: float = 0.95) -> PosteriorExplanation:
    """Fit the conjugate posterior from a PerturbationSet or SufficientStats."""
    prior = prior or PriorConfig()
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    if isinstance(data, PerturbationSet):
        stats = SufficientStats.from_set(data)
        meta = dict(
            has_intercept=data.has_intercept,
            y_offset=data.y_offset,
            has_clamp_rows=data.has_clamp_rows,
            feature_names=data.feature_names,
            kernel_info=data.kernel_info,
            seed=data.seed,
        )
    elif isinstance(data, SufficientStats):
        stats = data
        meta = {}
    else:
        raise TypeError("fit expects a PerturbationSet or SufficientStats")
    if stats.N < 1:
        raise ValueError("cannot fit with N = 0")

    k = stats.A.shape[0]
    reg = stats.A + np.eye(k)
    chol = cho_factor(reg, lower=True)
    phi_hat = cho_solve(chol, stats.b)
    V_phi = cho_solve(chol, np.eye(k))
    V_phi = (V_phi + V_phi.T) / 2  # symmetrize roundoff

    # s^2 from the expanded quadratic form; clamp tiny negative roundoff
    s_sq = (stats.yy - 2 * phi_hat @ stats.b + phi_hat @ reg @ phi_hat) / stats.N
    s_sq = max(float(s_sq), 0.0)

    nu = prior.n0 + stats.N
    tau_sq = (prior.n0 * prior.sigma0_sq + stats.N * s_sq) / nu
    perfect = tau_sq <= 0.0
    sigma_post = ScaledInvChiSq(nu, tau_sq if not perfect else 1e-300)

    post = PosteriorExplanation(
        phi_hat=phi_hat,
        V_phi=V_phi,
        s_sq=s_sq,
        nu=nu,
        sigma_post=sigma_post,
        intervals=np.zeros((k, 2)),
        alpha=alpha,
        error_density_at_zero=0.0,
        perfect_fit=perfect,
        N=stats.N,
        pi_bar=stats.pi_bar,
        prior=prior,
        **meta,
    )
    post.intervals = credible_intervals(post, alpha)
    post.error_density_at_zero = error_uncertainty(post)
    return post


def credible_intervals(
    post: PosteriorExplanation,
    alpha: float,
    method: str = "closed_form",
    n_draws: int = 10_000,
    rng_seed: int = 0,
) -> np.ndarray:
    """Central credible interval per coefficient, as an (n_coeffs, 2) array.

    closed_form evaluates the marginal t distribution of each coefficient;
    monte_carlo draws sigma^2 from its posterior and phi | sigma^2 from the
    conditional normal, then takes empirical quantiles. The two agree to
    Monte Carlo accuracy.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    tau_sq = post.sigma_post.scale
    diag = np.clip(np.diag(post.V_phi), 0.0, None)
    if method == "closed_form":
        out = np.empty((post.n_coeffs, 2))
        for i in range(post.n_coeffs):
            scale_sq = diag[i] * tau_sq
            if scale_sq <= 0:
                out[i] = (post.phi_hat[i], post.phi_hat[i])
            else:
                out[i] = student_t_interval(StudentT3(post.nu, post.phi_hat[i], scale_sq), alpha)
        return out
    if method == "monte_carlo":
        if n_draws < 100:
            raise ValueError("monte_carlo needs n_draws >= 100")
        rng = np.random.default_rng(rng_seed)
        sig = sample_scaled_inv_chisq(post.sigma_post, rng, n_draws)
        draws = post.phi_hat[None, :] + rng.standard_normal((n_draws, post.n_coeffs)) * np.sqrt(
            np.outer(sig, diag)
        )
        lo, hi = np.quantile(draws, [(1 - alpha) / 2, (1 + alpha) / 2], axis=0)
        return np.column_stack([lo, hi])
    raise ValueError(f"unknown method {method!r}")


def error_uncertainty(post: PosteriorExplanation) -> float:
    """Posterior density of the surrogate's error term evaluated at zero.

    Higher means the local fit explains the labels better; constant time
    given the fitted s^2. A degenerate zero scale returns +inf with the
    perfect_fit flag already set on the explanation.
    """
    if post.perfect_fit:
        return math.inf
    return float(student_t_pdf(StudentT3(post.nu, 0.0, post.sigma_post.scale), 0.0))


def predictive_variance(post: PosteriorExplanation, z: np.ndarray) -> np.ndarray | float:
    """Variance of the predicted label for unlabeled perturbation(s) z.

    The predictive law is t with dof N, mean phi_hat^T z and squared scale
    (z^T V z + 1) s^2, so the variance carries the N/(N-2) factor.
    """
    if post.N <= 2:
        raise RuntimeError("predictive variance needs N > 2")
    rows = post.design_row(z)
    single = rows.ndim == 1
    R = np.atleast_2d(rows)
    quad = np.einsum("ij,jk,ik->i", R, post.V_phi, R)
    var = (quad + 1.0) * post.s_sq * (post.N / (post.N - 2))
    return float(var[0]) if single else var


def shap_additivity_residual(post: PosteriorExplanation, f_x: float, f_empty: float) -> float:
    """|f(x) - (phi0 + sum_i phi_i)| for an additive-game fit.

    Requires the fit to have carried the clamp rows that pin phi0 = f(empty)
    and the full-coalition sum; small residual means the soft constraints
    held.
    """
    if not post.has_clamp_rows:
        raise RuntimeError("fit was made without additivity clamp rows")
    return float(abs(f_x - (f_empty + post.feature_phi.sum())))
