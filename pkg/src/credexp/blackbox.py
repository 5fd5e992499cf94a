"""Queryable black boxes: f maps input-space vectors to probabilities.

Includes desk-scale built-ins (logit-linear, clipped sparse linear, an XOR
surface, two 2-d toy surfaces, tree ensembles loaded from JSON), query
accounting, and a per-instance cache keyed on the binary perturbation so
duplicate perturbations cost one model query.
"""

import hashlib
import json
import threading
from dataclasses import dataclass, field

import numpy as np

from .space import InstanceContext, to_original_space

__all__ = [
    "BlackBoxModel",
    "ModelFault",
    "BitQueryCache",
    "linear_logit",
    "sparse_linear",
    "xor_nonlinear",
    "toy_surface",
    "toy_surface_model",
    "load_tree_ensemble",
    "model_from_spec",
    "load_csv_dataset",
]


class ModelFault(RuntimeError):
    """The wrapped predictor produced a non-finite output."""

    def __init__(self, message, offending_input=None):
        super().__init__(message)
        self.offending_input = offending_input


def _seeded_row_noise(X: np.ndarray, seed: int) -> np.ndarray:
    """Standard-normal draw per row, a pure function of (row bytes, seed)."""
    out = np.empty(X.shape[0])
    for i, row in enumerate(np.ascontiguousarray(X, dtype=np.float64)):
        h = hashlib.blake2b(row.tobytes(), digest_size=8, key=seed.to_bytes(8, "little"))
        out[i] = np.random.default_rng(int.from_bytes(h.digest(), "little")).standard_normal()
    return out


@dataclass(eq=False)
class BlackBoxModel:
    """Wraps a batch predictor with dimension checks, clamping to [0, 1],
    and a monotone query counter (misses only; see BitQueryCache)."""

    predictor: callable
    d_orig: int
    name: str = "blackbox"
    concurrent_safe: bool = True
    query_count: int = 0
    clamp_count: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def query(self, inputs: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(inputs, dtype=float))
        if X.shape[1] != self.d_orig:
            raise ValueError(f"expected {self.d_orig} input features, got {X.shape[1]}")
        y = np.asarray(self.predictor(X), dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise ModelFault("predictor returned wrong batch size")
        bad = ~np.isfinite(y)
        if bad.any():
            raise ModelFault("non-finite model output", offending_input=X[bad][0])
        clipped = np.clip(y, 0.0, 1.0)
        with self._lock:
            self.query_count += X.shape[0]
            self.clamp_count += int((clipped != y).sum())
        return clipped


class BitQueryCache:
    """Labels perturbations for one (model, context) pair, caching by the
    binary vector; cache hits do not touch the model's query counter."""

    def __init__(self, model: BlackBoxModel, ctx: InstanceContext):
        self.model = model
        self.ctx = ctx
        self._cache: dict[bytes, float] = {}
        self._lock = threading.Lock()
        self.hit_count = 0
        self.request_count = 0

    def query_bits(self, Z: np.ndarray) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=np.uint8))
        keys = [row.tobytes() for row in Z]
        with self._lock:
            self.request_count += len(keys)
            missing = {}
            for i, k in enumerate(keys):
                if k not in self._cache and k not in missing:
                    missing[k] = i
            if missing:
                idx = list(missing.values())
                labels = self.model.query(to_original_space(self.ctx, Z[idx]))
                for k, y in zip(missing.keys(), labels):
                    self._cache[k] = float(y)
            self.hit_count += len(keys) - len(missing)
            return np.array([self._cache[k] for k in keys])


def _sigmoid(t):
    return 1.0 / (1.0 + np.exp(-t))


def linear_logit(
    beta,
    intercept: float = 0.0,
    noise_sd=0.0,
    noise_seed: int = 0,
    name: str = "linear_logit",
) -> BlackBoxModel:
    """sigmoid(beta . x + intercept), optionally with seeded Gaussian noise on
    the logit. noise_sd may be a scalar or a per-feature vector of scales, in
    which case the noise standard deviation for x is the root-sum-square of
    scale_i * x_i (features present in a perturbation contribute noise)."""
    beta = np.asarray(beta, dtype=float)
    scales = np.asarray(noise_sd, dtype=float)

    def predict(X):
        logits = X @ beta + intercept
        if scales.ndim == 0:
            sd = float(scales)
            if sd > 0:
                logits = logits + sd * _seeded_row_noise(X, noise_seed)
        else:
            sd = np.sqrt((X**2) @ (scales**2))
            if sd.any():
                logits = logits + sd * _seeded_row_noise(X, noise_seed)
        return _sigmoid(logits)

    return BlackBoxModel(predict, d_orig=beta.size, name=name)


def sparse_linear(
    beta,
    intercept: float = 0.0,
    noise_sd: float = 0.0,
    noise_seed: int = 0,
    name: str = "sparse_linear",
) -> BlackBoxModel:
    """intercept + beta . x (plus optional seeded Gaussian label noise),
    clipped to [0, 1]; exactly linear where unclipped and noiseless."""
    beta = np.asarray(beta, dtype=float)

    def predict(X):
        y = X @ beta + intercept
        if noise_sd > 0:
            y = y + noise_sd * _seeded_row_noise(X, noise_seed)
        return np.clip(y, 0.0, 1.0)

    return BlackBoxModel(predict, d_orig=beta.size, name=name)


def xor_nonlinear(
    d: int = 5,
    pair: tuple = (0, 1),
    base: float = 0.15,
    amplitude: float = 0.6,
    linear=None,
    noise_sd: float = 0.0,
    noise_seed: int = 0,
    name: str = "xor_nonlinear",
) -> BlackBoxModel:
    """base + amplitude * XOR(x_i > 0.5, x_j > 0.5) + linear . x, clipped.

    The XOR term has no linear component, so a local linear surrogate sees
    it purely as residual error; noise_sd adds seeded label noise on top."""
    lin = np.zeros(d) if linear is None else np.asarray(linear, dtype=float)
    i, j = pair

    def predict(X):
        a = X[:, i] > 0.5
        b = X[:, j] > 0.5
        y = base + amplitude * (a ^ b) + X @ lin
        if noise_sd > 0:
            y = y + noise_sd * _seeded_row_noise(X, noise_seed)
        return np.clip(y, 0.0, 1.0)

    return BlackBoxModel(predict, d_orig=d, name=name)


_TOY_DOMAIN = (-10.0, 10.0)
_TOY_GRID = 1001
_toy_norm_cache: dict[str, tuple] = {}


def _toy_raw(surface_id: str, x1, x2):
    if surface_id == "linear":
        return np.asarray(x1, dtype=float)
    if surface_id == "nonlinear":
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        return np.sin(x1 / 2) * 10 + np.cos(10 + (x1 * x2) / 2) * np.cos(x1)
    raise ValueError(f"unknown toy surface {surface_id!r}")


def _toy_norm(surface_id: str) -> tuple:
    if surface_id not in _toy_norm_cache:
        g = np.linspace(*_TOY_DOMAIN, _TOY_GRID)
        X1, X2 = np.meshgrid(g, g)
        raw = _toy_raw(surface_id, X1, X2)
        _toy_norm_cache[surface_id] = (float(raw.min()), float(raw.max()))
    return _toy_norm_cache[surface_id]


def toy_surface(surface_id: str, x1, x2):
    """Evaluate a 2-d toy surface, min-max normalized onto [0, 1] over the
    domain [-10, 10]^2 (normalization constants from a fixed grid scan)."""
    lo, hi = _toy_norm(surface_id)
    val = (_toy_raw(surface_id, x1, x2) - lo) / (hi - lo)
    return float(np.clip(val, 0.0, 1.0)) if np.ndim(x1) == 0 else np.clip(val, 0.0, 1.0)


def toy_surface_model(surface_id: str) -> BlackBoxModel:
    def predict(X):
        return toy_surface(surface_id, X[:, 0], X[:, 1])

    return BlackBoxModel(predict, d_orig=2, name=f"toy_{surface_id}")


# --- tree ensembles ---------------------------------------------------------
#
# File schema (JSON): {"trees": [<node>, ...]} where a node is either
#   {"leaf": <value>}  or
#   {"feature": <int>, "threshold": <float>, "left": <node>, "right": <node>}
# Evaluation goes left when x[feature] < threshold, right otherwise; the
# model output is the mean of the trees' leaf values, clamped to [0, 1].


def _check_node(node, path: str):
    if not isinstance(node, dict):
        raise ValueError(f"{path}: node must be an object")
    if "leaf" in node:
        float(node["leaf"])
        return
    for key in ("feature", "threshold", "left", "right"):
        if key not in node:
            raise ValueError(f"{path}: missing field {key!r}")
    _check_node(node["left"], path + ".left")
    _check_node(node["right"], path + ".right")


def _eval_node(node, x):
    while "leaf" not in node:
        node = node["left"] if x[node["feature"]] < node["threshold"] else node["right"]
    return float(node["leaf"])


def load_tree_ensemble(path, d_orig: int | None = None, name: str | None = None) -> BlackBoxModel:
    """Load an averaged tree ensemble from the JSON schema documented above."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValueError(f"{path}: invalid JSON at line {err.lineno} col {err.colno}") from err
    trees = doc.get("trees")
    if not trees:
        raise ValueError(f"{path}: ensemble has no trees")
    for t, node in enumerate(trees):
        _check_node(node, f"trees[{t}]")

    def max_feature(node):
        if "leaf" in node:
            return -1
        return max(node["feature"], max_feature(node["left"]), max_feature(node["right"]))

    d = d_orig if d_orig is not None else max(max_feature(t) for t in trees) + 1

    def predict(X):
        out = np.empty(X.shape[0])
        for i, x in enumerate(X):
            out[i] = sum(_eval_node(t, x) for t in trees) / len(trees)
        return np.clip(out, 0.0, 1.0)

    return BlackBoxModel(predict, d_orig=d, name=name or "tree_ensemble")


def model_from_spec(spec: dict, base_dir=None) -> BlackBoxModel:
    """Instantiate a model from a spec dict ({"kind": ..., parameters...})."""
    kind = spec.get("kind")
    if kind == "linear_logit":
        return linear_logit(
            spec["beta"],
            intercept=spec.get("intercept", 0.0),
            noise_sd=spec.get("noise_sd", 0.0),
            noise_seed=spec.get("noise_seed", 0),
            name=spec.get("name", "linear_logit"),
        )
    if kind == "sparse_linear":
        return sparse_linear(
            spec["beta"],
            intercept=spec.get("intercept", 0.0),
            noise_sd=spec.get("noise_sd", 0.0),
            noise_seed=spec.get("noise_seed", 0),
            name=spec.get("name", "sparse_linear"),
        )
    if kind == "xor_nonlinear":
        return xor_nonlinear(
            d=spec.get("d", 5),
            pair=tuple(spec.get("pair", (0, 1))),
            base=spec.get("base", 0.15),
            amplitude=spec.get("amplitude", 0.6),
            linear=spec.get("linear"),
            noise_sd=spec.get("noise_sd", 0.0),
            noise_seed=spec.get("noise_seed", 0),
            name=spec.get("name", "xor_nonlinear"),
        )
    if kind == "tree_ensemble":
        path = spec["path"]
        if base_dir is not None:
            import os

            path = os.path.join(base_dir, path) if not os.path.isabs(path) else path
        return load_tree_ensemble(path, d_orig=spec.get("d"), name=spec.get("name"))
    if kind == "toy_surface":
        return toy_surface_model(spec["surface"])
    raise ValueError(f"unknown model kind {kind!r}")


def load_csv_dataset(path) -> tuple:
    """Numeric CSV with a header row -> (column names, float matrix)."""
    import csv

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: empty CSV")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as err:
                raise ValueError(f"{path}: non-numeric value on line {lineno}") from err
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: column count differs from header")
    return [h.strip() for h in header], data
