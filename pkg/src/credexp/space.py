"""Binary interpretable perturbation space.

An explanation is fit over d binary "interpretable" features. Each bit says
whether the corresponding feature (or feature group) of the explained
instance is kept (1) or replaced by a baseline value (0). Perturbations are
plain numpy 0/1 arrays; a matrix of perturbations has one row per vector.
"""

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InstanceContext",
    "sample_perturbations",
    "to_original_space",
    "coalition_size",
    "context_from_config",
    "bits_to_string",
    "bits_from_string",
]


@dataclass(frozen=True, eq=False)
class InstanceContext:
    """The instance being explained plus the bit -> input-space mapping.

    x_original: the explained point, length d_orig.
    baseline: values substituted for absent features, length d_orig.
    feature_names: one name per interpretable feature (length d).
    groups: for each interpretable feature, the original-feature indices it
        controls. Defaults to the identity mapping (feature i -> column i).
    """

    x_original: np.ndarray
    baseline: np.ndarray
    feature_names: tuple = ()
    groups: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.x_original, dtype=float)
        b = np.asarray(self.baseline, dtype=float)
        if x.ndim != 1 or b.shape != x.shape:
            raise ValueError("x_original and baseline must be 1-d and equal length")
        groups = self.groups or tuple((i,) for i in range(x.size))
        groups = tuple(tuple(int(i) for i in g) for g in groups)
        if len(groups) < 1:
            raise ValueError("need at least one interpretable feature")
        claimed = [i for g in groups for i in g]
        if any(len(g) < 1 for g in groups):
            raise ValueError("every interpretable feature must map to >= 1 original feature")
        if len(claimed) != len(set(claimed)):
            raise ValueError("an original feature is claimed by more than one group")
        if claimed and (min(claimed) < 0 or max(claimed) >= x.size):
            raise ValueError("group index out of range")
        names = self.feature_names or tuple(f"f{i}" for i in range(len(groups)))
        if len(names) != len(groups):
            raise ValueError("feature_names length must equal number of groups")
        x.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "x_original", x)
        object.__setattr__(self, "baseline", b)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "feature_names", tuple(names))

    @property
    def d(self) -> int:
        """Number of interpretable (binary) features."""
        return len(self.groups)

    @property
    def d_orig(self) -> int:
        return self.x_original.size


def sample_perturbations(ctx: InstanceContext, n: int, rng_seed: int) -> np.ndarray:
    """Draw n binary perturbations, each bit i.i.d. Bernoulli(0.5).

    Returns an (n, d) uint8 array; deterministic for a fixed seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    return rng.integers(0, 2, size=(n, ctx.d), dtype=np.uint8)


def to_original_space(ctx: InstanceContext, z: np.ndarray) -> np.ndarray:
    """Map binary perturbation(s) back to the black box's input space.

    bit = 1 keeps x_original's values for that feature group, bit = 0
    substitutes the baseline. Accepts a single vector (d,) or a matrix (n, d)
    and returns the matching (d_orig,) or (n, d_orig) float array.
    """
    z = np.asarray(z)
    single = z.ndim == 1
    Z = np.atleast_2d(z)
    if Z.shape[1] != ctx.d:
        raise ValueError(f"perturbation has {Z.shape[1]} bits, context expects {ctx.d}")
    # expand group bits to a mask over original features
    mask = np.zeros((Z.shape[0], ctx.d_orig), dtype=bool)
    for j, g in enumerate(ctx.groups):
        mask[:, list(g)] = (Z[:, j] == 1)[:, None]
    out = np.where(mask, ctx.x_original[None, :], ctx.baseline[None, :])
    return out[0] if single else out


def coalition_size(z: np.ndarray) -> int:
    """Number of 1-bits in a perturbation."""
    return int(np.asarray(z).sum())


def bits_to_string(z: np.ndarray) -> str:
    """Serialize a perturbation as a 0/1 string for CSV experiment dumps."""
    return "".join("1" if b else "0" for b in np.asarray(z).ravel())


def bits_from_string(s: str) -> np.ndarray:
    if set(s) - {"0", "1"}:
        raise ValueError(f"not a 0/1 string: {s!r}")
    return np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")


def context_from_config(source, dataset=None) -> InstanceContext:
    """Build an InstanceContext from a JSON config (path, file object or dict).

    Recognized keys: "x" (required unless "instance_row" picks a dataset row),
    "baseline" (explicit vector), "baseline_policy" ("zeros" or "means";
    "means" requires a dataset matrix), "feature_names", "groups".
    """
    if isinstance(source, dict):
        cfg = source
    elif hasattr(source, "read"):
        cfg = json.load(source)
    else:
        with open(source) as fh:
            cfg = json.load(fh)

    data = None
    if dataset is not None:
        data = np.asarray(dataset, dtype=float)

    if "x" in cfg:
        x = np.asarray(cfg["x"], dtype=float)
    elif "instance_row" in cfg and data is not None:
        x = data[int(cfg["instance_row"])]
    else:
        raise ValueError("config needs 'x' or 'instance_row' with a dataset")

    if "baseline" in cfg:
        baseline = np.asarray(cfg["baseline"], dtype=float)
    else:
        policy = cfg.get("baseline_policy", "means" if data is not None else "zeros")
        if policy == "zeros":
            baseline = np.zeros_like(x)
        elif policy == "means":
            if data is None:
                raise ValueError("baseline_policy 'means' requires a dataset")
            baseline = data.mean(axis=0)
        else:
            raise ValueError(f"unknown baseline_policy {policy!r}")

    return InstanceContext(
        x_original=x,
        baseline=baseline,
        feature_names=tuple(cfg.get("feature_names", ())),
        groups=tuple(tuple(g) for g in cfg.get("groups", ())),
    )
