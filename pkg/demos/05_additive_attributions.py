"""Game-style attributions with the coalition-size kernel.

With the coalition-size weighting rule the weighted fit recovers additive
contributions: the base value is pinned to the model output with every
feature absent, and two heavily-weighted anchor rows softly enforce

    f(x) = phi0 + sum_i phi_i.

Works for any queryable model; here, a hand-written tree ensemble loaded
from the documented JSON schema.

Run:  python demos/05_additive_attributions.py
"""

import json
import os
import tempfile

import numpy as np

import credexp as ce

# an exactly additive game first: contributions must be recovered to
# within the soft-constraint tolerance
model = ce.sparse_linear(np.array([0.2, 0.3]), intercept=0.1)
ctx = ce.InstanceContext(x_original=np.ones(2), baseline=np.zeros(2))
post = ce.explain(ctx, model, kernel=ce.ProximityKernel(kind="shapley"),
                  n_perturbations=200, seed=13)
f_x = model.query(ctx.x_original)[0]
f_empty = model.query(ctx.baseline)[0]
residual = ce.shap_additivity_residual(post, f_x, f_empty)
print(f"additive game: phi0={post.y_offset:.3f}, phi={np.round(post.feature_phi, 4)}")
print(f"additivity residual |f(x) - phi0 - sum(phi)| = {residual:.2e}\n")

# a small tree ensemble from the file format
trees = {
    "trees": [
        {"feature": 0, "threshold": 0.5, "left": {"leaf": 0.2}, "right": {"leaf": 0.7}},
        {"feature": 1, "threshold": 0.5,
         "left": {"leaf": 0.1},
         "right": {"feature": 0, "threshold": 0.5, "left": {"leaf": 0.5}, "right": {"leaf": 0.9}}},
    ]
}
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "forest.json")
    with open(path, "w") as fh:
        json.dump(trees, fh)
    forest = ce.load_tree_ensemble(path)

ctx = ce.InstanceContext(x_original=np.ones(2), baseline=np.zeros(2),
                         feature_names=("x0", "x1"))
post = ce.explain(ctx, forest, kernel=ce.ProximityKernel(kind="shapley"),
                  n_perturbations=200, seed=17)
f_x = forest.query(ctx.x_original)[0]
f_empty = forest.query(ctx.baseline)[0]
print(f"tree ensemble: f(x)={f_x:.3f}, f(empty)={f_empty:.3f}")
for name, phi, (lo, hi) in zip(ctx.feature_names, post.feature_phi, post.feature_intervals):
    print(f"  {name}: {phi:+.4f}  [{lo:+.4f}, {hi:+.4f}]")
print(f"additivity residual = {ce.shap_additivity_residual(post, f_x, f_empty):.2e}")
