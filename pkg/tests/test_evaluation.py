import numpy as np
import pytest

from credexp.blackbox import linear_logit, sparse_linear
from credexp.evaluation import (
    SuiteCase,
    coverage_calibration,
    focused_bayes_explainer,
    ground_truth_phi,
    heteroscedastic_case,
    lipschitz_stability,
    prior_sensitivity_grid,
    ptg_calibration,
    ptg_suite,
    random_wls_explainer,
    sampling_bias,
    sampling_efficiency,
    synthetic_suite,
)
from credexp.explain import explain
from credexp.kernels import ProximityKernel
from credexp.space import InstanceContext

KERNEL = ProximityKernel()


def small_case(name="small_ll", d=6, noise=0.8):
    ctx = InstanceContext(x_original=np.ones(d), baseline=np.zeros(d))
    beta = np.linspace(-0.5, 0.7, d)
    return SuiteCase(name, name, lambda: linear_logit(beta, noise_sd=noise, noise_seed=3), ctx)


def test_suite_composition():
    cases = synthetic_suite()
    assert len(cases) == 8
    dims = {c.group: c.ctx.d for c in cases}
    assert dims["linear_logit"] == 5
    assert dims["sparse_linear"] == 4
    assert dims["toy_linear"] == 2
    # one fit's worth of instance-feature pairs
    assert sum(c.ctx.d for c in cases) == 32


def test_ground_truth_cached_and_reproducible():
    case = small_case()
    cache = {}
    a = ground_truth_phi(case, KERNEL, 2000, cache=cache)
    b = ground_truth_phi(case, KERNEL, 2000, cache=cache)
    assert a is b
    c = ground_truth_phi(case, KERNEL, 2000, cache={})
    assert np.array_equal(a, c)


def test_self_coverage_with_shared_perturbations():
    # fitting with the ground-truth sample itself must cover exactly
    case = small_case()
    gt = ground_truth_phi(case, KERNEL, 2000, cache={})
    post = explain(case.ctx, case.make_model(), KERNEL,
                   n_perturbations=2000, seed=case.seed_base() + 777_001)
    assert np.array_equal(post.feature_phi, gt)
    ivals = post.feature_intervals
    assert np.all((gt >= ivals[:, 0]) & (gt <= ivals[:, 1]))


def test_coverage_requires_dominating_reference():
    with pytest.raises(ValueError):
        coverage_calibration([small_case()], KERNEL, N_fit=100, N_gt=500)


def test_coverage_report_shape_and_se():
    rep = coverage_calibration([small_case()], KERNEL, N_fit=100, N_gt=1000, seeds=range(3), gt_cache={})
    assert rep.trials == 3 * 6
    assert 0 <= rep.coverage <= 1
    assert np.isfinite(rep.se) and rep.se >= 0
    assert set(rep.per_dataset) == {"small_ll"}
    assert len(rep.rows) == 3


def test_half_level_coverage_calibrated():
    # well-specified noisy surface: empirical coverage at alpha=0.5 is close
    # to 0.5 (binomial tolerance per the multi-level calibration oracle)
    ctx = InstanceContext(x_original=np.ones(8), baseline=np.zeros(8))
    case = SuiteCase("covhalf", "covhalf",
                     lambda: linear_logit(np.linspace(-0.6, 0.8, 8), noise_sd=1.0, noise_seed=3), ctx)
    rep = coverage_calibration([case], KERNEL, N_fit=100, N_gt=10_000,
                               alpha=0.5, seeds=range(30), gt_cache={})
    assert abs(rep.coverage - 0.5) <= 0.08


def test_ptg_calibration_monotone_in_target():
    rep = ptg_calibration(ptg_suite()[:1], KERNEL, S=200, targets=(0.05, 0.1, 0.2), seeds=range(3))
    by_target = {W: [] for W in (0.05, 0.1, 0.2)}
    for case, seed, W, G, total, observed, ratio, capped in rep.rows:
        by_target[W].append((G, observed))
        assert not capped
    for seed_idx in range(3):
        g_tight = rep.rows[seed_idx * 3][3]
        g_loose = rep.rows[seed_idx * 3 + 2][3]
        assert g_tight >= g_loose  # looser target needs fewer perturbations
    med_obs = {W: np.median([o for _, o in v]) for W, v in by_target.items()}
    assert med_obs[0.05] < med_obs[0.2]


def test_ptg_calibration_validation():
    with pytest.raises(ValueError):
        ptg_calibration(ptg_suite(), KERNEL, targets=())


def test_efficiency_report_pairing():
    case = heteroscedastic_case(d=8)
    rep = sampling_efficiency(case, KERNEL, stop_width=0.15, seeds=range(3), budget_N=2000)
    assert len(rep.rows) == 3
    assert rep.median_queries("focused") > 0
    assert 0 <= rep.stop_width


def test_bias_report_requires_reference_margin():
    case = heteroscedastic_case(d=8)
    with pytest.raises(ValueError):
        sampling_bias(case, KERNEL, budget_N=400, N_gt=1000)


def test_stability_self_comparison_is_zero():
    k = KERNEL
    cases = [small_case()]
    expl = random_wls_explainer(k, budget=80)
    rep = lipschitz_stability(expl, expl, cases, epsilon=0.1, n_neighbors=4, seed=2)
    assert rep.rows[0][3] == pytest.approx(0.0)
    assert rep.rows[0][1] == pytest.approx(rep.rows[0][2])


def test_stability_constant_black_box_is_flat():
    # under the coalition-size kernel the base value soaks up the constant,
    # every fit returns exactly zero importances, and the constant drops out
    ctx = InstanceContext(x_original=np.full(3, 0.5), baseline=np.zeros(3))
    case = SuiteCase("const", "const", lambda: sparse_linear(np.zeros(3), intercept=0.4), ctx)
    shap = ProximityKernel(kind="shapley")
    rep = lipschitz_stability(
        random_wls_explainer(shap, 60), random_wls_explainer(shap, 60),
        [case], epsilon=0.1, n_neighbors=4, seed=0,
    )
    assert rep.rows[0][1] < 1e-9
    # the exponential-kernel explainer also returns near-null importances
    post_phi = random_wls_explainer(KERNEL, 400)(case.make_model(), case.ctx, seed=1)
    assert np.abs(post_phi).max() < 0.05


def test_stability_focused_improves_on_suite():
    cases = [c for c in synthetic_suite() if not c.group.startswith("toy")] + [heteroscedastic_case()]
    rep = lipschitz_stability(
        random_wls_explainer(KERNEL, 200),
        focused_bayes_explainer(KERNEL, 200),
        cases, epsilon=0.1, n_neighbors=10, seed=1,
    )
    assert rep.median_improvement > 0


def test_prior_grid_shape_and_neutral_cell():
    gt_cache = {}
    cases = synthetic_suite()[:2]
    rep = prior_sensitivity_grid([1e-5, 100.0], [1e-5], cases, KERNEL,
                                 N_fit=100, N_gt=1000, seeds=range(2), gt_cache=gt_cache)
    assert rep.coverage.shape == (2, 1)
    base = coverage_calibration(cases, KERNEL, N_fit=100, N_gt=1000, seeds=range(2), gt_cache=gt_cache)
    # near-default cell reproduces the uninformative result within 2 points
    assert abs(rep.cell(1e-5, 1e-5) - base.coverage) <= 0.02
    with pytest.raises(ValueError):
        prior_sensitivity_grid([], [1e-5], cases, KERNEL)
