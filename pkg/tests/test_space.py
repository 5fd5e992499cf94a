import numpy as np
import pytest

from credexp.space import (
    InstanceContext,
    coalition_size,
    context_from_config,
    sample_perturbations,
    to_original_space,
)


def ctx_of(d):
    return InstanceContext(x_original=np.ones(d), baseline=np.zeros(d))


def test_sampling_deterministic_for_fixed_seed():
    ctx = ctx_of(4)
    a = sample_perturbations(ctx, 3, rng_seed=7)
    b = sample_perturbations(ctx, 3, rng_seed=7)
    assert a.shape == (3, 4)
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {0, 1}


def test_sampling_differs_across_seeds():
    ctx = ctx_of(6)
    assert not np.array_equal(sample_perturbations(ctx, 50, 1), sample_perturbations(ctx, 50, 2))


def test_bernoulli_half_concentration():
    # binomial 4-sigma bound: |mean - 0.5| <= 4*sqrt(0.25/n)
    ctx = ctx_of(1)
    bits = sample_perturbations(ctx, 10_000, rng_seed=1)
    assert 0.48 <= bits.mean() <= 0.52


def test_marginal_balance_per_bit():
    ctx = ctx_of(6)
    bits = sample_perturbations(ctx, 10_000, rng_seed=3)
    bound = 4 * np.sqrt(0.25 / 10_000)
    assert np.all(np.abs(bits.mean(axis=0) - 0.5) <= bound)


def test_zero_samples_rejected():
    with pytest.raises(ValueError):
        sample_perturbations(ctx_of(3), 0, rng_seed=0)


def test_mapping_definition():
    ctx = InstanceContext(x_original=np.array([2.0, 5.0]), baseline=np.zeros(2))
    assert np.array_equal(to_original_space(ctx, np.array([1, 0])), [2.0, 0.0])


def test_all_ones_roundtrip_and_all_zeros():
    ctx = InstanceContext(x_original=np.array([1.5, -2.0, 0.25]), baseline=np.array([0.1, 0.2, 0.3]))
    assert np.array_equal(to_original_space(ctx, np.ones(3, dtype=int)), ctx.x_original)
    assert np.array_equal(to_original_space(ctx, np.zeros(3, dtype=int)), ctx.baseline)


def test_batch_mapping_matches_single():
    ctx = InstanceContext(x_original=np.array([2.0, 5.0, -1.0]), baseline=np.full(3, 0.5))
    Z = sample_perturbations(ctx, 20, rng_seed=11)
    batch = to_original_space(ctx, Z)
    for i, z in enumerate(Z):
        assert np.array_equal(batch[i], to_original_space(ctx, z))


def test_feature_groups_expand_to_original_columns():
    ctx = InstanceContext(
        x_original=np.array([1.0, 2.0, 3.0, 4.0]),
        baseline=np.zeros(4),
        feature_names=("a", "b"),
        groups=((0, 2), (1, 3)),
    )
    assert ctx.d == 2
    assert np.array_equal(to_original_space(ctx, np.array([1, 0])), [1.0, 0.0, 3.0, 0.0])


def test_coalition_size():
    assert coalition_size(np.array([1, 0, 1, 0])) == 2
    assert coalition_size(np.zeros(5, dtype=int)) == 0
    assert coalition_size(np.ones(5, dtype=int)) == 5


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        to_original_space(ctx_of(3), np.array([1, 0]))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(x_original=np.ones(2), baseline=np.ones(3)),
        dict(x_original=np.ones(2), baseline=np.ones(2), groups=((0,), (0,))),
        dict(x_original=np.ones(2), baseline=np.ones(2), groups=((0,), ())),
        dict(x_original=np.ones(2), baseline=np.ones(2), groups=((0,), (5,))),
        dict(x_original=np.ones(2), baseline=np.ones(2), feature_names=("only_one",)),
    ],
)
def test_invalid_contexts_rejected(kwargs):
    with pytest.raises(ValueError):
        InstanceContext(**kwargs)


def test_context_from_config_dict_and_file(tmp_path):
    cfg = {"x": [1.0, 2.0], "baseline": [0.5, 0.5], "feature_names": ["u", "v"]}
    ctx = context_from_config(cfg)
    assert ctx.feature_names == ("u", "v")
    path = tmp_path / "ctx.json"
    path.write_text('{"x": [1.0, 2.0], "baseline_policy": "zeros"}')
    ctx2 = context_from_config(str(path))
    assert np.array_equal(ctx2.baseline, np.zeros(2))


def test_context_from_config_dataset_means():
    data = np.array([[0.0, 2.0], [2.0, 4.0]])
    ctx = context_from_config({"instance_row": 1, "baseline_policy": "means"}, dataset=data)
    assert np.array_equal(ctx.x_original, [2.0, 4.0])
    assert np.array_equal(ctx.baseline, [1.0, 3.0])


def test_context_arrays_immutable():
    ctx = ctx_of(3)
    with pytest.raises(ValueError):
        ctx.x_original[0] = 5.0


def test_bit_string_roundtrip():
    from credexp.space import bits_from_string, bits_to_string

    z = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
    assert bits_to_string(z) == "10110"
    assert np.array_equal(bits_from_string("10110"), z)
    with pytest.raises(ValueError):
        bits_from_string("10x")
