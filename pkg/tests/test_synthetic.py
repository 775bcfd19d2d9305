from collections import Counter

import numpy as np
import pytest

from pfca.context import object_intent
from pfca.synthetic import (
    SyntheticError,
    SyntheticSpec,
    generate_synthetic,
    generate_table,
    make_prototypes,
    prototype_atoms,
)


def test_default_shape():
    ctx, labels, protos = generate_synthetic(seed=1)
    assert ctx.n_objects == 360 and len(ctx.schema) == 24
    assert ctx.n_atoms == 24 * 8
    assert Counter(labels) == {k: 30 for k in range(12)}
    assert protos.shape == (12, 24)


def test_prototypes_are_far_apart():
    spec = SyntheticSpec()
    protos = make_prototypes(spec, np.random.default_rng(0))
    for i in range(len(protos)):
        for j in range(i):
            assert np.count_nonzero(protos[i] != protos[j]) >= spec.hamming


def test_noise_free_rows_equal_their_prototype():
    ctx, labels, protos = generate_synthetic(SyntheticSpec(n_classes=3, copies_per_class=5, n_attributes=6), seed=4)
    for g, lab in enumerate(labels):
        assert object_intent(ctx, g).positives() == prototype_atoms(ctx, protos[lab])


def test_single_class_rows_identical():
    values, _, _, _ = generate_table(SyntheticSpec(n_classes=1, copies_per_class=7), seed=3)
    assert (values == values[0]).all()


def test_noise_flip_count_and_reproducibility():
    spec = SyntheticSpec(noise_rate=0.05)
    values, labels, protos, flips = generate_table(spec, seed=9)
    assert spec.n_flips == round(0.05 * 360 * 24) == len(flips)
    assert np.count_nonzero(values != protos[labels]) == spec.n_flips
    again = generate_table(spec, seed=9)
    np.testing.assert_array_equal(values, again[0])
    assert not np.array_equal(values, generate_table(spec, seed=10)[0])


def test_rows_are_shuffled():
    _, labels, _ = generate_synthetic(seed=1)
    assert labels != sorted(labels)


def test_unsatisfiable_hamming():
    spec = SyntheticSpec(n_classes=50, n_attributes=4, values_per_attribute=2, min_pairwise_hamming=4, max_tries=200)
    with pytest.raises(SyntheticError, match="Hamming"):
        generate_synthetic(spec, seed=0)


@pytest.mark.parametrize(
    "kwargs",
    [{"n_classes": 0}, {"values_per_attribute": 1}, {"noise_rate": 1.5}, {"n_attributes": 4, "min_pairwise_hamming": 5}],
)
def test_spec_validation(kwargs):
    with pytest.raises(SyntheticError):
        SyntheticSpec(**kwargs)
