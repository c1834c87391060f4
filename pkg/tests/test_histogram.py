import numpy as np
import pytest

from balmix.histogram import ClassHistogram, from_labels, imbalance_ratio


def test_from_labels_counts():
    h = from_labels([0, 0, 0, 0, 1], 2)
    assert h.counts.tolist() == [4, 1]
    assert h.total == 5
    assert h.num_classes == 2


def test_from_labels_uniform():
    h = from_labels([0, 1, 2], 3)
    assert h.counts.tolist() == [1, 1, 1]
    assert h.total == 3


def test_from_labels_rejects_empty_class():
    with pytest.raises(ValueError, match="empty"):
        from_labels([0, 0, 1], 3)


def test_from_labels_rejects_out_of_range():
    with pytest.raises(ValueError, match="out of range"):
        from_labels([0, 1, 2], 2)
    with pytest.raises(ValueError, match="out of range"):
        from_labels([0, -1], 2)


def test_from_labels_rejects_small_k():
    with pytest.raises(ValueError):
        from_labels([0, 0], 1)


def test_construction_rejects_zero_count():
    with pytest.raises(ValueError):
        ClassHistogram(np.array([3, 0, 2]))


def test_permutation_invariance():
    rng = np.random.default_rng(11)
    labels = rng.integers(0, 5, size=200)
    labels[:5] = np.arange(5)  # every class present
    base = from_labels(labels, 5)
    for _ in range(20):
        shuffled = rng.permutation(labels)
        assert np.array_equal(from_labels(shuffled, 5).counts, base.counts)


def test_imbalance_ratio_examples():
    assert imbalance_ratio(from_labels([0] * 4 + [1], 2)) == 4.0
    assert imbalance_ratio(ClassHistogram(np.array([7, 7, 7]))) == 1.0
    assert imbalance_ratio(ClassHistogram(np.array([100, 10, 1]))) == 100.0


def test_imbalance_ratio_at_least_one():
    rng = np.random.default_rng(7)
    for _ in range(100):
        counts = rng.integers(1, 50, size=rng.integers(2, 8))
        ratio = imbalance_ratio(ClassHistogram(counts))
        assert ratio >= 1.0
        assert (ratio == 1.0) == bool(np.all(counts == counts[0]))


def test_frequencies_sum_to_one():
    h = from_labels([0, 0, 1, 2, 2, 2], 3)
    assert h.frequencies() == pytest.approx([2 / 6, 1 / 6, 3 / 6])


def test_counts_are_immutable():
    h = from_labels([0, 1], 2)
    with pytest.raises(ValueError):
        h.counts[0] = 99
