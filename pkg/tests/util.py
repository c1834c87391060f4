"""Independent oracles shared by the unit and acceptance tests.

Everything here is a direct transcription of a definition (brute-force pair
counting, elementwise formula evaluation, finite differences); none of it
calls the production code paths it is used to check.
"""
from __future__ import annotations

import numpy as np


def ks_statistic(samples: np.ndarray, cdf_at_samples: np.ndarray) -> float:
    """Kolmogorov-Smirnov sup distance given the CDF at the sorted samples."""
    samples = np.sort(samples)
    n = samples.size
    order = np.argsort(samples)
    f = np.asarray(cdf_at_samples)[order] if cdf_at_samples.shape == samples.shape else cdf_at_samples
    upper = np.abs(np.arange(1, n + 1) / n - f)
    lower = np.abs(np.arange(0, n) / n - f)
    return float(max(upper.max(), lower.max()))


def central_difference_gradient(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Coordinate-wise central finite differences of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        bumped = x.copy()
        bumped[i] = x[i] + step
        up = f(bumped)
        bumped[i] = x[i] - step
        down = f(bumped)
        grad[i] = (up - down) / (2.0 * step)
    return grad


def gradient_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Sup-norm error relative to the larger gradient scale (floored at 1)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(1.0, np.abs(analytic).max(), np.abs(numeric).max())
    return float(np.abs(analytic - numeric).max() / scale)


def quad_kappa_oracle(counts: np.ndarray) -> float:
    """Quadratic-weighted kappa by explicit loops over the definition."""
    counts = np.asarray(counts, dtype=np.float64)
    k = counts.shape[0]
    total = counts.sum()
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    num = 0.0
    den = 0.0
    for i in range(k):
        for j in range(k):
            w = (i - j) ** 2 / (k - 1) ** 2
            num += w * counts[i, j]
            den += w * rows[i] * cols[j] / total
    if den == 0.0:
        return 0.0
    return 1.0 - num / den


def mcc_oracle(counts: np.ndarray) -> float:
    """Multiclass correlation via covariances of expanded one-hot indicators."""
    counts = np.asarray(counts, dtype=np.int64)
    k = counts.shape[0]
    y_true, y_pred = [], []
    for i in range(k):
        for j in range(k):
            y_true.extend([i] * int(counts[i, j]))
            y_pred.extend([j] * int(counts[i, j]))
    t = np.eye(k)[np.asarray(y_true, dtype=np.int64)]
    p = np.eye(k)[np.asarray(y_pred, dtype=np.int64)]
    n = t.shape[0]
    cov_tp = sum((t[:, c] * p[:, c]).mean() - t[:, c].mean() * p[:, c].mean() for c in range(k))
    cov_tt = sum((t[:, c] * t[:, c]).mean() - t[:, c].mean() ** 2 for c in range(k))
    cov_pp = sum((p[:, c] * p[:, c]).mean() - p[:, c].mean() ** 2 for c in range(k))
    if cov_tt == 0.0 or cov_pp == 0.0:
        return 0.0
    return float(cov_tp / np.sqrt(cov_tt * cov_pp))


def mcc_binary_oracle(counts: np.ndarray) -> float:
    """Classic binary MCC formula (class 1 treated as positive)."""
    tn, fp = float(counts[0, 0]), float(counts[0, 1])
    fn, tp = float(counts[1, 0]), float(counts[1, 1])
    den = np.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    if den == 0.0:
        return 0.0
    return float((tp * tn - fp * fn) / den)


def kendall_tau_oracle(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Tau-b by O(n^2) enumeration of every pair."""
    n = len(y_true)
    concordant = discordant = ties_true = ties_pred = 0
    for i in range(n):
        for j in range(i + 1, n):
            dt = int(y_true[j]) - int(y_true[i])
            dp = int(y_pred[j]) - int(y_pred[i])
            if dt == 0 and dp == 0:
                ties_true += 1
                ties_pred += 1
            elif dt == 0:
                ties_true += 1
            elif dp == 0:
                ties_pred += 1
            elif dt * dp > 0:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    den_sq = (n0 - ties_true) * (n0 - ties_pred)
    if den_sq == 0:
        return 0.0
    return float((concordant - discordant) / np.sqrt(float(den_sq)))


def balanced_accuracy_oracle(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    recalls = [counts[i, i] / counts[i].sum() for i in range(counts.shape[0])]
    return float(np.mean(recalls))


def macro_f1_oracle(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    k = counts.shape[0]
    f1s = []
    for c in range(k):
        tp = counts[c, c]
        col = counts[:, c].sum()
        row = counts[c, :].sum()
        precision = tp / col if col > 0 else 0.0
        recall = tp / row if row > 0 else 0.0
        f1s.append(2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0)
    return float(np.mean(f1s))


def random_confusion_matrix(rng: np.random.Generator, k: int, max_count: int = 20,
                            ensure_rows: bool = False) -> np.ndarray:
    """Random integer counts; optionally force every true class non-empty."""
    counts = rng.integers(0, max_count + 1, size=(k, k))
    while counts.sum() < 1:
        counts = rng.integers(0, max_count + 1, size=(k, k))
    if ensure_rows:
        for i in range(k):
            if counts[i].sum() == 0:
                counts[i, rng.integers(0, k)] = 1
    return counts
