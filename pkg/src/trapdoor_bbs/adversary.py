"""Accuracy and robust-accuracy evaluation, bit-flip attacks and baselines.

Robustness uses a Hamming threat model: an attacker may flip up to
``budget`` bits of a record, optionally restricted to position groups with
their own flip caps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import beta

from .bits import BitString
from .errors import CapacityError, ParameterError
from .task import Dataset, LabeledSample

Classifier = Callable[[BitString], int]

EXHAUSTIVE_MAX_BUDGET = 2
EXHAUSTIVE_MAX_WIDTH = 16
SERIAL_LAGS = tuple(range(1, 9))

# spawn keys for dataset-derived randomness (make_dataset uses 0 and 1)
_SPLIT_STREAM = 2
_LINEAR_STREAM = 3


def confidence_radius(successes: int, n: int) -> float:
    """Half-width of a 95% interval for a binomial proportion.

    Normal approximation, or Clopper-Pearson when fewer than five successes
    or failures are observed.
    """
    if n <= 0:
        return 1.0
    p = successes / n
    if min(successes, n - successes) < 5:
        lo = beta.ppf(0.025, successes, n - successes + 1) if successes else 0.0
        hi = beta.ppf(0.975, successes + 1, n - successes) if successes < n else 1.0
        return float(max(p - lo, hi - p))
    return 1.959963984540054 * math.sqrt(p * (1 - p) / n)


@dataclass(frozen=True)
class EvalReport:
    name: str
    accuracy: float
    per_class_accuracy: tuple
    n_samples: int
    confidence_radius: float

    @classmethod
    def from_predictions(cls, name: str, predicted, labels) -> "EvalReport":
        predicted = np.asarray(predicted)
        labels = np.asarray(labels)
        if labels.size == 0:
            raise ParameterError("cannot evaluate on an empty dataset")
        correct = predicted == labels
        per_class = []
        for c in (0, 1):
            mask = labels == c
            per_class.append(float(correct[mask].mean()) if mask.any() else float("nan"))
        hits = int(correct.sum())
        return cls(name, hits / labels.size, tuple(per_class), int(labels.size),
                   confidence_radius(hits, int(labels.size)))

    def flat_fields(self) -> dict:
        return {
            "name": self.name,
            "accuracy": f"{self.accuracy:.6f}",
            "accuracy_class0": f"{self.per_class_accuracy[0]:.6f}",
            "accuracy_class1": f"{self.per_class_accuracy[1]:.6f}",
            "n_samples": str(self.n_samples),
            "confidence_radius": f"{self.confidence_radius:.6f}",
        }

    def to_flat(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.flat_fields().items())


def format_table(reports: Sequence[EvalReport]) -> str:
    rows = [("test", "accuracy", "+/-95%", "class0", "class1", "n")]
    for r in reports:
        rows.append((r.name, f"{r.accuracy:.4f}", f"{r.confidence_radius:.4f}",
                     f"{r.per_class_accuracy[0]:.4f}", f"{r.per_class_accuracy[1]:.4f}",
                     str(r.n_samples)))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) if i == 0 else cell.rjust(w)
                       for i, (cell, w) in enumerate(zip(row, widths))) for row in rows]
    return "\n".join(lines) + "\n"


def format_flat(reports: Sequence[EvalReport]) -> str:
    return "\n".join(r.to_flat() for r in reports)


def eval_accuracy(classifier: Classifier, dataset: Dataset, name: str = "accuracy") -> EvalReport:
    if len(dataset) == 0:
        raise ParameterError("cannot evaluate on an empty dataset")
    predicted = [classifier(s.record) for s in dataset.samples]
    return EvalReport.from_predictions(name, predicted, dataset.labels())


@dataclass(frozen=True)
class AttackResult:
    success: bool
    perturbed: BitString
    flips_used: int


def _cap_table(width: int, positions, caps):
    """Allowed positions in scan order and each position's cap group."""
    allowed = list(range(width)) if positions is None else list(positions)
    group_of = {}
    limits = []
    for g, (group, limit) in enumerate(caps or ()):
        limits.append(limit)
        for i in group:
            group_of[i] = g
    return allowed, group_of, limits


def greedy_flip_attack(classifier: Classifier, record: BitString, true_label: int,
                       budget: int, positions: Optional[Sequence[int]] = None,
                       caps: Optional[Sequence[tuple]] = None) -> AttackResult:
    """Flip bits one at a time looking for a misclassification.

    Each step tries every remaining allowed single flip and stops at the
    first that changes the prediction away from ``true_label``; if none
    does, the first remaining flip is committed and the search continues.
    ``caps`` is a list of ``(positions, max_flips)`` groups.
    """
    if budget < 0:
        raise ParameterError("budget must be non-negative")
    current = record
    if classifier(current) != true_label:
        return AttackResult(True, current, 0)
    allowed, group_of, limits = _cap_table(len(record), positions, caps)
    used = [0] * len(limits)
    flipped = set()
    for step in range(budget):
        candidates = [i for i in allowed if i not in flipped
                      and (i not in group_of or used[group_of[i]] < limits[group_of[i]])]
        if not candidates:
            break
        for i in candidates:
            trial = current.flip(i)
            if classifier(trial) != true_label:
                return AttackResult(True, trial, step + 1)
        i = candidates[0]
        current = current.flip(i)
        flipped.add(i)
        if i in group_of:
            used[group_of[i]] += 1
    return AttackResult(False, current, len(flipped))


def exhaustive_ball_attack(classifier: Classifier, record: BitString, true_label: int,
                           budget: int, positions: Optional[Sequence[int]] = None,
                           caps: Optional[Sequence[tuple]] = None) -> AttackResult:
    """Search the whole flip ball; exact but only for tiny budgets and records."""
    if budget > EXHAUSTIVE_MAX_BUDGET or len(record) > EXHAUSTIVE_MAX_WIDTH:
        raise CapacityError(
            f"exhaustive mode needs budget <= {EXHAUSTIVE_MAX_BUDGET} "
            f"and records of at most {EXHAUSTIVE_MAX_WIDTH} bits")
    allowed, group_of, limits = _cap_table(len(record), positions, caps)
    for k in range(budget + 1):
        for idx in combinations(allowed, k):
            counts = [0] * len(limits)
            for i in idx:
                if i in group_of:
                    counts[group_of[i]] += 1
            if any(c > lim for c, lim in zip(counts, limits)):
                continue
            trial = record
            for i in idx:
                trial = trial.flip(i)
            if classifier(trial) != true_label:
                return AttackResult(True, trial, k)
    return AttackResult(False, record, 0)


def eval_robust_accuracy(classifier: Classifier, dataset: Dataset, budget: int,
                         positions=None, caps=None, exhaustive: bool = False,
                         name: str = "robust_accuracy") -> EvalReport:
    """Fraction of samples the attack fails on.

    Greedy mode upper-bounds the true robust accuracy; exhaustive mode is
    exact.
    """
    if budget < 0:
        raise ParameterError("budget must be non-negative")
    if len(dataset) == 0:
        raise ParameterError("cannot evaluate on an empty dataset")
    attack = exhaustive_ball_attack if exhaustive else greedy_flip_attack
    labels = dataset.labels()
    # "correct" here means the attack failed
    predicted = [s.label if not attack(classifier, s.record, s.label, budget,
                                       positions, caps).success else 1 - s.label
                 for s in dataset.samples]
    return EvalReport.from_predictions(name, predicted, labels)


# --- trapdoor-free baselines -------------------------------------------------

def split_dataset(dataset: Dataset, train_frac: float = 0.5) -> tuple[Dataset, Dataset]:
    """Random train/test split driven by the dataset's own rng seed."""
    n = len(dataset)
    n_train = int(round(n * train_frac))
    if n_train < 2 or n - n_train < 2:
        raise ParameterError(f"split of {n} samples at {train_frac} is degenerate")
    rng = np.random.default_rng(np.random.SeedSequence(dataset.rng_seed, spawn_key=(_SPLIT_STREAM,)))
    order = rng.permutation(n)
    train, test = dataset.subset(order[:n_train]), dataset.subset(order[n_train:])
    for part in (train, test):
        if len(set(part.labels().tolist())) < 2:
            raise ParameterError("each split needs both labels")
    return train, test


def monobit_statistic(X: np.ndarray) -> np.ndarray:
    return X.sum(axis=1, dtype=np.int64).astype(float)


def serial_statistic(X: np.ndarray, lag: int) -> np.ndarray:
    """Fraction of positions whose bit equals the bit ``lag`` places later."""
    return (X[:, :-lag] == X[:, lag:]).mean(axis=1)


def block_chi2_statistic(X: np.ndarray, block: int = 8) -> np.ndarray:
    """Chi-square of each record's histogram of non-overlapping 8-bit blocks."""
    nblocks = X.shape[1] // block
    if nblocks == 0:
        return np.zeros(X.shape[0])
    blocks = np.packbits(X[:, : nblocks * block], axis=1)
    counts = np.zeros((X.shape[0], 1 << block))
    np.add.at(counts, (np.repeat(np.arange(X.shape[0]), nblocks), blocks.ravel()), 1)
    expected = nblocks / (1 << block)
    return ((counts - expected) ** 2 / expected).sum(axis=1)


@dataclass(frozen=True)
class ThresholdRule:
    """Predict 1 when ``sign * (stat - threshold) > 0``."""

    threshold: float
    sign: int

    def predict(self, stat: np.ndarray) -> np.ndarray:
        return (self.sign * (stat - self.threshold) > 0).astype(np.int8)


def fit_threshold(stat: np.ndarray, labels: np.ndarray) -> ThresholdRule:
    """Threshold and direction maximizing training accuracy."""
    order = np.argsort(stat, kind="stable")
    s, y = stat[order], labels[order].astype(np.int64)
    n = len(s)
    ones_below = np.concatenate(([0], np.cumsum(y)))  # label-1 count among first k
    k = np.arange(n + 1)
    # predict 1 above the cut: correct = zeros below + ones above
    above = (k - ones_below) + (ones_below[-1] - ones_below)
    below = n - above
    # only cut between distinct values
    valid = np.ones(n + 1, dtype=bool)
    valid[1:n] = s[1:] != s[:-1]
    above = np.where(valid, above, -1)
    below = np.where(valid, below, -1)
    cut_a, cut_b = int(np.argmax(above)), int(np.argmax(below))
    sign, cut = (1, cut_a) if above[cut_a] >= below[cut_b] else (-1, cut_b)
    if cut == 0:
        threshold = s[0] - 1.0
    elif cut == n:
        threshold = s[-1] + 1.0
    else:
        threshold = (s[cut - 1] + s[cut]) / 2
    return ThresholdRule(float(threshold), sign)


class PositionRule:
    """Best single coordinate (and polarity) as the predicted label."""

    def __init__(self, X: np.ndarray, labels: np.ndarray):
        agree = (X == labels[:, None]).mean(axis=0)
        score = np.maximum(agree, 1 - agree)
        self.position = int(np.argmax(score))
        self.invert = bool(agree[self.position] < 0.5)

    def predict(self, X: np.ndarray) -> np.ndarray:
        bits = X[:, self.position].astype(np.int8)
        return 1 - bits if self.invert else bits


def _statistics():
    stats = {"monobit": monobit_statistic}
    for lag in SERIAL_LAGS:
        stats[f"serial_lag{lag}"] = lambda X, lag=lag: serial_statistic(X, lag)
    stats["block_chi2"] = block_chi2_statistic
    return stats


def fit_distinguishers(train: Dataset) -> dict:
    """Fit every baseline on ``train``; returns name -> ``predict(X)``."""
    X, y = train.matrix(), train.labels()
    fitted = {}
    rule = PositionRule(X, y)
    fitted["position_frequency"] = rule.predict
    for name, stat in _statistics().items():
        t = fit_threshold(stat(X), y)
        fitted[name] = lambda X, stat=stat, t=t: t.predict(stat(X))
    return fitted


def score_distinguishers(fitted: dict, test: Dataset, labels=None) -> list[EvalReport]:
    X = test.matrix()
    y = test.labels() if labels is None else np.asarray(labels)
    return [EvalReport.from_predictions(name, predict(X), y) for name, predict in fitted.items()]


def baseline_stat_distinguishers(dataset: Dataset, train_frac: float = 0.5) -> list[EvalReport]:
    """Trapdoor-free tests, fit on a training split and scored on held-out data."""
    train, test = split_dataset(dataset, train_frac)
    return score_distinguishers(fit_distinguishers(train), test)


def _signed(X: np.ndarray) -> np.ndarray:
    return np.hstack([2.0 * X - 1.0, np.ones((X.shape[0], 1))])


def train_linear_baseline(train: Dataset, test: Dataset, epochs: int = 5,
                          step_size: float = 0.01, name: str = "linear") -> EvalReport:
    """Logistic-loss SGD on +/-1 bits with a bias term; reports test accuracy."""
    if epochs < 0 or step_size <= 0:
        raise ParameterError("epochs must be >= 0 and step_size > 0")
    X, y = _signed(train.matrix()), train.labels().astype(float)
    rng = np.random.default_rng(np.random.SeedSequence(train.rng_seed, spawn_key=(_LINEAR_STREAM,)))
    w = rng.normal(0.0, 0.01, X.shape[1])
    for _ in range(epochs):
        for i in rng.permutation(len(y)):
            z = float(X[i] @ w)
            err = 1.0 / (1.0 + math.exp(-z)) - y[i] if z > -500 else -y[i]
            w -= step_size * err * X[i]
    predicted = (_signed(test.matrix()) @ w > 0).astype(np.int8)
    return EvalReport.from_predictions(name, predicted, test.labels())


def with_labels(dataset: Dataset, labels) -> Dataset:
    samples = tuple(LabeledSample(s.record, int(l)) for s, l in zip(dataset.samples, labels))
    return replace(dataset, samples=samples)
