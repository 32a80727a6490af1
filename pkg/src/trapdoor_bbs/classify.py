"""Classifiers for the task, an exhaustive distance oracle and the margin bound.

With the factorization, a prefix-mode record is classified by regenerating
the stream from its own seed prefix and counting suffix mismatches. The
robust variant also tries every seed within a small Hamming radius of the
prefix. Robustness is measured in bit flips: on the hypercube a Euclidean
radius eps is ``floor(eps**2)`` flips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .bbs import TrapdoorKey, generate, seed_to_qr, stream_from_qr
from .bits import BitString
from .errors import CapacityError, ParameterError, UnsupportedModeError
from .task import TaskParams

ORACLE_MAX_SEED_LEN = 20
COVERAGE_MAX_RECORD_LEN = 24


def default_tolerance(params: TaskParams) -> int:
    """Suffix mismatches tolerated by default: a quarter of the suffix."""
    return (params.record_len - params.seed_len) // 4


@dataclass(frozen=True)
class ClassifierConfig:
    t: int
    r: int = 0

    def __post_init__(self):
        if self.t < 0 or self.r < 0:
            raise ParameterError("t and r must be non-negative")


@dataclass(frozen=True)
class SupportDistance:
    distance: int
    witness_seed: BitString


class SupportModel:
    """Memoized suffix streams for one key and task geometry.

    Classifying perturbed copies of the same record hits the same seeds over
    and over, so streams are cached by seed value. The cache is dropped
    wholesale when it reaches ``max_entries``.
    """

    def __init__(self, key: TrapdoorKey, params: TaskParams, max_entries: int = 1 << 16):
        self.key = key
        self.params = params
        self.max_entries = max_entries
        self._streams = {}

    def __contains__(self, seed_value: int) -> bool:
        return seed_value in self._streams

    def suffix_stream(self, seed_value: int) -> int:
        stream = self._streams.get(seed_value)
        if stream is None:
            if len(self._streams) >= self.max_entries:
                self._streams.clear()
            seed = BitString(seed_value, self.params.seed_len)
            stream = generate(seed, self.key, self.params.suffix_len).value
            self._streams[seed_value] = stream
        return stream


@lru_cache(maxsize=8)
def support_model(key: TrapdoorKey, params: TaskParams) -> SupportModel:
    return SupportModel(key, params)


def _strip(params: TaskParams, record: BitString) -> BitString:
    if params.dummy_coordinate and len(record) == params.record_len + 1:
        record = record.head(params.record_len)
    if len(record) != params.record_len:
        raise ParameterError(f"record has {len(record)} bits, expected {params.record_len}")
    return record


def _split(params: TaskParams, record: BitString) -> tuple[int, int]:
    """Seed prefix and suffix of a prefix-mode record, as ints."""
    if not params.include_seed_prefix:
        raise UnsupportedModeError(
            "records without a seed prefix cannot be classified efficiently")
    value, length = record.value, record.length
    if length != params.record_len:
        if params.dummy_coordinate and length == params.record_len + 1:
            value >>= 1
        else:
            raise ParameterError(f"record has {length} bits, expected {params.record_len}")
    suffix_len = params.record_len - params.seed_len
    return value >> suffix_len, value & ((1 << suffix_len) - 1)


@lru_cache(maxsize=32)
def flip_masks(n: int, r: int) -> tuple[int, ...]:
    """XOR masks of every flip set of size <= r over n bits, smallest first.

    Within one size, sets are in lexicographic order of bit position
    (position 0 is the leftmost bit).
    """
    masks = [0]
    for k in range(1, r + 1):
        for idx in combinations(range(n), k):
            mask = 0
            for i in idx:
                mask |= 1 << (n - 1 - i)
            masks.append(mask)
    return tuple(masks)


def trapdoor_classify(key: TrapdoorKey, params: TaskParams, record: BitString, t: int) -> int:
    return _trapdoor(support_model(key, params), record, t)


def _trapdoor(model: SupportModel, record: BitString, t: int) -> int:
    prefix, suffix = _split(model.params, record)
    return int((model.suffix_stream(prefix) ^ suffix).bit_count() <= t)


def robust_classify(key: TrapdoorKey, params: TaskParams, record: BitString,
                    cfg: ClassifierConfig) -> int:
    """1 iff some seed within ``cfg.r`` flips of the prefix leaves <= ``cfg.t`` suffix mismatches."""
    return _robust(support_model(key, params), record, cfg)


def _robust(model: SupportModel, record: BitString, cfg: ClassifierConfig) -> int:
    params = model.params
    if cfg.r > params.seed_len:
        raise ParameterError("radius exceeds seed length")
    prefix, suffix = _split(params, record)
    t = cfg.t
    streams = model._streams
    pending = []
    # cached streams first: the answer is existential, so order is free
    for mask in flip_masks(params.seed_len, cfg.r):
        cand = prefix ^ mask
        stream = streams.get(cand)
        if stream is None:
            pending.append(cand)
        elif (stream ^ suffix).bit_count() <= t:
            return 1
    for cand in pending:
        if (model.suffix_stream(cand) ^ suffix).bit_count() <= t:
            return 1
    return 0


@lru_cache(maxsize=4)
def seed_streams(key: TrapdoorKey, params: TaskParams) -> tuple[int, ...]:
    """Suffix stream of every seed, indexed by seed value (toy sizes only)."""
    n = params.seed_len
    if n > ORACLE_MAX_SEED_LEN:
        raise CapacityError(f"seed_len {n} exceeds oracle limit {ORACLE_MAX_SEED_LEN}")
    by_state = {}
    out = []
    for s in range(1 << n):
        x0 = seed_to_qr(BitString(s, n), key)
        stream = by_state.get(x0)
        if stream is None:
            stream = by_state[x0] = stream_from_qr(x0, key, params.suffix_len)
        out.append(stream)
    return tuple(out)


def support_profile(key: TrapdoorKey, params: TaskParams, record: BitString):
    """Prefix and suffix distances from ``record`` to every seed's record.

    Returns two int arrays indexed by seed value. Without a seed prefix the
    prefix distances are all zero and the suffix is the whole record.
    """
    streams = seed_streams(key, params)
    n = params.seed_len
    record = _strip(params, record)
    if params.include_seed_prefix:
        prefix, suffix = record.head(n).value, record.tail(n).value
        seeds = np.arange(1 << n, dtype=np.uint64)
        prefix_dist = np.bitwise_count(seeds ^ np.uint64(prefix)).astype(np.int64)
    else:
        suffix = record.value
        prefix_dist = np.zeros(1 << n, dtype=np.int64)
    if params.suffix_len < 64:
        packed = np.array(streams, dtype=np.uint64)
        suffix_dist = np.bitwise_count(packed ^ np.uint64(suffix)).astype(np.int64)
    else:
        suffix_dist = np.array([(st ^ suffix).bit_count() for st in streams], dtype=np.int64)
    return prefix_dist, suffix_dist


def distance_to_support_oracle(key: TrapdoorKey, params: TaskParams,
                               record: BitString) -> SupportDistance:
    """Exact Hamming distance to the label-1 support by enumerating all seeds."""
    prefix_dist, suffix_dist = support_profile(key, params, record)
    total = prefix_dist + suffix_dist
    best = int(np.argmin(total))  # first minimum = smallest seed
    return SupportDistance(int(total[best]), BitString(best, params.seed_len))


def oracle_rt_decision(key: TrapdoorKey, params: TaskParams, record: BitString,
                       cfg: ClassifierConfig) -> int:
    prefix_dist, suffix_dist = support_profile(key, params, record)
    return int(np.any((prefix_dist <= cfg.r) & (suffix_dist <= cfg.t)))


def margin_bound_exact(n: int, record_len: int, d: int) -> Fraction:
    if not 0 <= d <= record_len:
        raise ParameterError(f"d must lie in [0, {record_len}]")
    ball = sum(math.comb(record_len, i) for i in range(d + 1))
    return min(Fraction(1), Fraction(ball << n, 1 << record_len))


def margin_bound(n: int, record_len: int, d: int) -> float:
    """Union bound on P(uniform record within distance ``d`` of the support)."""
    return float(margin_bound_exact(n, record_len, d))


def log10_fraction(x: Fraction) -> float:
    if x == 0:
        return -math.inf
    return math.log10(x.numerator) - math.log10(x.denominator)


def support_records(key: TrapdoorKey, params: TaskParams) -> set[int]:
    suffix_len = params.suffix_len
    streams = seed_streams(key, params)
    if not params.include_seed_prefix:
        return set(streams)
    return {(s << suffix_len) | st for s, st in enumerate(streams)}


def support_distance_histogram(key: TrapdoorKey, params: TaskParams) -> np.ndarray:
    """Counts of all ``2**record_len`` records by distance to the support.

    Uses a separable distance transform over the hypercube, one pass per
    coordinate.
    """
    m = params.record_len
    if m > COVERAGE_MAX_RECORD_LEN:
        raise CapacityError(f"record_len {m} exceeds enumeration limit {COVERAGE_MAX_RECORD_LEN}")
    dist = np.full(1 << m, m + 1, dtype=np.int16)
    dist[list(support_records(key, params))] = 0
    idx = np.arange(1 << m)
    for b in range(m):
        dist = np.minimum(dist, dist[idx ^ (1 << b)] + 1)
    return np.bincount(dist, minlength=m + 1)


def exact_coverage(key: TrapdoorKey, params: TaskParams, d: int) -> Fraction:
    hist = support_distance_histogram(key, params)
    return Fraction(int(hist[: d + 1].sum()), 1 << params.record_len)


def trivial_dummy_classify(record: BitString) -> int:
    if len(record) == 0:
        raise ParameterError("empty record")
    return record[-1]


def trapdoor_classifier(key: TrapdoorKey, params: TaskParams, t: int):
    model = support_model(key, params)
    return lambda record: _trapdoor(model, record, t)


def robust_classifier(key: TrapdoorKey, params: TaskParams, cfg: ClassifierConfig):
    model = support_model(key, params)
    return lambda record: _robust(model, record, cfg)
