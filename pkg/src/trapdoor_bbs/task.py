"""The two-distribution classification task and its file formats.

Label 0 records are uniform bits. Label 1 records are ``seed + G_N(seed)``
for a uniform seed (or ``G_N(seed)`` alone when the prefix is omitted).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bbs import TrapdoorKey, sample_record
from .bits import BitString
from .errors import FormatError, ParameterError, VersionError
from .numtheory import gen_blum_prime, randbits

TINY_MODULUS_BITS = 16
SEED_SLACK = 64

# spawn keys separating per-sample streams from the shuffle stream
_SAMPLE_STREAM = 0
_SHUFFLE_STREAM = 1


@dataclass(frozen=True)
class TaskParams:
    modulus_bits: int
    seed_len: int
    record_len: int
    include_seed_prefix: bool = True
    dummy_coordinate: bool = False

    def __post_init__(self):
        if self.modulus_bits < 6 or self.modulus_bits % 2:
            raise ParameterError(f"modulus_bits must be even and >= 6, got {self.modulus_bits}")
        if self.seed_len < 0 or self.record_len < 1:
            raise ParameterError("seed_len must be >= 0 and record_len >= 1")
        if self.include_seed_prefix and self.record_len <= self.seed_len:
            raise ParameterError("record_len must exceed seed_len when the seed prefix is included")

    @classmethod
    def default(cls, modulus_bits: int, **overrides) -> "TaskParams":
        """Seed length ``modulus_bits + 64`` and record length four times that."""
        seed_len = overrides.pop("seed_len", modulus_bits + SEED_SLACK)
        record_len = overrides.pop("record_len", 4 * seed_len)
        return cls(modulus_bits, seed_len, record_len, **overrides)

    @property
    def suffix_len(self) -> int:
        return self.record_len - self.seed_len if self.include_seed_prefix else self.record_len

    @property
    def width(self) -> int:
        """Stored record width, counting the dummy coordinate."""
        return self.record_len + int(self.dummy_coordinate)


@dataclass(frozen=True)
class LabeledSample:
    record: BitString
    label: int


@dataclass(frozen=True)
class Dataset:
    """Labeled records plus the public header needed to interpret them."""

    modulus: int
    seed_len: int
    record_len: int
    include_seed_prefix: bool
    dummy_coordinate: bool
    rng_seed: int
    samples: tuple = field(default=())

    @classmethod
    def for_params(cls, params: TaskParams, modulus: int, rng_seed: int, samples=()) -> "Dataset":
        return cls(modulus, params.seed_len, params.record_len, params.include_seed_prefix,
                   params.dummy_coordinate, rng_seed, tuple(samples))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def width(self) -> int:
        return self.record_len + int(self.dummy_coordinate)

    def params(self, modulus_bits: Optional[int] = None) -> TaskParams:
        if modulus_bits is None:
            modulus_bits = max(6, self.modulus.bit_length() + self.modulus.bit_length() % 2)
        return TaskParams(modulus_bits, self.seed_len, self.record_len,
                          self.include_seed_prefix, self.dummy_coordinate)

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int8)

    def matrix(self) -> np.ndarray:
        """Records as a ``(len, width)`` uint8 array."""
        width = self.width
        nbytes = (width + 7) // 8
        pad = 8 * nbytes - width
        raw = b"".join((s.record.value << pad).to_bytes(nbytes, "big") for s in self.samples)
        packed = np.frombuffer(raw, dtype=np.uint8).reshape(len(self.samples), nbytes)
        return np.unpackbits(packed, axis=1)[:, :width]

    def subset(self, indices) -> "Dataset":
        return replace(self, samples=tuple(self.samples[i] for i in indices))


def sample_rng(rng_seed: int, index: int) -> np.random.Generator:
    """Randomness for sample ``index``; independent of evaluation order."""
    return np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(_SAMPLE_STREAM, index)))


def keygen(params: TaskParams, rng: np.random.Generator) -> tuple[TrapdoorKey, int]:
    bits = params.modulus_bits
    half = bits // 2
    p = gen_blum_prime(half, rng)
    q = gen_blum_prime(half, rng)
    while q == p:
        # below 16 bits there may be a single Blum prime of the target size
        if bits < TINY_MODULUS_BITS:
            half += 1
        q = gen_blum_prime(half, rng)
    key = TrapdoorKey(p, q)
    return key, key.N


def sample_d0(params: TaskParams, rng: np.random.Generator) -> BitString:
    return BitString(randbits(rng, params.record_len), params.record_len)


def sample_d1(key: TrapdoorKey, params: TaskParams, rng: np.random.Generator) -> BitString:
    seed = BitString(randbits(rng, params.seed_len), params.seed_len)
    return sample_record(seed, key, params.record_len, params.include_seed_prefix)


def augment_dummy(record: BitString, label: int) -> BitString:
    return record + BitString(label, 1)


def make_dataset(key: TrapdoorKey, params: TaskParams, count_per_class: int,
                 rng_seed: int) -> Dataset:
    """Balanced dataset; sample ``i`` draws from its own ``(rng_seed, i)`` stream.

    Indices ``[0, count)`` hold label 0 and ``[count, 2*count)`` label 1
    before a Fisher-Yates shuffle driven by a separate stream.
    """
    if count_per_class < 1:
        raise ParameterError("count_per_class must be >= 1")
    samples = []
    for i in range(2 * count_per_class):
        rng = sample_rng(rng_seed, i)
        label = int(i >= count_per_class)
        record = sample_d1(key, params, rng) if label else sample_d0(params, rng)
        if params.dummy_coordinate:
            record = augment_dummy(record, label)
        samples.append(LabeledSample(record, label))
    shuffle_rng = np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(_SHUFFLE_STREAM,)))
    for i in range(len(samples) - 1, 0, -1):
        j = int(shuffle_rng.integers(0, i + 1))
        samples[i], samples[j] = samples[j], samples[i]
    return Dataset.for_params(params, key.N, rng_seed, samples)


# --- file formats -----------------------------------------------------------

KEY_VERSION = "1"
_KEY_FIELDS = ("version", "p", "q", "N", "modulus_bits", "seed_len", "record_len",
               "include_seed_prefix", "dummy_coordinate")
_PUBLIC_FIELDS = tuple(f for f in _KEY_FIELDS if f not in ("p", "q"))


def _params_fields(params: TaskParams) -> dict:
    return {
        "modulus_bits": str(params.modulus_bits),
        "seed_len": str(params.seed_len),
        "record_len": str(params.record_len),
        "include_seed_prefix": str(int(params.include_seed_prefix)),
        "dummy_coordinate": str(int(params.dummy_coordinate)),
    }


def format_key(key: TrapdoorKey, params: TaskParams) -> str:
    fields = {"version": KEY_VERSION, "p": format(key.p, "x"), "q": format(key.q, "x"),
              "N": format(key.N, "x"), **_params_fields(params)}
    return "".join(f"{k}={fields[k]}\n" for k in _KEY_FIELDS)


def format_public(N: int, params: TaskParams) -> str:
    fields = {"version": KEY_VERSION, "N": format(N, "x"), **_params_fields(params)}
    return "".join(f"{k}={fields[k]}\n" for k in _PUBLIC_FIELDS)


def _parse_flat(text: str, required) -> dict:
    fields = {}
    for lineno, line in enumerate(text.split("\n"), 1):
        if not line.strip():
            continue
        name, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"expected name=value, got {line!r}", lineno)
        if name in fields:
            raise FormatError(f"duplicate field {name!r}", lineno)
        fields[name] = (value.strip(), lineno)
    if "version" not in fields:
        raise FormatError("missing field 'version'")
    if fields["version"][0] != KEY_VERSION:
        raise VersionError(f"unsupported key file version {fields['version'][0]!r}",
                           fields["version"][1])
    missing = [f for f in required if f not in fields]
    if missing:
        raise FormatError(f"missing field(s) {', '.join(missing)}")
    return fields


def _field(fields, name, base=10):
    value, lineno = fields[name]
    try:
        return int(value, base)
    except ValueError:
        raise FormatError(f"field {name!r}: bad integer {value!r}", lineno) from None


def _flag(fields, name):
    value, lineno = fields[name]
    if value not in ("0", "1"):
        raise FormatError(f"field {name!r} must be 0 or 1", lineno)
    return value == "1"


def _params_from_fields(fields) -> TaskParams:
    try:
        return TaskParams(_field(fields, "modulus_bits"), _field(fields, "seed_len"),
                          _field(fields, "record_len"), _flag(fields, "include_seed_prefix"),
                          _flag(fields, "dummy_coordinate"))
    except ParameterError as exc:
        raise FormatError(f"inconsistent parameters: {exc}") from None


def parse_key(text: str) -> tuple[TrapdoorKey, TaskParams]:
    fields = _parse_flat(text, _KEY_FIELDS)
    p, q, N = (_field(fields, f, 16) for f in ("p", "q", "N"))
    try:
        key = TrapdoorKey(p, q, N)
    except ParameterError as exc:
        raise FormatError(f"invalid key: {exc}") from None
    return key, _params_from_fields(fields)


def parse_public(text: str) -> tuple[int, TaskParams]:
    fields = _parse_flat(text, _PUBLIC_FIELDS)
    return _field(fields, "N", 16), _params_from_fields(fields)


def write_key(path, key: TrapdoorKey, params: TaskParams) -> None:
    _write_text(path, format_key(key, params))


def read_key(path) -> tuple[TrapdoorKey, TaskParams]:
    return parse_key(_read_text(path))


def write_public(path, N: int, params: TaskParams) -> None:
    _write_text(path, format_public(N, params))


def read_public(path) -> tuple[int, TaskParams]:
    return parse_public(_read_text(path))


def format_dataset(ds: Dataset) -> str:
    header = (f"v1 N={ds.modulus:x} n={ds.seed_len} len={ds.record_len} "
              f"prefix={int(ds.include_seed_prefix)} dummy={int(ds.dummy_coordinate)} "
              f"seed={ds.rng_seed}\n")
    return header + "".join(f"{s.label} {s.record}\n" for s in ds.samples)


_HEADER_KEYS = ("N", "n", "len", "prefix", "dummy", "seed")


def parse_dataset(text: str) -> Dataset:
    lines = text.split("\n")
    if not lines[0]:
        raise FormatError("empty dataset file", 1)
    tokens = lines[0].split(" ")
    if tokens[0] != "v1":
        if tokens[0][:1] == "v" and tokens[0][1:].isdigit():
            raise VersionError(f"unsupported dataset version {tokens[0]!r}", 1)
        raise FormatError("header must start with 'v1'", 1)
    header = {}
    for tok in tokens[1:]:
        name, sep, value = tok.partition("=")
        if not sep or name not in _HEADER_KEYS or name in header:
            raise FormatError(f"bad header token {tok!r}", 1)
        header[name] = value
    if set(header) != set(_HEADER_KEYS):
        raise FormatError(f"header needs fields {', '.join(_HEADER_KEYS)}", 1)
    try:
        modulus = int(header["N"], 16)
        seed_len, record_len, rng_seed = (int(header[k]) for k in ("n", "len", "seed"))
    except ValueError:
        raise FormatError("bad integer in header", 1) from None
    flags = [header["prefix"], header["dummy"]]
    if any(f not in ("0", "1") for f in flags):
        raise FormatError("prefix and dummy must be 0 or 1", 1)
    prefix, dummy = (f == "1" for f in flags)
    width = record_len + int(dummy)

    if lines[-1] != "":
        raise FormatError("file is truncated (no final newline)", len(lines))
    samples = []
    for lineno, line in enumerate(lines[1:-1], 2):
        label, sep, bits = line.partition(" ")
        if label not in ("0", "1") or not sep:
            raise FormatError(f"expected '<label> <bits>', got {line[:40]!r}", lineno)
        if len(bits) != width or set(bits) - {"0", "1"}:
            raise FormatError(f"record must be {width} characters of 0/1", lineno)
        samples.append(LabeledSample(BitString(int(bits, 2), width), int(label)))
    return Dataset(modulus, seed_len, record_len, prefix, dummy, rng_seed, tuple(samples))


def write_dataset(path, ds: Dataset) -> None:
    _write_text(path, format_dataset(ds))


def read_dataset(path) -> Dataset:
    return parse_dataset(_read_text(path))


def _write_text(path, text: str) -> None:
    with open(os.fspath(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def _read_text(path) -> str:
    with open(os.fspath(path), encoding="ascii", newline="") as fh:
        return fh.read()
