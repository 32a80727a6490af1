"""Backward Blum-Blum-Shub generator over a Blum integer N = p*q.

The generator maps a seed to a unit quadratic residue x0, then walks
backwards through principal square roots x1, x2, ... and emits the parity
of each x_i (starting at x1). Running it requires the factorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from . import kernels
from .bits import BitString
from .errors import ParameterError
from .numtheory import sqrt_qr_mod_blum


@dataclass(frozen=True)
class TrapdoorKey:
    p: int
    q: int
    N: int = field(default=0)
    qinv: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        if self.p == self.q:
            raise ParameterError("p and q must be distinct")
        if self.p % 4 != 3 or self.q % 4 != 3:
            raise ParameterError("p and q must both be 3 mod 4")
        if self.N == 0:
            object.__setattr__(self, "N", self.p * self.q)
        elif self.N != self.p * self.q:
            raise ParameterError("N must equal p*q")
        object.__setattr__(self, "qinv", pow(self.q, -1, self.p))


def seed_to_qr(seed: BitString, key: TrapdoorKey) -> int:
    """Map a seed to a near-uniform unit quadratic residue mod N."""
    N = key.N
    y = 2 + seed.value % (N - 3)
    while gcd(y, N) != 1:
        y += 1
    return y * y % N


def backward_step(x: int, key: TrapdoorKey) -> int:
    return sqrt_qr_mod_blum(x, key)


def forward_step(x: int, N: int) -> int:
    return x * x % N


def parity_bit(x: int) -> int:
    return x & 1


def chain(x0: int, key: TrapdoorKey, steps: int) -> list[int]:
    """``[x0, x1, ..., x_steps]`` computed one square root at a time."""
    xs = [x0]
    for _ in range(steps):
        xs.append(backward_step(xs[-1], key))
    return xs


def generate(seed: BitString, key: TrapdoorKey, out_len: int, backend=None) -> BitString:
    if out_len < 0:
        raise ParameterError("out_len must be non-negative")
    x0 = seed_to_qr(seed, key)
    return BitString(stream_from_qr(x0, key, out_len, backend), out_len)


def stream_from_qr(x0: int, key: TrapdoorKey, out_len: int, backend=None) -> int:
    """Packed output bits for start state ``x0`` (first bit most significant)."""
    return kernels.parity_stream(x0, key.p, key.q, key.qinv, out_len, backend)


def sample_record(seed: BitString, key: TrapdoorKey, record_len: int,
                  include_prefix: bool) -> BitString:
    """``seed + G(seed)`` truncated to ``record_len``, or ``G(seed)`` alone."""
    if not include_prefix:
        return generate(seed, key, record_len)
    if record_len <= len(seed):
        raise ParameterError(
            f"record_len {record_len} leaves no room after a {len(seed)}-bit seed")
    return seed + generate(seed, key, record_len - len(seed))
