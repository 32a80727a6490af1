"""Arbitrary-precision number theory for Blum primes and Blum integers.

Python ints are the big-number type throughout. Random choices go through
an explicit ``numpy.random.Generator`` so every result is reproducible.
"""

from __future__ import annotations

from math import gcd

import numpy as np

from .errors import DegenerateInputError, ParameterError, PreconditionError

KEYGEN_ROUNDS = 40

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                 59, 61, 67, 71, 73, 79, 83, 89, 97)


def randbits(rng: np.random.Generator, k: int) -> int:
    """Uniform integer in ``[0, 2**k)`` drawn from ``rng``."""
    if k <= 0:
        return 0
    nbytes = (k + 7) // 8
    value = int.from_bytes(rng.bytes(nbytes), "big")
    return value >> (8 * nbytes - k)


def randbelow(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in ``[0, n)`` by rejection sampling."""
    if n <= 0:
        raise ParameterError("upper bound must be positive")
    k = (n - 1).bit_length()
    while True:
        r = randbits(rng, k)
        if r < n:
            return r


def mod_pow(base: int, exponent: int, modulus: int) -> int:
    if modulus < 2:
        raise ParameterError(f"modulus must be >= 2, got {modulus}")
    if exponent < 0:
        raise ParameterError("exponent must be non-negative")
    return pow(base, exponent, modulus)


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 3, via quadratic reciprocity."""
    if n < 3 or n % 2 == 0:
        raise ParameterError(f"Jacobi symbol needs odd n >= 3, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def miller_rabin(n: int, rounds: int, rng: np.random.Generator) -> bool:
    """Probabilistic primality test; ``False`` is always correct."""
    if rounds < 1:
        raise ParameterError("rounds must be >= 1")
    if n < 2:
        return False
    if n <= 3:
        return True
    for sp in _SMALL_PRIMES:
        if n == sp:
            return True
        if n % sp == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = 2 + randbelow(rng, n - 3)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_blum_prime(p: int, rng: np.random.Generator, rounds: int = KEYGEN_ROUNDS) -> bool:
    return p % 4 == 3 and miller_rabin(p, rounds, rng)


def gen_blum_prime(bits: int, rng: np.random.Generator) -> int:
    """Random prime with exactly ``bits`` bits and ``p % 4 == 3``.

    ``bits == 3`` is accepted for toy moduli and always yields 7.
    """
    if bits < 3:
        raise ParameterError(f"no Blum prime has {bits} bits")
    while True:
        candidate = randbits(rng, bits) | (1 << (bits - 1)) | 3
        if is_blum_prime(candidate, rng):
            return candidate


def crt_pair(r_p: int, r_q: int, p: int, q: int) -> int:
    """Unique ``x < p*q`` with ``x = r_p (mod p)`` and ``x = r_q (mod q)``."""
    if p == q:
        raise ParameterError("CRT moduli must be distinct")
    h = (r_p - r_q) * pow(q, -1, p) % p
    return r_q + q * h


def sqrt_qr_mod_prime(a: int, p: int) -> int:
    """The square root of ``a`` modulo a Blum prime that is itself a residue."""
    a %= p
    if jacobi(a, p) != 1:
        raise PreconditionError(f"{a} is not a quadratic residue mod {p}")
    return pow(a, (p + 1) // 4, p)


def _check_unit(x: int, N: int) -> None:
    if gcd(x, N) != 1:
        raise DegenerateInputError(f"{x} shares a factor with the modulus")


def is_qr_mod_blum(x: int, key) -> bool:
    """Residuosity mod N decided with the factorization held by ``key``."""
    _check_unit(x, key.N)
    return jacobi(x, key.p) == 1 and jacobi(x, key.q) == 1


def sqrt_qr_mod_blum(x: int, key) -> int:
    """The one square root of ``x`` mod N that is itself a quadratic residue."""
    _check_unit(x, key.N)
    if not is_qr_mod_blum(x, key):
        raise PreconditionError(f"{x} is not a quadratic residue mod N")
    return crt_pair(sqrt_qr_mod_prime(x, key.p), sqrt_qr_mod_prime(x, key.q),
                    key.p, key.q)
