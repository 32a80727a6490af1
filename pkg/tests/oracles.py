"""Brute-force reference implementations used as independent test oracles.

Nothing here calls into trapdoor_bbs: residues come from squaring tables,
roots from exhaustive search.
"""

from itertools import product
from math import gcd


def sieve(limit):
    is_prime = bytearray([1]) * limit
    is_prime[0:2] = b"\x00\x00"
    for i in range(2, int(limit ** 0.5) + 1):
        if is_prime[i]:
            is_prime[i * i::i] = bytearray(len(is_prime[i * i::i]))
    return is_prime


def naive_pow(base, exp, mod):
    acc = 1 % mod
    for _ in range(exp):
        acc = acc * base % mod
    return acc


def squares_mod(p):
    return {y * y % p for y in range(1, p)}


def legendre_table(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if a in squares_mod(p) else -1


def factorize(n):
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def jacobi_table(a, n):
    result = 1
    for p in factorize(n):
        result *= legendre_table(a, p)
    return result


def unit_qrs(N):
    return sorted({y * y % N for y in range(1, N) if gcd(y, N) == 1})


def roots(x, N):
    return [y for y in range(N) if y * y % N == x % N]


def qr_roots(x, N):
    qrs = set(unit_qrs(N))
    return [y for y in roots(x, N) if y in qrs]


def brute_chain(x0, N, steps):
    """Backward chain where every step is the unique residue root, by search."""
    xs = [x0]
    for _ in range(steps):
        (nxt,) = qr_roots(xs[-1], N)
        xs.append(nxt)
    return xs


def seed_state(u, N):
    """Seed integer -> start state, spelled out independently."""
    y = 2 + u % (N - 3)
    while gcd(y, N) != 1:
        y += 1
    return y * y % N


def brute_record(u, n, N, record_len, prefix=True):
    suffix_len = record_len - n if prefix else record_len
    bits = [x & 1 for x in brute_chain(seed_state(u, N), N, suffix_len)[1:]]
    head = [int(c) for c in format(u, f"0{n}b")] if prefix and n else []
    return head + bits


def hamming(a, b):
    return sum(x != y for x, y in zip(a, b))


def brute_support(n, N, record_len, prefix=True):
    return {tuple(brute_record(u, n, N, record_len, prefix)) for u in range(2 ** n)}


def brute_coverage(support, record_len, d):
    """Fraction of all records within Hamming distance d of the support."""
    hits = 0
    for rec in product((0, 1), repeat=record_len):
        if any(hamming(rec, s) <= d for s in support):
            hits += 1
    return hits, 2 ** record_len
