"""Pure-Python twin of the compiled kernels in ``_kernels.pyx``."""


def parity_stream(xp, xq, p, q, qinv, count):
    ep = (p >> 2) + 1
    eq = (q >> 2) + 1
    xp %= p
    xq %= q
    acc = 0
    for _ in range(count):
        xp = pow(xp, ep, p)
        xq = pow(xq, eq, q)
        h = (xp - xq) * qinv % p
        acc = (acc << 1) | ((xq + h) & 1)
    pad = -count % 8
    return (acc << pad).to_bytes((count + 7) // 8, "big")
