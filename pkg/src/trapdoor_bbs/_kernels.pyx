# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled backward-BBS chain for factors below 2**64."""

from libc.stdint cimport uint64_t

cdef extern from *:
    """
    #include <stdint.h>
    typedef unsigned __int128 u128_t;

    static inline uint64_t tb_mont_inv(uint64_t m) {
        uint64_t inv = m;
        for (int i = 0; i < 5; i++) inv *= 2 - m * inv;
        return inv;
    }

    /* T < m * 2**64 required; returns T / 2**64 mod m */
    static inline uint64_t tb_redc(u128_t T, uint64_t m, uint64_t minv) {
        uint64_t lo = (uint64_t)T, hi = (uint64_t)(T >> 64);
        uint64_t k = lo * minv;
        uint64_t mh = (uint64_t)(((u128_t)k * m) >> 64);
        uint64_t r = hi - mh;
        if (hi < mh) r += m;
        return r;
    }

    static inline uint64_t tb_mul(uint64_t a, uint64_t b, uint64_t m, uint64_t minv) {
        return tb_redc((u128_t)a * b, m, minv);
    }

    static inline uint64_t tb_to_mont(uint64_t x, uint64_t m) {
        return (uint64_t)((((u128_t)x) << 64) % m);
    }

    static inline uint64_t tb_pow(uint64_t b, uint64_t e, uint64_t one,
                                  uint64_t m, uint64_t minv) {
        uint64_t r = one;
        while (e) {
            if (e & 1) r = tb_mul(r, b, m, minv);
            b = tb_mul(b, b, m, minv);
            e >>= 1;
        }
        return r;
    }

    static void tb_parity_stream(uint64_t xp, uint64_t xq, uint64_t p, uint64_t q,
                                 uint64_t qinv, int64_t count, unsigned char *out) {
        uint64_t pinv = tb_mont_inv(p), qinvm = tb_mont_inv(q);
        uint64_t onep = tb_to_mont(1, p), oneq = tb_to_mont(1, q);
        uint64_t ep = (p >> 2) + 1, eq = (q >> 2) + 1;
        uint64_t mp = tb_to_mont(xp % p, p), mq = tb_to_mont(xq % q, q);
        uint64_t cq = tb_to_mont(qinv % p, p);
        for (int64_t i = 0; i < count; i++) {
            mp = tb_pow(mp, ep, onep, p, pinv);
            mq = tb_pow(mq, eq, oneq, q, qinvm);
            uint64_t rp = tb_redc(mp, p, pinv);
            uint64_t rq = tb_redc(mq, q, qinvm);
            uint64_t rqp = rq % p;
            uint64_t d = rp >= rqp ? rp - rqp : rp + (p - rqp);
            uint64_t h = tb_mul(d, cq, p, pinv);
            if ((rq + h) & 1) out[i >> 3] |= (unsigned char)(0x80 >> (i & 7));
        }
    }
    """
    void tb_parity_stream(uint64_t xp, uint64_t xq, uint64_t p, uint64_t q,
                          uint64_t qinv, long long count, unsigned char *out) nogil


def parity_stream(uint64_t xp, uint64_t xq, uint64_t p, uint64_t q,
                  uint64_t qinv, long long count):
    """Packed parities (MSB first) of ``count`` backward steps.

    ``xp``/``xq`` are the start state reduced mod ``p``/``q``; ``qinv`` is
    ``q**-1 mod p``. Both factors must be odd and below 2**64.
    """
    cdef bytearray buf = bytearray((count + 7) // 8)
    cdef unsigned char *out = buf
    with nogil:
        tb_parity_stream(xp, xq, p, q, qinv, count, out)
    return bytes(buf)
