"""Compare the compiled and pure-Python backward-BBS kernels.

    python benchmarks/bench_kernels.py --modulus-bits 128 --steps 20000
"""

import argparse
import time

import numpy as np

from trapdoor_bbs import kernels
from trapdoor_bbs.task import TaskParams, keygen


def time_backend(backend, x0, key, steps, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = kernels.parity_stream(x0, key.p, key.q, key.qinv, steps, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--modulus-bits", type=int, default=128)
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--rng-seed", type=int, default=0)
    args = parser.parse_args()

    key, N = keygen(TaskParams.default(args.modulus_bits), np.random.default_rng(args.rng_seed))
    x0 = pow(0x1234567890ABCDEF, 2, N)
    print(f"modulus {N.bit_length()} bits, {args.steps} steps, best of {args.repeats}")

    py_time, py_out = time_backend("python", x0, key, args.steps, args.repeats)
    print(f"python    {py_time * 1e6 / args.steps:8.3f} us/step")
    if kernels.compiled is None:
        print("compiled  (not built)")
        return
    if max(key.p, key.q) >= 1 << 64:
        print("compiled  (factors exceed 64 bits; python path only)")
        return
    c_time, c_out = time_backend("compiled", x0, key, args.steps, args.repeats)
    assert c_out == py_out, "backends disagree"
    print(f"compiled  {c_time * 1e6 / args.steps:8.3f} us/step")
    print(f"speedup   {py_time / c_time:8.1f}x")


if __name__ == "__main__":
    main()
