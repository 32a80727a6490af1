"""Backend selection for the hot backward-BBS chain.

The compiled extension is used when it imports; otherwise the pure-Python
implementation in ``_pykernels`` takes over. Factors of 2**64 or more always
go through the Python path.
"""

from __future__ import annotations

from . import _pykernels

try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

python = _pykernels

BACKEND = "compiled" if compiled is not None else "python"

_LIMIT = 1 << 64


def parity_stream(x0: int, p: int, q: int, qinv: int, count: int, backend=None) -> int:
    """Parities of ``count`` backward steps from ``x0``, packed as an int.

    The first parity is the most significant of the ``count`` bits.
    ``backend`` forces ``compiled`` or ``python``; default picks the fastest
    one that supports the factor sizes.
    """
    if count <= 0:
        return 0
    impl = _pick(backend, p, q)
    raw = impl.parity_stream(x0 % p, x0 % q, p, q, qinv, count)
    return int.from_bytes(raw, "big") >> (-count % 8)


def _pick(backend, p, q):
    if backend == "python":
        return _pykernels
    fits = p < _LIMIT and q < _LIMIT
    if backend == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not built")
        if not fits:
            raise ValueError("compiled kernels need factors below 2**64")
        return compiled
    if compiled is not None and fits:
        return compiled
    return _pykernels
