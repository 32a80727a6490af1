"""Fixed-length bit strings backed by a Python int.

Bit 0 is the leftmost (most significant) bit, which makes concatenation a
shift-or and Hamming distance a popcount.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class BitString:
    value: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ParameterError("negative length")
        if self.value < 0 or self.value >> self.length:
            raise ParameterError(f"value does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        if text and set(text) - {"0", "1"}:
            raise ParameterError(f"not a bit string: {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        value = length = 0
        for b in bits:
            if b not in (0, 1):
                raise ParameterError(f"bit must be 0 or 1, got {b!r}")
            value = (value << 1) | int(b)
            length += 1
        return cls(value, length)

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(0, length)

    def __len__(self) -> int:
        return self.length

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b") if self.length else ""

    def __repr__(self) -> str:
        return f"BitString({str(self)!r})"

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.length
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.value >> (self.length - 1 - i)) & 1

    def __iter__(self) -> Iterator[int]:
        for i in range(self.length):
            yield (self.value >> (self.length - 1 - i)) & 1

    def __add__(self, other: "BitString") -> "BitString":
        return BitString((self.value << other.length) | other.value,
                         self.length + other.length)

    def flip(self, i: int) -> "BitString":
        if not 0 <= i < self.length:
            raise IndexError(i)
        return BitString(self.value ^ (1 << (self.length - 1 - i)), self.length)

    def head(self, k: int) -> "BitString":
        """The first ``k`` bits."""
        return BitString(self.value >> (self.length - k), k)

    def tail(self, k: int) -> "BitString":
        """Everything after the first ``k`` bits."""
        rest = self.length - k
        return BitString(self.value & ((1 << rest) - 1), rest)

    def hamming(self, other: "BitString") -> int:
        if self.length != other.length:
            raise ParameterError("Hamming distance needs equal lengths")
        return (self.value ^ other.value).bit_count()

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.uint8, count=self.length)
