"""Deterministic 64-bit LCG random stream.

Training decisions (subsampling, window widths, negative draws) all come from
this stream so that single-threaded runs are bit-reproducible across runs and
platforms. The multiplier/increment pair is the classic word2vec one; the
trainer kernel inlines the identical arithmetic on ``np.uint64``.
"""

from __future__ import annotations

LCG_MULTIPLIER = 25214903917
LCG_INCREMENT = 11
_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / (1 << 53)


def worker_seed(seed: int, worker_id: int) -> int:
    """Derive an independent stream seed for a trainer worker."""
    return (seed + (worker_id + 1) * 0x9E3779B97F4A7C15) & _MASK64


class Rng:
    """word2vec-style linear congruential generator.

    Uniform variates take the high 53 bits; bounded ints take bits 33..63.
    Low LCG bits are never used.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int = 1):
        self.state = seed & _MASK64

    def _step(self) -> int:
        self.state = (self.state * LCG_MULTIPLIER + LCG_INCREMENT) & _MASK64
        return self.state

    def uniform(self) -> float:
        """Next float in [0, 1)."""
        return (self._step() >> 11) * _INV_2_53

    def below(self, n: int) -> int:
        """Next int in [0, n)."""
        return (self._step() >> 33) % n
