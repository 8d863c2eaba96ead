"""Reproducible random streams.

Every source of randomness in the library is a ``RandomStream`` derived from a
64-bit master seed plus a tuple of integer substream labels.  Substreams with
distinct labels are statistically independent and their draws depend only on
``(seed, labels)``, never on global state, so runs are reproducible across
processes and platforms.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RandomStream"]


class RandomStream:
    """Uniform random stream seeded by ``(seed, *labels)``.

    Draws come from a PCG64 generator keyed on a ``numpy`` ``SeedSequence``
    over the full label tuple.  ``substream`` derives an independent child
    stream; the parent's state is unaffected.
    """

    def __init__(self, seed: int, *labels: int):
        self.seed = int(seed)
        self.labels = tuple(int(k) for k in labels)
        ss = np.random.SeedSequence((self.seed,) + self.labels)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def substream(self, *labels: int) -> "RandomStream":
        return RandomStream(self.seed, *(self.labels + tuple(int(k) for k in labels)))

    def uniform(self) -> float:
        """One draw from U[0, 1)."""
        return float(self._gen.random())

    def uniforms(self, size) -> np.ndarray:
        """Array of independent U[0, 1) draws."""
        return self._gen.random(size)

    def integers(self, low: int, high: int, size=None):
        """Integers drawn uniformly from ``[low, high)``."""
        return self._gen.integers(low, high, size=size)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, labels={self.labels})"
