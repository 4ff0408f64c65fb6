"""Per-replication random streams.

Replication ``i`` under master seed ``s`` draws from a Philox (counter-based)
generator keyed by ``SeedSequence([s, i])``; the SeedSequence hashes the
pair, so streams are independent of how replications are split across
workers and of the order in which they run.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
BLOCK = 1024


def replication_generator(master_seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(master_seed) & _MASK64, int(index)])
    return np.random.Generator(np.random.Philox(ss))


class Stream:
    """Buffered scalar draws from a numpy Generator.

    Drawing numpy scalars one at a time costs about a microsecond each;
    the event loops here need millions, so draws come from blocks.
    Exponentials and uniforms use separate blocks.
    """

    __slots__ = ("gen", "_exp", "_unif", "block")

    def __init__(self, gen: np.random.Generator, block: int = BLOCK):
        self.gen = gen
        self.block = block
        self._exp = iter(())
        self._unif = iter(())

    @classmethod
    def for_replication(cls, master_seed: int, index: int) -> "Stream":
        return cls(replication_generator(master_seed, index))

    def exponential(self) -> float:
        """Standard (rate 1) exponential."""
        try:
            return next(self._exp)
        except StopIteration:
            self._exp = iter(self.gen.standard_exponential(self.block).tolist())
            return next(self._exp)

    def uniform(self) -> float:
        try:
            return next(self._unif)
        except StopIteration:
            self._unif = iter(self.gen.random(self.block).tolist())
            return next(self._unif)
