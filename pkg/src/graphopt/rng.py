"""Deterministic random streams shared by solvers and instance generators.

Every stochastic component in this package draws from xorshift64* streams
seeded through splitmix64.  The generator is pinned bit-exactly (see
SOLVERS.md) so that a (seed, config) pair reproduces identical runs across
processes and platforms: no global RNG state, no dependence on numpy's
Generator method implementations.

Stream derivation: stream ``i`` of master seed ``s`` starts from
``splitmix64((s ^ (i * STREAM_STEP)) mod 2^64)``, ``STREAM_STEP`` odd, so
per-member solver streams are independent and addressable.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Odd constant spacing the per-member streams (golden-ratio increment).
STREAM_STEP = 0x9E3779B97F4A7C15

_XS_MULT = 0x2545F4914F6CDD1D  # xorshift64* output multiplier
_SM_MULT1 = 0xBF58476D1CE4E5B9
_SM_MULT2 = 0x94D049BB133111EB

_U64_11 = np.uint64(11)
_U64_12 = np.uint64(12)
_U64_25 = np.uint64(25)
_U64_27 = np.uint64(27)
_NP_XS_MULT = np.uint64(_XS_MULT)
_INV_2_53 = 2.0 ** -53


def splitmix64(value: int) -> int:
    """One splitmix64 step; maps any 64-bit value to a well-mixed one."""
    z = (value + STREAM_STEP) & MASK64
    z = ((z ^ (z >> 30)) * _SM_MULT1) & MASK64
    z = ((z ^ (z >> 27)) * _SM_MULT2) & MASK64
    return z ^ (z >> 31)


def stream_state(seed: int, stream: int) -> int:
    """Initial xorshift64* state for the given stream of a master seed."""
    state = splitmix64((seed ^ ((stream * STREAM_STEP) & MASK64)) & MASK64)
    # xorshift64* has an absorbing all-zero state; remap it.
    return state if state != 0 else STREAM_STEP


class LaneRng:
    """Parallel xorshift64* lanes advanced in lockstep via numpy.

    Lane ``i`` is stream ``stream_offset + i`` of the master seed, so a
    ``LaneRng(seed, n)`` and a ``LaneRng(seed, 1, stream_offset=i)`` produce
    identical values in lane ``i``: per-member solver streams can be
    replayed in isolation.
    """

    def __init__(self, seed: int, lanes: int, stream_offset: int = 0):
        if lanes < 1:
            raise ValueError("lanes must be >= 1")
        states = [stream_state(seed, stream_offset + i) for i in range(lanes)]
        self._state = np.array(states, dtype=np.uint64)
        self._scratch = np.empty(lanes, dtype=np.uint64)
        self.lanes = lanes

    def _advance(self) -> np.ndarray:
        s = self._state
        t = self._scratch
        np.right_shift(s, _U64_12, out=t)
        s ^= t
        np.left_shift(s, _U64_25, out=t)
        s ^= t
        np.right_shift(s, _U64_27, out=t)
        s ^= t
        return s

    def next_u64(self) -> np.ndarray:
        """Advance all lanes one step; returns (lanes,) uint64 outputs."""
        return self._advance() * _NP_XS_MULT

    def uniforms(self) -> np.ndarray:
        """One double in [0, 1) per lane (top 53 bits of the output)."""
        return (self.next_u64() >> _U64_11) * _INV_2_53

    def uniform_block(self, rows: int) -> np.ndarray:
        """(rows, lanes) doubles in [0, 1); row r is draw r of every lane."""
        out = np.empty((rows, self.lanes), dtype=np.float64)
        t = self._scratch
        for r in range(rows):
            np.multiply(self._advance(), _NP_XS_MULT, out=t)
            t >>= _U64_11
            np.multiply(t, _INV_2_53, out=out[r])
        return out


class SeededRng:
    """Scalar convenience stream for instance generation.

    Pure-python ints on the same xorshift64* recurrence as :class:`LaneRng`
    (lane equivalence is tested), so generated instances are reproducible
    independent of numpy.
    """

    def __init__(self, seed: int, stream: int = 0):
        self._s = stream_state(seed, stream)

    def _next(self) -> int:
        s = self._s
        s ^= s >> 12
        s = (s ^ (s << 25)) & MASK64
        s ^= s >> 27
        self._s = s
        return (s * _XS_MULT) & MASK64

    def u01(self) -> float:
        """Double in [0, 1)."""
        return (self._next() >> 11) * _INV_2_53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.u01()

    def integer(self, lo: int, hi: int) -> int:
        """Integer in the half-open range [lo, hi)."""
        if hi <= lo:
            raise ValueError("empty range")
        return lo + int(self.u01() * (hi - lo))

    def sample(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), seeded, without replacement."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        pool = list(range(n))
        picked = []
        for i in range(k):
            j = self.integer(i, n)
            pool[i], pool[j] = pool[j], pool[i]
            picked.append(pool[i])
        return picked

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.integer(0, i + 1)
            items[i], items[j] = items[j], items[i]
