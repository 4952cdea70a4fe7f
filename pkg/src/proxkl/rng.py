"""Portable seeded random numbers for instance generation.

Registry problems are generated from an integer seed with xoshiro256**
(Blackman & Vigna), seeded through splitmix64.  Every transformation from raw
64-bit words to floats is spelled out below so that the same instances can be
regenerated by any implementation:

* state: four 64-bit words, ``s[j] = splitmix64()`` for j = 0..3, starting the
  splitmix64 counter at ``seed mod 2**64``;
* ``random()``: ``(next() >> 11) * 2**-53``, uniform on [0, 1);
* ``uniform(a, b)``: ``a + (b - a) * random()``;
* ``normal()``: Box-Muller, ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`` with u1 drawn
  before u2; the sine branch is discarded, so every normal consumes two words.
"""

import math

import numpy as np

_MASK = (1 << 64) - 1


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256:
    """xoshiro256** generator with splitmix64 seeding."""

    def __init__(self, seed=0):
        sm = int(seed) & _MASK
        state = []
        for _ in range(4):
            sm = (sm + 0x9E3779B97F4A7C15) & _MASK
            z = sm
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            state.append(z ^ (z >> 31))
        self._s = state

    def next_u64(self):
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self, size=None):
        if size is None:
            return (self.next_u64() >> 11) * 2.0**-53
        n = int(np.prod(size))
        out = np.array([(self.next_u64() >> 11) * 2.0**-53 for _ in range(n)])
        return out.reshape(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return low + (high - low) * self.random(size)

    def _normal(self):
        u1 = self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def normal(self, size=None):
        if size is None:
            return self._normal()
        n = int(np.prod(size))
        return np.array([self._normal() for _ in range(n)]).reshape(size)
