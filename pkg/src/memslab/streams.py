"""Counter-based random streams keyed by (seed, tag, index).

Algorithm (pinned; changing it changes every ensemble):

* key     = ``SeedSequence([seed, crc32(tag)]).generate_state(2, uint64)``
* counter = ``[0, index, 0, 0]`` for numpy's Philox4x64-10 bit generator
* doubles come from ``Generator.random`` (53-bit, ``(x >> 11) * 2**-53``)

Stream ``index`` therefore starts 2**64 blocks away from stream
``index + 1`` and no two records ever share random bits.
"""
from __future__ import annotations

import zlib
from functools import lru_cache

import numpy as np

STREAM_ALGORITHM = "philox4x64-10/seedseq-key/counter-word1=index"


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


@lru_cache(maxsize=64)
def _key(seed: int, tag: str) -> tuple:
    ss = np.random.SeedSequence([check_seed(seed), zlib.crc32(tag.encode("utf-8"))])
    return tuple(int(k) for k in ss.generate_state(2, np.uint64))


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    key = np.array(_key(seed, tag), dtype=np.uint64)
    counter = np.array([0, index, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
