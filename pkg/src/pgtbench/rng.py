"""Deterministic, splittable random streams for reproducible simulation.

Generator: Philox-4x64 with 10 rounds (Salmon et al., SC'11) — the same
counter-based block cipher NumPy ships as ``np.random.Philox``. Each stream
is identified by a 128-bit key packed from (seed, frame_id, beam_index,
stage); the 256-bit counter is the block index within the stream. Streams
with different keys are independent by construction, so beams and pipeline
stages can be computed in any order (or in parallel) without changing any
draw.

Word-to-variate mapping (fixed, part of the on-disk reproducibility
contract):

* stream word sequence = blocks 0, 1, 2, ... each contributing its four
  output words in order
* uniform in [0, 1): one word, ``(w >> 11) * 2**-53``
* standard normal: two words u1, u2 via Box-Muller,
  ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``

Test vectors pinned against NumPy's C implementation live in
``tests/data/philox4x64_10_vectors.json``.
"""
from __future__ import annotations

from enum import IntEnum

import numpy as np

PHILOX_ROUNDS = 10

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)  # Weyl key increments (golden ratio,
_W1 = np.uint64(0xBB67AE8584CAA73B)  # sqrt(3) - 1 in fixed point)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)

#: 2**-53, scales the top 53 bits of a word into [0, 1).
_UNIT = float.fromhex("0x1p-53")

_FRAME_BITS = 32
_BEAM_BITS = 24
_STAGE_BITS = 8


class Stage(IntEnum):
    """Registry of per-beam sub-stream purposes."""

    RANGE_NOISE = 0   # sensor range accuracy
    CLUTTER = 1       # weather clutter accept + placement
    SUN_NOISE = 2     # sunlight range-noise inflation


def _mulhilo(a: np.uint64, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # 64x64 -> 128 bit product via 32-bit limbs (numpy uint64 wraps mod 2^64).
    lo = a * b
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    t = a_lo * b_lo
    m1 = a_hi * b_lo + (t >> _S32)
    m2 = a_lo * b_hi + (m1 & _MASK32)
    hi = a_hi * b_hi + (m1 >> _S32) + (m2 >> _S32)
    return hi, lo


def philox4x64(counter: np.ndarray, key: np.ndarray) -> np.ndarray:
    """Vectorized Philox-4x64-10 block function.

    ``counter``: uint64 array (4, n); ``key``: uint64 array (2, n).
    Returns the (4, n) output block. Matches numpy's Philox bit-for-bit.
    """
    counter = np.asarray(counter, dtype=np.uint64)
    key = np.asarray(key, dtype=np.uint64)
    x0, x1, x2, x3 = counter[0].copy(), counter[1].copy(), counter[2].copy(), counter[3].copy()
    k0, k1 = key[0].copy(), key[1].copy()
    for _ in range(PHILOX_ROUNDS):
        hi0, lo0 = _mulhilo(_M0, x0)
        hi1, lo1 = _mulhilo(_M1, x2)
        x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    return np.stack([x0, x1, x2, x3])


def pack_key(seed: int, frame_id: int, beam_index, stage: int) -> tuple[np.uint64, np.ndarray]:
    """Pack stream identity into the two Philox key words.

    ``beam_index`` may be a scalar or an integer array (one key per beam).
    """
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if not 0 <= frame_id < 2**_FRAME_BITS:
        raise ValueError(f"frame_id must fit in {_FRAME_BITS} bits, got {frame_id}")
    if not 0 <= stage < 2**_STAGE_BITS:
        raise ValueError(f"stage must fit in {_STAGE_BITS} bits, got {stage}")
    beams = np.asarray(beam_index, dtype=np.uint64)
    if beams.size and int(beams.max()) >= 2**_BEAM_BITS:
        raise ValueError(f"beam_index must fit in {_BEAM_BITS} bits")
    k0 = np.uint64(seed)
    k1 = (
        (np.uint64(frame_id) << np.uint64(_BEAM_BITS + _STAGE_BITS))
        | (beams << np.uint64(_STAGE_BITS))
        | np.uint64(stage)
    )
    return k0, k1


def _words(seed: int, frame_id: int, beam_index, stage: int, n_words: int) -> np.ndarray:
    """First ``n_words`` stream words for each beam; shape (n_beams, n_words)."""
    k0, k1 = pack_key(seed, frame_id, beam_index, stage)
    k1 = np.atleast_1d(k1)
    n = k1.size
    n_blocks = -(-n_words // 4)
    out = np.empty((n, 4 * n_blocks), dtype=np.uint64)
    key = np.stack([np.broadcast_to(k0, (n,)), k1])
    ctr = np.zeros((4, n), dtype=np.uint64)
    for b in range(n_blocks):
        ctr[0] = np.uint64(b)
        out[:, 4 * b : 4 * b + 4] = philox4x64(ctr, key).T
    return out[:, :n_words]


def _to_uniform(words: np.ndarray) -> np.ndarray:
    return (words >> _S11).astype(np.float64) * _UNIT


def uniforms(seed: int, frame_id: int, beam_index, stage: int, count: int) -> np.ndarray:
    """Per-beam uniform [0, 1) draws; shape (n_beams, count)."""
    return _to_uniform(_words(seed, frame_id, beam_index, stage, count))


def normals(seed: int, frame_id: int, beam_index, stage: int, count: int) -> np.ndarray:
    """Per-beam standard normal draws (Box-Muller); shape (n_beams, count)."""
    w = _words(seed, frame_id, beam_index, stage, 2 * count)
    u = _to_uniform(w)
    u1 = u[:, 0::2]
    u2 = u[:, 1::2]
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


class RandomStream:
    """Scalar view of one keyed stream; draws match the vectorized helpers.

    ``rng_stream(seed, f, b, s).normal()`` equals ``normals(seed, f, [b], s, 1)``
    bit-for-bit because both run through the same word pipeline.
    """

    __slots__ = ("_seed", "_frame_id", "_beam_index", "_stage", "_pos")

    def __init__(self, seed: int, frame_id: int = 0, beam_index: int = 0, stage: int = 0) -> None:
        pack_key(seed, frame_id, beam_index, stage)  # validate early
        self._seed = seed
        self._frame_id = frame_id
        self._beam_index = beam_index
        self._stage = stage
        self._pos = 0

    def _take(self, n: int) -> np.ndarray:
        w = _words(self._seed, self._frame_id, self._beam_index, self._stage, self._pos + n)
        self._pos += n
        return w[0, self._pos - n : self._pos]

    def uniform(self) -> float:
        return float(_to_uniform(self._take(1))[0])

    def uniforms(self, n: int) -> np.ndarray:
        return _to_uniform(self._take(n))

    def normal(self) -> float:
        u = _to_uniform(self._take(2))
        return float(np.sqrt(-2.0 * np.log1p(-u[0])) * np.cos(2.0 * np.pi * u[1]))

    def normals(self, n: int) -> np.ndarray:
        u = _to_uniform(self._take(2 * n))
        return np.sqrt(-2.0 * np.log1p(-u[0::2])) * np.cos(2.0 * np.pi * u[1::2])


def rng_stream(seed: int, frame_id: int = 0, beam_index: int = 0, stage: int = 0) -> RandomStream:
    """Deterministic stream keyed on all four identity fields."""
    return RandomStream(seed, frame_id, beam_index, stage)
