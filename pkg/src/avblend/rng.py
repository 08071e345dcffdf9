"""Deterministic per-task random streams.

Every random decision in the pipeline draws from a stream derived from a
master seed plus a tuple of string/int tokens naming the task (e.g. the
source video id and target rank). Streams are independent of execution
order and thread count, and stable across platforms because the derivation
uses BLAKE2b rather than Python's salted ``hash``.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _token_bytes(token: str | int) -> bytes:
    if isinstance(token, bool) or not isinstance(token, (str, int)):
        raise TypeError(f"stream tokens must be str or int, got {type(token).__name__}")
    if isinstance(token, int):
        data = b"i" + str(token).encode("ascii")
    else:
        data = b"s" + token.encode("utf-8")
    return len(data).to_bytes(4, "little") + data


def seed_sequence(master_seed: int, *tokens: str | int) -> np.random.SeedSequence:
    """Build a SeedSequence for the stream named by ``tokens``."""
    h = hashlib.blake2b(digest_size=16)
    h.update((int(master_seed) & _MASK64).to_bytes(8, "little"))
    for token in tokens:
        h.update(_token_bytes(token))
    digest = h.digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([int(master_seed) & _MASK64, *words])


def derived_rng(master_seed: int, *tokens: str | int) -> np.random.Generator:
    """Generator for the stream named by ``tokens`` under ``master_seed``."""
    return np.random.default_rng(seed_sequence(master_seed, *tokens))


def derived_seed(master_seed: int, *tokens: str | int) -> int:
    """64-bit child seed for the stream named by ``tokens``.

    ``np.random.default_rng(derived_seed(...))`` reproduces the stream from
    the single recorded value, which is what provenance records store.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update((int(master_seed) & _MASK64).to_bytes(8, "little"))
    for token in tokens:
        h.update(_token_bytes(token))
    return int.from_bytes(h.digest(), "little")
