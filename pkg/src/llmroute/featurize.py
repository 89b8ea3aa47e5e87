"""Deterministic signed-hashing text featurizer.

Stands in for a pretrained embedding model: tokens are the lowercased
whitespace-split words plus all character trigrams of the lowercased text.
Each token hashes (CRC32, pinned and platform-stable) to one of d buckets
and contributes +1 or -1 there depending on a second hash bit; the result
is L2-normalized. Precomputed feature vectors can be used instead wherever
queries carry them.
"""

from __future__ import annotations

import zlib

import numpy as np

from .errors import ValidationError

DEFAULT_DIM = 256

# start value for the independent CRC stream that decides each token's sign
_SIGN_SEED = 0x9E3779B9


def _tokens(text: str) -> list[str]:
    s = text.lower()
    toks = s.split()
    toks.extend(s[i : i + 3] for i in range(len(s) - 2))
    return toks


def featurize(text: str, d: int = DEFAULT_DIM) -> np.ndarray:
    """Hash a string into a unit-norm d-dimensional vector (zero if empty)."""
    if d < 1:
        raise ValidationError(f"feature dimension must be >= 1, got {d}")
    vec = np.zeros(d, dtype=np.float64)
    for tok in _tokens(text):
        data = tok.encode("utf-8")
        bucket = zlib.crc32(data) % d
        sign = 1.0 if zlib.crc32(data, _SIGN_SEED) & 1 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec
