"""
Seed derivation - stream RNG per (master seed, repetition, stage)
"""

import hashlib

import numpy as np


def derive_seed(master: int, index: int, stage: str) -> int:
    """64-bit seed dari hash (master, index, stage)"""
    key = f"{int(master)}:{int(index)}:{stage}".encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stage_rng(master: int, index: int, stage: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, index, stage))
