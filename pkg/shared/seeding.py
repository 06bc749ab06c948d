import hashlib

import numpy as np


# Stream ids keep independent probes from sharing random draws
STREAMS = {
    "sample": 1,
    "directions": 2,
    "domain_convex": 3,
    "strict_convexity": 4,
    "continuity": 5,
    "blowup": 6,
    "lines": 7,
    "line": 8,
    "oracle_body": 9,
    "oracle_epigraph": 10,
    "planes": 11,
    "slice": 12,
    "probes": 13,
}


def make_rng(seed: int, stream: str, counter: int = 0) -> np.random.Generator:
    """
    Counter-seeded generator: the draws depend only on (seed, stream, counter),
    never on evaluation order, so parallel and sequential runs coincide.
    """
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, STREAMS[stream], int(counter)])


def derive_seed(seed: int, label: str) -> int:
    """Deterministic 32-bit sub-seed for a named unit of work (e.g. a corpus entry)."""
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).hexdigest()
    return int(digest[:8], 16)
