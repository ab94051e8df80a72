"""Seeded graph generation for tests and experiments."""

from __future__ import annotations

import numpy as np

from .graph import Graph

__all__ = ["erdos_renyi"]


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p) with a PCG64 stream; the same (n, p, seed) always gives the same graph."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    mask = rng.random(iu.shape[0]) < p
    return Graph.from_edges(n, zip(iu[mask].tolist(), ju[mask].tolist()))
