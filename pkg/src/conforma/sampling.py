"""Seeded sampling and bounded parallelism.

All randomness flows through numpy's PCG64 so that a fixed seed reproduces
every sample stream exactly. CONFORMA_THREADS caps worker threads; unset or 1
means serial execution (identical results either way, since work items are
independent and order is preserved).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def unit_vectors(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    out = rng.standard_normal((count, n))
    norms = np.linalg.norm(out, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        out[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(out, axis=1)
    return out / norms[:, None]


def ball_points(
    rng: np.random.Generator, n: int, count: int, radius: float = 1.0, center=None
) -> np.ndarray:
    dirs = unit_vectors(rng, n, count)
    radii = radius * rng.random(count) ** (1.0 / n)
    pts = dirs * radii[:, None]
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


def sphere_points(
    rng: np.random.Generator, n: int, count: int, radius: float = 1.0, center=None
) -> np.ndarray:
    pts = radius * unit_vectors(rng, n, count)
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


def shell_points(
    rng: np.random.Generator,
    n: int,
    count: int,
    r_inner: float,
    r_outer: float,
    center=None,
) -> np.ndarray:
    dirs = unit_vectors(rng, n, count)
    radii = r_inner + (r_outer - r_inner) * rng.random(count)
    pts = dirs * radii[:, None]
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


def thread_budget() -> int:
    raw = os.environ.get("CONFORMA_THREADS", "1")
    try:
        val = int(raw)
    except ValueError:
        return 1
    return max(1, val)


def parallel_map(fn, items):
    """Map preserving input order; threads only when CONFORMA_THREADS > 1."""
    items = list(items)
    workers = thread_budget()
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
