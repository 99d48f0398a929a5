"""Deterministic chunked evaluation over independent grid points.

Work is split into contiguous chunks whose boundaries depend only on the
problem size, never on the worker count, and every per-point reduction is
elementwise inside a chunk.  Results are therefore bit-identical for any
number of workers.
"""
from concurrent.futures import ThreadPoolExecutor
import os

WORKERS_ENV = "PPSPDC_MAX_WORKERS"
CHUNK = 4096


def worker_cap():
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def resolve_workers(workers):
    cap = worker_cap()
    if workers is None:
        return cap
    return max(1, min(int(workers), cap)) if os.environ.get(WORKERS_ENV) else max(1, int(workers))


def chunk_slices(n, chunk=CHUNK):
    return [slice(i, min(i + chunk, n)) for i in range(0, n, chunk)]


def map_chunks(func, n, workers=None, chunk=CHUNK):
    """Call ``func(slice)`` for fixed-size chunks of ``range(n)``; results in chunk order."""
    slices = chunk_slices(n, chunk)
    w = resolve_workers(workers)
    if w == 1 or len(slices) == 1:
        return [func(s) for s in slices]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(func, slices))
