"""Deterministic chunked reductions with optional threading.

The offset set of a lattice sum is split into a fixed number of chunks that
does not depend on the worker count; chunk partial sums are combined in chunk
order.  Results are therefore bit-identical for any MUSKAT_THREADS setting.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

N_CHUNKS = 32


def thread_count() -> int:
    raw = os.environ.get("MUSKAT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"MUSKAT_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def chunked_sum(worker, chunks):
    """sum(worker(c) for c in chunks), partials combined in chunk order."""
    chunks = [c for c in chunks if len(c)]
    if not chunks:
        return None
    threads = thread_count()
    if threads == 1 or len(chunks) == 1:
        partials = [worker(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(worker, chunks))
    acc = partials[0]
    for p in partials[1:]:
        acc = acc + p
    return acc
