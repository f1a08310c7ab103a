"""Column-block scheduling shared by the objective and solver kernels.

Work over the N columns is cut into blocks of ``BLOCK_SIZE`` consecutive
columns. Blocks may run on any number of worker threads, but every reduction
combines per-block partials in ascending block order, so results do not depend
on the worker count.
"""
import os
from concurrent.futures import ThreadPoolExecutor

BLOCK_SIZE = 2048
THREADS_ENV = "FUZZCLUST_THREADS"


def resolve_threads(threads=None):
    """Number of workers: explicit value, else ``$FUZZCLUST_THREADS``, else 1.

    ``"max"`` (or 0) means one worker per CPU.
    """
    if threads is None:
        threads = os.environ.get(THREADS_ENV, 1)
    if isinstance(threads, str):
        if threads.strip().lower() == "max":
            threads = 0
        else:
            try:
                threads = int(threads)
            except ValueError:
                raise ValueError(f"invalid thread count {threads!r}") from None
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def block_ranges(n, block_size=BLOCK_SIZE):
    return [(a, min(a + block_size, n)) for a in range(0, n, block_size)]


def map_blocks(fn, n, threads=None, block_size=BLOCK_SIZE):
    """Apply ``fn(start, stop)`` to each column block; results in block order."""
    blocks = block_ranges(n, block_size)
    workers = min(resolve_threads(threads), max(len(blocks), 1))
    if workers <= 1:
        return [fn(a, b) for a, b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: fn(*ab), blocks))


def ordered_sum(parts):
    """Left fold in list order; the fixed order is what makes it reproducible."""
    it = iter(parts)
    total = next(it)
    for p in it:
        total = total + p
    return total
