import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "PFA_RD_GEO_THREADS"


def worker_count(n_jobs=None):
    """Resolve a worker count: explicit value, then the environment, then the CPU count."""
    if n_jobs is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                n_jobs = int(env)
            except ValueError:
                raise ValueError("{} must be an integer, got {!r}".format(THREADS_ENV, env)) from None
        else:
            n_jobs = os.cpu_count() or 1
    return max(1, int(n_jobs))


def map_blocks(fn, n, block_size, n_jobs=None):
    """
    Apply ``fn(start, stop)`` over ``range(n)`` in fixed blocks and return results in block order.

    Block boundaries depend only on ``n`` and ``block_size``, never on the
    worker count, so outputs are identical for any number of workers.
    """

    bounds = [(s, min(s + block_size, n)) for s in range(0, n, block_size)]
    workers = min(worker_count(n_jobs), max(1, len(bounds)))
    if workers == 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: fn(*ab), bounds))
