"""Small shared helpers: hashing, ordered parallel map, stage timing."""

import os
import time
from concurrent.futures import ThreadPoolExecutor

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3

WORKERS_ENV_VAR = "THZRESTORE_WORKERS"


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def fnv1a64_file(path) -> str:
    """Hex FNV-1a digest of a file's bytes."""
    with open(path, "rb") as fh:
        return f"{fnv1a64(fh.read()):016x}"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items, workers=None):
    """Map fn over items, preserving order.

    Results do not depend on the worker count: each item is processed
    independently and collected in input order.
    """
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


class StageTimer:
    """Accumulates wall-clock timings per named stage."""

    def __init__(self):
        self.timings = {}

    def time(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()
                return self

            def __exit__(self, *exc):
                timer.timings[name] = timer.timings.get(name, 0.0) + (
                    time.perf_counter() - self.t0
                )
                return False

        return _Ctx()
