from concurrent.futures import ProcessPoolExecutor


def _apply_chunk(fn, chunk):
    return [fn(item) for item in chunk]


def parallel_map(fn, items, jobs=1):
    """Order-preserving map over items; runs in worker processes when jobs > 1.

    fn must be picklable (module-level function or functools.partial of one).
    """
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    size = -(-len(items) // jobs)
    chunks = [items[i:i + size] for i in range(0, len(items), size)]
    results = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for part in pool.map(_apply_chunk, [fn] * len(chunks), chunks):
            results.extend(part)
    return results
