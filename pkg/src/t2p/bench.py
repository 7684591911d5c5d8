"""Wall-clock scaling of training with series length."""

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass
class BenchRow:
    size: int
    timings: list
    result: object = field(default=None, repr=False)

    @property
    def median(self):
        return float(np.median(self.timings))


@dataclass
class BenchTable:
    rows: list

    def ratio(self, big, small):
        by_size = {r.size: r for r in self.rows}
        return by_size[big].median / by_size[small].median

    def to_csv(self, path):
        """Columns ``size, median_seconds, runs``; ``runs`` lists every timing, ';'-separated."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["size", "median_seconds", "runs"])
            for r in self.rows:
                w.writerow([r.size, f"{r.median:.6f}", ";".join(f"{t:.6f}" for t in r.timings)])


def bench_runtime(generator, sizes, trainer, repeats=3, clock=time.perf_counter, warmup=True):
    """Time ``trainer(generator(size))`` for each size.

    Parameters
    ----------
    generator : callable
        ``size -> dataset``; called once per size, outside the timed region.
    sizes : sequence of int
        Strictly increasing.
    trainer : callable
        ``dataset -> result``; only this call is timed.
    repeats : int
        Timed runs per size; the table keeps every timing and their median.
    warmup : bool
        Run the trainer once, untimed, on the smallest dataset first so that
        one-off costs (JIT compilation, caches) do not land in the first row.

    Returns
    -------
    BenchTable
        One row per size; ``row.result`` is the last trainer output.
    """
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigurationError(f"sizes must be strictly increasing, got {sizes}")
    if repeats < 1:
        raise ConfigurationError(f"repeats must be >= 1, got {repeats}")
    rows = []
    for pos, size in enumerate(sizes):
        data = generator(size)
        if warmup and pos == 0:
            trainer(data)
        timings = []
        result = None
        for _ in range(repeats):
            t0 = clock()
            result = trainer(data)
            timings.append(clock() - t0)
        rows.append(BenchRow(size, timings, result))
    return BenchTable(rows)
