"""Monte Carlo simulation of random cluster throws.

A throw draws the centre uniformly on the full cell ``[0, a] x [0, b]`` and
every needle angle uniformly on ``[0, 2 pi)``, independently.  The reduced
quarter-cell domain is deliberately not used so the simulation does not rely
on the symmetry argument it is meant to check.

Random numbers come from Philox, a counter-based generator.  Throws are split
into ``streams``; each stream is cut into fixed-size chunks and chunk ``c`` of
stream ``s`` draws from ``Philox(key=(seed, s))`` with ``c`` placed in the
second counter word.  Every chunk is therefore reproducible on its own and the
histogram does not depend on how chunks are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from needlecast.conditional import ClusterSpec
from needlecast.errors import DomainError
from needlecast.lattice import ClusterCenter, LatticeParams, count_crossings

# Uniform draws per chunk (approximately).
CHUNK_DRAWS = 1 << 20
MIN_EXPECTED_HITS = 10
_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class ThrowConfig:
    spec: ClusterSpec
    lat: LatticeParams
    throws: int
    seed: int = 0
    streams: int = 1

    def __post_init__(self) -> None:
        if int(self.throws) != self.throws or self.throws < 1:
            raise DomainError(f"throws must be a positive integer, got {self.throws!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < _SEED_LIMIT:
            raise DomainError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if int(self.streams) != self.streams or self.streams < 1:
            raise DomainError(f"streams must be a positive integer, got {self.streams!r}")


@dataclass(frozen=True, eq=False)
class EmpiricalSummary:
    n: int
    histogram: np.ndarray
    throws: int
    stderr: np.ndarray
    moments: np.ndarray  # orders 1..4

    @classmethod
    def from_histogram(cls, n: int, histogram) -> "EmpiricalSummary":
        hist = np.asarray(histogram, dtype=np.int64).copy()
        total = int(hist.sum())
        freq = hist / total
        stderr = np.sqrt(freq * (1.0 - freq) / total)
        ratios = np.arange(2 * n + 1) / n
        moments = np.array([math.fsum(hist * ratios**k) / total for k in range(1, 5)])
        for arr in (hist, stderr, moments):
            arr.setflags(write=False)
        return cls(n, hist, total, stderr, moments)

    @property
    def frequencies(self) -> np.ndarray:
        return self.histogram / self.throws

    @property
    def flagged(self) -> np.ndarray:
        """Bins with too few hits for the normal approximation."""
        return self.histogram < MIN_EXPECTED_HITS

    def moment(self, k: int) -> float:
        ratios = np.arange(2 * self.n + 1) / self.n
        return math.fsum(self.histogram * ratios**k) / self.throws

    def moment_stderr(self, k: int) -> float:
        spread = self.moment(2 * k) - self.moment(k) ** 2
        return math.sqrt(max(spread, 0.0) / self.throws)


def _stream_sizes(throws: int, streams: int) -> list[int]:
    base, extra = divmod(throws, streams)
    return [base + (1 if s < extra else 0) for s in range(streams)]


def _work_units(cfg: ThrowConfig, draws_per_throw: int):
    chunk = max(1, CHUNK_DRAWS // draws_per_throw)
    for stream, size in enumerate(_stream_sizes(cfg.throws, cfg.streams)):
        for index, start in enumerate(range(0, size, chunk)):
            yield stream, index, min(chunk, size - start)


def _generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    key = np.array([seed, stream], dtype=np.uint64)
    counter = np.array([0, chunk, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def _run(cfg: ThrowConfig, sampler, draws_per_throw: int, threads: int) -> EmpiricalSummary:
    n = cfg.spec.n
    units = list(_work_units(cfg, draws_per_throw))

    def one(unit):
        stream, chunk, count = unit
        totals = sampler(_generator(cfg.seed, stream, chunk), count)
        assert totals.max() <= 2 * n, "a needle crossed more than two lines"
        return np.bincount(totals, minlength=2 * n + 1)

    if threads > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one, units))
    else:
        parts = [one(u) for u in units]
    hist = np.zeros(2 * n + 1, dtype=np.int64)
    for part in parts:
        hist += part
    return EmpiricalSummary.from_histogram(n, hist)


def simulate(cfg: ThrowConfig, threads: int = 1) -> EmpiricalSummary:
    """Histogram of total crossings over ``cfg.throws`` random throws."""
    n, a, b = cfg.spec.n, cfg.lat.a, cfg.lat.b

    def sampler(gen: np.random.Generator, count: int) -> np.ndarray:
        u = gen.random((count, n + 2))
        x = a * u[:, :1]
        y = b * u[:, 1:2]
        phi = 2.0 * math.pi * u[:, 2:]
        return count_crossings(x, y, phi, a, b).sum(axis=1)

    return _run(cfg, sampler, n + 2, threads)


def simulate_conditional(cfg: ThrowConfig, c: ClusterCenter, threads: int = 1) -> EmpiricalSummary:
    """Like :func:`simulate` with the centre pinned at ``c``; only angles vary."""
    n, a, b = cfg.spec.n, cfg.lat.a, cfg.lat.b
    if not (c.x <= a / 2 and c.y <= b / 2):
        raise DomainError(f"centre ({c.x}, {c.y}) lies outside the quarter cell of this lattice")

    def sampler(gen: np.random.Generator, count: int) -> np.ndarray:
        phi = 2.0 * math.pi * gen.random((count, n))
        return count_crossings(c.x, c.y, phi, a, b).sum(axis=1)

    return _run(cfg, sampler, n, threads)
