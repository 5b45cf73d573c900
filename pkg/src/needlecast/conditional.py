"""Intersection counts of a cluster whose centre is held fixed.

With the centre fixed the needles are independent, each crossing 0, 1 or 2
lines with probabilities ``(q0, q1, q2)``.  In F2-F4 no needle can cross
twice and the total is binomial; in F5 the total ``K1 + 2*K2`` comes from a
trinomial split of the ``n`` needles.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln, xlogy

from needlecast.errors import CapacityError, DomainError
from needlecast.lattice import ClusterCenter, Region, crossing_profile, profile_arrays

N_MAX = 100_000
BRUTE_FORCE_MAX = 12
K_MAX = 32
# Terms below ``_TINY`` are dropped from the trinomial sums, as are terms
# more than a factor ``exp(_REL_DROP)`` below the largest term of their row:
# with at most 2 * 10**5 terms the latter shift a sum by under 1e-16 relative.
_TINY = 1e-320
_REL_DROP = 50.0
# Coefficient tables for the batched trinomial evaluator are cached up to
# this n; above it they are rebuilt in row blocks on every call.
_CACHE_N = 2000
_ROW_BLOCK = 512


@dataclass(frozen=True)
class ClusterSpec:
    n: int
    n_max: int = N_MAX

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise DomainError(f"needle count must be an integer, got {self.n!r}")
        if self.n < 1:
            raise DomainError(f"needle count must be positive, got {self.n}")
        if self.n > self.n_max:
            raise CapacityError(f"n = {self.n} exceeds the configured cap {self.n_max}")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True, eq=False)
class ConditionalPmf:
    """Law of the total crossing count for a fixed centre, indexed 0..2n."""

    n: int
    center: ClusterCenter
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.shape != (2 * self.n + 1,):
            raise ValueError(f"expected {2 * self.n + 1} probabilities, got shape {probs.shape}")
        if np.any(probs < 0):
            raise ValueError("negative probability in conditional pmf")
        if abs(math.fsum(probs) - 1.0) > 1e-10:
            raise ValueError(f"conditional pmf sums to {math.fsum(probs)!r}")
        if self.center.region is not Region.F5 and np.any(probs[self.n + 1:] != 0):
            raise ValueError("mass above n outside F5")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def moment(self, k: int) -> float:
        ratios = np.arange(2 * self.n + 1) / self.n
        return math.fsum(ratios**k * self.probs)


@functools.lru_cache(maxsize=64)
def _log_factorials(n: int) -> np.ndarray:
    out = gammaln(np.arange(n + 1) + 1.0)
    out.setflags(write=False)
    return out


def _binomial_logpmf(n: int, q1, q0) -> np.ndarray:
    """Binomial(n, q1) log-pmf; the last axis indexes the count."""
    lf = _log_factorials(n)
    i = np.arange(n + 1)
    q1 = np.asarray(q1, dtype=float)[..., None]
    q0 = np.asarray(q0, dtype=float)[..., None]
    return lf[n] - lf[i] - lf[n - i] + xlogy(i, q1) + xlogy(n - i, q0)


def _trinomial_log_coeffs(n: int, i_lo: int, i_hi: int) -> np.ndarray:
    """``log C(n, i-j) C(i-j, j)`` for rows ``i_lo <= i < i_hi``, ``j = 0..n``.

    Entries with an impossible split are ``-inf``.
    """
    lf = _log_factorials(n)
    i = np.arange(i_lo, i_hi)[:, None]
    j = np.arange(n + 1)[None, :]
    k1 = i - 2 * j
    k0 = n - i + j
    valid = (k1 >= 0) & (k0 >= 0)
    out = np.full(valid.shape, -np.inf)
    out[valid] = lf[n] - lf[np.broadcast_to(k0, valid.shape)[valid]] \
        - lf[np.broadcast_to(k1, valid.shape)[valid]] - lf[np.broadcast_to(j, valid.shape)[valid]]
    return out


def _row_modes(n: int, i: np.ndarray, q0: float, q1: float, q2: float) -> np.ndarray:
    """Approximate maximiser over ``j`` of each row's trinomial term.

    Setting the ratio of consecutive terms to one gives
    ``A j^2 + B j - c i^2 = 0`` with ``c = q0 q2 / q1^2`` and ``A = 1 - 4c``.
    """
    c = q0 * q2 / (q1 * q1)
    big_a = 1.0 - 4.0 * c
    big_b = 4.0 * c * i + n - i
    disc = np.sqrt(big_b * big_b + 4.0 * big_a * c * i * i)
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(big_b > 0, 2.0 * c * i * i / (big_b + disc), (disc - big_b) / (2.0 * big_a))
    return np.nan_to_num(np.rint(root), nan=0.0).astype(np.int64)


def _f5_pmf_single(n: int, q0: float, q1: float, q2: float) -> np.ndarray:
    """F5 pmf summed term by term with compensated summation.

    A term splits as ``Bin(n, q1)(k1) * Bin(n - k1, q2 / (q0 + q2))(j)`` with
    ``k1 = i - 2j``; both factors come from a binomial pmf that stays
    accurate to a few ulps where log-factorial differences would lose about
    ``n * log(n) * eps`` in the exponent.  The terms of one row are
    log-concave in ``j``, so only a window around the row maximum is
    evaluated; it is widened until both edges sit below the drop threshold
    or on the feasibility bounds.
    """
    first = stats.binom.pmf(np.arange(n + 1), n, q1)
    share = q2 / (q0 + q2)
    rel = math.exp(-_REL_DROP)
    probs = np.zeros(2 * n + 1)
    for lo in range(0, 2 * n + 1, _ROW_BLOCK):
        i = np.arange(lo, min(lo + _ROW_BLOCK, 2 * n + 1))
        j_lo = np.maximum(0, i - n)
        j_hi = i // 2
        centre = np.clip(_row_modes(n, i, q0, q1, q2), j_lo, j_hi)
        width = int(4 * math.sqrt(n)) + 8
        while True:
            offs = np.arange(-width, width + 1)
            j = centre[:, None] + offs[None, :]
            valid = (j >= j_lo[:, None]) & (j <= j_hi[:, None])
            j = np.where(valid, j, j_lo[:, None])
            k1 = i[:, None] - 2 * j
            terms = first[k1] * stats.binom.pmf(j, n - k1, share)
            terms[~valid] = 0.0
            cut = np.maximum(terms.max(axis=1) * rel, _TINY)
            open_edge = (valid[:, [0, -1]] & (terms[:, [0, -1]] > cut[:, None])).any()
            if not open_edge or width > n:
                break
            width *= 2
        for row, floor, i_val in zip(terms, cut, i):
            keep = row[row > floor]
            probs[i_val] = math.fsum(keep) if keep.size else 0.0
    return probs


def conditional_pmf(spec: ClusterSpec, c: ClusterCenter) -> ConditionalPmf:
    """Exact conditional pmf for one centre."""
    n = spec.n
    prof = crossing_profile(c)
    probs = np.zeros(2 * n + 1)
    if c.region is Region.F1:
        probs[0] = 1.0
    elif c.region is Region.F5:
        probs = _f5_pmf_single(n, prof.q0, prof.q1, prof.q2)
    else:
        probs[: n + 1] = stats.binom.pmf(np.arange(n + 1), n, prof.q1)
    return ConditionalPmf(n, c, probs)


def conditional_pmf_bruteforce(spec: ClusterSpec, c: ClusterCenter) -> ConditionalPmf:
    """Reference pmf from all ``3**n`` per-needle outcome assignments."""
    n = spec.n
    if n > BRUTE_FORCE_MAX:
        raise CapacityError(f"enumeration over 3**{n} outcomes refused (cap n <= {BRUTE_FORCE_MAX})")
    q = crossing_profile(c).as_array()
    outcome = np.arange(3)
    weights = np.ones(())
    totals = np.zeros((), dtype=np.int64)
    for _ in range(n):
        weights = np.multiply.outer(weights, q)
        totals = np.add.outer(totals, outcome)
    probs = np.bincount(totals.ravel(), weights=weights.ravel(), minlength=2 * n + 1)
    return ConditionalPmf(n, c, probs)


def conditional_moment(spec: ClusterSpec, c: ClusterCenter, k: int, k_max: int = K_MAX) -> float:
    """``E((T/n)^k)`` for a fixed centre, summed from the pmf."""
    if k < 0 or int(k) != k:
        raise DomainError(f"moment order must be a non-negative integer, got {k!r}")
    if k > k_max:
        raise CapacityError(f"moment order {k} exceeds cap {k_max}")
    return conditional_pmf(spec, c).moment(int(k))


# -- batched evaluation used by the quadrature integrands -------------------


@functools.lru_cache(maxsize=8)
def _scaled_trinomial_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalised trinomial coefficients and their row log-maxima."""
    logc = _trinomial_log_coeffs(n, 0, 2 * n + 1)
    rowmax = logc.max(axis=1)
    table = np.exp(logc - rowmax[:, None])
    table.setflags(write=False)
    rowmax.setflags(write=False)
    return table, rowmax


def _f5_pmf_batch(n: int, q2: np.ndarray) -> np.ndarray:
    """F5 pmf rows for many centres at once.

    With ``q1 = 1/2`` each term factors as
    ``exp(row(i) + col(j) + coeff(i, j))`` so the sum over ``j`` becomes a
    product of a cached coefficient table with per-centre column weights.
    """
    q2 = np.asarray(q2, dtype=float).ravel()
    q0 = 0.5 - q2
    lq0 = np.log(q0)
    lq1 = -math.log(2.0)
    with np.errstate(divide="ignore"):
        slope_j = np.log(4.0 * q0 * q2)  # log(q0 q2 / q1^2), <= 0
    j = np.arange(n + 1)
    # Centre the column weights on the mode of K2 ~ Binomial(n, q2) so the
    # terms that matter stay inside the floating-point range.
    centre = np.floor(n * q2)
    with np.errstate(invalid="ignore"):
        expo = np.where(j[None, :] == centre[:, None], 0.0,
                        (j[None, :] - centre[:, None]) * slope_j[:, None])
        shift = np.where(centre > 0, centre * slope_j, 0.0)
    weights = np.exp(np.minimum(expo, 700.0))  # (P, n+1)

    i = np.arange(2 * n + 1)
    row_log = n * lq0[:, None] + i[None, :] * (lq1 - lq0)[:, None] + shift[:, None]
    if n <= _CACHE_N:
        table, rowmax = _scaled_trinomial_table(n)
        sums = weights @ table.T
        row_log = row_log + rowmax[None, :]
    else:
        sums = np.empty((q2.size, 2 * n + 1))
        for lo in range(0, 2 * n + 1, _ROW_BLOCK):
            hi = min(lo + _ROW_BLOCK, 2 * n + 1)
            logc = _trinomial_log_coeffs(n, lo, hi)
            rowmax = logc.max(axis=1)
            sums[:, lo:hi] = weights @ np.exp(logc - rowmax[:, None]).T
            row_log[:, lo:hi] += rowmax[None, :]
    with np.errstate(divide="ignore"):
        out = np.exp(row_log + np.log(sums))
    return out


def pmf_batch(n: int, region: Region, x, y) -> np.ndarray:
    """Conditional pmfs for an array of centres in one region.

    Returns an array of shape ``x.shape + (2n+1,)``.
    """
    q0, q1, q2 = profile_arrays(region, x, y)
    shape = q0.shape
    out = np.zeros(shape + (2 * n + 1,))
    if region is Region.F1:
        out[..., 0] = 1.0
    elif region is Region.F5:
        out[...] = _f5_pmf_batch(n, q2).reshape(shape + (2 * n + 1,))
    else:
        out[..., : n + 1] = np.exp(_binomial_logpmf(n, q1, q0))
    return out


def moment_batch(n: int, region: Region, x, y, ks) -> np.ndarray:
    """Conditional moments of orders ``ks`` for an array of centres."""
    ratios = np.arange(2 * n + 1) / n
    powers = np.stack([ratios**k for k in ks], axis=1)
    return pmf_batch(n, region, x, y) @ powers
