"""Unconditional law of the crossing count: pmf, step CDF and moments.

The centre is uniform on the quarter cell, which has area ``ab/4``, so every
unconditional quantity is ``4*lam*mu`` times the sum of the corresponding
conditional quantity integrated over F1-F5.  F1 contributes in closed form:
the cluster never reaches a line there.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from needlecast.conditional import K_MAX, ClusterSpec, moment_batch, pmf_batch
from needlecast.errors import CapacityError, ConvergenceError, DomainError
from needlecast.lattice import LatticeParams, Region
from needlecast.quadrature import TOL_MOMENT, TOL_PROBABILITY, RegionIntegrand, integrate_region

PMF_N_CAP = 2000
_CURVED_AND_STRIPS = (Region.F2, Region.F3, Region.F4, Region.F5)


@dataclass(frozen=True, eq=False)
class FiniteCdf:
    """Right-continuous step CDF of ``X_n = T/n`` with jumps at ``i/n``."""

    n: int
    lat: LatticeParams
    values: np.ndarray  # F_n(i/n) for i = 0..2n

    def left_limits(self) -> np.ndarray:
        """``F_n(i/n -)`` for each jump point."""
        return np.concatenate([[0.0], self.values[:-1]])

    @property
    def jumps(self) -> np.ndarray:
        """Jump locations ``i/n`` as rounded floats; ``F_n`` at each includes its jump."""
        return np.arange(self.values.size) / self.n

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.jumps, xs, side="right") - 1
        out = np.where(idx < 0, 0.0, self.values[np.clip(idx, 0, None)])
        out = np.where(xs >= 2.0, 1.0, out)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class IntersectionPmf:
    n: int
    lat: LatticeParams
    probs: np.ndarray
    tol: float
    evals: int = 0

    def cdf(self) -> FiniteCdf:
        values = np.cumsum(self.probs)
        values.setflags(write=False)
        return FiniteCdf(self.n, self.lat, values)

    def moment(self, k: int) -> float:
        ratios = np.arange(2 * self.n + 1) / self.n
        return math.fsum(ratios**k * self.probs)


def _region_tol(tol: float, lat: LatticeParams) -> float:
    # Four integrated regions, each scaled by 4*lam*mu afterwards.
    return tol / (4.0 * 4.0 * lat.lam * lat.mu)


def _f1_share(lat: LatticeParams) -> float:
    return (1.0 - 2.0 * lat.lam) * (1.0 - 2.0 * lat.mu)


@functools.lru_cache(maxsize=32)
def _pmf_cached(n: int, lat: LatticeParams, tol: float) -> IntersectionPmf:
    region_tol = _region_tol(tol, lat)
    parts = []
    evals = 0
    for region in _CURVED_AND_STRIPS:
        integrand = RegionIntegrand(functools.partial(_pmf_integrand, n, region), region)
        res = integrate_region(integrand, lat, region_tol)
        parts.append(np.asarray(res.value))
        evals += res.evals
    scale = 4.0 * lat.lam * lat.mu
    probs = np.array([scale * math.fsum(col) for col in np.stack(parts).T])
    probs[0] += _f1_share(lat)

    total = math.fsum(probs)
    if abs(total - 1.0) > 10 * (2 * n + 1) * tol:
        raise ConvergenceError(f"pmf for n={n} sums to {total!r}", best=probs, evals=evals)
    if np.any(probs < -tol):
        raise ConvergenceError(f"pmf for n={n} has an entry below -tol", best=probs, evals=evals)
    probs = np.clip(probs, 0.0, None)
    probs.setflags(write=False)
    return IntersectionPmf(n, lat, probs, tol, evals)


def _pmf_integrand(n: int, region: Region, x, y):
    return pmf_batch(n, region, x, y)


def pmf(spec: ClusterSpec, lat: LatticeParams, tol: float = TOL_PROBABILITY,
        n_cap: int = PMF_N_CAP) -> IntersectionPmf:
    """Probabilities of exactly ``i`` crossings, ``i = 0..2n``.

    Each entry is accurate to ``tol`` in absolute terms.  Results are cached
    per ``(n, lattice, tol)``.
    """
    if spec.n > n_cap:
        raise CapacityError(f"full pmf quadrature refused for n = {spec.n} > {n_cap}; use moment()")
    return _pmf_cached(spec.n, lat, float(tol))


def cdf(spec: ClusterSpec, lat: LatticeParams, tol: float = TOL_PROBABILITY) -> FiniteCdf:
    return pmf(spec, lat, tol).cdf()


def _moment_integrand(n: int, region: Region, ks: tuple[int, ...], x, y):
    return moment_batch(n, region, x, y, ks)


def moments(spec: ClusterSpec, lat: LatticeParams, ks, tol: float = TOL_MOMENT) -> np.ndarray:
    """``E(X_n^k)`` for several orders at once, by integrating conditional moments."""
    ks = tuple(int(k) for k in ks)
    for k in ks:
        if k < 0:
            raise DomainError(f"moment order must be non-negative, got {k}")
        if k > K_MAX:
            raise CapacityError(f"moment order {k} exceeds cap {K_MAX}")
    return _moments_cached(spec.n, lat, ks, float(tol)).copy()


@functools.lru_cache(maxsize=64)
def _moments_cached(n: int, lat: LatticeParams, ks: tuple[int, ...], tol: float) -> np.ndarray:
    region_tol = _region_tol(tol, lat)
    parts = []
    for region in _CURVED_AND_STRIPS:
        integrand = RegionIntegrand(functools.partial(_moment_integrand, n, region, ks), region)
        parts.append(np.asarray(integrate_region(integrand, lat, region_tol).value))
    scale = 4.0 * lat.lam * lat.mu
    out = np.array([scale * math.fsum(col) for col in np.stack(parts).T])
    # Only the zeroth moment sees the no-crossing region F1.
    out[np.array(ks) == 0] += _f1_share(lat)
    return out


def moment(spec: ClusterSpec, lat: LatticeParams, k: int, tol: float = TOL_MOMENT) -> float:
    return float(moments(spec, lat, [k], tol)[0])
