"""Adaptive Gauss-Kronrod integration over intervals, rectangles and F1-F5.

Every integrand is vectorised: it receives one coordinate array per
dimension (all of shape ``(P,)``) and returns either ``(P,)`` values or a
``(P, m)`` block for vector-valued integrands.  Vector integrands are
refined until *every* component meets the absolute tolerance.

Each box is sampled with the tensor product of the 15-point Kronrod rule.
Replacing the Kronrod weights by the embedded 7-point Gauss weights along one
axis gives an error indicator for that axis; the box error is the sum of the
indicators and boxes are bisected along the axis with the larger one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from needlecast.errors import ConvergenceError, DomainError
from needlecast.lattice import LatticeParams, Region

DEFAULT_BUDGET = 10_000_000
TOL_PROBABILITY = 1e-10
TOL_MOMENT = 1e-9
MIN_TOL = 1e-13
# Upper bound on points handed to the integrand in one call.
_MAX_POINTS_PER_CALL = 8192

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:14:2] = _WG[2::-1]


@dataclass(frozen=True)
class QuadResult:
    value: float | np.ndarray
    err_est: float | np.ndarray
    evals: int


@dataclass(frozen=True)
class RegionIntegrand:
    """A vectorised ``f(x, y)`` paired with the region it is integrated over."""

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    region: Region


def _apply_rule(vals: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Kronrod estimate and per-axis error indicators for sampled boxes.

    ``vals`` has shape ``(B, 15, ..., 15, m)`` with ``d`` rule axes.
    """
    kron = vals
    for _ in range(d):
        kron = np.tensordot(kron, KRONROD_WEIGHTS, axes=([1], [0]))
    errs = []
    for axis in range(d):
        mixed = vals
        for ax in range(d):
            w = GAUSS_WEIGHTS if ax == axis else KRONROD_WEIGHTS
            mixed = np.tensordot(mixed, w, axes=([1], [0]))
        errs.append(np.abs(kron - mixed))
    return kron, np.stack(errs, axis=1)  # (B, m), (B, d, m)


class _Cubature:
    def __init__(self, func, d: int, tol: float, max_evals: int):
        self.func = func
        self.d = d
        self.tol = tol
        self.max_evals = max_evals
        self.evals = 0
        self.pts_per_box = 15**d

    def _evaluate(self, lo: np.ndarray, hi: np.ndarray):
        d = self.d
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        grids = np.meshgrid(*([NODES] * d), indexing="ij")
        unit = np.stack([g.ravel() for g in grids], axis=1)  # (15^d, d)
        pts = mid[:, None, :] + half[:, None, :] * unit[None, :, :]  # (B, 15^d, d)
        flat = pts.reshape(-1, d)
        chunks = []
        for start in range(0, flat.shape[0], _MAX_POINTS_PER_CALL):
            sl = flat[start:start + _MAX_POINTS_PER_CALL]
            out = np.asarray(self.func(*[sl[:, k] for k in range(d)]), dtype=float)
            if out.ndim == 1:
                out = out[:, None]
            chunks.append(out)
        vals = np.concatenate(chunks, axis=0)
        if not np.all(np.isfinite(vals)):
            raise DomainError("integrand returned a non-finite value")
        self.evals += flat.shape[0]
        m = vals.shape[1]
        vals = vals.reshape((lo.shape[0],) + (15,) * d + (m,))
        kron, errs = _apply_rule(vals, d)
        vol = np.prod(half, axis=1)[:, None]
        return kron * vol, errs * vol[:, None, :]

    def run(self, lo, hi) -> tuple[np.ndarray, np.ndarray]:
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        value, axis_err = self._evaluate(lo, hi)
        err = axis_err.sum(axis=1)
        while True:
            total_err = err.sum(axis=0)
            bad = total_err > self.tol
            if not bad.any():
                break
            if self.evals >= self.max_evals:
                raise ConvergenceError(
                    f"tolerance {self.tol:g} not reached within {self.max_evals} evaluations",
                    best=_total(value), err_est=total_err, evals=self.evals,
                )
            score = err[:, bad].max(axis=1)
            order = np.argsort(-score, kind="stable")
            # Split the worst boxes, and any box carrying a sizeable share.
            cutoff = max(score[order[0]] * 0.25, self.tol / max(len(score), 1))
            pick = order[: max(1, min(32, int(np.sum(score >= cutoff))))]
            plo, phi = lo[pick], hi[pick]
            split_axis = axis_err[pick][:, :, bad].max(axis=2).argmax(axis=1)
            rows = np.arange(len(pick))
            cut = 0.5 * (plo[rows, split_axis] + phi[rows, split_axis])
            if np.any(cut <= plo[rows, split_axis]) or np.any(cut >= phi[rows, split_axis]):
                raise ConvergenceError(
                    "subdivision reached floating-point resolution",
                    best=_total(value), err_est=total_err, evals=self.evals,
                )
            left_hi = phi.copy()
            left_hi[rows, split_axis] = cut
            right_lo = plo.copy()
            right_lo[rows, split_axis] = cut
            new_lo = np.concatenate([plo, right_lo])
            new_hi = np.concatenate([left_hi, phi])
            new_val, new_axis_err = self._evaluate(new_lo, new_hi)
            keep = np.ones(len(lo), dtype=bool)
            keep[pick] = False
            lo = np.concatenate([lo[keep], new_lo])
            hi = np.concatenate([hi[keep], new_hi])
            value = np.concatenate([value[keep], new_val])
            axis_err = np.concatenate([axis_err[keep], new_axis_err])
            err = axis_err.sum(axis=1)
        return _total(value), _total(err)


def _total(parts: np.ndarray) -> np.ndarray:
    # Exactly rounded per component, hence independent of box order.
    return np.array([math.fsum(col) for col in parts.T])


def _check_tol(tol: float) -> None:
    if not tol >= MIN_TOL:
        raise DomainError(f"tolerance {tol!r} below the supported minimum {MIN_TOL:g}")


def _pack(value: np.ndarray, err: np.ndarray, evals: int, scalar: bool) -> QuadResult:
    if scalar:
        return QuadResult(float(value[0]), float(err[0]), evals)
    return QuadResult(value, err, evals)


def integrate_box(func, lows, highs, tol: float = TOL_MOMENT,
                  max_evals: int = DEFAULT_BUDGET, scalar: bool | None = None) -> QuadResult:
    """Integrate ``func`` over the axis-aligned box ``lows <= x <= highs``."""
    _check_tol(tol)
    lows = np.asarray(lows, dtype=float).ravel()
    highs = np.asarray(highs, dtype=float).ravel()
    d = lows.size
    if np.any(highs < lows):
        raise DomainError("box has an upper bound below its lower bound")
    if scalar is None:
        mid = 0.5 * (lows + highs)
        scalar = np.asarray(func(*[np.array([m]) for m in mid])).ndim <= 1
    if np.any(highs == lows):
        width = np.asarray(func(*[np.array([m]) for m in lows]))
        m = 1 if width.ndim <= 1 else width.shape[-1]
        return _pack(np.zeros(m), np.zeros(m), 0, scalar)
    cub = _Cubature(func, d, tol, max_evals)
    try:
        value, err = cub.run(lows, highs)
    except ConvergenceError as exc:
        if scalar:
            exc.best, exc.err_est = float(exc.best[0]), float(exc.err_est[0])
        raise
    return _pack(value, err, cub.evals, scalar)


def integrate_interval(func, lo: float, hi: float, tol: float = TOL_MOMENT,
                       max_evals: int = DEFAULT_BUDGET) -> QuadResult:
    """One-dimensional adaptive Gauss-Kronrod integral of ``func`` on [lo, hi]."""
    return integrate_box(func, [lo], [hi], tol, max_evals)


def integrate_rectangle(func, xlim, ylim, tol: float = TOL_MOMENT,
                        max_evals: int = DEFAULT_BUDGET) -> QuadResult:
    return integrate_box(func, [xlim[0], ylim[0]], [xlim[1], ylim[1]], tol, max_evals)


def _curved(func, region: Region):
    """Map a curved region onto the unit-ish box ``(t, sigma)``.

    The outer variable is ``x = sin t`` and the inner one ``y = cos s``; in
    these coordinates both ``arccos x`` and ``arccos y`` are linear, so the
    kinks of the crossing laws at ``x = 1`` and ``y = 1`` disappear.
    """
    half_pi = 0.5 * math.pi

    def mapped(t, sigma):
        if region is Region.F4:
            span = t  # y from sqrt(1 - x^2) up to 1
            s = t * sigma
        else:
            span = half_pi - t  # y from 0 up to sqrt(1 - x^2)
            s = t + span * sigma
        x = np.sin(t)
        y = np.cos(s)
        jac = np.cos(t) * np.sin(s) * span
        vals = np.asarray(func(x, y), dtype=float)
        if vals.ndim == 2:
            return vals * jac[:, None]
        return vals * jac

    return mapped


def integrate_region(f: RegionIntegrand, lat: LatticeParams, tol: float = TOL_PROBABILITY,
                     max_evals: int = DEFAULT_BUDGET) -> QuadResult:
    """Integrate ``f.func`` over its region of the quarter cell."""
    half_a, half_b = lat.a / 2, lat.b / 2
    region = f.region
    if region is Region.F1:
        return integrate_box(f.func, [1.0, 1.0], [half_a, half_b], tol, max_evals)
    if region is Region.F2:
        return integrate_box(f.func, [0.0, 1.0], [1.0, half_b], tol, max_evals)
    if region is Region.F3:
        return integrate_box(f.func, [1.0, 0.0], [half_a, 1.0], tol, max_evals)
    return integrate_box(_curved(f.func, region), [0.0, 0.0], [0.5 * math.pi, 1.0], tol, max_evals)
