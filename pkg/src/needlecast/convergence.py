"""Distances between the finite-n law and its limit.

``F_n`` is a step function with jumps at ``i/n`` and the limit CDF ``F`` is
continuous except for its atom at 0, so on every open interval between
jumps ``|F_n - F|`` is maximised at an endpoint.  Evaluating both one-sided
values at each jump therefore gives the exact supremum; a uniform grid on
[0, 2] is added as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from needlecast.conditional import ClusterSpec
from needlecast.lattice import LatticeParams
from needlecast.limit import LimitLaw, limit_atom, limit_cdf, limit_moment
from needlecast.quadrature import TOL_MOMENT, TOL_PROBABILITY
from needlecast.unconditional import moments, pmf

DEFAULT_GRID = 10_000


def law_of(lat: LatticeParams) -> LimitLaw:
    return LimitLaw(lat.lam, lat.mu)


def step_sup_distance(values, n: int, law: LimitLaw, grid: int = DEFAULT_GRID) -> float:
    """``sup_x |G(x) - F(x)|`` for a step CDF ``G`` with ``G(i/n) = values[i]``."""
    values = np.asarray(values, dtype=float)
    jumps = np.arange(values.size) / n
    limit_at_jumps = limit_cdf(law, jumps)
    limit_left = limit_at_jumps.copy()
    limit_left[0] = 0.0  # F(0-) = 0, the atom sits at 0
    left = np.concatenate([[0.0], values[:-1]])
    dist = max(np.max(np.abs(values - limit_at_jumps)), np.max(np.abs(left - limit_left)))
    if grid:
        xs = np.linspace(0.0, 2.0, grid)
        idx = np.clip(np.floor(xs * n).astype(int), 0, values.size - 1)
        step = np.where(xs >= 2.0, 1.0, values[idx])
        dist = max(dist, np.max(np.abs(step - limit_cdf(law, xs))))
    return float(dist)


def sup_distance(spec: ClusterSpec, lat: LatticeParams, tol: float = TOL_PROBABILITY,
                 grid: int = DEFAULT_GRID) -> float:
    finite = pmf(spec, lat, tol).cdf()
    return step_sup_distance(finite.values, spec.n, law_of(lat), grid)


def atom_gap(spec: ClusterSpec, lat: LatticeParams, tol: float = TOL_PROBABILITY) -> float:
    """``|p_n(0) - (1 - 2 lam)(1 - 2 mu)|``."""
    return abs(float(pmf(spec, lat, tol).probs[0]) - limit_atom(law_of(lat)))


@dataclass(frozen=True)
class MomentGapRow:
    n: int
    k: int
    finite: float
    limit: float

    @property
    def gap(self) -> float:
        return abs(self.finite - self.limit)


def moment_gap_table(lat: LatticeParams, n_list, k_max: int = 4,
                     tol: float = TOL_MOMENT) -> list[MomentGapRow]:
    law = law_of(lat)
    ks = list(range(1, k_max + 1))
    limits = [limit_moment(law, k) for k in ks]
    rows = []
    for n in n_list:
        finite = moments(ClusterSpec(n), lat, ks, tol)
        rows.extend(MomentGapRow(n, k, float(f), lim) for k, f, lim in zip(ks, finite, limits))
    return rows


def _strictly_decreasing(seq) -> bool:
    return all(b < a for a, b in zip(seq, seq[1:]))


@dataclass(frozen=True)
class ConvergenceReport:
    lat: LatticeParams
    n_values: tuple[int, ...]
    sup_distances: tuple[float, ...]
    atom_gaps: tuple[float, ...]
    moment_rows: tuple[MomentGapRow, ...] = field(repr=False)
    k_max: int = 4

    def moment_gaps(self, k: int) -> list[float]:
        return [r.gap for r in self.moment_rows if r.k == k]

    def monotone(self) -> dict[str, bool]:
        """Which columns strictly decrease over the tested ``n`` (reported, not enforced)."""
        out = {"sup_distance": _strictly_decreasing(self.sup_distances),
               "atom_gap": _strictly_decreasing(self.atom_gaps)}
        for k in range(1, self.k_max + 1):
            out[f"moment_gap_k{k}"] = _strictly_decreasing(self.moment_gaps(k))
        return out


def convergence_report(lat: LatticeParams, n_list, k_max: int = 4,
                       tol: float = TOL_PROBABILITY, moment_tol: float = TOL_MOMENT,
                       grid: int = DEFAULT_GRID) -> ConvergenceReport:
    n_values = tuple(int(n) for n in n_list)
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n values must be strictly increasing")
    sups = tuple(sup_distance(ClusterSpec(n), lat, tol, grid) for n in n_values)
    atoms = tuple(atom_gap(ClusterSpec(n), lat, tol) for n in n_values)
    rows = tuple(moment_gap_table(lat, n_values, k_max, moment_tol))
    return ConvergenceReport(lat, n_values, sups, atoms, rows, k_max)
