"""Limit law of the crossings-per-needle ratio as the cluster grows.

The limit variable lives on [0, 1], with an atom of mass
``(1 - 2 lam)(1 - 2 mu)`` at 0 (the cluster centre never got within reach
of a line) and a density on (0, 1).  Unlike the finite model, both
reciprocals may be 0 here: the closed form stays well defined for a lattice
with an infinite cell side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from needlecast.conditional import K_MAX
from needlecast.errors import CapacityError, DomainError
from needlecast.quadrature import integrate_interval

PI = math.pi


@dataclass(frozen=True)
class LimitLaw:
    lam: float
    mu: float

    def __post_init__(self) -> None:
        for name in ("lam", "mu"):
            v = getattr(self, name)
            if not (0.0 <= v <= 0.5):
                raise DomainError(f"{name} = {v!r} must lie in [0, 1/2]")

    @classmethod
    def from_sides(cls, a: float, b: float) -> "LimitLaw":
        """Law for cell sides ``a, b``; ``math.inf`` gives a reciprocal of 0."""
        return cls(1.0 / a, 1.0 / b)

    @property
    def extrapolated(self) -> bool:
        """True when a reciprocal is 0, i.e. outside any finite lattice."""
        return self.lam == 0.0 or self.mu == 0.0


def limit_cdf(law: LimitLaw, x):
    """Distribution function of the limit law (scalar or array ``x``)."""
    lam, mu = law.lam, law.mu
    xs = np.asarray(x, dtype=float)
    cos_, sin_ = np.cos(PI * xs), np.sin(PI * xs)
    low = 1.0 - 2.0 * (lam + mu) * cos_ + 2.0 * (2.0 * cos_ - PI * xs * sin_) * lam * mu
    high = 1.0 + 2.0 * PI * (xs - 1.0) * lam * mu * sin_
    out = np.where(xs < 0, 0.0, np.where(xs < 0.5, low, np.where(xs < 1.0, high, 1.0)))
    # At 0 the first branch reduces to the atom; return the factored form so
    # the two agree bit for bit.
    out = np.where(xs == 0, limit_atom(law), out)
    return float(out) if out.ndim == 0 else out


def limit_atom(law: LimitLaw) -> float:
    return (1.0 - 2.0 * law.lam) * (1.0 - 2.0 * law.mu)


def limit_moment(law: LimitLaw, k: int, tol: float = 1e-10) -> float:
    """``E(X^k)`` for ``k >= 1`` from the density of the limit law.

    The atom at 0 does not contribute for positive ``k``; ``k = 0`` is
    rejected rather than patched in.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"limit moments are defined for integer k >= 1, got {k!r}")
    if k > K_MAX:
        raise CapacityError(f"moment order {k} exceeds cap {K_MAX}")
    lam, mu = law.lam, law.mu
    sin_coef = 2.0 * PI * (lam + mu) - 6.0 * PI * lam * mu
    # Three integrals, each multiplied by a coefficient of at most 2*pi.
    sub_tol = tol / (3.0 * 2.0 * PI)

    first = integrate_interval(lambda x: x**k * np.sin(PI * x), 0.0, 0.5, sub_tol).value
    second = integrate_interval(lambda x: x ** (k + 1) * np.cos(PI * x), 0.0, 0.5, sub_tol).value
    third = integrate_interval(
        lambda x: x**k * (np.sin(PI * x) - PI * (1.0 - x) * np.cos(PI * x)), 0.5, 1.0, sub_tol
    ).value
    return sin_coef * first - 2.0 * PI**2 * lam * mu * second + 2.0 * PI * lam * mu * third
