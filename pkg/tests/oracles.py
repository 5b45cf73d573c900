"""Reference computations that share no code path with the package."""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import integrate, stats


def binomial_pmf(n: int, q: float) -> np.ndarray:
    return stats.binom.pmf(np.arange(n + 1), n, q)


def trinomial_total_pmf(n: int, q0: float, q1: float, q2: float) -> np.ndarray:
    """Coefficients of ``(q0 + q1 t + q2 t^2)^n`` by repeated convolution."""
    out = np.array([1.0])
    for _ in range(n):
        out = np.convolve(out, [q0, q1, q2])
    return out


def zreduced_pmf(n: int, a: float, b: float, epsabs: float = 1e-13) -> np.ndarray:
    """Unconditional pmf from one-dimensional integrals.

    Substituting ``u = arccos(x)/pi`` and ``v = arccos(y)/pi`` turns the
    strips into integrals over ``u`` alone and the two curved regions into
    integrals over ``z = u + v`` with a closed-form weight.
    """
    lam, mu = 1.0 / a, 1.0 / b
    size = 2 * n + 1

    def pad(v):
        out = np.zeros(size)
        out[: v.size] = v
        return out

    strip = integrate.quad_vec(
        lambda u: pad(binomial_pmf(n, u)) * math.pi * math.sin(math.pi * u), 0.0, 0.5,
        epsabs=epsabs, epsrel=0)[0]
    inner = integrate.quad_vec(
        lambda z: pad(binomial_pmf(n, z)) * 0.5 * math.pi
        * (math.sin(math.pi * z) - math.pi * z * math.cos(math.pi * z)),
        0.0, 0.5, epsabs=epsabs, epsrel=0)[0]

    def disk(z):
        q2 = 0.5 * (z - 0.5)
        w = 0.5 * math.pi * (math.sin(math.pi * z) - math.pi * (1 - z) * math.cos(math.pi * z))
        return trinomial_total_pmf(n, 0.5 - q2, 0.5, q2) * w

    outer = integrate.quad_vec(disk, 0.5, 1.0, epsabs=epsabs, epsrel=0)[0]
    probs = 4 * lam * mu * ((b / 2 - 1) * strip + (a / 2 - 1) * strip + inner + outer)
    probs[0] += (1 - 2 * lam) * (1 - 2 * mu)
    return probs


def limit_cdf_mp(lam, mu, x, dps: int = 40):
    """Limit CDF in arbitrary precision."""
    with mpmath.workdps(dps):
        lam, mu, x = mpmath.mpf(lam), mpmath.mpf(mu), mpmath.mpf(x)
        pi = mpmath.pi
        if x < 0:
            return mpmath.mpf(0)
        if x < 0.5:
            return (1 - 2 * (lam + mu) * mpmath.cos(pi * x)
                    + 2 * (2 * mpmath.cos(pi * x) - pi * x * mpmath.sin(pi * x)) * lam * mu)
        if x < 1:
            return 1 + 2 * pi * (x - 1) * lam * mu * mpmath.sin(pi * x)
        return mpmath.mpf(1)


def stieltjes_moment(cdf, k: int, points: int = 1_000_000) -> float:
    """``int x^k dF`` over [0, 1] by a midpoint Riemann-Stieltjes sum.

    The jump at 0 enters with weight ``0^k``.
    """
    edges = np.linspace(0.0, 1.0, points + 1)
    values = cdf(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    atom = float(values[0])  # F(0-) = 0
    return math.fsum(mids**k * np.diff(values)) + atom * 0.0**k
