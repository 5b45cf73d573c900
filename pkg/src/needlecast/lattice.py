"""Rectangle lattice, the reduced centre domain and per-needle crossing laws.

Lines of the lattice sit at ``x = k*a`` and ``y = m*b``.  By symmetry every
question about a cluster centre reduces to the quarter cell
``[0, a/2] x [0, b/2]``, which splits into five regions:

* ``F1``: ``1 <= x <= a/2, 1 <= y <= b/2`` (no line within reach)
* ``F2``: ``0 <= x <= 1, 1 <= y <= b/2`` (only the line ``x = 0``)
* ``F3``: ``1 <= x <= a/2, 0 <= y <= 1`` (only the line ``y = 0``)
* ``F4``: ``0 <= x <= 1, sqrt(1 - x^2) <= y <= 1`` (both lines, never both
  by the same needle)
* ``F5``: ``0 <= x <= 1, 0 <= y <= sqrt(1 - x^2)`` (a needle may cross both)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from needlecast.errors import DomainError

# Slack for round-off when checking region membership of a tagged centre.
_EDGE_SLACK = 1e-12


class Region(enum.Enum):
    F1 = 1
    F2 = 2
    F3 = 3
    F4 = 4
    F5 = 5


@dataclass(frozen=True)
class LatticeParams:
    """Cell sides ``a`` (width) and ``b`` (height) in units of needle length.

    Both sides must be finite and at least 2 so a unit needle can reach at
    most one vertical and one horizontal line.
    """

    a: float
    b: float

    def __post_init__(self) -> None:
        for name in ("a", "b"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DomainError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite (infinite cells are not simulated)")
            if value < 2:
                raise DomainError(f"{name} = {value} violates the model constraint min(a, b) >= 2")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def from_reciprocals(cls, lam: float, mu: float) -> "LatticeParams":
        if not (0 < lam <= 0.5 and 0 < mu <= 0.5):
            raise DomainError(f"reciprocals must lie in (0, 1/2], got lambda={lam}, mu={mu}")
        return cls(1.0 / lam, 1.0 / mu)

    @property
    def lam(self) -> float:
        return 1.0 / self.a

    @property
    def mu(self) -> float:
        return 1.0 / self.b

    def swapped(self) -> "LatticeParams":
        return LatticeParams(self.b, self.a)


def _in_region(region: Region, x: float, y: float) -> bool:
    s = _EDGE_SLACK
    if region is Region.F1:
        return x >= 1 - s and y >= 1 - s
    if region is Region.F2:
        return x <= 1 + s and y >= 1 - s
    if region is Region.F3:
        return x >= 1 - s and y <= 1 + s
    arc = math.sqrt(max(0.0, 1.0 - x * x))
    if region is Region.F4:
        return x <= 1 + s and arc - s <= y <= 1 + s
    return x <= 1 + s and y <= arc + s


@dataclass(frozen=True)
class ClusterCenter:
    """A cluster centre in the reduced domain, tagged with its region."""

    x: float
    y: float
    region: Region

    def __post_init__(self) -> None:
        if not (self.x >= 0 and self.y >= 0):
            raise DomainError(f"centre ({self.x}, {self.y}) has a negative coordinate")
        if not _in_region(self.region, self.x, self.y):
            raise DomainError(f"centre ({self.x}, {self.y}) is not in region {self.region.name}")


@dataclass(frozen=True)
class CrossingProfile:
    """Probabilities that one needle crosses 0, 1 or 2 lattice lines."""

    q0: float
    q1: float
    q2: float

    def __post_init__(self) -> None:
        for name in ("q0", "q1", "q2"):
            v = getattr(self, name)
            if not (-1e-15 <= v <= 1 + 1e-15):
                raise DomainError(f"{name} = {v} is not a probability")
        if abs(self.q0 + self.q1 + self.q2 - 1.0) > 1e-12:
            raise DomainError("crossing probabilities do not sum to one")

    def as_array(self) -> np.ndarray:
        return np.array([self.q0, self.q1, self.q2])


def classify_region(x: float, y: float, lat: LatticeParams) -> ClusterCenter:
    """Tag a point of the quarter cell with its region.

    Boundary points go to the first matching region in the order
    F5, F4, F2, F3, F1.
    """
    if not (0 <= x <= lat.a / 2):
        raise DomainError(f"x = {x} outside [0, a/2] = [0, {lat.a / 2}]")
    if not (0 <= y <= lat.b / 2):
        raise DomainError(f"y = {y} outside [0, b/2] = [0, {lat.b / 2}]")
    if x <= 1:
        arc = math.sqrt(1.0 - x * x)
        if y <= arc:
            region = Region.F5
        elif y <= 1:
            region = Region.F4
        else:
            region = Region.F2
    elif y <= 1:
        region = Region.F3
    else:
        region = Region.F1
    return ClusterCenter(float(x), float(y), region)


def profile_arrays(region: Region, x, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised ``(q0, q1, q2)`` for centres that all lie in ``region``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    zero = np.zeros(shape)
    if region is Region.F1:
        return np.ones(shape), zero, zero
    if region is Region.F2:
        q1 = np.broadcast_to(np.arccos(np.clip(x, -1, 1)) / math.pi, shape)
        return 1.0 - q1, q1, zero
    if region is Region.F3:
        q1 = np.broadcast_to(np.arccos(np.clip(y, -1, 1)) / math.pi, shape)
        return 1.0 - q1, q1, zero
    ax = np.arccos(np.clip(x, -1, 1))
    ay = np.arccos(np.clip(y, -1, 1))
    if region is Region.F4:
        q1 = np.broadcast_to((ax + ay) / math.pi, shape)
        return 1.0 - q1, q1, zero
    # F5: exactly one line is crossed with probability 1/2 everywhere.
    q2 = np.clip((ay - np.arcsin(np.clip(x, -1, 1))) / (2 * math.pi), 0.0, 0.25)
    q2 = np.broadcast_to(q2, shape)
    q1 = np.full(shape, 0.5)
    return 0.5 - q2, q1, q2


def crossing_profile(c: ClusterCenter) -> CrossingProfile:
    q0, q1, q2 = profile_arrays(c.region, c.x, c.y)
    return CrossingProfile(float(q0), float(q1), float(q2))


def count_crossings(x, y, phi, a: float, b: float) -> np.ndarray:
    """Number of lattice lines met by unit segments (vectorised).

    A segment from ``(x, y)`` in direction ``phi`` meets every line whose
    coordinate lies in the closed range spanned by its endpoints, so an
    endpoint resting on a line counts.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ex = x + np.cos(phi)
    ey = y + np.sin(phi)
    vx = np.floor(np.maximum(x, ex) / a) - np.ceil(np.minimum(x, ex) / a) + 1
    vy = np.floor(np.maximum(y, ey) / b) - np.ceil(np.minimum(y, ey) / b) + 1
    return (vx + vy).astype(np.int64)


def needle_crossings(x: float, y: float, phi: float, lat: LatticeParams) -> int:
    """Crossings of one unit needle anchored at ``(x, y)`` with angle ``phi``."""
    return int(count_crossings(x, y, phi, lat.a, lat.b))
