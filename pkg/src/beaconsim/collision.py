"""Closest-point-of-approach collision detection over a recency window.

Two beacons describe constant-velocity trajectories.  With relative
displacement dx = a.x0 - b.x0 and relative velocity dv = a.v - b.v the
squared separation is the quadratic

    D(t) = |dv|^2 t^2 + 2 (dx . dv) t + |dx|^2

minimised at t* = -(dx . dv) / |dv|^2.  A pair is *diverging* when t* < 0,
*parallel* when |dv|^2 = 0 (constant separation, treated as t* = 0), and
*closing* otherwise, with minimum separation d* = sqrt(D(t*)).
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class Beacon:
    """One periodic vehicle report: anonymised id, position, velocity, timestamp."""

    pseudonym: str
    x0: tuple[float, float]
    v: tuple[float, float]
    t_gen: float

    def __post_init__(self):
        if not self.pseudonym:
            raise DomainError("beacon pseudonym must be non-empty")
        for comp in (*self.x0, *self.v, self.t_gen):
            if not math.isfinite(comp):
                raise DomainError(f"non-finite beacon component {comp!r}")

    def position_at(self, dt: float) -> tuple[float, float]:
        return (self.x0[0] + self.v[0] * dt, self.x0[1] + self.v[1] * dt)


class CpaKind(Enum):
    CLOSING = "closing"
    DIVERGING = "diverging"
    PARALLEL = "parallel"


@dataclass(frozen=True)
class CpaResult:
    """Outcome of a pairwise check.

    For CLOSING, ``t_star``/``d_star`` are the time and distance of closest
    approach.  For PARALLEL the separation is constant: ``d_star`` is the
    current distance and ``t_star`` is 0.  For DIVERGING ``t_star`` is the
    (negative) stationary point and ``d_star`` the current distance.
    """

    kind: CpaKind
    t_star: float
    d_star: float


@dataclass(frozen=True)
class CollisionPrediction:
    other: str
    t_star: float
    d_star: float


@dataclass(frozen=True)
class DetectorParams:
    """Alert threshold, window recency, and the per-beacon processing-cost model."""

    d_min: float = 5.0
    timeout: float = 1.0
    cost_base: float = 1.0
    cost_per_neighbor: float = 0.1
    cost_to_seconds: float = 6.5e-5  # calibrated so a 100-vehicle window costs ~0.7 ms

    def __post_init__(self):
        if self.d_min <= 0 or self.timeout <= 0:
            raise ConfigurationError("d_min and timeout must be > 0")
        if self.cost_base < 0 or self.cost_per_neighbor < 0 or self.cost_to_seconds < 0:
            raise ConfigurationError("cost parameters must be >= 0")


class BeaconWindow:
    """Recently received beacons, at most one per pseudonym (newest wins)."""

    def __init__(self, timeout: float = 1.0):
        if timeout <= 0:
            raise ConfigurationError("window timeout must be > 0")
        self.timeout = timeout
        self.entries: dict[str, Beacon] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def prune(self, t_now: float) -> None:
        """Drop entries older than the timeout at time ``t_now``."""
        stale = [p for p, b in self.entries.items() if t_now - b.t_gen > self.timeout]
        for p in stale:
            del self.entries[p]

    def insert(self, beacon: Beacon) -> None:
        self.entries[beacon.pseudonym] = beacon


def cpa_pair(a: Beacon, b: Beacon) -> CpaResult:
    """Closest point of approach for two constant-velocity beacons."""
    dx = a.x0[0] - b.x0[0]
    dy = a.x0[1] - b.x0[1]
    dvx = a.v[0] - b.v[0]
    dvy = a.v[1] - b.v[1]
    a2 = dvx * dvx + dvy * dvy
    bb = dx * dvx + dy * dvy
    cc = dx * dx + dy * dy
    if a2 == 0.0:
        return CpaResult(CpaKind.PARALLEL, 0.0, math.sqrt(cc))
    t_star = -bb / a2
    if t_star < 0.0:
        return CpaResult(CpaKind.DIVERGING, t_star, math.sqrt(cc))
    d2 = a2 * t_star * t_star + 2.0 * bb * t_star + cc
    return CpaResult(CpaKind.CLOSING, t_star, math.sqrt(max(d2, 0.0)))


def detect(
    current: Beacon,
    window: BeaconWindow,
    params: DetectorParams,
    t_now: float,
) -> set[CollisionPrediction]:
    """Check ``current`` against every fresh window entry, then insert it.

    Returns one prediction per entry whose closest approach (or constant
    parallel separation) is within ``params.d_min``.  Entries sharing the
    current pseudonym are replaced, never compared against.
    """
    window.prune(t_now)
    others = [b for p, b in window.entries.items() if p != current.pseudonym]
    preds: set[CollisionPrediction] = set()
    if others:
        dx = np.array([current.x0[0] - b.x0[0] for b in others])
        dy = np.array([current.x0[1] - b.x0[1] for b in others])
        dvx = np.array([current.v[0] - b.v[0] for b in others])
        dvy = np.array([current.v[1] - b.v[1] for b in others])
        a2 = dvx * dvx + dvy * dvy
        bb = dx * dvx + dy * dvy
        cc = dx * dx + dy * dy
        parallel = a2 == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            t_star = np.where(parallel, 0.0, -bb / np.where(parallel, 1.0, a2))
        d2 = np.where(parallel, cc, a2 * t_star * t_star + 2.0 * bb * t_star + cc)
        d_star = np.sqrt(np.maximum(d2, 0.0))
        hit = (t_star >= 0.0) & (d_star <= params.d_min)
        for i in np.flatnonzero(hit):
            preds.add(CollisionPrediction(others[i].pseudonym, float(t_star[i]), float(d_star[i])))
    window.insert(current)
    return preds


def processing_cost(window_size: int, params: DetectorParams) -> float:
    """Cost units to process one beacon against ``window_size`` entries (linear)."""
    if window_size < 0:
        raise ConfigurationError("window_size must be >= 0")
    return params.cost_base + params.cost_per_neighbor * window_size
