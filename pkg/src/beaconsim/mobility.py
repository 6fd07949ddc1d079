"""Vehicle mobility: trace ingestion, synthetic traces, and RSU coverage.

A trace is a time-ordered collection of per-second vehicle states.  The CSV
schema is ``time_s,vehicle_id,x_m,y_m,vx_mps,vy_mps`` (UTF-8, ``.`` decimal
separator, one row per vehicle per second).  RSU sites use
``rsu_id,x_m,y_m,radius_m``.
"""

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, TextIO

import numpy as np

from .errors import BoundsError, ConfigurationError, DuplicateStateError, TraceParseError

TRACE_HEADER = "time_s,vehicle_id,x_m,y_m,vx_mps,vy_mps"
RSU_HEADER = "rsu_id,x_m,y_m,radius_m"

DEFAULT_MAX_SPEED = 19.5  # m/s, the trace maximum this model is calibrated for
DEFAULT_COVERAGE_RADIUS = 255.0  # m


class Bounds(NamedTuple):
    """Axis-aligned rectangle in metres."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def area(self) -> float:
        return max(0.0, self.xmax - self.xmin) * max(0.0, self.ymax - self.ymin)


@dataclass(frozen=True)
class VehicleState:
    vehicle_id: str
    time: float
    position: tuple[float, float]
    velocity: tuple[float, float]

    def speed(self) -> float:
        return math.hypot(*self.velocity)


@dataclass
class Trace:
    """States sorted by (time, vehicle_id); duration is the largest time seen."""

    duration: float
    states: list[VehicleState]
    bounds: Bounds

    def vehicle_ids(self) -> list[str]:
        return sorted({s.vehicle_id for s in self.states})

    def states_by_vehicle(self) -> dict[str, list[VehicleState]]:
        out: dict[str, list[VehicleState]] = {}
        for s in self.states:
            out.setdefault(s.vehicle_id, []).append(s)
        return out


@dataclass(frozen=True)
class RsuSite:
    rsu_id: str
    position: tuple[float, float]
    coverage_radius: float = DEFAULT_COVERAGE_RADIUS

    def __post_init__(self):
        if self.coverage_radius <= 0:
            raise ConfigurationError(f"RSU {self.rsu_id}: coverage_radius must be > 0")


def parse_trace(
    stream: Iterable[str],
    fmt: str = "csv",
    bounds: Bounds | None = None,
    max_speed: float | None = None,
) -> Trace:
    """Parse a trace from a character stream.

    ``bounds``, when given, is the declared region: rows outside it raise
    :class:`BoundsError`.  When omitted, the bounding box of the parsed
    states is used.  ``max_speed`` optionally rejects rows whose velocity
    magnitude exceeds it.
    """
    if fmt != "csv":
        raise ConfigurationError(f"unknown trace format: {fmt!r}")
    states: list[VehicleState] = []
    seen: set[tuple[str, float]] = set()
    lines = iter(stream)
    header = next(lines, None)
    if header is None or header.strip() != TRACE_HEADER:
        raise TraceParseError(f"expected header {TRACE_HEADER!r}", line_no=1)
    for line_no, raw in enumerate(lines, start=2):
        row = raw.strip()
        if not row:
            continue
        parts = row.split(",")
        if len(parts) != 6:
            raise TraceParseError(f"expected 6 fields, got {len(parts)}", line_no)
        try:
            t = float(parts[0])
            vid = parts[1]
            x, y, vx, vy = (float(p) for p in parts[2:])
        except ValueError as exc:
            raise TraceParseError(str(exc), line_no) from None
        if not vid:
            raise TraceParseError("empty vehicle_id", line_no)
        if t < 0:
            raise TraceParseError(f"negative time {t}", line_no)
        key = (vid, t)
        if key in seen:
            raise DuplicateStateError(f"duplicate state for {vid} at t={t}", line_no)
        seen.add(key)
        if bounds is not None and not bounds.contains(x, y):
            raise BoundsError(f"position ({x}, {y}) outside bounds {tuple(bounds)}", line_no)
        if max_speed is not None and math.hypot(vx, vy) > max_speed:
            raise TraceParseError(f"speed {math.hypot(vx, vy):.3f} exceeds {max_speed}", line_no)
        states.append(VehicleState(vid, t, (x, y), (vx, vy)))
    states.sort(key=lambda s: (s.time, s.vehicle_id))
    duration = states[-1].time if states else 0.0
    if bounds is None:
        if states:
            xs = [s.position[0] for s in states]
            ys = [s.position[1] for s in states]
            bounds = Bounds(min(xs), min(ys), max(xs), max(ys))
        else:
            bounds = Bounds(0.0, 0.0, 0.0, 0.0)
    return Trace(duration=duration, states=states, bounds=bounds)


def emit_trace(trace: Trace, stream: TextIO) -> None:
    """Write a trace in the CSV schema; floats keep full round-trip precision."""
    stream.write(TRACE_HEADER + "\n")
    for s in trace.states:
        stream.write(
            f"{s.time!r},{s.vehicle_id},{s.position[0]!r},{s.position[1]!r},"
            f"{s.velocity[0]!r},{s.velocity[1]!r}\n"
        )


def synth_trace(
    seed: int,
    n_vehicles: int,
    duration: float,
    bounds: Bounds = Bounds(0.0, 0.0, 1500.0, 1000.0),
    speed_range: tuple[float, float] = (5.0, 15.0),
) -> Trace:
    """Generate a deterministic random-waypoint-style trace.

    Vehicles follow piecewise-constant-velocity segments (straight lines with
    occasional turns) and reflect off the region boundary, one state per
    vehicle per second at t = 0..duration inclusive.
    """
    if n_vehicles < 0 or duration < 0:
        raise ConfigurationError("n_vehicles and duration must be non-negative")
    if bounds.area() <= 0:
        raise ConfigurationError(f"degenerate bounds {tuple(bounds)}")
    lo, hi = speed_range
    if not (0 < lo <= hi):
        raise ConfigurationError(f"bad speed_range {speed_range}")
    rng = np.random.default_rng(seed)
    n_steps = int(math.floor(duration))
    states: list[VehicleState] = []
    for i in range(n_vehicles):
        vid = f"v{i:04d}"
        x = rng.uniform(bounds.xmin, bounds.xmax)
        y = rng.uniform(bounds.ymin, bounds.ymax)
        speed = rng.uniform(lo, hi)
        heading = rng.uniform(0.0, 2.0 * math.pi)
        seg_left = int(rng.integers(5, 16))
        for t in range(n_steps + 1):
            vx = speed * math.cos(heading)
            vy = speed * math.sin(heading)
            states.append(VehicleState(vid, float(t), (x, y), (vx, vy)))
            x, vx = _reflect(x + vx, vx, bounds.xmin, bounds.xmax)
            y, vy = _reflect(y + vy, vy, bounds.ymin, bounds.ymax)
            heading = math.atan2(vy, vx)
            seg_left -= 1
            if seg_left == 0:
                heading += rng.uniform(-math.pi / 2.0, math.pi / 2.0)
                speed = rng.uniform(lo, hi)
                seg_left = int(rng.integers(5, 16))
    states.sort(key=lambda s: (s.time, s.vehicle_id))
    return Trace(duration=float(n_steps) if states else 0.0, states=states, bounds=bounds)


def _reflect(coord: float, vel: float, lo: float, hi: float) -> tuple[float, float]:
    # Mirror the coordinate at the violated boundary and flip the velocity.
    span = hi - lo
    while coord < lo or coord > hi:
        if coord < lo:
            coord = lo + (lo - coord)
        else:
            coord = hi - (coord - hi)
        vel = -vel
        if span <= 0:  # pragma: no cover - guarded by bounds.area() check
            return lo, 0.0
    return coord, vel


def covering_rsu(position: tuple[float, float], rsus: list[RsuSite]) -> str | None:
    """Nearest RSU whose disc covers the position; ties go to the smallest id."""
    best: tuple[float, str] | None = None
    px, py = position
    for site in rsus:
        d = math.hypot(px - site.position[0], py - site.position[1])
        if d <= site.coverage_radius:
            key = (d, site.rsu_id)
            if best is None or key < best:
                best = key
    return best[1] if best else None


def load_rsus(stream: Iterable[str]) -> list[RsuSite]:
    """Parse RSU sites from the ``rsu_id,x_m,y_m,radius_m`` CSV schema."""
    sites: list[RsuSite] = []
    lines = iter(stream)
    header = next(lines, None)
    if header is None or header.strip() != RSU_HEADER:
        raise TraceParseError(f"expected header {RSU_HEADER!r}", line_no=1)
    seen: set[str] = set()
    for line_no, raw in enumerate(lines, start=2):
        row = raw.strip()
        if not row:
            continue
        parts = row.split(",")
        if len(parts) != 4:
            raise TraceParseError(f"expected 4 fields, got {len(parts)}", line_no)
        rsu_id = parts[0]
        if not rsu_id:
            raise TraceParseError("empty rsu_id", line_no)
        if rsu_id in seen:
            raise DuplicateStateError(f"duplicate rsu_id {rsu_id}", line_no)
        seen.add(rsu_id)
        try:
            x, y, r = (float(p) for p in parts[1:])
        except ValueError as exc:
            raise TraceParseError(str(exc), line_no) from None
        sites.append(RsuSite(rsu_id, (x, y), r))
    return sites


def emit_rsus(rsus: list[RsuSite], stream: TextIO) -> None:
    stream.write(RSU_HEADER + "\n")
    for site in rsus:
        stream.write(
            f"{site.rsu_id},{site.position[0]!r},{site.position[1]!r},{site.coverage_radius!r}\n"
        )
