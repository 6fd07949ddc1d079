"""Deterministic discrete-event engine for the beacon lifecycle.

Each covered beacon travels: vehicle --air--> RSU switch --backhaul--> detector
(FIFO service, cost-proportional service time) --backhaul--> RSU --air-->
vehicle.  The engine records, per beacon, the five delay components

    d_air_up, d_up, d_proc, d_down, d_air_down   (d_proc includes queue wait)

whose exact sum is the vehicle-perceived total, classifies the outcome
against the reply deadline, and accumulates CPU-cost units per entity as an
energy proxy.  Runs are fully reproducible: all randomness flows from the
scenario seed through named sub-streams, and events are dispatched in strict
(fire_time, sequence) order.
"""

import bisect
import hashlib
import heapq
import itertools
import zlib
from collections import deque
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .backhaul import (
    ControllerModel,
    Packet,
    RuleTable,
    SwitchCaps,
    TopologyGraph,
    build_topology,
    forward,
    shortest_path,
)
from .collision import Beacon, BeaconWindow, DetectorParams, detect, processing_cost
from .errors import ConfigurationError
from .mobility import RsuSite, Trace, covering_rsu
from .radio import DelayFile, WaveParams, access_delay, injected_delay

RECORDS_HEADER = (
    "vehicle_id,seq,rsu_id,detector_id,d_air_up_s,d_up_s,d_proc_s,d_down_s,"
    "d_air_down_s,total_s,outcome,alerts"
)

OUTCOMES = ("success", "late", "lost", "uncovered")


def derive_seed(seed: int, label: str) -> int:
    """Stable 64-bit sub-stream seed for a named component."""
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def beacon_phase(vehicle_id: str, interval: float, sync_interval: float, spread: float) -> float:
    """Deterministic per-vehicle emission offset within the beacon interval.

    The offset lands each vehicle in one of the interval's channel-sync slots
    (spreading detector load across the second) at a point early enough in
    the control-channel window that the beacon, and typically its reply, fit
    without deferral.
    """
    h = zlib.crc32(vehicle_id.encode("utf-8"))
    slots = max(1, int(round(interval / sync_interval)))
    slot = h % slots
    frac = ((h >> 8) % 100003) / 100003.0
    return slot * sync_interval + frac * spread


@dataclass
class Scenario:
    """Everything one simulation run needs; see the CLI for file-based setup."""

    trace: Trace
    rsus: list[RsuSite]
    placement: tuple[str, ...]
    topology_kind: str = "star"
    n_core: int = 4
    controller: ControllerModel = field(default_factory=ControllerModel)
    controller_label: str = "fast"
    wave: WaveParams = field(default_factory=WaveParams)
    detector: DetectorParams = field(default_factory=DetectorParams)
    radio_mode: str = "model"  # "model" | "inject"
    delay_file: DelayFile | None = None
    delay_fallback: bool = False
    deadline: float = 0.020
    seed: int = 0
    beacon_interval: float = 1.0
    phase_spread: float = 0.044
    air_loss_prob: float = 0.0
    switch_cap_pps: float | None = None
    rsu_cost_per_packet: float = 0.05
    controller_cost_per_detour: float = 1.0
    overhead_cost_per_second: float = 1.0

    def __post_init__(self):
        if self.radio_mode not in ("model", "inject"):
            raise ConfigurationError(f"unknown radio_mode {self.radio_mode!r}")
        if self.radio_mode == "inject" and self.delay_file is None:
            raise ConfigurationError("radio_mode=inject needs a delay_file")
        if not self.placement:
            raise ConfigurationError("placement must name at least one detector switch")
        if self.deadline <= 0 or self.beacon_interval <= 0:
            raise ConfigurationError("deadline and beacon_interval must be > 0")
        if not (0 <= self.phase_spread < self.wave.sync_interval):
            raise ConfigurationError("phase_spread must lie within one sync interval")
        if not (0 <= self.air_loss_prob <= 1):
            raise ConfigurationError("air_loss_prob must be a probability")


@dataclass
class BeaconRecord:
    """Per-beacon outcome and delay decomposition (None = leg never completed)."""

    vehicle_id: str
    seq: int
    rsu_id: str | None
    detector_id: str | None
    d_air_up: float | None
    d_up: float | None
    d_proc: float | None
    d_down: float | None
    d_air_down: float | None
    total: float | None
    outcome: str
    alerts: int = 0


class EnergyAccount:
    """Accumulated CPU-cost units per entity category (and per instance)."""

    CATEGORIES = ("detector", "rsu_host", "controller", "overhead")

    def __init__(self):
        self.totals: dict[str, float] = {c: 0.0 for c in self.CATEGORIES}
        self.detail: dict[tuple[str, str], float] = {}

    def add(self, category: str, amount: float, instance: str | None = None) -> None:
        if category not in self.totals:
            raise ConfigurationError(f"unknown energy category {category!r}")
        if amount < 0:
            raise ConfigurationError("energy amounts must be >= 0")
        self.totals[category] += amount
        if instance is not None:
            key = (category, instance)
            self.detail[key] = self.detail.get(key, 0.0) + amount

    def of_instance(self, category: str, instance: str) -> float:
        return self.detail.get((category, instance), 0.0)


def classify(total: float | None, replied: bool, deadline: float) -> str:
    """success if replied within the deadline, late if replied after, else lost."""
    if not replied:
        return "lost"
    if total is None or total < 0:
        raise ConfigurationError("replied beacons need a non-negative total")
    return "success" if total <= deadline else "late"


@dataclass
class RunResult:
    records: list[BeaconRecord]
    energy: EnergyAccount
    summary: dict


class _Flight:
    """Mutable per-beacon bookkeeping while its packets are in the system."""

    __slots__ = (
        "vehicle_id", "seq", "t_gen", "position", "velocity", "rsu_id", "det_node",
        "path", "d_air_up", "d_up", "d_proc", "d_down", "d_air_down",
        "outcome", "alerts", "arrived",
    )

    def __init__(self, vehicle_id: str, seq: int, t_gen: float, position, velocity):
        self.vehicle_id = vehicle_id
        self.seq = seq
        self.t_gen = t_gen
        self.position = position
        self.velocity = velocity
        self.rsu_id = None
        self.det_node = None
        self.path = None
        self.d_air_up = None
        self.d_up = None
        self.d_proc = None
        self.d_down = None
        self.d_air_down = None
        self.outcome = None
        self.alerts = 0
        self.arrived = None


class _DetectorState:
    __slots__ = ("node", "host", "window", "queue", "busy", "beacons", "watched", "window_sum")

    def __init__(self, node: str, timeout: float):
        self.node = node
        self.host = f"det@{node}"
        self.window = BeaconWindow(timeout=timeout)
        self.queue: deque[_Flight] = deque()
        self.busy = False
        self.beacons = 0
        self.watched: set[str] = set()
        self.window_sum = 0


def assign_detectors(
    graph: TopologyGraph, rsus: list[RsuSite], placement: tuple[str, ...]
) -> dict[str, tuple[str, list[str]]]:
    """Static RSU -> detector assignment with the uplink path.

    Each RSU is served by the detector with the smallest shortest-path
    latency; latency ties break by geographic distance to the detector's
    switch, then by detector node id (pure id ties would pile whole regions
    onto one detector on symmetric topologies).
    """
    out: dict[str, tuple[str, list[str]]] = {}
    for site in rsus:
        best = None
        for det in sorted(placement):
            path = shortest_path(graph, site.rsu_id, det)
            latency = sum(
                graph.link(path[i], path[i + 1]).latency for i in range(len(path) - 1)
            )
            dx = site.position[0] - graph.nodes[det].position[0]
            dy = site.position[1] - graph.nodes[det].position[1]
            key = (latency, dx * dx + dy * dy, det)
            if best is None or key < best[0]:
                best = (key, det, path)
        assert best is not None
        out[site.rsu_id] = (best[1], best[2])
    return out


def run(scenario: Scenario) -> RunResult:
    """Simulate one scenario end to end; deterministic for a fixed seed."""
    graph = build_topology(scenario.rsus, scenario.n_core, scenario.topology_kind)
    for det in scenario.placement:
        if det not in graph.nodes:
            raise ConfigurationError(f"placement node {det!r} not in topology")
    assignment = assign_detectors(graph, scenario.rsus, scenario.placement)
    detectors = {
        node: _DetectorState(node, scenario.detector.timeout) for node in scenario.placement
    }
    tables = RuleTable()
    caps = SwitchCaps(scenario.switch_cap_pps) if scenario.switch_cap_pps is not None else None
    rng_radio = np.random.default_rng(derive_seed(scenario.seed, "radio"))
    rng_ctrl = np.random.default_rng(derive_seed(scenario.seed, "controller"))
    energy = EnergyAccount()
    pending_alerts: dict[str, set[str]] = {node: set() for node in scenario.placement}
    t_end = scenario.trace.duration
    payload = scenario.wave.payload_bits

    # Per-vehicle emission schedule: one beacon per interval from first to last
    # trace state, offset by the hashed per-vehicle phase; the beacon carries
    # the state nearest in time.
    counter = itertools.count()
    heap: list[tuple[float, int, str, _Flight]] = []
    flights: list[_Flight] = []
    for vid, states in sorted(scenario.trace.states_by_vehicle().items()):
        times = [s.time for s in states]
        phase = beacon_phase(
            vid, scenario.beacon_interval, scenario.wave.sync_interval, scenario.phase_spread
        )
        t = states[0].time + phase
        seq = 0
        while t <= times[-1]:
            idx = _nearest_index(times, t)
            flight = _Flight(vid, seq, t, states[idx].position, states[idx].velocity)
            flights.append(flight)
            heapq.heappush(heap, (t, next(counter), "gen", flight))
            t += scenario.beacon_interval
            seq += 1

    detours_total = 0

    def uplink_delay(flight: _Flight) -> float:
        if scenario.radio_mode == "inject":
            return injected_delay(
                scenario.delay_file, flight.vehicle_id, flight.seq,
                strict=not scenario.delay_fallback,
                t_gen=flight.t_gen, params=scenario.wave, rng=rng_radio,
            )
        return access_delay(flight.t_gen, scenario.wave, rng_radio)

    def downlink_delay(flight: _Flight, t_at_rsu: float) -> float:
        if scenario.radio_mode == "inject":
            return injected_delay(
                scenario.delay_file, flight.vehicle_id, flight.seq,
                strict=not scenario.delay_fallback,
                t_gen=t_at_rsu, params=scenario.wave, rng=rng_radio,
            )
        return access_delay(t_at_rsu, scenario.wave, rng_radio)

    def start_service(det: _DetectorState, flight: _Flight, t_now: float) -> None:
        det.busy = True
        det.window.prune(t_now)
        w = len(det.window)
        cost = processing_cost(w, scenario.detector)
        energy.add("detector", cost, instance=det.node)
        det.beacons += 1
        det.watched.add(flight.vehicle_id)
        det.window_sum += w
        beacon = Beacon(flight.vehicle_id, flight.position, flight.velocity, flight.t_gen)
        preds = detect(beacon, det.window, scenario.detector, t_now)
        alerts = len(preds)
        pend = pending_alerts[det.node]
        for p in preds:
            pend.add(p.other)
        if flight.vehicle_id in pend:
            pend.discard(flight.vehicle_id)
            alerts += 1
        flight.alerts = alerts
        svc = cost * scenario.detector.cost_to_seconds
        heapq.heappush(heap, (t_now + svc, next(counter), "done", flight))

    while heap and heap[0][0] <= t_end:
        t_now, _, kind, flight = heapq.heappop(heap)

        if kind == "gen":
            rsu_id = covering_rsu(flight.position, scenario.rsus)
            if rsu_id is None:
                flight.outcome = "uncovered"
                continue
            flight.rsu_id = rsu_id
            if scenario.air_loss_prob > 0 and rng_radio.uniform() < scenario.air_loss_prob:
                flight.outcome = "lost"
                continue
            d_air = uplink_delay(flight)
            heapq.heappush(heap, (t_now + d_air, next(counter), "ingress", flight))

        elif kind == "ingress":
            flight.d_air_up = t_now - flight.t_gen
            energy.add("rsu_host", scenario.rsu_cost_per_packet, instance=flight.rsu_id)
            det_node, path = assignment[flight.rsu_id]
            flight.det_node = det_node
            det = detectors[det_node]
            packet = Packet(flight.vehicle_id, det.host, payload)
            res = _forward(
                packet, path, graph, tables, scenario.controller, t_now, rng_ctrl, caps
            )
            detours_total += res.controller_detours
            if res.controller_detours:
                energy.add(
                    "controller",
                    res.controller_detours * scenario.controller_cost_per_detour,
                )
            if res.dropped:
                flight.outcome = "lost"
                continue
            flight.path = res.hops
            heapq.heappush(heap, (res.arrival_time, next(counter), "arrive", flight))

        elif kind == "arrive":
            flight.d_up = t_now - (flight.t_gen + flight.d_air_up)
            flight.arrived = t_now
            det = detectors[flight.det_node]
            if det.busy:
                det.queue.append(flight)
            else:
                start_service(det, flight, t_now)

        elif kind == "done":
            flight.d_proc = t_now - flight.arrived  # queue wait + service time
            det = detectors[flight.det_node]
            packet = Packet(det.host, flight.vehicle_id, payload)
            res = _forward(
                packet, list(reversed(flight.path)), graph, tables,
                scenario.controller, t_now, rng_ctrl, caps,
            )
            detours_total += res.controller_detours
            if res.controller_detours:
                energy.add(
                    "controller",
                    res.controller_detours * scenario.controller_cost_per_detour,
                )
            if res.dropped:
                flight.outcome = "lost"
            else:
                heapq.heappush(heap, (res.arrival_time, next(counter), "reply_rsu", flight))
            if det.queue:
                start_service(det, det.queue.popleft(), t_now)
            else:
                det.busy = False

        elif kind == "reply_rsu":
            flight.d_down = t_now - (flight.arrived + flight.d_proc)
            energy.add("rsu_host", scenario.rsu_cost_per_packet, instance=flight.rsu_id)
            d_air = downlink_delay(flight, t_now)
            heapq.heappush(heap, (t_now + d_air, next(counter), "reply_veh", flight))

        elif kind == "reply_veh":
            flight.d_air_down = t_now - (
                flight.arrived + flight.d_proc + flight.d_down
            )
            total = (
                flight.d_air_up + flight.d_up + flight.d_proc + flight.d_down
                + flight.d_air_down
            )
            flight.outcome = classify(total, True, scenario.deadline)

    energy.add("overhead", scenario.overhead_cost_per_second * t_end)

    records = []
    for flight in sorted(flights, key=lambda f: (f.vehicle_id, f.seq)):
        outcome = flight.outcome if flight.outcome is not None else "lost"
        replied = outcome in ("success", "late")
        total = (
            flight.d_air_up + flight.d_up + flight.d_proc + flight.d_down + flight.d_air_down
            if replied
            else None
        )
        records.append(
            BeaconRecord(
                vehicle_id=flight.vehicle_id,
                seq=flight.seq,
                rsu_id=flight.rsu_id,
                detector_id=flight.det_node,
                d_air_up=flight.d_air_up,
                d_up=flight.d_up,
                d_proc=flight.d_proc,
                d_down=flight.d_down,
                d_air_down=flight.d_air_down,
                total=total,
                outcome=outcome,
                alerts=flight.alerts,
            )
        )

    per_detector = {
        node: {
            "beacons": det.beacons,
            "watched": len(det.watched),
            "cost_units": energy.of_instance("detector", node),
            "mean_window": det.window_sum / det.beacons if det.beacons else 0.0,
        }
        for node, det in sorted(detectors.items())
    }
    summary = summarize(
        records,
        energy,
        scenario=scenario,
        detours=detours_total,
        per_detector=per_detector,
    )
    return RunResult(records=records, energy=energy, summary=summary)


def _forward(packet, path, graph, tables, controller, t_now, rng, caps):
    return forward(
        packet, path[0], path[-1], graph, tables, controller, t_now,
        rng=rng, path=path, caps=caps,
    )


def _nearest_index(times: list[float], t: float) -> int:
    """Index of the time closest to t; earlier wins on exact midpoints."""
    i = bisect.bisect_left(times, t)
    if i == 0:
        return 0
    if i == len(times):
        return len(times) - 1
    return i - 1 if t - times[i - 1] <= times[i] - t else i


DELAY_COMPONENTS = ("air_up", "up", "proc", "down", "air_down", "total")


def summarize(
    records: list[BeaconRecord],
    energy: EnergyAccount,
    scenario: Scenario | None = None,
    detours: int = 0,
    per_detector: dict | None = None,
) -> dict:
    """Aggregate records and energy into the summary document.

    Counts per outcome, per-component delay means and full CDF samples over
    replied beacons, per-detector load figures, per-RSU coverage counts, and
    the energy buckets (controller cost is detours times the per-detour unit,
    accumulated during the run).
    """
    counts = {o: 0 for o in OUTCOMES}
    for r in records:
        counts[r.outcome] += 1
    replied = [r for r in records if r.outcome in ("success", "late")]
    samples = {c: [] for c in DELAY_COMPONENTS}
    for r in replied:
        samples["air_up"].append(r.d_air_up)
        samples["up"].append(r.d_up)
        samples["proc"].append(r.d_proc)
        samples["down"].append(r.d_down)
        samples["air_down"].append(r.d_air_down)
        samples["total"].append(r.total)
    means = {
        c: (sum(v) / len(v) if v else None) for c, v in samples.items()
    }
    if per_detector is None:
        per_detector = {}
        for r in records:
            if r.detector_id is None or r.d_proc is None:
                continue
            slot = per_detector.setdefault(
                r.detector_id, {"beacons": 0, "watched": set(), "cost_units": 0.0}
            )
            slot["beacons"] += 1
            slot["watched"].add(r.vehicle_id)
        for det, slot in per_detector.items():
            slot["watched"] = len(slot["watched"])
            slot["cost_units"] = energy.of_instance("detector", det)
    per_rsu: dict[str, dict[str, int]] = {}
    for r in records:
        if r.rsu_id is None:
            continue
        slot = per_rsu.setdefault(r.rsu_id, {"covered": 0, "success": 0})
        slot["covered"] += 1
        if r.outcome == "success":
            slot["success"] += 1
    summary = {
        "counts": {"generated": len(records), **counts},
        "delay_means_s": means,
        "delay_samples_s": {c: sorted(v) for c, v in samples.items()},
        "per_detector": per_detector,
        "per_rsu": dict(sorted(per_rsu.items())),
        "energy_units": dict(energy.totals),
        "controller_detours": detours,
    }
    if scenario is not None:
        summary["scenario"] = {
            "n_detectors": len(scenario.placement),
            "placement": list(scenario.placement),
            "topology": scenario.topology_kind,
            "controller": scenario.controller_label,
            "seed": scenario.seed,
            "deadline_s": scenario.deadline,
        }
    return summary


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.12f}"


def write_records_csv(records: list[BeaconRecord], stream: TextIO) -> None:
    """Emit the per-beacon records in the documented CSV schema."""
    stream.write(RECORDS_HEADER + "\n")
    for r in records:
        stream.write(
            f"{r.vehicle_id},{r.seq},{r.rsu_id or ''},{r.detector_id or ''},"
            f"{_fmt(r.d_air_up)},{_fmt(r.d_up)},{_fmt(r.d_proc)},{_fmt(r.d_down)},"
            f"{_fmt(r.d_air_down)},{_fmt(r.total)},{r.outcome},{r.alerts}\n"
        )
