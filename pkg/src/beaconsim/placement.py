"""Greedy RSU siting and detector-placement refinement.

RSU siting is classic greedy maximum coverage: repeatedly place an RSU at the
candidate covering the most not-yet-covered vehicles.

Detector placement starts from a random configuration and iterates
simulate -> score -> move: each switch is scored by the mean success fraction
of its neighbouring RSUs, a detector moves from the best-scoring holder to the
worst-scoring non-holder, and a move that lands on an already-tested
configuration is replaced by a random mutation (a uniformly chosen detector
moved to a uniformly chosen free switch).
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .backhaul import TopologyGraph
from .errors import ConfigurationError, SimulationError
from .mobility import RsuSite, Trace

MUTATION_ATTEMPTS = 64


class PlacementExhausted(SimulationError):
    """Every configuration of the requested size has been evaluated."""


@dataclass(frozen=True)
class PlacementConfig:
    """A set of switch ids hosting collision detectors (canonical: sorted)."""

    detector_nodes: tuple[str, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.detector_nodes))
        if len(set(ordered)) != len(ordered):
            raise ConfigurationError(f"duplicate detector nodes in {self.detector_nodes}")
        object.__setattr__(self, "detector_nodes", ordered)

    @property
    def n(self) -> int:
        return len(self.detector_nodes)

    def key(self) -> tuple[str, ...]:
        return self.detector_nodes


@dataclass
class RefinementState:
    current: PlacementConfig
    visited: set[tuple[str, ...]] = field(default_factory=set)
    iteration: int = 0
    best: tuple[PlacementConfig, float] | None = None
    mutated: bool = False  # whether `current` came from the random-mutation fallback


def place_rsus(
    trace: Trace,
    candidates: Sequence[tuple[float, float]],
    n_rsus: int,
    radius: float,
) -> list[RsuSite]:
    """Greedy max-coverage RSU siting over the candidate positions.

    A candidate's score is the number of distinct vehicles with at least one
    trace state within ``radius`` of it, not yet covered by already-placed
    RSUs.  Score ties break toward the smallest candidate index.
    """
    if n_rsus > len(candidates):
        raise ConfigurationError(f"n_rsus={n_rsus} exceeds {len(candidates)} candidates")
    if radius <= 0:
        raise ConfigurationError("radius must be > 0")
    vehicle_ids = trace.vehicle_ids()
    vid_index = {v: i for i, v in enumerate(vehicle_ids)}
    if trace.states:
        pts = np.array([s.position for s in trace.states])
        vidx = np.array([vid_index[s.vehicle_id] for s in trace.states])
    else:
        pts = np.zeros((0, 2))
        vidx = np.zeros(0, dtype=int)
    reach: list[set[int]] = []
    r2 = radius * radius
    for cx, cy in candidates:
        if len(pts):
            d2 = (pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2
            reach.append(set(vidx[d2 <= r2].tolist()))
        else:
            reach.append(set())
    covered: set[int] = set()
    chosen: list[RsuSite] = []
    for k in range(n_rsus):
        scores = [len(r - covered) for r in reach]
        best_idx = max(range(len(candidates)), key=lambda i: (scores[i], -i))
        covered |= reach[best_idx]
        cx, cy = candidates[best_idx]
        chosen.append(RsuSite(f"rsu{k:02d}", (float(cx), float(cy))))
    return chosen


def success_fractions(records: Iterable, rsu_ids: Iterable[str] | None = None) -> dict[str, float]:
    """Per-RSU fraction of covered beacons answered within the deadline.

    RSUs with zero covered beacons map to 1.0 (absence of traffic is not
    failure), which requires passing the full ``rsu_ids`` list.
    """
    covered: dict[str, int] = {}
    succeeded: dict[str, int] = {}
    for rec in records:
        if rec.rsu_id is None or rec.outcome == "uncovered":
            continue
        covered[rec.rsu_id] = covered.get(rec.rsu_id, 0) + 1
        if rec.outcome == "success":
            succeeded[rec.rsu_id] = succeeded.get(rec.rsu_id, 0) + 1
    out = {rsu: succeeded.get(rsu, 0) / n for rsu, n in covered.items()}
    if rsu_ids is not None:
        for rsu in rsu_ids:
            out.setdefault(rsu, 1.0)
    return out


def switch_scores(topology: TopologyGraph, fractions: dict[str, float]) -> dict[str, float]:
    """Mean success fraction over each switch's neighbouring RSUs.

    The neighbourhood is the RSU switches adjacent in the graph, plus the
    switch itself when it is an RSU switch; switches with no RSU neighbours
    score 1.0 so they neither attract nor shed detectors.
    """
    scores: dict[str, float] = {}
    for node_id, node in topology.nodes.items():
        hood = [n for n in topology.neighbors(node_id) if topology.nodes[n].kind == "rsu"]
        if node.kind == "rsu":
            hood.append(node_id)
        if hood:
            scores[node_id] = sum(fractions.get(r, 1.0) for r in hood) / len(hood)
        else:
            scores[node_id] = 1.0
    return scores


def refine_step(
    state: RefinementState,
    topology: TopologyGraph,
    fractions: dict[str, float],
    rng: np.random.Generator,
    objective: float | None = None,
    invert: bool = False,
) -> RefinementState:
    """One move of the refinement loop.

    ``fractions`` (and ``objective``, the overall success fraction) must come
    from an evaluation of ``state.current``.  The greedy move takes a detector
    from the best-scoring holder to the worst-scoring non-holder (``invert``
    swaps that direction); a move reproducing a visited configuration is
    replaced by random mutation, retried up to MUTATION_ATTEMPTS times.
    Raises :class:`PlacementExhausted` when no unvisited configuration of this
    size remains reachable.
    """
    nodes = sorted(topology.nodes)
    n = state.current.n
    if objective is None:
        objective = _overall(fractions)
    best = state.best
    if best is None or objective > best[1]:
        best = (state.current, objective)

    total = math.comb(len(nodes), n)
    if len(state.visited) >= total:
        raise PlacementExhausted(f"all {total} configurations of size {n} visited")

    scores = switch_scores(topology, fractions)
    holders = list(state.current.detector_nodes)
    free = [x for x in nodes if x not in state.current.detector_nodes]
    if not free:
        raise PlacementExhausted("no free switch to move a detector to")
    if invert:
        source = min(holders, key=lambda x: (scores[x], x))
        target = max(free, key=lambda x: (scores[x], _NegStr(x)))
    else:
        source = max(holders, key=lambda x: (scores[x], _NegStr(x)))
        target = min(free, key=lambda x: (scores[x], x))
    proposed = _moved(state.current, source, target)
    mutated = False
    if proposed.key() in state.visited:
        mutated = True
        for _ in range(MUTATION_ATTEMPTS):
            src = holders[int(rng.integers(len(holders)))]
            tgt = free[int(rng.integers(len(free)))]
            candidate = _moved(state.current, src, tgt)
            if candidate.key() not in state.visited:
                proposed = candidate
                break
        else:
            raise PlacementExhausted("mutation retries exhausted")
    visited = set(state.visited)
    visited.add(proposed.key())
    return RefinementState(
        current=proposed,
        visited=visited,
        iteration=state.iteration + 1,
        best=best,
        mutated=mutated,
    )


class _NegStr:
    """Inverts string ordering so max() ties break toward the smallest id."""

    __slots__ = ("s",)

    def __init__(self, s: str):
        self.s = s

    def __lt__(self, other: "_NegStr") -> bool:
        return self.s > other.s


def _moved(config: PlacementConfig, source: str, target: str) -> PlacementConfig:
    nodes = [x for x in config.detector_nodes if x != source] + [target]
    return PlacementConfig(tuple(nodes))


def _overall(fractions: dict[str, float]) -> float:
    return sum(fractions.values()) / len(fractions) if fractions else 1.0


@dataclass
class RefineResult:
    best_config: PlacementConfig
    best_objective: float
    history: list[tuple[int, PlacementConfig, float, bool]]  # iteration, config, objective, mutated


def refine(
    topology: TopologyGraph,
    n: int,
    evaluate: Callable[[PlacementConfig], tuple[dict[str, float], float]],
    max_iters: int,
    seed: int,
    invert: bool = False,
) -> RefineResult:
    """Run the simulate -> score -> move loop from a seeded random start.

    ``evaluate`` maps a configuration to (per-RSU success fractions, overall
    success fraction); the loop performs at most ``max_iters`` evaluations and
    returns the best configuration ever seen plus the per-iteration objective
    series.  Deterministic for a fixed seed.
    """
    if max_iters < 1:
        raise ConfigurationError("max_iters must be >= 1")
    nodes = sorted(topology.nodes)
    if not (0 < n <= len(nodes)):
        raise ConfigurationError(f"cannot place {n} detectors on {len(nodes)} switches")
    rng = np.random.default_rng(seed)
    start = PlacementConfig(tuple(rng.choice(nodes, size=n, replace=False).tolist()))
    state = RefinementState(current=start, visited={start.key()})
    history: list[tuple[int, PlacementConfig, float, bool]] = []
    for it in range(max_iters):
        fractions, objective = evaluate(state.current)
        history.append((it, state.current, objective, state.mutated))
        try:
            state = refine_step(state, topology, fractions, rng, objective=objective, invert=invert)
        except PlacementExhausted:
            best = state.best
            if best is None or objective > best[1]:
                best = (history[-1][1], objective)
            return RefineResult(best[0], best[1], history)
    best = state.best
    assert best is not None
    return RefineResult(best[0], best[1], history)
