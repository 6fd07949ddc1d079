"""Command-line front end: scenario configuration and the five subcommands.

Subcommands: ``synth`` (emit a trace CSV), ``place-rsus`` (emit an RSU CSV),
``run`` (one simulation -> records CSV + summary JSON + topology JSON),
``refine`` (placement loop -> log CSV + best config JSON), ``report``
(aggregate summary JSONs into a comparison table).

Scenario configs are flat ``key = value`` text files (``#`` comments); every
key can be overridden on the command line with ``-o key=value``.  The key
reference lives in the README.
"""

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backhaul, mobility, placement, radio
from .backhaul import ControllerModel
from .collision import DetectorParams
from .errors import ConfigurationError, SimulationError
from .mobility import Bounds, RsuSite, Trace
from .placement import PlacementConfig, refine, success_fractions
from .radio import WaveParams
from .simcore import Scenario, derive_seed, run, write_records_csv

CONTROLLER_PROFILES = {
    # (service latency s, uniform jitter half-width s)
    "fast": (0.0005, 0.0),
    "heavy": (0.0015, 0.0006),
}


@dataclass
class ScenarioConfig:
    """Flat scenario description; exactly one trace source, one RSU source,
    and one placement mode must be set."""

    trace_file: str | None = None
    synth_vehicles: int | None = None
    synth_duration: float = 60.0
    synth_bounds: str = "0,0,1500,1000"
    synth_speed_min: float = 5.0
    synth_speed_max: float = 15.0
    rsu_file: str | None = None
    n_rsus: int | None = None
    rsu_radius: float = 255.0
    rsu_grid_step: float = 250.0
    topology: str = "star"
    n_core: int = 4
    controller: str = "fast"
    service_latency: float | None = None
    controller_jitter: float | None = None
    rule_idle_timeout: float = 10.0
    placement: str | None = None
    refine_n: int | None = None
    refine_iters: int = 25
    refine_invert: bool = False
    radio_mode: str = "model"
    delay_file: str | None = None
    delay_fallback: bool = False
    sync_interval: float = 0.100
    cch_duration: float = 0.050
    data_rate: float = 6e6
    payload_bits: int = 2400
    max_contention: float = 0.002
    d_min: float = 5.0
    beacon_timeout: float = 1.0
    cost_base: float = 1.0
    cost_per_neighbor: float = 0.1
    cost_to_seconds: float = 6.5e-5
    deadline: float = 0.020
    beacon_interval: float = 1.0
    phase_spread: float = 0.044
    air_loss_prob: float = 0.0
    switch_cap_pps: float | None = None
    rsu_cost_per_packet: float = 0.05
    controller_cost_per_detour: float = 1.0
    overhead_cost_per_second: float = 1.0
    seed: int = 0
    out_dir: str = "out"


_INT_KEYS = {"synth_vehicles", "n_rsus", "n_core", "refine_n", "refine_iters", "payload_bits", "seed"}
_BOOL_KEYS = {"refine_invert", "delay_fallback"}
_STR_KEYS = {
    "trace_file", "synth_bounds", "rsu_file", "topology", "controller", "placement",
    "radio_mode", "delay_file", "out_dir",
}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    if key in _BOOL_KEYS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"{key}: expected a boolean, got {raw!r}")
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def load_config(path: str | Path) -> dict[str, str]:
    """Parse a flat key=value config file; later keys win, # starts a comment."""
    mapping: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        mapping[key] = value
    return mapping


def make_scenario_config(
    mapping: dict[str, str], overrides: list[str] | None = None
) -> ScenarioConfig:
    valid = {f.name for f in dataclasses.fields(ScenarioConfig)}
    merged = dict(mapping)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not key=value")
        key, value = (part.strip() for part in item.split("=", 1))
        merged[key] = value
    cfg = ScenarioConfig()
    for key, raw in merged.items():
        if key not in valid:
            raise ConfigurationError(f"unknown config key {key!r}")
        setattr(cfg, key, _coerce(key, raw))
    _check_sources(cfg)
    return cfg


def _check_sources(cfg: ScenarioConfig) -> None:
    if (cfg.trace_file is None) == (cfg.synth_vehicles is None):
        raise ConfigurationError("set exactly one of trace_file / synth_vehicles")
    if (cfg.rsu_file is None) == (cfg.n_rsus is None):
        raise ConfigurationError("set exactly one of rsu_file / n_rsus")
    if (cfg.placement is None) == (cfg.refine_n is None):
        raise ConfigurationError("set exactly one of placement / refine_n")


def parse_bounds(text: str) -> Bounds:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ConfigurationError(f"bounds must be 'xmin,ymin,xmax,ymax', got {text!r}")
    return Bounds(*(float(p) for p in parts))


def load_trace(cfg: ScenarioConfig) -> Trace:
    if cfg.trace_file is not None:
        with open(cfg.trace_file, encoding="utf-8") as fh:
            return mobility.parse_trace(fh)
    return mobility.synth_trace(
        seed=derive_seed(cfg.seed, "trace"),
        n_vehicles=cfg.synth_vehicles,
        duration=cfg.synth_duration,
        bounds=parse_bounds(cfg.synth_bounds),
        speed_range=(cfg.synth_speed_min, cfg.synth_speed_max),
    )


def grid_candidates(bounds: Bounds, step: float) -> list[tuple[float, float]]:
    """Regular grid of candidate positions with half-step margins."""
    if step <= 0:
        raise ConfigurationError("grid step must be > 0")
    xs = np.arange(bounds.xmin + step / 2.0, bounds.xmax, step)
    ys = np.arange(bounds.ymin + step / 2.0, bounds.ymax, step)
    return [(float(x), float(y)) for y in ys for x in xs]


def load_rsu_sites(cfg: ScenarioConfig, trace: Trace) -> list[RsuSite]:
    if cfg.rsu_file is not None:
        with open(cfg.rsu_file, encoding="utf-8") as fh:
            return mobility.load_rsus(fh)
    candidates = grid_candidates(trace.bounds, cfg.rsu_grid_step)
    return placement.place_rsus(trace, candidates, cfg.n_rsus, cfg.rsu_radius)


def make_controller(cfg: ScenarioConfig) -> ControllerModel:
    if cfg.controller not in CONTROLLER_PROFILES:
        raise ConfigurationError(f"unknown controller profile {cfg.controller!r}")
    latency, jitter = CONTROLLER_PROFILES[cfg.controller]
    if cfg.service_latency is not None:
        latency = cfg.service_latency
    if cfg.controller_jitter is not None:
        jitter = cfg.controller_jitter
    return ControllerModel(
        service_latency=latency, rule_idle_timeout=cfg.rule_idle_timeout, jitter=jitter
    )


def build_scenario(
    cfg: ScenarioConfig,
    placement_nodes: tuple[str, ...] | None = None,
    trace: Trace | None = None,
    rsus: list[RsuSite] | None = None,
) -> Scenario:
    """Assemble a runnable Scenario; ``placement_nodes`` overrides the config.

    ``trace`` and ``rsus`` may be passed pre-loaded to avoid repeated file or
    synthesis work when building many scenario variants.
    """
    if trace is None:
        trace = load_trace(cfg)
    if rsus is None:
        rsus = load_rsu_sites(cfg, trace)
    if placement_nodes is None:
        if cfg.placement is None:
            raise ConfigurationError("this command needs an explicit placement")
        placement_nodes = tuple(p.strip() for p in cfg.placement.split("+") if p.strip())
    delay_file = None
    if cfg.radio_mode == "inject":
        if cfg.delay_file is None:
            raise ConfigurationError("radio_mode=inject needs delay_file")
        with open(cfg.delay_file, encoding="utf-8") as fh:
            delay_file = radio.load_delay_file(fh)
    return Scenario(
        trace=trace,
        rsus=rsus,
        placement=placement_nodes,
        topology_kind=cfg.topology,
        n_core=cfg.n_core,
        controller=make_controller(cfg),
        controller_label=cfg.controller,
        wave=WaveParams(
            sync_interval=cfg.sync_interval,
            cch_duration=cfg.cch_duration,
            data_rate=cfg.data_rate,
            payload_bits=cfg.payload_bits,
            max_contention=cfg.max_contention,
        ),
        detector=DetectorParams(
            d_min=cfg.d_min,
            timeout=cfg.beacon_timeout,
            cost_base=cfg.cost_base,
            cost_per_neighbor=cfg.cost_per_neighbor,
            cost_to_seconds=cfg.cost_to_seconds,
        ),
        radio_mode=cfg.radio_mode,
        delay_file=delay_file,
        delay_fallback=cfg.delay_fallback,
        deadline=cfg.deadline,
        seed=cfg.seed,
        beacon_interval=cfg.beacon_interval,
        phase_spread=cfg.phase_spread,
        air_loss_prob=cfg.air_loss_prob,
        switch_cap_pps=cfg.switch_cap_pps,
        rsu_cost_per_packet=cfg.rsu_cost_per_packet,
        controller_cost_per_detour=cfg.controller_cost_per_detour,
        overhead_cost_per_second=cfg.overhead_cost_per_second,
    )


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def cmd_synth(args: argparse.Namespace) -> int:
    trace = mobility.synth_trace(
        seed=args.seed,
        n_vehicles=args.vehicles,
        duration=args.duration,
        bounds=parse_bounds(args.bounds),
        speed_range=(args.speed_min, args.speed_max),
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        mobility.emit_trace(trace, fh)
    print(f"wrote {len(trace.states)} states for {args.vehicles} vehicles to {out}")
    return 0


def cmd_place_rsus(args: argparse.Namespace) -> int:
    with open(args.trace, encoding="utf-8") as fh:
        trace = mobility.parse_trace(fh)
    candidates = grid_candidates(trace.bounds, args.grid_step)
    sites = placement.place_rsus(trace, candidates, args.n, args.radius)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        mobility.emit_rsus(sites, fh)
    print(f"placed {len(sites)} RSUs (radius {args.radius} m) -> {out}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = make_scenario_config(load_config(args.config), args.override)
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    scenario = build_scenario(cfg)
    result = run(scenario)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "records.csv").open("w", encoding="utf-8") as fh:
        write_records_csv(result.records, fh)
    _write_json(result.summary, out_dir / "summary.json")
    graph = backhaul.build_topology(scenario.rsus, scenario.n_core, scenario.topology_kind)
    _write_json(graph.to_json_dict(), out_dir / "topology.json")
    counts = result.summary["counts"]
    print(
        f"run complete: generated={counts['generated']} success={counts['success']} "
        f"late={counts['late']} lost={counts['lost']} uncovered={counts['uncovered']} "
        f"-> {out_dir}"
    )
    return 0


def cmd_refine(args: argparse.Namespace) -> int:
    cfg = make_scenario_config(load_config(args.config), args.override)
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    if cfg.refine_n is None:
        raise ConfigurationError("refine needs refine_n")
    trace = load_trace(cfg)
    rsus = load_rsu_sites(cfg, trace)
    graph = backhaul.build_topology(rsus, cfg.n_core, cfg.topology)
    rsu_ids = [r.rsu_id for r in rsus]

    def evaluate(config: PlacementConfig) -> tuple[dict[str, float], float]:
        scenario = build_scenario(
            cfg, placement_nodes=config.detector_nodes, trace=trace, rsus=rsus
        )
        result = run(scenario)
        fractions = success_fractions(result.records, rsu_ids)
        counts = result.summary["counts"]
        covered = counts["generated"] - counts["uncovered"]
        objective = counts["success"] / covered if covered else 1.0
        return fractions, objective

    outcome = refine(
        graph,
        cfg.refine_n,
        evaluate,
        max_iters=cfg.refine_iters,
        seed=derive_seed(cfg.seed, "refine"),
        invert=cfg.refine_invert,
    )
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "refine_log.csv").open("w", encoding="utf-8") as fh:
        fh.write("iteration,config,objective,mutated\n")
        for it, config, objective, mutated in outcome.history:
            fh.write(
                f"{it},{'+'.join(config.detector_nodes)},{objective!r},{int(mutated)}\n"
            )
    _write_json(
        {
            "detector_nodes": list(outcome.best_config.detector_nodes),
            "objective": outcome.best_objective,
            "iterations": len(outcome.history),
        },
        out_dir / "best_config.json",
    )
    print(
        f"refine n={cfg.refine_n}: best objective {outcome.best_objective:.4f} at "
        f"{'+'.join(outcome.best_config.detector_nodes)} "
        f"after {len(outcome.history)} evaluations -> {out_dir}"
    )
    return 0


REPORT_COLUMNS = (
    "n_detectors", "topology", "controller", "generated", "success", "late",
    "lost", "uncovered", "mean_total_s", "mean_up_s", "mean_down_s",
)


def cmd_report(args: argparse.Namespace) -> int:
    rows = []
    totals = {k: 0 for k in ("generated", "success", "late", "lost", "uncovered")}
    for path in args.summaries:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        scn = doc.get("scenario", {})
        counts = doc["counts"]
        means = doc["delay_means_s"]
        rows.append(
            {
                "n_detectors": scn.get("n_detectors", ""),
                "topology": scn.get("topology", ""),
                "controller": scn.get("controller", ""),
                **{k: counts[k] for k in totals},
                "mean_total_s": means.get("total"),
                "mean_up_s": means.get("up"),
                "mean_down_s": means.get("down"),
            }
        )
        for k in totals:
            totals[k] += counts[k]
    rows.sort(key=lambda r: (str(r["n_detectors"]), r["topology"], r["controller"]))

    def fmt(value) -> str:
        if value is None or value == "":
            return ""
        if isinstance(value, float):
            return f"{value:.9f}"
        return str(value)

    lines = [",".join(REPORT_COLUMNS)]
    for row in rows:
        lines.append(",".join(fmt(row[c]) for c in REPORT_COLUMNS))
    total_row = {c: "" for c in REPORT_COLUMNS}
    total_row.update({"n_detectors": "TOTAL", **totals})
    lines.append(",".join(fmt(total_row[c]) for c in REPORT_COLUMNS))
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        print(f"wrote {len(rows)} rows -> {out}")
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beaconsim",
        description="Discrete-event simulator for vehicular collision warning over an SDN backhaul",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic mobility trace CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vehicles", type=int, required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--bounds", default="0,0,1500,1000")
    p.add_argument("--speed-min", type=float, default=5.0)
    p.add_argument("--speed-max", type=float, default=15.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("place-rsus", help="greedy RSU placement over a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--radius", type=float, default=255.0)
    p.add_argument("--grid-step", type=float, default=250.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_place_rsus)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("refine", help="greedy detector-placement refinement loop")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("report", help="aggregate summary JSONs into a comparison table")
    p.add_argument("summaries", nargs="+")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(main())
