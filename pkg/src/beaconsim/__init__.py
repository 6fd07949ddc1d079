"""Discrete-event simulation of vehicular collision warning over an SDN backhaul."""

from .backhaul import (
    ControllerModel,
    FlowRule,
    ForwardResult,
    Link,
    Node,
    Packet,
    RuleTable,
    SwitchCaps,
    TopologyGraph,
    build_topology,
    forward,
    shortest_path,
)
from .collision import (
    Beacon,
    BeaconWindow,
    CollisionPrediction,
    CpaKind,
    CpaResult,
    DetectorParams,
    cpa_pair,
    detect,
    processing_cost,
)
from .errors import (
    BoundsError,
    ConfigurationError,
    DomainError,
    DuplicateStateError,
    MissingDelayError,
    RoutingError,
    SimulationError,
    TraceParseError,
)
from .mobility import (
    Bounds,
    RsuSite,
    Trace,
    VehicleState,
    covering_rsu,
    emit_rsus,
    emit_trace,
    load_rsus,
    parse_trace,
    synth_trace,
)
from .placement import (
    PlacementConfig,
    PlacementExhausted,
    RefinementState,
    RefineResult,
    place_rsus,
    refine,
    refine_step,
    success_fractions,
    switch_scores,
)
from .radio import DelayFile, WaveParams, access_delay, injected_delay, load_delay_file
from .simcore import (
    BeaconRecord,
    EnergyAccount,
    RunResult,
    Scenario,
    classify,
    derive_seed,
    run,
    summarize,
    write_records_csv,
)

__version__ = "0.1.0"
