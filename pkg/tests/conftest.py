import pytest

from beaconsim.backhaul import ControllerModel
from beaconsim.collision import DetectorParams
from beaconsim.mobility import Bounds, RsuSite, Trace, VehicleState, synth_trace
from beaconsim.radio import WaveParams
from beaconsim.simcore import Scenario


def stationary_trace(vehicle_id="car", position=(10.0, 0.0), duration=10):
    """One vehicle parked near the origin, one state per second."""
    states = [
        VehicleState(vehicle_id, float(t), position, (0.5, 0.0)) for t in range(duration + 1)
    ]
    return Trace(duration=float(duration), states=states, bounds=Bounds(0, -50, 100, 50))


@pytest.fixture
def single_vehicle_scenario():
    """1 vehicle, 1 RSU, detector on the RSU's own switch, no contention."""
    return Scenario(
        trace=stationary_trace(),
        rsus=[RsuSite("rsu00", (0.0, 0.0))],
        placement=("rsu00",),
        topology_kind="star",
        n_core=1,
        wave=WaveParams(max_contention=0.0),
        seed=1,
    )


def small_town_scenario(seed=5, n_vehicles=40, duration=20, placement=("core00",), **kw):
    """A compact synthetic scenario sized for fast unit tests."""
    bounds = Bounds(0, 0, 800, 600)
    trace = synth_trace(seed=seed, n_vehicles=n_vehicles, duration=duration, bounds=bounds)
    rsus = [
        RsuSite(f"rsu{i:02d}", pos)
        for i, pos in enumerate(
            [(150.0, 150.0), (450.0, 150.0), (700.0, 150.0),
             (150.0, 450.0), (450.0, 450.0), (700.0, 450.0)]
        )
    ]
    defaults = dict(
        trace=trace,
        rsus=rsus,
        placement=placement,
        topology_kind="star",
        n_core=2,
        controller=ControllerModel(),
        wave=WaveParams(),
        detector=DetectorParams(),
        seed=seed,
    )
    defaults.update(kw)
    return Scenario(**defaults)
