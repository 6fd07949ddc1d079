#!/usr/bin/env python3
"""Closest-point-of-approach geometry, step by step.

Walks a few hand-picked encounters through the pairwise check, then shows the
windowed detector assembling an alert set from a stream of beacons.
"""

from beaconsim import Beacon, BeaconWindow, DetectorParams, cpa_pair, detect

ENCOUNTERS = [
    ("head-on closure", Beacon("red", (0.0, 0.0), (10.0, 0.0), 0.0),
     Beacon("green", (100.0, 0.0), (-10.0, 0.0), 0.0)),
    ("crossing paths", Beacon("red", (0.0, -60.0), (0.0, 12.0), 0.0),
     Beacon("green", (-55.0, 0.0), (11.0, 0.0), 0.0)),
    ("already receding", Beacon("red", (0.0, 0.0), (10.0, 0.0), 0.0),
     Beacon("green", (-50.0, 0.0), (-10.0, 0.0), 0.0)),
    ("parallel convoy", Beacon("red", (0.0, 0.0), (8.0, 8.0), 0.0),
     Beacon("green", (3.0, -3.0), (8.0, 8.0), 0.0)),
]


def main():
    print("# Pairwise closest point of approach")
    for label, a, b in ENCOUNTERS:
        r = cpa_pair(a, b)
        print(f"\n{label}:")
        print(f"  a at {a.x0} moving {a.v}, b at {b.x0} moving {b.v}")
        print(f"  -> {r.kind.value}: closest approach {r.d_star:.2f} m at t* = {r.t_star:.2f} s")

    print("\n# Windowed detection")
    params = DetectorParams(d_min=5.0)
    window = BeaconWindow(timeout=1.0)
    stream = [
        Beacon("alpha", (0.0, 0.0), (10.0, 0.0), 10.0),
        Beacon("bravo", (200.0, 5.0), (-9.0, 0.0), 10.2),   # closes to < 5 m with alpha
        Beacon("tango", (0.0, 300.0), (0.0, -1.0), 10.4),   # far away, slow
        Beacon("alpha", (4.0, 0.0), (10.0, 0.0), 10.9),     # replaces alpha's older beacon
    ]
    for beacon in stream:
        alerts = detect(beacon, window, params, t_now=beacon.t_gen)
        names = ", ".join(sorted(p.other for p in alerts)) or "none"
        print(f"  t={beacon.t_gen:4.1f}s  beacon from {beacon.pseudonym:5s} "
              f"window={len(window):d}  collision partners: {names}")
    print("\nThe second alpha beacon replaced the first (one entry per pseudonym),")
    print(f"and the threshold was d_min = {params.d_min} m.")


if __name__ == "__main__":
    main()
