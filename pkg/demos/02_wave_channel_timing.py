#!/usr/bin/env python3
"""Air-delay profile of the control/service channel split.

A beacon handed to the radio during the control-channel (CCH) half of the
100 ms sync interval goes out almost immediately; one arriving during the
service channel waits for the next CCH.  The script sweeps the generation
phase, prints the resulting delay staircase, and checks the sampled mean
against the closed form.
"""

import numpy as np

from beaconsim import WaveParams, access_delay


def main():
    params = WaveParams(max_contention=0.0)  # deterministic: no contention jitter
    rng = np.random.default_rng(0)
    print(f"sync interval {params.sync_interval*1e3:.0f} ms, "
          f"CCH {params.cch_duration*1e3:.0f} ms, "
          f"tx time {params.tx_time*1e6:.0f} us\n")
    print("phase in interval -> air delay")
    for phase_ms in (0, 10, 25, 45, 49.9, 50, 60, 75, 90, 99):
        d = access_delay(phase_ms / 1e3, params, rng)
        region = "CCH" if phase_ms / 1e3 + params.tx_time <= params.cch_duration else "deferred"
        print(f"  {phase_ms:6.1f} ms   {d*1e3:7.3f} ms   ({region})")

    sync, cch, tx = params.sync_interval, params.cch_duration, params.tx_time
    closed = tx + (sync - cch + tx) ** 2 / (2.0 * sync)
    samples = [access_delay(float(t), params, rng) for t in rng.uniform(0, sync, 50_000)]
    print(f"\nmean over uniform phases : {np.mean(samples)*1e3:.4f} ms")
    print(f"closed-form expectation  : {closed*1e3:.4f} ms")

    jittery = WaveParams()  # default 2 ms contention bound
    worst = max(access_delay(float(t), jittery, rng) for t in rng.uniform(0, 10, 20_000))
    bound = sync - cch + jittery.tx_time + jittery.max_contention
    print(f"\nwith contention: worst of 20000 samples {worst*1e3:.3f} ms "
          f"(bound {bound*1e3:.3f} ms)")


if __name__ == "__main__":
    main()
