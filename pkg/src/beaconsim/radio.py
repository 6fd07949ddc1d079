"""Vehicle-to-RSU air delay: built-in WAVE channel timing or injected delays.

The built-in model follows the IEEE 1609.4 channel split: each sync interval
(default 100 ms) opens with a control-channel (CCH) window (default 50 ms) in
which beacons may transmit.  A beacon that fits in the remaining CCH time is
sent immediately, plus a bounded uniform contention jitter; one that does not
fit waits for the start of the next CCH and goes out head-of-line there (no
jitter on the deferred branch, which keeps the worst case within
``sync_interval - cch_duration + tx_time + max_contention`` whenever
``tx_time <= max_contention``).
"""

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigurationError, MissingDelayError

DELAY_HEADER = "vehicle_id,seq,delay_s"


@dataclass(frozen=True)
class WaveParams:
    sync_interval: float = 0.100
    cch_duration: float = 0.050
    data_rate: float = 6_000_000.0
    payload_bits: int = 2_400
    max_contention: float = 0.002

    def __post_init__(self):
        if not (0 < self.cch_duration <= self.sync_interval):
            raise ConfigurationError("need 0 < cch_duration <= sync_interval")
        if self.data_rate <= 0 or self.payload_bits <= 0:
            raise ConfigurationError("data_rate and payload_bits must be > 0")
        if self.tx_time >= self.cch_duration:
            raise ConfigurationError("a beacon must fit inside one CCH interval")
        if self.max_contention < 0:
            raise ConfigurationError("max_contention must be >= 0")

    @property
    def tx_time(self) -> float:
        return self.payload_bits / self.data_rate


def access_delay(t_gen: float, params: WaveParams, rng: np.random.Generator) -> float:
    """Air delay for a frame handed to the radio at ``t_gen`` (seconds >= 0)."""
    if t_gen < 0:
        raise ConfigurationError("t_gen must be >= 0")
    phase = t_gen % params.sync_interval
    tx = params.tx_time
    if phase + tx <= params.cch_duration:
        jitter = rng.uniform(0.0, params.max_contention) if params.max_contention > 0 else 0.0
        return tx + jitter
    return (params.sync_interval - phase) + tx


@dataclass
class DelayFile:
    """Per-beacon delays keyed by (vehicle_id, beacon sequence number)."""

    entries: dict[tuple[str, int], float]

    def __post_init__(self):
        for key, d in self.entries.items():
            if d < 0:
                raise ConfigurationError(f"negative delay {d} for {key}")


def load_delay_file(stream: Iterable[str]) -> DelayFile:
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or ",".join(header) != DELAY_HEADER:
        raise ConfigurationError(f"expected header {DELAY_HEADER!r}")
    entries: dict[tuple[str, int], float] = {}
    for row in reader:
        if not row:
            continue
        vid, seq, delay = row[0], int(row[1]), float(row[2])
        entries[(vid, seq)] = delay
    return DelayFile(entries)


def injected_delay(
    file: DelayFile,
    vehicle_id: str,
    seq: int,
    strict: bool = True,
    t_gen: float | None = None,
    params: WaveParams | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Look up the injected delay for one beacon.

    On a missing key: raise under the strict policy, otherwise fall back to
    :func:`access_delay` (which then requires ``t_gen``, ``params``, ``rng``).
    """
    delay = file.entries.get((vehicle_id, seq))
    if delay is not None:
        return delay
    if strict:
        raise MissingDelayError(f"no injected delay for vehicle {vehicle_id!r} seq {seq}")
    if t_gen is None or params is None or rng is None:
        raise ConfigurationError("fallback mode needs t_gen, params and rng")
    return access_delay(t_gen, params, rng)
