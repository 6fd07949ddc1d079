"""Independent brute-force oracles used by the test suite.

The separation oracle evaluates |pos_a(t) - pos_b(t)| on the uniform grid
t = 0, dt, ..., t_max by direct position differencing, never via the
stationary-point formula the library uses.  The production entry point
``grid_min_separation`` runs a coarse scan followed by exact refinement
around the coarse minimum; because the squared separation is a convex
quadratic in t, this returns the same grid point as the literal full scan
(``grid_min_separation_literal``), which the tests verify on subsamples.
"""

import numpy as np

T_MAX = 120.0
DT = 1e-3


def _d2_at(dx0, dy0, dvx, dvy, t):
    """Squared separation at times ``t`` for pair arrays broadcast to (m, k)."""
    xt = dx0[:, None] + dvx[:, None] * t
    yt = dy0[:, None] + dvy[:, None] * t
    return xt * xt + yt * yt


def grid_min_separation(dx0, dy0, dvx, dvy, t_max=T_MAX, dt=DT, coarse=10, pair_chunk=1024):
    """Grid-minimum separation for many pairs at once.

    Arguments are arrays of relative displacement and velocity components.
    Returns ``(d_min, idx, increasing_at_0)``: the minimum distance over the
    grid, the first grid index attaining it, and whether the separation grows
    from the first to the second grid point.
    """
    dx0, dy0, dvx, dvy = (np.asarray(a, dtype=float) for a in (dx0, dy0, dvx, dvy))
    m = len(dx0)
    n_steps = int(round(t_max / dt))
    coarse_idx = np.arange(0, n_steps + 1, coarse)
    best_idx = np.empty(m, dtype=np.int64)
    for lo in range(0, m, pair_chunk):
        hi = min(lo + pair_chunk, m)
        d2 = _d2_at(dx0[lo:hi], dy0[lo:hi], dvx[lo:hi], dvy[lo:hi], coarse_idx * dt)
        best_idx[lo:hi] = coarse_idx[d2.argmin(axis=1)]
    # Exact refinement: the convex valley lies within one coarse cell of the
    # coarse argmin; +-2 cells adds slack for flat floating-point ties.
    offsets = np.arange(-2 * coarse, 2 * coarse + 1)
    cand = np.clip(best_idx[:, None] + offsets[None, :], 0, n_steps)
    d2 = _d2_at(dx0, dy0, dvx, dvy, cand * dt)
    # First-index tie-breaking: order candidates by index before argmin.
    order = np.argsort(cand, axis=1, kind="stable")
    rows = np.arange(m)[:, None]
    cand_sorted = cand[rows, order]
    d2_sorted = d2[rows, order]
    j = d2_sorted.argmin(axis=1)
    idx = cand_sorted[np.arange(m), j]
    d_min = np.sqrt(np.maximum(d2_sorted[np.arange(m), j], 0.0))
    first_two = _d2_at(dx0, dy0, dvx, dvy, np.array([0.0, dt]))
    increasing_at_0 = first_two[:, 1] > first_two[:, 0]
    return d_min, idx, increasing_at_0


def grid_min_separation_literal(dx0, dy0, dvx, dvy, t_max=T_MAX, dt=DT, time_chunk=8192):
    """Single-pair-at-a-time literal scan of every grid point (slow)."""
    dx0, dy0, dvx, dvy = (np.asarray(a, dtype=float) for a in (dx0, dy0, dvx, dvy))
    m = len(dx0)
    n_steps = int(round(t_max / dt))
    d_min = np.full(m, np.inf)
    idx = np.zeros(m, dtype=np.int64)
    for lo in range(0, n_steps + 1, time_chunk):
        hi = min(lo + time_chunk, n_steps + 1)
        t = np.arange(lo, hi) * dt
        d2 = _d2_at(dx0, dy0, dvx, dvy, t)
        j = d2.argmin(axis=1)
        vals = np.sqrt(np.maximum(d2[np.arange(m), j], 0.0))
        better = vals < d_min  # strict: keeps the earliest argmin on ties
        d_min[better] = vals[better]
        idx[better] = j[better] + lo
    return d_min, idx


def random_beacon_arrays(rng, m, pos_range=500.0, speed_max=20.0):
    """Relative displacement/velocity arrays for m random beacon pairs."""
    ax = rng.uniform(-pos_range, pos_range, m)
    ay = rng.uniform(-pos_range, pos_range, m)
    bx = rng.uniform(-pos_range, pos_range, m)
    by = rng.uniform(-pos_range, pos_range, m)
    a_speed = rng.uniform(0.0, speed_max, m)
    b_speed = rng.uniform(0.0, speed_max, m)
    a_head = rng.uniform(0.0, 2.0 * np.pi, m)
    b_head = rng.uniform(0.0, 2.0 * np.pi, m)
    avx, avy = a_speed * np.cos(a_head), a_speed * np.sin(a_head)
    bvx, bvy = b_speed * np.cos(b_head), b_speed * np.sin(b_head)
    return {
        "ax": ax, "ay": ay, "avx": avx, "avy": avy,
        "bx": bx, "by": by, "bvx": bvx, "bvy": bvy,
        "dx0": ax - bx, "dy0": ay - by, "dvx": avx - bvx, "dvy": avy - bvy,
    }
