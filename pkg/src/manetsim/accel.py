"""Numeric inner loops, compiled with numba when available.

Set ``MANETSIM_NUMBA=0`` to force the pure-numpy implementations. Both paths
are importable under their ``numpy_*`` / ``numba_*`` names so tests and the
benchmark can compare them directly.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_ENABLED = numba is not None and os.environ.get("MANETSIM_NUMBA", "1").lower() not in ("0", "false", "no", "off")


# ---- pure numpy --------------------------------------------------------------

def numpy_positions_at(ox, oy, dx, dy, depart, arrive, t):
    span = arrive - depart
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(span > 0.0, (t - depart) / span, 1.0)
    frac = np.clip(frac, 0.0, 1.0)
    out = np.empty((ox.shape[0], 2))
    out[:, 0] = ox + frac * (dx - ox)
    out[:, 1] = oy + frac * (dy - oy)
    return out


def numpy_neighbors_within(xy, i, r):
    d2 = ((xy - xy[i]) ** 2).sum(axis=1)
    mask = d2 <= r * r
    mask[i] = False
    return np.flatnonzero(mask), np.sqrt(d2[mask])


def numpy_adjacency(xy, r):
    diff = xy[:, None, :] - xy[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    adj = d2 <= r * r
    np.fill_diagonal(adj, False)
    return adj


def numpy_window_mean_speed(depart, arrive, speed, t0, t1):
    """Time-averaged speed over [t0, t1] of one track given as leg arrays.

    Time not covered by any leg (pauses) contributes zero speed.
    """
    overlap = np.clip(np.minimum(arrive, t1) - np.maximum(depart, t0), 0.0, None)
    return float((overlap * speed).sum() / (t1 - t0))


# ---- numba -------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True)
    def numba_positions_at(ox, oy, dx, dy, depart, arrive, t):
        n = ox.shape[0]
        out = np.empty((n, 2))
        for k in range(n):
            span = arrive[k] - depart[k]
            if span > 0.0:
                f = (t - depart[k]) / span
                if f < 0.0:
                    f = 0.0
                elif f > 1.0:
                    f = 1.0
            else:
                f = 1.0
            out[k, 0] = ox[k] + f * (dx[k] - ox[k])
            out[k, 1] = oy[k] + f * (dy[k] - oy[k])
        return out

    @numba.njit(cache=True)
    def numba_neighbors_within(xy, i, r):
        n = xy.shape[0]
        idx = np.empty(n, dtype=np.int64)
        dist = np.empty(n)
        m = 0
        r2 = r * r
        xi = xy[i, 0]
        yi = xy[i, 1]
        for k in range(n):
            if k == i:
                continue
            ddx = xy[k, 0] - xi
            ddy = xy[k, 1] - yi
            d2 = ddx * ddx + ddy * ddy
            if d2 <= r2:
                idx[m] = k
                dist[m] = np.sqrt(d2)
                m += 1
        return idx[:m], dist[:m]

    @numba.njit(cache=True)
    def numba_adjacency(xy, r):
        n = xy.shape[0]
        adj = np.zeros((n, n), dtype=np.bool_)
        r2 = r * r
        for a in range(n):
            for b in range(a + 1, n):
                ddx = xy[a, 0] - xy[b, 0]
                ddy = xy[a, 1] - xy[b, 1]
                if ddx * ddx + ddy * ddy <= r2:
                    adj[a, b] = True
                    adj[b, a] = True
        return adj

    @numba.njit(cache=True)
    def numba_window_mean_speed(depart, arrive, speed, t0, t1):
        acc = 0.0
        for k in range(depart.shape[0]):
            lo = depart[k] if depart[k] > t0 else t0
            hi = arrive[k] if arrive[k] < t1 else t1
            if hi > lo:
                acc += (hi - lo) * speed[k]
        return acc / (t1 - t0)

else:  # pragma: no cover
    numba_positions_at = numpy_positions_at
    numba_neighbors_within = numpy_neighbors_within
    numba_adjacency = numpy_adjacency
    numba_window_mean_speed = numpy_window_mean_speed


if NUMBA_ENABLED:
    positions_at = numba_positions_at
    neighbors_within = numba_neighbors_within
    adjacency = numba_adjacency
    window_mean_speed = numba_window_mean_speed
else:
    positions_at = numpy_positions_at
    neighbors_within = numpy_neighbors_within
    adjacency = numpy_adjacency
    window_mean_speed = numpy_window_mean_speed
