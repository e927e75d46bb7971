"""Independent reference implementations used by the tests."""

import math

import mpmath
import numpy as np

from trackassoc.association import TrackHistory
from trackassoc.records import Sensor
from trackassoc.state_estimation import TrackState

SIX_TRACK = {
    # (camera j, v2v i): distance
    (1, 1): 4.31, (1, 2): 20.61,
    (2, 1): 17.22, (2, 2): 2.92,
    (3, 1): 8.97, (3, 2): 23.60,
    (4, 1): 11.38, (4, 2): 25.18,
}


def mahalanobis_mp(x_a, P_a, x_b, P_b, dps=40):
    """sqrt(d^T (Pa + Pb)^-1 d) in extended precision, via explicit LU solve."""
    with mpmath.workdps(dps):
        d = mpmath.matrix([mpmath.mpf(float(u)) - mpmath.mpf(float(v)) for u, v in zip(x_a, x_b)])
        S = mpmath.matrix(len(x_a))
        for i in range(len(x_a)):
            for j in range(len(x_a)):
                S[i, j] = mpmath.mpf(float(P_a[i][j])) + mpmath.mpf(float(P_b[i][j]))
        w = mpmath.lu_solve(S, d)
        q = sum(d[i] * w[i] for i in range(len(x_a)))
        return float(mpmath.sqrt(q))


def six_track_histories(t=0.0):
    """Two V2V and four camera tracks whose single-tick distances equal the fixture cells.

    Each state has covariance I/2, so the Mahalanobis distance is the
    Euclidean one. V2V 1 sits at the origin and V2V 2 at ``s e1``; camera
    j is placed on the intersection of the two spheres around them.
    """
    s = 18.0
    P = np.eye(4) / 2
    points = {(Sensor.V2V, "1"): np.zeros(4), (Sensor.V2V, "2"): np.array([s, 0.0, 0.0, 0.0])}
    for j in range(1, 5):
        d1, d2 = SIX_TRACK[(j, 1)], SIX_TRACK[(j, 2)]
        x = (d1**2 - d2**2 + s**2) / (2 * s)
        r = math.sqrt(d1**2 - x**2)
        # spread camera points over different perpendicular directions
        u = np.zeros(3)
        u[(j - 1) % 3] = 1.0 if j < 4 else -1.0
        points[(Sensor.CAMERA, str(j))] = np.concatenate([[x], r * u])
    histories = []
    for key, x in points.items():
        h = TrackHistory(key, n=10)
        h.push(TrackState(x, P, t))
        histories.append(h)
    return histories


def _ray_rect_hit(theta, fp):
    """Distance along the bearing ``theta`` to the rectangle, or inf."""
    dx, dy = math.cos(theta), math.sin(theta)
    c, s = math.cos(fp.yaw), math.sin(fp.yaw)
    # ray in the rectangle's local frame
    ox, oy = -(c * fp.px + s * fp.py), -(-s * fp.px + c * fp.py)
    rx, ry = c * dx + s * dy, -s * dx + c * dy
    t0, t1 = -math.inf, math.inf
    for o, r, half in ((ox, rx, fp.length / 2), (oy, ry, fp.width / 2)):
        if abs(r) < 1e-15:
            if abs(o) > half:
                return math.inf
            continue
        a, b = (-half - o) / r, (half - o) / r
        t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
    if t1 < max(t0, 0.0):
        return math.inf
    return max(t0, 0.0)


def visible_fraction_rays(target, occluders, resolution=0.01):
    """Share of rays through the target's silhouette whose first hit is the target.

    Rays are spaced so that neighbours are ``resolution`` metres apart at the
    target's range.
    """
    angles = [math.atan2(y, x) for x, y in target.corners()]
    lo, hi = min(angles), max(angles)
    n = max(2, int(math.ceil((hi - lo) * target.range / resolution)))
    thetas = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    seen = 0
    for th in thetas:
        d_target = _ray_rect_hit(th, target)
        if not math.isfinite(d_target):
            continue
        if all(_ray_rect_hit(th, occ) >= d_target for occ in occluders):
            seen += 1
    return seen / n
