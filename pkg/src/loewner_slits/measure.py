"""Harmonic measures in the upper half-plane and of the two sides of a slit.

By conformal invariance the harmonic measure of side k of gamma[0, t] seen from
f^{-1}(i, t) equals the harmonic measure of its image interval seen from i:
[lam, f1] for the right side and [f2, lam] for the left side.  A random-walk
estimator working directly in the slit domain serves as an independent check.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .curves import Curve
from .errors import ConsistencyError
from .evolution import EvolutionResult


def hm_interval(z0: complex, a: float, b: float) -> float:
    """omega(z0; [a, b], H): the angle [a, b] subtends at z0, divided by pi."""
    if not a < b:
        raise ValueError("need a < b")
    z0 = complex(z0)
    if not z0.imag > 0:
        raise ValueError("z0 must lie in the upper half-plane")
    x0, y0 = z0.real, z0.imag
    # angle between the vectors (a - x0, -y0) and (b - x0, -y0)
    ang = math.atan2(b - x0, y0) - math.atan2(a - x0, y0)
    return ang / math.pi


def hm_interval_array(z0: complex, a, b) -> np.ndarray:
    """Vectorised :func:`hm_interval` (no argument checks)."""
    z0 = complex(z0)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (np.arctan2(b - z0.real, z0.imag) - np.arctan2(a - z0.real, z0.imag)) / np.pi


def hm_interval_quad(z0: complex, a: float, b: float) -> float:
    """Oracle: integrate the half-plane Poisson kernel y0/((x - x0)^2 + y0^2)/pi."""
    z0 = complex(z0)
    x0, y0 = z0.real, z0.imag
    val, _ = quad(lambda x: y0 / ((x - x0) ** 2 + y0 ** 2), a, b,
                  points=[x0] if a < x0 < b else None, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val / math.pi


def hm_slit_sides(result: EvolutionResult, j: int) -> tuple[float, float]:
    """(m1, m2) at node j: harmonic measures of the right and left slit sides."""
    if j < 1:
        raise ValueError("harmonic measures of the sides need j >= 1")
    lam, f1, f2 = float(result.lam[j]), float(result.f1[j]), float(result.f2[j])
    if not f2 < lam < f1:
        raise ConsistencyError(f"node {j}: ordering f2 < lambda < f1 violated")
    return hm_interval(1j, lam, f1), hm_interval(1j, f2, lam)


@dataclass
class MeasureSeries:
    times: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    ratio: np.ndarray

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "m1", "m2", "ratio"])
        for row in zip(self.times, self.m1, self.m2, self.ratio):
            w.writerow([f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, newline="")
        return text


def measure_series(result: EvolutionResult, nodes=None) -> MeasureSeries:
    """Slit-side harmonic measures at the given node indices (default: all j >= 1)."""
    idx = np.arange(1, result.t.size) if nodes is None else np.asarray(nodes, dtype=int)
    if np.any(idx < 1):
        raise ValueError("node indices must be >= 1")
    lam, f1, f2 = result.lam[idx], result.f1[idx], result.f2[idx]
    if np.any(~(f2 < lam)) or np.any(~(lam < f1)):
        raise ConsistencyError("ordering f2 < lambda < f1 violated")
    m1 = hm_interval_array(1j, lam, f1)
    m2 = hm_interval_array(1j, f2, lam)
    return MeasureSeries(result.t[idx].copy(), m1, m2, m1 / m2)


# ---------------------------------------------------------------------------
# random-walk oracle
# ---------------------------------------------------------------------------

REAL_AXIS, SIDE_1, SIDE_2 = 0, 1, 2
BLOCK = 1 << 16
NEAR = 4.0  # walkers closer than NEAR*step to the boundary take Gaussian steps


@dataclass
class WalkResult:
    estimate: float
    stderr: float
    absorbed: int
    lost: int
    seed: int
    counts: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _segment_distance(px, py, ax, ay, bx, by):
    """Distance from points (px, py) to every segment (a, b); shape (walkers, segments)."""
    ex, ey = bx - ax, by - ay
    ee = ex * ex + ey * ey
    qx = px[:, None] - ax[None, :]
    qy = py[:, None] - ay[None, :]
    s = np.clip((qx * ex + qy * ey) / ee, 0.0, 1.0)
    dx = qx - s * ex
    dy = qy - s * ey
    return np.sqrt(dx * dx + dy * dy)


CHUNK_ELEMS = 1 << 22  # cap on walkers*segments per temporary array


def _chunks(n, n_seg):
    width = max(1, CHUNK_ELEMS // max(n_seg, 1))
    return [slice(i, min(i + width, n)) for i in range(0, n, width)]


def _min_segment_distance(x, y, seg):
    out = np.empty(x.size)
    for sl in _chunks(x.size, seg[0].size):
        out[sl] = _segment_distance(x[sl], y[sl], *seg).min(axis=1)
    return out


def _first_crossing(x0, y0, gx, gy, seg):
    """Smallest step parameter at which each step meets a segment (inf if none), and that segment."""
    ax, ay, bx, by = seg
    ex, ey = bx - ax, by - ay
    s_out = np.empty(x0.size)
    j_out = np.empty(x0.size, dtype=np.intp)
    for sl in _chunks(x0.size, ax.size):
        qx = ax[None, :] - x0[sl, None]
        qy = ay[None, :] - y0[sl, None]
        denom = _cross(gx[sl, None], gy[sl, None], ex[None, :], ey[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            s = _cross(qx, qy, ex[None, :], ey[None, :]) / denom
            u = _cross(qx, qy, gx[sl, None], gy[sl, None]) / denom
        ok = (denom != 0) & (s >= 0) & (s <= 1) & (u >= 0) & (u <= 1)
        s = np.where(ok, s, np.inf)
        j = np.argmin(s, axis=1)
        j_out[sl] = j
        s_out[sl] = s[np.arange(j.size), j]
    return s_out, j_out


def _walk_block(z0, seg, tip, n, step, rng, max_iter):
    """Absorb ``n`` walkers started at z0; returns (labels, exit points); label -1 = lost.

    Far from the boundary a walker jumps to a uniform point on the largest
    circle around it that stays in the domain (the exit law of Brownian motion
    from that disc).  Within NEAR*step of the boundary it takes isotropic
    Gaussian steps of standard deviation ``step``; absorption is detected by
    intersecting the step with R and with every slit segment.
    """
    labels = np.full(n, -1, dtype=np.int8)
    exits = np.full(n, np.nan + 0j)
    px = np.full(n, z0.real)
    py = np.full(n, z0.imag)
    alive = np.arange(n)
    if seg is not None:
        ax, ay, bx, by = seg
    for _ in range(max_iter):
        if alive.size == 0:
            break
        x, y = px[alive], py[alive]
        dist = y.copy()
        if seg is not None:
            dist = np.minimum(dist, _min_segment_distance(x, y, seg))
        far = dist > NEAR * step
        if np.any(far):
            ia = alive[far]
            theta = rng.uniform(0.0, 2.0 * math.pi, ia.size)
            r = dist[far]
            px[ia] = x[far] + r * np.cos(theta)
            py[ia] = y[far] + r * np.sin(theta)
        near = ~far
        if not np.any(near):
            continue
        ib = alive[near]
        x0, y0 = x[near], y[near]
        gx, gy = rng.standard_normal((2, ib.size)) * step
        x1, y1 = x0 + gx, y0 + gy
        # first crossing parameter along the step, per boundary piece
        best = np.full(ib.size, np.inf)
        lab = np.full(ib.size, -1, dtype=np.int8)
        hit_r = y1 <= 0
        s_r = np.where(hit_r, y0 / np.where(hit_r, y0 - y1, 1.0), np.inf)
        best = np.where(hit_r, s_r, best)
        lab[hit_r] = REAL_AXIS
        if seg is not None:
            s_seg, jseg = _first_crossing(x0, y0, gx, gy, seg)
            seg_first = s_seg < best
            if np.any(seg_first):
                k = np.nonzero(seg_first)[0]
                js = jseg[k]
                side_cross = _cross(bx[js] - ax[js], by[js] - ay[js], x0[k] - ax[js], y0[k] - ay[js])
                side = np.where(side_cross < 0, SIDE_1, SIDE_2).astype(np.int8)
                hx = x0[k] + s_seg[k] * gx[k]
                hy = y0[k] + s_seg[k] * gy[k]
                at_tip = np.hypot(hx - tip.real, hy - tip.imag) <= 0.5 * step
                side = np.where(at_tip, np.where(x0[k] > tip.real, SIDE_1, SIDE_2), side)
                lab[k] = side
                best[k] = s_seg[k]
        done = lab >= 0
        if np.any(done):
            d = np.nonzero(done)[0]
            exits[ib[d]] = (x0[d] + best[d] * gx[d]) + 1j * (y0[d] + best[d] * gy[d])
            labels[ib[d]] = lab[d]
        keep = ~done
        px[ib[keep]] = x1[keep]
        py[ib[keep]] = y1[keep]
        alive = np.concatenate([alive[far], ib[keep]])
        alive.sort()
    return labels, exits


def simulate_exits(curve: Optional[Curve], z0: complex, n_walkers: int, step: float,
                   seed: int, max_iter: int = 100_000):
    """Exit labels (0 = R, 1 = right side, 2 = left side, -1 = lost) and exit points.

    Walkers are processed in fixed blocks of 2**16; block b draws from
    SeedSequence(seed, spawn_key=(b,)), so results do not depend on how blocks
    are scheduled.
    """
    z0 = complex(z0)
    if not z0.imag > 0:
        raise ValueError("z0 must lie in the upper half-plane")
    seg = None
    tip = 0j
    if curve is not None:
        p = curve.points
        seg = (p[:-1].real.copy(), p[:-1].imag.copy(), p[1:].real.copy(), p[1:].imag.copy())
        tip = curve.tip
        d0 = _segment_distance(np.array([z0.real]), np.array([z0.imag]), *seg).min()
        if d0 <= step:
            raise ValueError("z0 lies on or too close to the slit")
    labels = np.empty(n_walkers, dtype=np.int8)
    exits = np.empty(n_walkers, dtype=complex)
    for b, start in enumerate(range(0, n_walkers, BLOCK)):
        m = min(BLOCK, n_walkers - start)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
        lab, ex = _walk_block(z0, seg, tip, m, step, rng, max_iter)
        labels[start:start + m] = lab
        exits[start:start + m] = ex
    return labels, exits


def _summarise(hit, labels, seed, max_lost_fraction):
    lost = int(np.count_nonzero(labels < 0))
    absorbed = labels.size - lost
    if lost > max_lost_fraction * labels.size:
        raise RuntimeError(f"{lost} of {labels.size} walkers were not absorbed within the budget")
    p = np.count_nonzero(hit) / absorbed
    counts = {name: int(np.count_nonzero(labels == k))
              for name, k in (("real_axis", REAL_AXIS), ("side1", SIDE_1), ("side2", SIDE_2))}
    counts["lost"] = lost
    return WalkResult(float(p), float(math.sqrt(p * (1 - p) / absorbed)), absorbed, lost,
                      int(seed), counts)


def hm_mc_oracle(curve: Curve, side: int, z0: complex, n_walkers: int = 100_000,
                 step: Optional[float] = None, seed: int = 0,
                 max_lost_fraction: float = 1e-3) -> WalkResult:
    """Random-walk estimate of the harmonic measure of one slit side at z0."""
    if side not in (1, 2):
        raise ValueError("side must be 1 or 2")
    diam = curve.diameter
    if step is None:
        step = 1e-3 * diam
    if step > 1e-3 * diam * (1 + 1e-12):
        raise ValueError("step must not exceed 1e-3 times the slit diameter")
    labels, _ = simulate_exits(curve, z0, n_walkers, step, seed)
    return _summarise(labels == side, labels, seed, max_lost_fraction)


def hm_mc_interval(z0: complex, a: float, b: float, n_walkers: int = 100_000,
                   step: float = 1e-3, seed: int = 0,
                   max_lost_fraction: float = 1e-3) -> WalkResult:
    """Random-walk estimate of omega(z0; [a, b], H) with no slit present."""
    if not a < b:
        raise ValueError("need a < b")
    labels, exits = simulate_exits(None, z0, n_walkers, step, seed)
    hit = (labels == REAL_AXIS) & (exits.real >= a) & (exits.real <= b)
    return _summarise(hit, labels, seed, max_lost_fraction)
