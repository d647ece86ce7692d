"""Vertical-slit zipper: from a polyline slit to its driving term, plus fixtures."""
from __future__ import annotations

import math

import numpy as np

from .curves import Curve, read_curve_csv, write_curve_csv  # noqa: F401  (re-exported)
from .driving import DrivingTerm
from .errors import GeometryError
from .evolution import TimeMesh


def zip_curve(curve: Curve) -> tuple[np.ndarray, np.ndarray]:
    """Raw zipper output: driving values lam_k and capacity increments delta_k, k = 1..n.

    Step k maps the image w_k of vertex k to the real line with the slit map
    based at Re(w_k), so delta_k = Im(w_k)**2/4.  All later vertices are pushed
    through the same map.  Work is O(n^2) but vectorised per step.
    """
    w = np.array(curve.points[1:], dtype=complex)
    n = w.size
    lam = np.empty(n)
    delta = np.empty(n)
    u_buf = np.empty(n, dtype=complex)
    s_buf = np.empty(n, dtype=complex)
    for k in range(n):
        wk = w[k]
        if not wk.imag > 0:
            raise GeometryError(k + 1, complex(wk))
        lk = wk.real
        dk = 0.25 * wk.imag * wk.imag
        lam[k] = lk
        delta[k] = dk
        rest = w[k + 1:]
        m = rest.size
        if m == 0:
            break
        u = u_buf[:m]
        s = s_buf[:m]
        np.subtract(rest, lk, out=u)
        np.multiply(u, u, out=s)
        s += 4.0 * dk
        np.sqrt(s, out=s)
        # upper-half-plane root; real ties follow the sign of Re(u)
        flip = (s.imag < 0) | ((s.imag == 0) & (u.real < 0))
        s[flip] *= -1
        s += u
        np.divide(4.0 * dk, s, out=s)
        rest += s
    return lam, delta


def compute_driving(curve: Curve) -> tuple[DrivingTerm, TimeMesh]:
    """Sampled driving term and capacity mesh of a polyline slit.

    Sample k is (t_k, lam_k), with t_k the accumulated capacity and lam_k the
    image of vertex k when it is zipped down; sample 0 is (0, 0).  The table
    is right-anchored: lam_k drives the interval (t_{k-1}, t_k], so evolving
    it on the returned mesh reproduces the zipper maps exactly.
    """
    lam, delta = zip_curve(curve)
    t = np.concatenate([[0.0], np.cumsum(delta)])
    stalled = np.diff(t) <= 0
    if np.any(stalled):
        # capacity increment lost to rounding: the vertex sits on R to machine precision
        k = int(np.argmax(stalled)) + 1
        raise GeometryError(k, complex(lam[k - 1], 2.0 * math.sqrt(delta[k - 1])))
    values = np.concatenate([[0.0], lam])
    return DrivingTerm.sampled(t, values, anchor="right"), TimeMesh(t)


def make_arc_curve(radius: float, max_angle: float, n: int) -> Curve:
    """Circular arc r*(1 - exp(-i*theta)), 0 <= theta <= max_angle, leaving 0 vertically.

    The arc bends to the right; theta_k = max_angle*(k/n)**2 so early steps are fine.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if not 0 < max_angle <= math.pi / 2:
        raise ValueError("max_angle must lie in (0, pi/2]")
    if n < 2:
        raise ValueError("n must be >= 2")
    theta = max_angle * (np.arange(n + 1) / n) ** 2
    pts = radius * (1.0 - np.exp(-1j * theta))
    pts[0] = 0.0
    return Curve(pts)


def make_line_curve(c_angle: float, length: float, n: int) -> Curve:
    """Segment from 0 at angle (pi/2)*(1 - c_angle) to R, quadratically graded in arclength."""
    if not -0.9 < c_angle < 0.9:
        raise ValueError("c_angle must lie in (-0.9, 0.9)")
    if length <= 0:
        raise ValueError("length must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    phi = 0.5 * math.pi * (1.0 - c_angle)
    s = length * (np.arange(n + 1) / n) ** 2
    return Curve(s * complex(math.cos(phi), math.sin(phi)))


def make_vertical_curve(height: float, n: int, grading: float = 1.0) -> Curve:
    """Vertical segment [0, i*height] with n pieces."""
    if height <= 0 or n < 1:
        raise ValueError("need height > 0 and n >= 1")
    s = height * (np.arange(n + 1) / n) ** grading
    return Curve(1j * s)


def arclength_profile(curve: Curve, mesh: TimeMesh) -> np.ndarray:
    """Rows (t_k, s_k): capacity time and polyline arclength at vertex k."""
    if len(curve) != mesh.nodes.size:
        raise ValueError(
            f"curve has {len(curve)} vertices but mesh has {mesh.nodes.size} nodes"
        )
    return np.column_stack([mesh.nodes, curve.arclength])


def driving_csv(term: DrivingTerm) -> str:
    """'t,lambda' CSV of a sampled driving term."""
    lines = ["t,lambda"]
    lines += [f"{t:.17g},{v:.17g}" for t, v in zip(term.times, term.values)]
    return "\n".join(lines) + "\n"
