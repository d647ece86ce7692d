"""Forward chordal Loewner evolution by composition of exact one-step slit maps.

The driver is frozen to a constant on every mesh interval, so each step is the
exact solution of df/dt = 2/(f - lambda) for constant lambda,

    G(w) = lambda + sqrt((w - lambda)**2 + 4*delta),

which removes a vertical slit of height 2*sqrt(delta) standing on lambda.
Its inverse ``H(w) = lambda + sqrt((w - lambda)**2 - 4*delta)`` grows that slit.
Composing the G's advances points forward in time, composing the H's in
reverse order recovers the slit (the trace).

An adaptive Runge-Kutta integration of the same ODE is kept alongside as an
independent cross-check (:func:`solve_forward_ode`, :func:`singular_solutions_ode`).
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .curves import Curve
from .driving import DrivingTerm, eval_on_mesh, evaluate
from .errors import ConsistencyError, HullCollisionError

GUARD_REL = 1e-12


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeMesh:
    """Partition 0 = t_0 < t_1 < ... < t_N = T of capacity time."""

    nodes: np.ndarray
    grading_exponent: Optional[float] = None

    def __post_init__(self):
        t = np.ascontiguousarray(self.nodes, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("mesh needs at least one node")
        if t[0] != 0.0:
            raise ValueError("mesh must start at t=0")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "nodes", t)

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def N(self) -> int:
        return self.nodes.size - 1

    @property
    def deltas(self) -> np.ndarray:
        return np.diff(self.nodes)

    def refined(self) -> "TimeMesh":
        """Graded mesh with twice the intervals; every old node is kept."""
        if self.grading_exponent is None:
            mid = 0.5 * (self.nodes[:-1] + self.nodes[1:])
            nodes = np.empty(2 * self.N + 1)
            nodes[0::2] = self.nodes
            nodes[1::2] = mid
            return TimeMesh(nodes)
        return make_graded_mesh(self.T, 2 * self.N, self.grading_exponent)

    def scaled(self, n: float) -> "TimeMesh":
        return TimeMesh(self.nodes * n, self.grading_exponent)

    def nearest(self, t: float) -> int:
        """Index of the node closest to ``t``."""
        j = int(np.searchsorted(self.nodes, t))
        if j >= self.nodes.size:
            return self.nodes.size - 1
        if j > 0 and abs(self.nodes[j - 1] - t) <= abs(self.nodes[j] - t):
            return j - 1
        return j


def make_graded_mesh(T: float, N: int, grading_exponent: float = 2.0) -> TimeMesh:
    """Nodes t_j = T*(j/N)**grading_exponent, j = 0..N."""
    if not T > 0:
        raise ValueError("T must be positive")
    if int(N) != N or N < 2:
        raise ValueError("N must be an integer >= 2")
    if grading_exponent < 1:
        raise ValueError("grading exponent must be >= 1")
    N = int(N)
    j = np.arange(N + 1, dtype=float)
    nodes = T * (j / N) ** grading_exponent
    nodes[-1] = T
    return TimeMesh(nodes, float(grading_exponent))


# ---------------------------------------------------------------------------
# one-step maps
# ---------------------------------------------------------------------------

def _upper_root(q, u):
    """Square root of q in the closed upper half-plane.

    Real roots (ties) take the sign of Re(u), zero counting as positive.
    """
    s = np.sqrt(np.asarray(q, dtype=complex))
    flip = (s.imag < 0) | ((s.imag == 0) & (np.real(u) < 0))
    return np.where(flip, -s, s)


def elementary_slit_map(w, lam: float, delta: float):
    """w -> lam + sqrt((w - lam)**2 + 4*delta), image in the closed upper half-plane.

    Evaluated as ``w + 4*delta/(u + s)`` which avoids cancellation for |w| >> sqrt(delta).
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    w_arr = np.asarray(w, dtype=complex)
    if delta == 0:
        out = w_arr.copy()
    else:
        u = w_arr - lam
        s = _upper_root(u * u + 4.0 * delta, u)
        out = w_arr + 4.0 * delta / (u + s)
        # slit points land on R; do not let rounding push them below it
        out = np.where(out.imag < 0, out.real + 0j, out)
    return complex(out) if out.ndim == 0 else out


def elementary_slit_map_inverse(w, lam: float, delta: float):
    """w -> lam + sqrt((w - lam)**2 - 4*delta); lam itself goes to the slit tip lam + 2i*sqrt(delta)."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    w_arr = np.asarray(w, dtype=complex)
    if delta == 0:
        out = w_arr.copy()
    else:
        u = w_arr - lam
        s = _upper_root(u * u - 4.0 * delta, u)
        out = w_arr - 4.0 * delta / (u + s)
    return complex(out) if out.ndim == 0 else out


def _forward_step(w: complex, lam: float, delta: float) -> complex:
    # scalar twin of elementary_slit_map for the hot loops
    u = w - lam
    s = cmath.sqrt(u * u + 4.0 * delta)
    if s.imag < 0 or (s.imag == 0 and u.real < 0):
        s = -s
    out = w + 4.0 * delta / (u + s)
    return complex(out.real, 0.0) if out.imag < 0 else out


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class EvolutionResult:
    """Per-node output of an evolution.

    ``lam[j]`` is the driving value seen by the slit tip at node j, i.e. the
    constant used on the interval ending at t_j (``lam[0] = 0``).
    """

    mesh: TimeMesh
    lam: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    tip: Optional[np.ndarray] = None

    @property
    def t(self) -> np.ndarray:
        return self.mesh.nodes

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "lambda", "f1", "f2", "tip_re", "tip_im"])
        tip = self.tip if self.tip is not None else np.full(self.t.size, complex(np.nan, np.nan))
        for row in zip(self.t, self.lam, self.f1, self.f2, tip.real, tip.imag):
            w.writerow([f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, newline="")
        return text


def node_driving_values(term: DrivingTerm, mesh: TimeMesh) -> np.ndarray:
    """Driving value at each node as seen by the discrete evolution (lam[0] = 0)."""
    out = np.zeros(mesh.N + 1)
    if mesh.N:
        out[1:] = eval_on_mesh(term, mesh)
    return out


# ---------------------------------------------------------------------------
# forward solvers
# ---------------------------------------------------------------------------

def solve_forward(term: DrivingTerm, mesh: TimeMesh, z: complex) -> np.ndarray:
    """f(z, t_j) for every node, by composing elementary slit maps.

    Raises HullCollisionError when an image comes within the guard distance of
    the driving value, or when its imaginary part collapses below 1e-12 of
    Im(z), which means z has been swallowed by the slit.
    """
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("z must lie strictly inside the upper half-plane")
    out = np.empty(mesh.N + 1, dtype=complex)
    out[0] = z
    if mesh.N == 0:
        return out
    lams = eval_on_mesh(term, mesh).tolist()
    deltas = mesh.deltas.tolist()
    w = z
    for k, (lam, d) in enumerate(zip(lams, deltas)):
        if abs(w - lam) <= GUARD_REL * max(1.0, abs(lam)):
            raise HullCollisionError(k + 1, w, lam)
        w = _forward_step(w, lam, d)
        if w.imag <= GUARD_REL * z.imag:
            raise HullCollisionError(k + 1, w, lam)
        out[k + 1] = w
    return out


def solve_forward_extrapolated(term: DrivingTerm, mesh: TimeMesh, z: complex) -> np.ndarray:
    """Mesh-pair (Richardson) combination 2*f_{2N} - f_N of the first-order composition."""
    coarse = solve_forward(term, mesh, z)
    fine = solve_forward(term, mesh.refined(), z)[::2]
    return 2.0 * fine - coarse


def solve_forward_ode(term: DrivingTerm, times, z: complex, rtol: float = 1e-12,
                      atol: float = 1e-14) -> np.ndarray:
    """Oracle: adaptive RK45 on df/dtau = 4*tau/(f - lambda(tau**2)), tau = sqrt(t).

    The substitution removes the sqrt(t) singularity of typical drivers at t=0.
    """
    times = np.asarray(times, dtype=float)
    z = complex(z)
    taus = np.sqrt(times)

    def rhs(tau, y):
        f = complex(y[0], y[1])
        v = 4.0 * tau / (f - evaluate(term, tau * tau))
        return [v.real, v.imag]

    if taus[-1] == 0:
        return np.full(times.size, z)
    sol = solve_ivp(rhs, (0.0, float(taus[-1])), [z.real, z.imag], method="RK45",
                    t_eval=taus, rtol=rtol, atol=atol)
    if not sol.success:
        raise ConsistencyError(f"ODE oracle failed: {sol.message}")
    return sol.y[0] + 1j * sol.y[1]


def solve_inverse(term: DrivingTerm, mesh: TimeMesh, w, j: Optional[int] = None):
    """f^{-1}(w, t_j): compose the inverse slit maps H_1 o ... o H_j (default j = N)."""
    j = mesh.N if j is None else int(j)
    lams = eval_on_mesh(term, mesh) if mesh.N else np.zeros(0)
    deltas = mesh.deltas
    out = np.asarray(w, dtype=complex)
    for k in range(j - 1, -1, -1):
        out = elementary_slit_map_inverse(out, lams[k], deltas[k])
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# singular solutions
# ---------------------------------------------------------------------------

def singular_solutions(term: DrivingTerm, mesh: TimeMesh) -> EvolutionResult:
    """The two real solutions f1 > lambda > f2 leaving the singular point (0, 0).

    The first step is the exact constant-driver solution lam_1 +/- 2*sqrt(delta_1);
    after that both points move along R by the real branch of the slit map.

    The left-endpoint driver lags one step behind, so for lambda = c*sqrt(t)
    with c >= 2 it reaches f1 at the start of step 2 (symmetrically f2 for
    c <= -2).  The branch formulas are continuous there, so an overshoot of
    up to one slit height 2*sqrt(delta_k) is tolerated; anything larger is
    reported as a consistency error.
    """
    if mesh.N < 1 or mesh.deltas[0] <= 0:
        raise ValueError("mesh needs a positive first step")
    lams = eval_on_mesh(term, mesh).tolist()
    deltas = mesh.deltas.tolist()
    n = mesh.N
    f1 = np.zeros(n + 1)
    f2 = np.zeros(n + 1)
    sq = math.sqrt
    x1 = lams[0] + 2.0 * sq(deltas[0])
    x2 = lams[0] - 2.0 * sq(deltas[0])
    f1[1] = x1
    f2[1] = x2
    for k in range(1, n):
        lam = lams[k]
        q = 4.0 * deltas[k]
        u1 = x1 - lam
        u2 = x2 - lam
        slack = sq(q)
        if u1 < -slack or u2 > slack:
            raise ConsistencyError(
                f"driving value {lam!r} at step {k + 1} leaves the interval [{x2!r}, {x1!r}]"
            )
        x1 = x1 + q / (u1 + sq(u1 * u1 + q))
        x2 = x2 + q / (u2 - sq(u2 * u2 + q))
        f1[k + 1] = x1
        f2[k + 1] = x2
    lam_nodes = np.zeros(n + 1)
    lam_nodes[1:] = lams
    if np.any(f1[1:] <= lam_nodes[1:]) or np.any(f2[1:] >= lam_nodes[1:]):
        raise ConsistencyError("singular solutions do not bracket the driving term")
    return EvolutionResult(mesh, lam_nodes, f1, f2)


def singular_solutions_ode(term: DrivingTerm, times, t_start: float = 1e-30,
                           rtol: float = 1e-11, atol: float = 1e-13):
    """Oracle: integrate the normalised singular solutions g = f/sqrt(t) in log-time.

    With mu(t) = lambda(t)/sqrt(t) the Loewner equation for f = g*sqrt(t) reads
    dg/ds = 2/(g - mu) - g/2 with s = log t.  Both branches start at mu +/- 2
    at ``t_start``; the start-up transient decays like a power of t_start/t.
    Returns (f1, f2) at ``times`` (all > t_start).
    """
    times = np.asarray(times, dtype=float)
    if np.any(times <= t_start):
        raise ValueError("all requested times must exceed t_start")

    def mu(s):
        t = math.exp(s)
        return evaluate(term, t) / math.sqrt(t)

    def rhs(s, y):
        m = mu(s)
        return [2.0 / (y[0] - m) - 0.5 * y[0], 2.0 / (y[1] - m) - 0.5 * y[1]]

    s0 = math.log(t_start)
    m0 = mu(s0)
    order = np.argsort(times)
    s_eval = np.log(times[order])
    sol = solve_ivp(rhs, (s0, float(s_eval[-1])), [m0 + 2.0, m0 - 2.0], method="RK45",
                    t_eval=s_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise ConsistencyError(f"ODE oracle failed: {sol.message}")
    g1 = np.empty(times.size)
    g2 = np.empty(times.size)
    g1[order] = sol.y[0]
    g2[order] = sol.y[1]
    root = np.sqrt(times)
    return g1 * root, g2 * root


# ---------------------------------------------------------------------------
# trace and normalisation
# ---------------------------------------------------------------------------

def trace_points(term: DrivingTerm, mesh: TimeMesh) -> np.ndarray:
    """Tips gamma(t_j) = (H_1 o ... o H_j)(lam_j), j = 0..N; O(N^2) work."""
    n = mesh.N
    tips = np.zeros(n + 1, dtype=complex)
    if n == 0:
        return tips
    lams = eval_on_mesh(term, mesh)
    deltas = mesh.deltas
    # tip of the k-th slit in its own frame, then pull back through earlier maps
    work = lams + 2j * np.sqrt(deltas)
    for k in range(n - 2, -1, -1):
        work[k + 1:] = elementary_slit_map_inverse(work[k + 1:], lams[k], deltas[k])
    tips[1:] = work
    return tips


def compute_trace(term: DrivingTerm, mesh: TimeMesh) -> Curve:
    return Curve(trace_points(term, mesh))


def evolve(term: DrivingTerm, mesh: TimeMesh, with_trace: bool = True) -> EvolutionResult:
    """Singular solutions plus (optionally) the trace tips on one mesh."""
    res = singular_solutions(term, mesh)
    if with_trace:
        res.tip = trace_points(term, mesh)
    return res


def hydrodynamic_coefficient(term: DrivingTerm, mesh: TimeMesh, R: float = 1000.0) -> float:
    """Coefficient b in f(z, T) = z + b/z + ..., read off at z = iR; should equal 2T.

    Taking the real part of (f - z)*z removes the real 1/z**2 term exactly at
    z = iR, leaving an O(1/R**2) residual.
    """
    if R < 100:
        raise ValueError("R must be at least 100")
    if mesh.N == 0 or mesh.T == 0:
        return 0.0
    z = 1j * R
    f = solve_forward(term, mesh, z)[-1]
    return float(((f - z) * z).real)
