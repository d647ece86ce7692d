"""Numerical experiments for the small-time laws of singular solutions and slit sides.

Every ``verify_*`` function returns a :class:`Report` with the measured and
expected values, the tolerance used and a pass flag.  Limits t -> 0 are taken
on the geometric ladder t_i = T*4**-i, i = 0..12, and extrapolated by
:func:`extrapolate_limit`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Optional, Sequence

import numpy as np

from .curves import Curve
from .driving import DrivingTerm
from .errors import DivergenceError
from .evolution import (
    TimeMesh,
    make_graded_mesh,
    singular_solutions,
    solve_inverse,
    trace_points,
)
from .measure import hm_mc_oracle, hm_slit_sides, measure_series
from .zipper import (
    compute_driving,
    make_arc_curve,
    make_line_curve,
    make_vertical_curve,
)

LADDER_LEVELS = 12
DEFAULT_N = 1 << 17  # paired with 2N = 262144 for mesh-pair extrapolation
DEFAULT_FIXTURE_POINTS = 40_000
THM3_DRIVER_SCALE = 1e-2


def sqrt_driver_limits(c: float) -> tuple[float, float]:
    """Roots (c +/- sqrt(c^2 + 16))/2 of x^2 - c*x - 4."""
    r = math.sqrt(c * c + 16.0)
    return 0.5 * (c + r), 0.5 * (c - r)


def ladder(T: float, levels: int = LADDER_LEVELS) -> np.ndarray:
    return T * 4.0 ** -np.arange(levels + 1)


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------

@dataclass
class LimitEstimate:
    value: float
    half_width: float
    samples_used: int
    method: str = "sqrt-fit"
    aitken: float = math.nan
    geometric: bool = True

    def as_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "half_width": self.half_width,
            "samples_used": self.samples_used,
            "method": self.method,
            "aitken": self.aitken,
            "geometric": self.geometric,
        }


def aitken(q: Sequence[float]) -> float:
    """Aitken delta-squared estimate from the last three terms."""
    q0, q1, q2 = (float(v) for v in q[-3:])
    d2 = q2 - 2.0 * q1 + q0
    if d2 == 0 or abs(d2) <= 1e-14 * max(abs(q0), abs(q1), abs(q2), 1e-300):
        return q2
    return q2 - (q2 - q1) ** 2 / d2


def extrapolate_limit(samples: Sequence[tuple[float, float]], n_fit: int = 4) -> LimitEstimate:
    """Estimate lim q(t) as t -> 0 from samples (t_i, q_i) with t decreasing.

    Least-squares fit of q = L + a*sqrt(t) on the last ``n_fit`` samples gives
    the value; Aitken's delta-squared on the same tail gives a second estimate
    and their distance is reported as the half width.
    """
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    if arr.shape[0] < 4:
        raise ValueError("need at least 4 samples")
    t, q = arr[:, 0], arr[:, 1]
    if np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ValueError("sample times must be positive and strictly decreasing")
    if not np.all(np.isfinite(q)):
        raise ValueError("sample values must be finite")
    tt, qq = t[-n_fit:], q[-n_fit:]
    X = np.column_stack([np.ones_like(tt), np.sqrt(tt)])
    (L, _), *_ = np.linalg.lstsq(X, qq, rcond=None)
    ait = aitken(qq)
    ratios = tt[1:] / tt[:-1]
    geometric = bool(np.ptp(ratios) <= 0.05 * np.mean(ratios))
    return LimitEstimate(float(L), float(abs(L - ait)), int(tt.size), "sqrt-fit", float(ait),
                         geometric)


# ---------------------------------------------------------------------------
# bound sequences
# ---------------------------------------------------------------------------

@dataclass
class BoundSequences:
    c: float
    kp: list
    kpp: list
    limit: float
    converged_at: Optional[int] = None

    @property
    def gap(self) -> float:
        return self.kpp[-1] - self.kp[-1]

    @property
    def monotone(self) -> bool:
        kp, kpp = np.asarray(self.kp), np.asarray(self.kpp)
        tol = _ulp_slack(self.limit)
        return bool(np.all(np.diff(kp) >= -tol) and np.all(np.diff(kpp) <= tol))

    @property
    def brackets(self) -> bool:
        kp, kpp = np.asarray(self.kp), np.asarray(self.kpp)
        tol = _ulp_slack(self.limit)
        return bool(np.all(kp <= self.limit + tol) and np.all(kpp >= self.limit - tol))


def _ulp_slack(x: float) -> float:
    # rounding noise allowed in the monotonicity and bracketing checks
    return 4 * np.finfo(float).eps * max(1.0, abs(x))


def bound_sequences(c: float, epsilon_prime: float = 0.5, n_steps: int = 60,
                    strict: bool = True) -> BoundSequences:
    """Lower/upper bound coefficients k'_n, k''_n with k'_n sqrt(t) < f1(0,t) < k''_n sqrt(t).

    Seeds: k'_1 is the positive root of 4 - g^2 + (c - eps')g, and
    k''_1 = 4/(k'_1 - (c + eps')).  Each later step integrates the Loewner
    equation against the previous lower bound: k''_n = 4/(k'_{n-1} - c),
    k'_n = 4/(k''_n - c), so that k'_n = 4/(4/(k'_{n-1} - c) - c).

    The fixed point x = 4/(x - c) has multiplier (x**2/4)**2 under one full
    step, so the iteration contracts for c < 0, is neutral for c = 0 and
    repels for c > 0.  With ``strict`` a DivergenceError (carrying the
    partial sequences) is raised as soon as monotonicity, bracketing or the
    positivity of a denominator fails.
    """
    if epsilon_prime <= 0:
        raise ValueError("epsilon_prime must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    limit = sqrt_driver_limits(c)[0]
    e = epsilon_prime
    kp1 = 0.5 * (math.sqrt((c - e) ** 2 + 16.0) + c - e)
    den = kp1 - (c + e)
    if den <= 0:
        raise DivergenceError(
            f"seed denominator k'_1 - (c + eps') = {den:.6g} <= 0; choose a smaller eps'", [kp1], []
        )
    kp, kpp = [kp1], [4.0 / den]
    seq = BoundSequences(c, kp, kpp, limit)
    for n in range(1, n_steps):
        if kp[-1] - c <= 0:
            raise DivergenceError(f"k'_{n} = {kp[-1]:.6g} <= c at step {n + 1}", kp, kpp)
        upper = 4.0 / (kp[-1] - c)
        if upper - c <= 0:
            raise DivergenceError(f"k''_{n + 1} = {upper:.6g} <= c at step {n + 1}", kp, kpp)
        lower = 4.0 / (upper - c)
        kp.append(lower)
        kpp.append(upper)
        if strict and not (seq.monotone and seq.brackets):
            raise DivergenceError(
                f"bound sequences lose monotonicity/bracketing at step {n + 1} "
                f"(k'={lower:.6g}, k''={upper:.6g}, limit={limit:.6g})", kp, kpp
            )
        if seq.converged_at is None and upper - lower < 1e-10:
            seq.converged_at = n + 1
    return seq


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class Report:
    claim: str
    parameters: dict
    measured: Any
    expected: Any
    tolerance: Any
    passed: bool
    details: dict = field(default_factory=dict)
    series: Optional[np.ndarray] = field(default=None, repr=False)
    series_header: Sequence[str] = ()

    def as_dict(self) -> dict[str, Any]:
        d = {
            "claim": self.claim,
            "parameters": self.parameters,
            "measured": self.measured,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }
        if self.details:
            d["details"] = self.details
        return d

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(_plain(self.as_dict()), indent=indent, sort_keys=False)

    def series_csv(self) -> str:
        if self.series is None:
            return ""
        lines = [",".join(self.series_header)]
        lines += [",".join(f"{v:.17g}" for v in row) for row in np.atleast_2d(self.series)]
        return "\n".join(lines) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def verify_bounds(c: float, epsilon_prime: float = 0.5, n_steps: int = 60,
                  gap_tol: float = 1e-8) -> Report:
    """Monotone, bracketing bound sequences whose gap drops below ``gap_tol`` within n_steps."""
    limit = sqrt_driver_limits(c)[0]
    failure = None
    try:
        seq = bound_sequences(c, epsilon_prime, n_steps, strict=False)
        kp, kpp = seq.kp, seq.kpp
    except DivergenceError as exc:
        seq, kp, kpp, failure = None, exc.kp, exc.kpp, str(exc)
    kp_a, kpp_a = np.asarray(kp, float), np.asarray(kpp, float)
    tol = _ulp_slack(limit)
    monotone = bool(np.all(np.diff(kp_a) >= -tol) and np.all(np.diff(kpp_a) <= tol))
    brackets = bool(np.all(kp_a <= limit + tol) and np.all(kpp_a >= limit - tol))
    gaps = kpp_a - kp_a
    below = np.flatnonzero(np.abs(gaps) < gap_tol)
    reached = int(below[0]) + 1 if below.size else None
    passed = failure is None and monotone and brackets and reached is not None
    return Report(
        claim="bounds",
        parameters={"c": c, "epsilon_prime": epsilon_prime, "n_steps": n_steps},
        measured={"kp": float(kp_a[-1]), "kpp": float(kpp_a[-1]), "gap": float(gaps[-1])},
        expected=limit,
        tolerance={"gap": gap_tol},
        passed=passed,
        details={"monotone": monotone, "brackets": brackets, "gap_reached_at": reached,
                 "failure": failure, "converged_at": None if seq is None else seq.converged_at},
        series=np.column_stack([np.arange(1, kp_a.size + 1), kp_a, kpp_a]),
        series_header=("n", "kp", "kpp"),
    )


def verify_mc(n_walkers: int = 1_000_000, seed: int = 0, height: float = 1.0,
              n_sigma: float = 3.0) -> Report:
    """Random-walk harmonic measure of the right side of a vertical slit versus the conformal value.

    The walkers start at the preimage of i under the map of the final time,
    so the conformal value is hm(i; [lambda, f1]).
    """
    T = height * height / 4.0
    term = DrivingTerm.zero()
    mesh = make_graded_mesh(T, 64)
    res = singular_solutions(term, mesh)
    m1, _ = hm_slit_sides(res, mesh.N)
    z0 = solve_inverse(term, mesh, 1j)
    walk = hm_mc_oracle(Curve(np.array([0.0, 1j * height])), 1, z0, n_walkers, seed=seed)
    dev = abs(walk.estimate - m1)
    return Report(
        claim="mc",
        parameters={"n_walkers": n_walkers, "seed": seed, "height": height},
        measured={"estimate": walk.estimate, "stderr": walk.stderr},
        expected=m1,
        tolerance={"n_sigma": n_sigma},
        passed=dev <= n_sigma * walk.stderr,
        details={"z0": [z0.real, z0.imag], "deviation": dev, "absorbed": walk.absorbed,
                 "lost": walk.lost, "counts": walk.counts},
    )


# ---------------------------------------------------------------------------
# closed-form drivers: singular solutions on the ladder
# ---------------------------------------------------------------------------

def ladder_ratios(term: DrivingTerm, T: float = 1.0, N: int = DEFAULT_N,
                  refine: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(t_i, f1/sqrt(t), f2/sqrt(t)) on the ladder from quadratically graded meshes.

    With ``refine`` the first-order discretisation error is removed by the
    mesh-pair combination 2*q(2N) - q(N); the ladder times are common nodes
    of both meshes when N is divisible by 2**12.
    """
    mesh = make_graded_mesh(T, N, 2.0)
    idx = np.array([mesh.nearest(t) for t in ladder(T)])
    res = singular_solutions(term, mesh)
    t = mesh.nodes[idx]
    root = np.sqrt(t)
    q1, q2 = res.f1[idx] / root, res.f2[idx] / root
    if refine:
        fine = singular_solutions(term, mesh.refined())
        q1 = 2.0 * fine.f1[2 * idx] / root - q1
        q2 = 2.0 * fine.f2[2 * idx] / root - q2
    return t, q1, q2


def singular_limits(term: DrivingTerm, T: float = 1.0, N: int = DEFAULT_N,
                    refine: bool = True) -> tuple[LimitEstimate, LimitEstimate, np.ndarray]:
    t, q1, q2 = ladder_ratios(term, T, N, refine)
    return (extrapolate_limit(list(zip(t, q1))), extrapolate_limit(list(zip(t, q2))),
            np.column_stack([t, q1, q2]))


def singular_limits_ode(term: DrivingTerm, T: float = 1.0) -> tuple[LimitEstimate, LimitEstimate]:
    """Same ladder extrapolation fed by the log-time RK oracle instead of the map composition."""
    from .evolution import singular_solutions_ode

    t = ladder(T)
    f1, f2 = singular_solutions_ode(term, t, t_start=T * 1e-30)
    root = np.sqrt(t)
    return (extrapolate_limit(list(zip(t, f1 / root))),
            extrapolate_limit(list(zip(t, f2 / root))))


def verify_thm2(c: float, N: int = DEFAULT_N, perturbation: float = 1.0,
                tol: float = 1e-3, tol_perturbed: float = 5e-3) -> Report:
    """Limits of f_k(0,t)/sqrt(t) for lambda = c*sqrt(t), and for c*sqrt(t) + perturbation*t."""
    if abs(c) > 4:
        raise ValueError("|c| must be <= 4")
    exp1, exp2 = sqrt_driver_limits(c)
    measured, errors, ok, series = {}, {}, True, None
    cases = [("exact", DrivingTerm.sqrt(c), tol)]
    if perturbation:
        cases.append(("perturbed", DrivingTerm.sqrt(c, perturbation), tol_perturbed))
    for name, term, tl in cases:
        l1, l2, rows = singular_limits(term, 1.0, N)
        e1, e2 = abs(l1.value - exp1), abs(l2.value - exp2)
        measured[name] = {"f1": l1.as_dict(), "f2": l2.as_dict()}
        errors[name] = {"f1": e1, "f2": e2}
        ok = ok and e1 <= tl and e2 <= tl
        if series is None:
            series = rows
    return Report(
        claim="thm2",
        parameters={"c": c, "N": N, "perturbation": perturbation},
        measured={k: {"f1": v["f1"]["value"], "f2": v["f2"]["value"]} for k, v in measured.items()},
        expected={"f1": exp1, "f2": exp2},
        tolerance={"exact": tol, "perturbed": tol_perturbed},
        passed=ok,
        details={"errors": errors, "estimates": measured},
        series=series,
        series_header=("t", "f1_over_sqrt_t", "f2_over_sqrt_t"),
    )


def thm3_ladder_top(A: float, alpha: float, scale: float = THM3_DRIVER_SCALE) -> float:
    """Largest T <= 1 with |A|*T**(alpha - 1/2) <= scale, i.e. |lambda(T)| <= scale*sqrt(T).

    The relative correction lambda/sqrt(t) decays only like t**(alpha - 1/2),
    so for alpha close to 1/2 the ladder has to sit very close to t = 0.
    """
    return min(1.0, (scale / abs(A)) ** (1.0 / (alpha - 0.5)))


def verify_thm3(A: float, alpha: float, N: int = DEFAULT_N, tol: float = 5e-3,
                T: Optional[float] = None) -> Report:
    """f1/sqrt(t) -> 2 and f2/sqrt(t) -> -2 for lambda = A*t**alpha, alpha > 1/2."""
    if not alpha > 0.5:
        raise ValueError("alpha must exceed 1/2")
    if A == 0:
        raise ValueError("A must be nonzero")
    T = thm3_ladder_top(A, alpha) if T is None else T
    l1, l2, rows = singular_limits(DrivingTerm.power(A, alpha), T, N)
    e1, e2 = abs(l1.value - 2.0), abs(l2.value + 2.0)
    return Report(
        claim="thm3",
        parameters={"A": A, "alpha": alpha, "N": N, "T": T},
        measured={"f1": l1.value, "f2": l2.value},
        expected={"f1": 2.0, "f2": -2.0},
        tolerance=tol,
        passed=e1 <= tol and e2 <= tol,
        details={"errors": {"f1": e1, "f2": e2}, "f1": l1.as_dict(), "f2": l2.as_dict()},
        series=rows,
        series_header=("t", "f1_over_sqrt_t", "f2_over_sqrt_t"),
    )


# ---------------------------------------------------------------------------
# zipper fixtures
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def zipped_fixture(kind: str, param: float, n: int, extent: Optional[float] = None):
    """(curve, driving term, mesh, evolution) for a named fixture; cached per process.

    kind: "arc" (param = radius, extent = max angle), "line" (param = c_angle,
    extent = length) or "vertical" (param = height).
    """
    if kind == "arc":
        curve = make_arc_curve(param, math.pi / 2 if extent is None else extent, n)
    elif kind == "line":
        curve = make_line_curve(param, 1.0 if extent is None else extent, n)
    elif kind == "vertical":
        curve = make_vertical_curve(param, n, grading=2.0)
    else:
        raise ValueError(f"unknown fixture {kind!r}")
    term, mesh = compute_driving(curve)
    return curve, term, mesh, singular_solutions(term, mesh)


def _ladder_nodes(mesh: TimeMesh) -> np.ndarray:
    idx = [mesh.nearest(t) for t in ladder(mesh.T)]
    idx = np.array(sorted(set(idx), reverse=True))
    return idx[idx >= 1]


def fixture_ladder(kind: str, param: float, n: int, extent: Optional[float] = None) -> dict:
    """Ratios m1/m2, s/sqrt(t) and lambda/sqrt(t) at the ladder nodes of a fixture."""
    curve, term, mesh, res = zipped_fixture(kind, param, n, extent)
    idx = _ladder_nodes(mesh)
    ms = measure_series(res, idx)
    t = mesh.nodes[idx]
    root = np.sqrt(t)
    return {
        "t": t,
        "m1": ms.m1,
        "m2": ms.m2,
        "ratio": ms.ratio,
        "s_over_sqrt_t": curve.arclength[idx] / root,
        "lambda_over_sqrt_t": res.lam[idx] / root,
        "series": ms,
    }


def verify_thm1(radius: float = 1.0, n_points: int = DEFAULT_FIXTURE_POINTS,
                tol: float = 5e-3, fixture: str = "arc", monotone_tail: int = 6) -> Report:
    """m1/m2 -> 1 for a slit leaving R perpendicularly.

    ``fixture="vertical"`` runs the symmetric control (a vertical segment of
    height ``radius``), whose ratio is 1 at every node.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    lad = fixture_ladder(fixture, float(radius), int(n_points))
    ratio = lad["ratio"]
    est = extrapolate_limit(list(zip(lad["t"], ratio)))
    dev = np.abs(ratio[-monotone_tail:] - 1.0)
    monotone = bool(np.all(np.diff(dev) <= 0))
    err = abs(est.value - 1.0)
    if fixture == "vertical":
        max_dev = float(np.max(np.abs(ratio - 1.0)))
        passed = max_dev <= 1e-12
    else:
        max_dev = float(np.max(dev))
        passed = err <= tol and monotone
    return Report(
        claim="thm1",
        parameters={"radius": radius, "n_points": n_points, "fixture": fixture},
        measured=est.value,
        expected=1.0,
        tolerance=tol if fixture != "vertical" else 1e-12,
        passed=passed,
        details={"estimate": est.as_dict(), "tail_monotone": monotone,
                 "max_abs_ratio_minus_1": max_dev, "error": err},
        series=np.column_stack([lad["t"], lad["m1"], lad["m2"], ratio]),
        series_header=("t", "m1", "m2", "ratio"),
    )


def verify_arclength(radius: float = 1.0, n_points: int = DEFAULT_FIXTURE_POINTS,
                     rel_tol: float = 1e-2, fixture: str = "arc") -> Report:
    """s(t)/sqrt(t) -> 2 for a perpendicular slit."""
    lad = fixture_ladder(fixture, float(radius), int(n_points))
    est = extrapolate_limit(list(zip(lad["t"], lad["s_over_sqrt_t"])))
    err = abs(est.value - 2.0) / 2.0
    return Report(
        claim="arclength",
        parameters={"radius": radius, "n_points": n_points, "fixture": fixture},
        measured=est.value,
        expected=2.0,
        tolerance={"relative": rel_tol},
        passed=err <= rel_tol,
        details={"estimate": est.as_dict(), "relative_error": err},
        series=np.column_stack([lad["t"], lad["s_over_sqrt_t"]]),
        series_header=("t", "s_over_sqrt_t"),
    )


def verify_prop1(c_angle: float, n_points: int = DEFAULT_FIXTURE_POINTS,
                 rel_tol: float = 2e-2) -> Report:
    """M1/M2 -> (1 - c)/(1 + c) for a slit tangent to the ray at angle (pi/2)(1 - c)."""
    if abs(c_angle) > 0.7:
        raise ValueError("|c_angle| must be <= 0.7")
    lad = fixture_ladder("line", float(c_angle), int(n_points))
    est = extrapolate_limit(list(zip(lad["t"], lad["ratio"])))
    s_est = extrapolate_limit(list(zip(lad["t"], lad["s_over_sqrt_t"])))
    c_est = extrapolate_limit(list(zip(lad["t"], lad["lambda_over_sqrt_t"])))
    expected = (1.0 - c_angle) / (1.0 + c_angle)
    err = abs(est.value - expected) / expected
    return Report(
        claim="prop1",
        parameters={"c_angle": c_angle, "n_points": n_points},
        measured=est.value,
        expected=expected,
        tolerance={"relative": rel_tol},
        passed=err <= rel_tol,
        details={
            "estimate": est.as_dict(),
            "relative_error": err,
            "s_over_sqrt_t": s_est.as_dict(),
            "driving_coefficient": c_est.as_dict(),
        },
        series=np.column_stack([lad["t"], lad["m1"], lad["m2"], lad["ratio"],
                                lad["s_over_sqrt_t"], lad["lambda_over_sqrt_t"]]),
        series_header=("t", "m1", "m2", "ratio", "s_over_sqrt_t", "lambda_over_sqrt_t"),
    )


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

def departure_angle(term: DrivingTerm, N: int = 4000, T: float = 1.0,
                    decade: float = 0.1) -> float:
    """Angle of the trace at 0: intercept of a linear fit of arg(tip) against arclength.

    Only tips within the first ``decade`` fraction of the total arclength are used.
    """
    mesh = make_graded_mesh(T, N, 2.0)
    tips = trace_points(term, mesh)
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(tips)))])
    sel = (s > 0) & (s <= decade * s[-1])
    X = np.column_stack([np.ones(int(sel.sum())), s[sel]])
    (theta0, _), *_ = np.linalg.lstsq(X, np.angle(tips[sel]), rcond=None)
    return float(theta0)


def verify_cor1(c: float, N: int = 4000, min_departure: float = 0.1,
                mirror_tol: float = 1e-3) -> Report:
    """A driver c*sqrt(t) with c != 0 produces a trace that is not perpendicular to R."""
    if not 0 < abs(c) <= 4:
        raise ValueError("need 0 < |c| <= 4")
    angle = departure_angle(DrivingTerm.sqrt(c), N)
    mirror = departure_angle(DrivingTerm.sqrt(-c), N)
    control = departure_angle(DrivingTerm.zero(), N)
    mags = sorted({0.5, 1.0, 2.0, 4.0, abs(c)})
    sweep = [abs(departure_angle(DrivingTerm.sqrt(m), N) - math.pi / 2) for m in mags]
    monotone = bool(np.all(np.diff(sweep) > 0))
    departure = abs(angle - math.pi / 2)
    mirror_err = abs(mirror - (math.pi - angle))
    control_err = abs(control - math.pi / 2)
    passed = departure > min_departure and monotone and mirror_err <= mirror_tol \
        and control_err <= 1e-3
    return Report(
        claim="cor1",
        parameters={"c": c, "N": N},
        measured={"angle": angle, "departure": departure},
        expected={"departure_greater_than": min_departure},
        tolerance={"min_departure": min_departure, "mirror": mirror_tol, "control": 1e-3},
        passed=passed,
        details={
            "mirror_angle": mirror,
            "mirror_error": mirror_err,
            "control_angle": control,
            "control_error": control_err,
            "sweep_abs_c": mags,
            "sweep_departure": sweep,
            "monotone_in_abs_c": monotone,
        },
    )


def verify_scaling(term: DrivingTerm, n: float, mesh: Optional[TimeMesh] = None,
                   rel_tol: float = 1e-6) -> Report:
    """Trace of sqrt(n)*lambda(t/n) equals sqrt(n) times the trace of lambda, node by node."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if mesh is None:
        mesh = TimeMesh(term.times) if term.kind == "sampled" else make_graded_mesh(1.0, 2000)
    base = trace_points(term, mesh)
    scaled = trace_points(term.scaled(n), mesh.scaled(n))
    ref = math.sqrt(n) * base
    err = float(np.max(np.abs(scaled - ref)) / np.max(np.abs(ref)))
    return Report(
        claim="scaling",
        parameters={"term": term.kind, "n": n, "N": mesh.N},
        measured=err,
        expected=0.0,
        tolerance={"relative": rel_tol},
        passed=err <= rel_tol,
    )


def verify_roundtrip(N: int = 10_000, T: float = 0.2, frequency: float = 5.0,
                     tol: float = 0.02) -> Report:
    """Sampled sin(frequency*t) -> trace -> zipper -> driving; sup error of the recovery."""
    mesh = make_graded_mesh(T, N, 2.0)
    nodes = mesh.nodes
    term = DrivingTerm.sampled(nodes, np.sin(frequency * nodes))
    tips = trace_points(term, mesh)
    recovered, rmesh = compute_driving(Curve(tips))
    err = float(np.max(np.abs(recovered.values - np.sin(frequency * rmesh.nodes))))
    cap_err = float(abs(rmesh.T - T) / T)
    return Report(
        claim="roundtrip",
        parameters={"N": N, "T": T, "frequency": frequency},
        measured=err,
        expected=0.0,
        tolerance=tol,
        passed=err <= tol,
        details={"capacity_relative_error": cap_err},
    )
