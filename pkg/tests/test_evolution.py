import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from loewner_slits import (
    ConsistencyError,
    DrivingTerm,
    HullCollisionError,
    TimeMesh,
    compute_trace,
    elementary_slit_map,
    elementary_slit_map_inverse,
    evolve,
    hydrodynamic_coefficient,
    make_graded_mesh,
    singular_solutions,
    solve_forward,
    solve_inverse,
)
from loewner_slits.evolution import (
    EvolutionResult,
    singular_solutions_ode,
    solve_forward_extrapolated,
    solve_forward_ode,
    trace_points,
)


# -- meshes -----------------------------------------------------------------

@pytest.mark.parametrize("T, N, p, expected", [
    (1.0, 2, 1.0, [0, 0.5, 1]),
    (1.0, 2, 2.0, [0, 0.25, 1]),
    (4.0, 4, 2.0, [0, 0.25, 1, 2.25, 4]),
])
def test_graded_mesh_examples(T, N, p, expected):
    assert np.allclose(make_graded_mesh(T, N, p).nodes, expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("T, N, p", [(0.0, 4, 2.0), (-1.0, 4, 2.0), (1.0, 1, 2.0), (1.0, 4, 0.5)])
def test_graded_mesh_errors(T, N, p):
    with pytest.raises(ValueError):
        make_graded_mesh(T, N, p)


def test_mesh_validation_and_refinement():
    with pytest.raises(ValueError):
        TimeMesh([0.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        TimeMesh([0.5, 1.0])
    mesh = make_graded_mesh(1.0, 8)
    fine = mesh.refined()
    assert fine.N == 16 and np.allclose(fine.nodes[::2], mesh.nodes, atol=1e-16)
    plain = TimeMesh([0.0, 1.0, 3.0]).refined()
    assert np.array_equal(plain.nodes, [0.0, 0.5, 1.0, 2.0, 3.0])
    assert mesh.nearest(0.26) == 4


# -- one-step maps ----------------------------------------------------------

def test_elementary_map_examples():
    assert abs(elementary_slit_map(1j, 0.0, 0.25)) < 1e-15
    assert elementary_slit_map(0.0, 0.0, 0.25) == pytest.approx(1.0, abs=1e-15)
    assert elementary_slit_map(10.0, 0.0, 0.25) == pytest.approx(math.sqrt(101), abs=1e-13)
    assert elementary_slit_map(10.0, 0.0, 0.25).real == pytest.approx(10 + 2 * 0.25 / 10, abs=1e-3)


def test_inverse_map_examples():
    assert elementary_slit_map_inverse(0.0, 0.0, 0.25) == pytest.approx(1j, abs=1e-15)
    assert elementary_slit_map_inverse(3.0, 0.0, 0.25) == pytest.approx(math.sqrt(8), abs=1e-14)
    w = 1 + 2j
    back = elementary_slit_map_inverse(elementary_slit_map(w, 0.3, 0.1), 0.3, 0.1)
    assert abs(back - w) <= 1e-12


def test_real_axis_branches():
    # points left of lambda stay left, right of lambda stay right
    assert elementary_slit_map(-2.0, 0.0, 1.0).real == pytest.approx(-math.sqrt(8))
    assert elementary_slit_map(2.0, 0.0, 1.0).real == pytest.approx(math.sqrt(8))
    # slit points go to the real segment on the side they came from
    assert elementary_slit_map_inverse(1.5, 0.0, 1.0) == pytest.approx(1j * math.sqrt(1.75))


def test_negative_delta_rejected():
    with pytest.raises(ValueError):
        elementary_slit_map(1j, 0.0, -1.0)
    with pytest.raises(ValueError):
        elementary_slit_map_inverse(1j, 0.0, -1.0)


def test_inverse_pairing_batch():
    rng = np.random.default_rng(12345)
    w = rng.uniform(-3, 3, 1000) + 1j * rng.uniform(0.01, 3, 1000)
    lam = rng.uniform(-2, 2, 1000)
    delta = rng.uniform(1e-4, 1, 1000)
    for wk, lk, dk in zip(w, lam, delta):
        fwd = elementary_slit_map(wk, lk, dk)
        assert fwd.imag > 0
        assert abs(elementary_slit_map_inverse(fwd, lk, dk) - wk) <= 1e-12 * max(1.0, abs(wk))


def test_slit_points_map_to_real_axis():
    out = elementary_slit_map(1j, 0.0, 1.0)
    assert out.imag == 0.0 and out.real == pytest.approx(math.sqrt(3))


@settings(max_examples=300, deadline=None)
@given(x=st.floats(-5, 5), y=st.floats(1e-3, 5), lam=st.floats(-3, 3), delta=st.floats(1e-6, 2))
def test_branch_sanity(x, y, lam, delta):
    # points on the slit [lam, lam + 2i*sqrt(delta)] itself map onto R
    assume(abs(x - lam) > 1e-6 or y > 2 * math.sqrt(delta) * (1 + 1e-6))
    w = complex(x, y)
    assert elementary_slit_map(w, lam, delta).imag > 0
    assert elementary_slit_map_inverse(w, lam, delta).imag > 0


# -- forward solutions ------------------------------------------------------

def test_forward_zero_term_closed_form():
    mesh = make_graded_mesh(0.2, 500)
    f = solve_forward(DrivingTerm.zero(), mesh, 1j)
    assert f[0] == 1j
    exact = np.sqrt((1j) ** 2 + 4 * mesh.nodes.astype(complex))
    assert np.max(np.abs(f - exact)) < 1e-12
    g = solve_forward(DrivingTerm.zero(), make_graded_mesh(2.0, 500), 1 + 1j)
    assert abs(g[-1] - cmath.sqrt((1 + 1j) ** 2 + 8)) < 1e-12


def test_forward_against_rk_oracle():
    term = DrivingTerm.sqrt(1.0)
    mesh = make_graded_mesh(1.0, 100_000)
    oracle = solve_forward_ode(term, [0.0, 0.25, 1.0], 1j)
    ours = solve_forward_extrapolated(term, mesh, 1j)
    idx = [0, mesh.nearest(0.25), mesh.N]
    assert np.max(np.abs(ours[idx] - oracle)) < 1e-6
    # the plain first-order composition on its own is within a few 1e-6
    assert abs(solve_forward(term, mesh, 1j)[-1] - oracle[-1]) < 1e-5


def test_forward_point_swallowed_by_slit():
    # i lies on the vertical slit [0, 2i*sqrt(t)] once t >= 1/4
    with pytest.raises(HullCollisionError) as info:
        solve_forward(DrivingTerm.zero(), make_graded_mesh(2.0, 2), 1j)
    assert info.value.step == 1 or info.value.step == 2
    with pytest.raises(HullCollisionError):
        solve_forward(DrivingTerm.zero(), make_graded_mesh(2.0, 1000), 1j)


def test_forward_rejects_real_start():
    with pytest.raises(ValueError):
        solve_forward(DrivingTerm.zero(), make_graded_mesh(1.0, 4), 1.0)


def test_solve_inverse_undoes_forward():
    term = DrivingTerm.sqrt(0.7)
    mesh = make_graded_mesh(0.5, 300)
    z = 0.3 + 1.7j
    w = solve_forward(term, mesh, z)[-1]
    assert abs(solve_inverse(term, mesh, w) - z) < 1e-10


# -- singular solutions -----------------------------------------------------

def test_singular_zero_term_exact():
    mesh = make_graded_mesh(1.0, 1000)
    res = singular_solutions(DrivingTerm.zero(), mesh)
    root = 2 * np.sqrt(mesh.nodes)
    assert np.max(np.abs(res.f1 - root)) <= 1e-12
    assert np.max(np.abs(res.f2 + root)) <= 1e-12


@pytest.mark.parametrize("term", [
    DrivingTerm.sqrt(-2.0), DrivingTerm.sqrt(-1.0), DrivingTerm.sqrt(0.0), DrivingTerm.sqrt(1.0),
    DrivingTerm.sqrt(2.0), DrivingTerm.sqrt(2.0, 1.0), DrivingTerm.sqrt(-2.0, 1.0),
    DrivingTerm.power(1.0, 0.75), DrivingTerm.power(1.0, 1.0), DrivingTerm.power(-3.0, 0.6),
])
def test_singular_ordering_and_monotonicity(term):
    res = singular_solutions(term, make_graded_mesh(1.0, 4000))
    assert np.all(res.f2[1:] < res.lam[1:]) and np.all(res.lam[1:] < res.f1[1:])
    assert np.all(np.diff(res.f1) > 0) and np.all(np.diff(res.f2) < 0)


def test_singular_overshoot_guard():
    # a driver that jumps far past f1 is not a continuous driving term
    term = DrivingTerm.sampled([0.0, 0.01, 0.02], [0.0, 5.0, 5.0])
    with pytest.raises(ConsistencyError):
        singular_solutions(term, TimeMesh([0.0, 0.01, 0.02]))


def test_singular_against_log_time_oracle():
    term = DrivingTerm.sqrt(1.0)
    mesh = make_graded_mesh(1.0, 200_000)
    res = singular_solutions(term, mesh)
    f1, f2 = singular_solutions_ode(term, [1.0])
    assert abs(res.f1[-1] - f1[0]) < 2e-5
    assert abs(res.f2[-1] - f2[0]) < 2e-5


def test_mesh_refinement_first_order():
    term = DrivingTerm.sqrt(1.0)
    vals = [singular_solutions(term, make_graded_mesh(1.0, n)).f1[-1] for n in (500, 1000, 2000)]
    d1, d2 = abs(vals[1] - vals[0]), abs(vals[2] - vals[1])
    assert math.log2(d1 / d2) >= 0.95


def test_singular_needs_a_step():
    with pytest.raises(ValueError):
        singular_solutions(DrivingTerm.zero(), TimeMesh([0.0]))


# -- trace ------------------------------------------------------------------

def test_trace_zero_term_vertical():
    mesh = make_graded_mesh(1.0, 400)
    tips = trace_points(DrivingTerm.zero(), mesh)
    assert tips[0] == 0
    assert np.max(np.abs(tips - 2j * np.sqrt(mesh.nodes))) < 1e-12
    curve = compute_trace(DrivingTerm.zero(), mesh)
    assert curve.tip == pytest.approx(2j, abs=1e-12)


def test_trace_sqrt_driver_leans_over():
    tips = trace_points(DrivingTerm.sqrt(2.0), make_graded_mesh(1.0, 2000))
    assert np.all(tips[1:].imag > 0)
    # the first step uses lambda(0) = 0 and is vertical; skip the start-up
    angles = np.angle(tips[10:])
    assert np.all(angles > 0) and np.all(angles < math.pi / 2 - 0.1)


def test_trace_single_step_tip():
    tip = trace_points(DrivingTerm.sqrt(1.0), TimeMesh([0.0, 0.25]))[-1]
    assert tip == pytest.approx(1j)


def test_evolve_and_csv(tmp_path):
    mesh = make_graded_mesh(1.0, 10)
    res = evolve(DrivingTerm.sqrt(1.0), mesh)
    assert isinstance(res, EvolutionResult) and res.tip.shape == (11,)
    text = res.to_csv(tmp_path / "evo.csv")
    lines = text.splitlines()
    assert lines[0] == "t,lambda,f1,f2,tip_re,tip_im"
    assert len(lines) == 12
    row = [float(v) for v in lines[5].split(",")]
    assert row[0] == mesh.nodes[4] and row[2] == res.f1[4]
    assert (tmp_path / "evo.csv").read_text() == text
    bare = evolve(DrivingTerm.zero(), mesh, with_trace=False).to_csv()
    assert bare.splitlines()[1].endswith("nan,nan")


# -- normalisation ----------------------------------------------------------

@pytest.mark.parametrize("term, T", [(DrivingTerm.zero(), 1.0), (DrivingTerm.sqrt(1.0), 0.5)])
def test_hydrodynamic_coefficient(term, T):
    b = hydrodynamic_coefficient(term, make_graded_mesh(T, 1000), R=1000.0)
    assert abs(b - 2 * T) <= 1e-3 * 2 * T
    # two radii agree, so the residual is negligible
    b2 = hydrodynamic_coefficient(term, make_graded_mesh(T, 1000), R=2000.0)
    assert abs(b - b2) < 1e-5


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_capacity_independent_of_grading(p):
    b = hydrodynamic_coefficient(DrivingTerm.power(1.0, 0.75), make_graded_mesh(0.8, 2000, p))
    assert b == pytest.approx(1.6, rel=1e-4)


def test_hydrodynamic_edge_cases():
    assert hydrodynamic_coefficient(DrivingTerm.zero(), TimeMesh([0.0])) == 0.0
    with pytest.raises(ValueError):
        hydrodynamic_coefficient(DrivingTerm.zero(), make_graded_mesh(1.0, 10), R=10.0)
