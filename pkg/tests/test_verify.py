import json
import math

import numpy as np
import pytest

from loewner_slits import DivergenceError, DrivingTerm, make_graded_mesh
from loewner_slits import verify as V


# -- extrapolation ----------------------------------------------------------

def test_extrapolate_exact_model():
    t = 4.0 ** -np.arange(13)
    est = V.extrapolate_limit(list(zip(t, 2 + np.sqrt(t))))
    assert est.value == pytest.approx(2.0, abs=1e-12)
    assert est.half_width <= 1e-10
    assert est.samples_used == 4 and est.method == "sqrt-fit" and est.geometric


def test_extrapolate_constant():
    t = 4.0 ** -np.arange(6)
    est = V.extrapolate_limit(list(zip(t, np.full(6, 5.0))))
    assert est.value == pytest.approx(5.0, abs=1e-14)
    assert est.half_width == pytest.approx(0.0, abs=1e-14)


def test_extrapolate_argument_checks():
    with pytest.raises(ValueError):
        V.extrapolate_limit([(1, 1), (0.5, 1), (0.25, 1)])
    with pytest.raises(ValueError):
        V.extrapolate_limit([(1, 1), (0.5, 1), (0.5, 1), (0.1, 1)])
    with pytest.raises(ValueError):
        V.extrapolate_limit([(1, 1), (0.5, 1), (0.25, 1), (0.0, 1)])


def test_extrapolate_flags_irregular_spacing():
    t = np.array([1.0, 0.5, 0.1, 0.09, 0.001])
    assert not V.extrapolate_limit(list(zip(t, 1 + np.sqrt(t)))).geometric


def test_aitken():
    q = 3 + 0.5 ** np.arange(5)
    assert V.aitken(q) == pytest.approx(3.0, abs=1e-14)


def test_ladder():
    lad = V.ladder(1.0)
    assert lad.size == 13 and lad[0] == 1.0 and lad[-1] == 4.0 ** -12


def test_sqrt_driver_limit_from_ladder():
    l1, l2, _ = V.singular_limits(DrivingTerm.sqrt(1.0), 1.0, 1 << 15)
    assert l1.value == pytest.approx((1 + math.sqrt(17)) / 2, abs=1e-3)
    assert l2.value == pytest.approx((1 - math.sqrt(17)) / 2, abs=1e-3)


# -- bound sequences --------------------------------------------------------

def test_bound_sequences_negative_c_converges():
    seq = V.bound_sequences(-2.0)
    assert seq.limit == pytest.approx(math.sqrt(5) - 1, abs=1e-15)
    assert seq.monotone and seq.brackets
    assert seq.converged_at is not None and seq.converged_at <= 60
    assert seq.gap < 1e-10


def test_bound_sequences_zero_c_stalls():
    # the two-step map x -> 4/(4/x) is the identity, so the seeds never move
    seq = V.bound_sequences(0.0, strict=False)
    assert seq.limit == 2.0
    assert seq.gap == pytest.approx(0.5, abs=1e-12)
    assert seq.converged_at is None


def test_bound_sequences_positive_c_diverges():
    with pytest.raises(DivergenceError) as info:
        V.bound_sequences(1.0)
    assert len(info.value.kp) >= 1


@pytest.mark.parametrize("c", [-2.0, -1.0])
def test_bound_sequences_bracket_extrapolated_limit(c):
    seq = V.bound_sequences(c)
    l1, _, _ = V.singular_limits(DrivingTerm.sqrt(c), 1.0)
    assert np.all(np.asarray(seq.kp) <= l1.value + 1e-3)
    assert np.all(np.asarray(seq.kpp) >= l1.value - 1e-3)


def test_bound_sequences_argument_checks():
    with pytest.raises(ValueError):
        V.bound_sequences(1.0, epsilon_prime=0.0)
    with pytest.raises(ValueError):
        V.bound_sequences(1.0, n_steps=0)
    with pytest.raises(DivergenceError):
        V.bound_sequences(4.0, epsilon_prime=0.5)  # seed denominator is negative


def test_verify_bounds_report():
    ok = V.verify_bounds(-2.0)
    assert ok.passed and ok.details["gap_reached_at"] <= 60
    assert not V.verify_bounds(0.0).passed
    bad = V.verify_bounds(1.0)
    assert not bad.passed and bad.details["failure"]
    assert bad.series_csv().splitlines()[0] == "n,kp,kpp"


# -- reports ----------------------------------------------------------------

def test_report_json_shape():
    rep = V.verify_thm3(1.0, 1.0, N=1 << 14)
    d = json.loads(rep.to_json())
    assert {"claim", "parameters", "measured", "expected", "tolerance", "pass"} <= set(d)
    assert d["pass"] is True
    assert rep.series_csv().splitlines()[0] == "t,f1_over_sqrt_t,f2_over_sqrt_t"


def test_report_nonfinite_values_serialise():
    rep = V.Report("x", {}, math.inf, 0.0, 1.0, False)
    assert json.loads(rep.to_json())["measured"] == "inf"


def test_verify_thm2_argument_range():
    with pytest.raises(ValueError):
        V.verify_thm2(4.5)


def test_verify_thm3_argument_checks():
    with pytest.raises(ValueError):
        V.verify_thm3(1.0, 0.5)
    with pytest.raises(ValueError):
        V.verify_thm3(0.0, 1.0)


def test_thm3_ladder_top():
    assert V.thm3_ladder_top(1.0, 1.0) == pytest.approx(1e-4)
    assert V.thm3_ladder_top(1e-5, 1.0) == 1.0


# -- cross checks -----------------------------------------------------------

@pytest.mark.parametrize("term, T", [
    (DrivingTerm.sqrt(1.0), 1.0),
    (DrivingTerm.sqrt(-2.0), 1.0),
    (DrivingTerm.sqrt(0.5, 1.0), 1.0),
    (DrivingTerm.power(1.0, 0.75), V.thm3_ladder_top(1.0, 0.75)),
])
def test_map_engine_agrees_with_ode_engine(term, T):
    a1, a2, _ = V.singular_limits(term, T)
    b1, b2 = V.singular_limits_ode(term, T)
    assert abs(a1.value - b1.value) <= 2 * max(a1.half_width, b1.half_width) + 1e-9
    assert abs(a2.value - b2.value) <= 2 * max(a2.half_width, b2.half_width) + 1e-9


def test_power_law_limits_match_zero_coefficient_case():
    zero = V.verify_thm2(0.0, perturbation=0.0)
    for A, alpha in ((1.0, 0.75), (1.0, 1.0), (-3.0, 0.6)):
        rep = V.verify_thm3(A, alpha)
        assert abs(rep.measured["f1"] - zero.measured["exact"]["f1"]) <= 1e-3 + 1e-4
        assert abs(rep.measured["f2"] - zero.measured["exact"]["f2"]) <= 1e-3 + 1e-4


def test_arc_radius_independence():
    small = V.verify_thm1(0.5, 4000)
    assert abs(small.measured - 1.0) <= 5e-3


def test_line_ratio_ordering():
    r = [V.verify_prop1(c, 4000).measured for c in (-0.5, 0.0, 0.5)]
    assert r[0] > r[1] > r[2]
    assert r[1] == pytest.approx(1.0, abs=1e-3)


def test_prop1_argument_range():
    with pytest.raises(ValueError):
        V.verify_prop1(0.75)


def test_departure_angle_reflection():
    a = V.departure_angle(DrivingTerm.sqrt(1.5), 1000)
    b = V.departure_angle(DrivingTerm.sqrt(-1.5), 1000)
    assert a + b == pytest.approx(math.pi, abs=1e-12)
    assert V.departure_angle(DrivingTerm.zero(), 1000) == pytest.approx(math.pi / 2, abs=1e-12)


def test_cor1_argument_range():
    with pytest.raises(ValueError):
        V.verify_cor1(0.0)


@pytest.mark.parametrize("term, n", [
    (DrivingTerm.zero(), 16), (DrivingTerm.sqrt(1.0), 4), (DrivingTerm.power(2.0, 1.5), 3),
])
def test_scaling_closed_forms(term, n):
    rep = V.verify_scaling(term, n, make_graded_mesh(1.0, 500))
    assert rep.passed and rep.measured <= 1e-12


def test_scaling_on_sampled_arc(arc_small):
    _, term, mesh, _ = arc_small
    for n in (3, 4, 16):
        assert V.verify_scaling(term, n, mesh).passed
    with pytest.raises(ValueError):
        V.verify_scaling(term, 1)


def test_roundtrip_report():
    rep = V.verify_roundtrip(N=2000)
    assert rep.passed and rep.details["capacity_relative_error"] < 1e-12
