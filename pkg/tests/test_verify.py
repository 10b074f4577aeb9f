import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from neumann_bounds import CoverageGap, Parallelogram
from neumann_bounds.bounds import parallelogram_bounds
from neumann_bounds.verify import (
    CASE1_B,
    CASE2_R,
    CASE3_A,
    SCAN_HEADER,
    Verdict,
    certificate_case,
    certificate_cases,
    class_member_strips,
    equality_audit,
    normalized_parallelogram,
    perimeter_product_bounds,
    quasi_random_parameters,
    sample_parameters,
    sample_strips,
    scan_parallelograms,
    scan_strips,
    scan_summary,
    write_scan_csv,
)

PI2 = math.pi**2

region = st.tuples(st.floats(0.0, 1.0), st.floats(1e-4, 1.0)).filter(lambda p: p[0] ** 2 + p[1] ** 2 <= 1.0)


def test_case_constants():
    assert CASE1_B == pytest.approx(0.58564, abs=1e-5)
    assert CASE2_R == pytest.approx(0.81380, abs=1e-5)
    assert CASE3_A == pytest.approx(0.40205, abs=1e-5)
    # a point outside cases 1 and 2 has a >= sqrt(r^2 - b^2) > case-3 threshold
    assert math.sqrt(CASE2_R**2 - CASE1_B**2) > CASE3_A
    # case 3's final step: 192 / (12/pi^2) = 16 pi^2
    assert 192.0 / (12.0 / PI2) == pytest.approx(16 * PI2, rel=1e-15)


@given(region)
def test_product_bounds_are_perimeter_times_bounds(p):
    a, b = p
    P = normalized_parallelogram(a, b)
    B = parallelogram_bounds(P)
    first, second = perimeter_product_bounds(a, b)
    L2 = P.perimeter**2
    assert float(first) == pytest.approx(L2 * B.lambda_minus, rel=1e-10)
    assert float(second) == pytest.approx(L2 * B.eta_minus, rel=1e-10)


@given(region)
def test_every_point_is_certified(p):
    c = certificate_case(*p)
    assert c.case in (1, 2, 3)
    assert c.sound
    assert c.start <= 16 * PI2 * (1 + 1e-14)


def test_square_is_the_equality_point():
    c = certificate_case(0.0, 1.0)
    assert c.case == 1 and c.start == pytest.approx(16 * PI2, rel=1e-15)


def test_uncovered_point_raises(monkeypatch):
    import neumann_bounds.verify as v

    monkeypatch.setattr(v, "CASE1_B", 2.0)
    with pytest.raises(CoverageGap):
        v.certificate_case(0.1, 0.95)


def test_outside_region_rejected():
    with pytest.raises(ValueError):
        certificate_case(0.9, 0.9)


def test_vectorised_agrees_with_scalar():
    a, b = quasi_random_parameters(512, seed=7)
    out = certificate_cases(a, b)
    for i in range(0, 512, 37):
        c = certificate_case(float(a[i]), float(b[i]))
        assert out["case"][i] == c.case
        assert out["start"][i] == pytest.approx(c.start, rel=1e-14)


def test_quasi_random_points_fill_region():
    a, b = quasi_random_parameters(4096)
    assert np.all(a >= 0) and np.all(b > 0) and np.all(a * a + b * b <= 1 + 1e-15)
    # area-uniform: the mean of r^2 over the quarter disk is 1/2
    assert np.mean(a * a + b * b) == pytest.approx(0.5, abs=0.01)


def test_samplers_are_deterministic():
    assert sample_parameters("random", 20, 3) == sample_parameters("random", 20, 3)
    assert sample_parameters("random", 20, 3) != sample_parameters("random", 20, 4)
    grid = sample_parameters("grid", 30)
    assert grid[0] == (0.0, 1.0) and len(grid) == 30
    assert sample_parameters("square", 10) == [(0.0, 1.0)]
    with pytest.raises(ValueError):
        sample_parameters("sobol", 10)


def test_verdict_margin_and_tolerance():
    v = Verdict("x", 1.0 + 5e-7, 1.0, 1e-6)
    assert v.passed and v.margin < 0
    assert not Verdict("x", 1.0 + 2e-6, 1.0, 1e-6).passed
    assert Verdict("x", 2.0, 1.0, hard=False).encode().startswith("x:DATA:")


def test_small_scan_and_csv_determinism():
    recs = scan_parallelograms(count=6, seed=11)
    summary = scan_summary(recs)
    assert summary["violations"] == 0 and summary["records"] == 6
    assert summary["argmax"]["idx"] == 0
    first, second = io.StringIO(), io.StringIO()
    write_scan_csv(recs, first)
    write_scan_csv(scan_parallelograms(count=6, seed=11), second)
    assert first.getvalue() == second.getvalue()
    lines = first.getvalue().splitlines()
    assert lines[0] == ",".join(SCAN_HEADER)
    assert len(lines) == 7


def test_rectangle_audits():
    sq = equality_audit(Parallelogram(1.0, 1.0, math.pi / 2))
    assert sq.classification == "square" and sq.passed
    short = equality_audit(Parallelogram(1.0, 1.5, math.pi / 2))
    assert short.classification == "rectangle_short" and short.passed
    long = equality_audit(Parallelogram(1.0, 3.0, math.pi / 2))
    assert long.classification == "rectangle_long" and long.passed
    assert long.mu3 == pytest.approx(4 * PI2 / 9, rel=1e-5)


def test_generic_audit_is_strict():
    rep = equality_audit(Parallelogram(1.0, 1.0, math.pi / 3))
    assert rep.classification == "generic" and rep.passed
    assert not rep.inconclusive


def test_strip_scan_small():
    recs = scan_strips(sample_strips(count=6, seed=5, rectangles=0.34), rhos=(0.5,))
    assert all(not r.violations for r in recs)
    assert [r.equality for r in recs[:2]] == ["equal", "equal"]
    assert all(r.equality == "strict" for r in recs[2:])


@pytest.mark.parametrize("rho", [0.3, 0.8])
def test_class_members_are_members(rho):
    from neumann_bounds.bounds import nonconvex_class_bound

    for S in class_member_strips(rho, count=5):
        assert nonconvex_class_bound(S, rho).member
