"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the terminal summary.
The parallelogram scan is shared between the dominance and isoperimetric
checks and takes several minutes.
"""
import json
import math
import pathlib
import time

import numpy as np
import pytest

from conftest import record_criterion
from neumann_bounds import Parallelogram
from neumann_bounds.bounds import m_rho, parallelogram_bounds, rhombus_bounds, strip_bounds
from neumann_bounds.geometry import domain_from_json
from neumann_bounds.perturb import BumpProfile, derivative_check
from neumann_bounds.solver import extrapolated_eigenvalues
from neumann_bounds.verify import (
    certificate_case,
    certificate_cases,
    class_member_strips,
    equality_audit,
    quasi_random_parameters,
    sample_parameters,
    sample_strips,
    scan_parallelograms,
    scan_strips,
    scan_summary,
)

PI2 = math.pi**2
SIXTEEN_PI2 = 16.0 * PI2
RIGHT = math.pi / 2
DEMOS = pathlib.Path(__file__).resolve().parent.parent / "demos"

PARALLELOGRAM_COUNT = 10_000
STRIP_COUNT = 100


@pytest.fixture(scope="module")
def parallelogram_scan():
    samples = sample_parameters("random", PARALLELOGRAM_COUNT + 1, include_square=True)
    start = time.perf_counter()
    records = scan_parallelograms(samples)
    return records, time.perf_counter() - start


def test_criterion_01_exact_spectra():
    results = []
    for label, P, expected in (
        ("square", Parallelogram(1.0, 1.0, RIGHT), (PI2, PI2)),
        ("1x2", Parallelogram(1.0, 2.0, RIGHT), (PI2 / 4, PI2)),
    ):
        start = time.perf_counter()
        res = extrapolated_eigenvalues(P, 32, 3)
        elapsed = time.perf_counter() - start
        errs = [abs(res.mu2 - expected[0]) / expected[0], abs(res.mu3 - expected[1]) / expected[1]]
        results.append((label, max(errs), elapsed))
    ok = all(err < 1e-6 and t < 30 for _, err, t in results)
    detail = "; ".join(f"{label} max rel err {err:.1e} in {t:.2f}s" for label, err, t in results)
    assert record_criterion(1, ok, detail)


def test_criterion_02_closed_forms():
    sq = parallelogram_bounds(Parallelogram(1.0, 1.0, RIGHT))
    sq_err = max(
        abs(sq.lambda_minus - PI2) / PI2,
        abs(sq.lambda_plus - PI2) / PI2,
        abs(sq.eta_minus - 12) / 12,
        abs(sq.eta_plus - 12) / 12,
    )
    rh = parallelogram_bounds(Parallelogram(1.0, 1.0, math.pi / 4))
    lam_ref = 2 * (PI2 - 8 / math.sqrt(2))
    eta_ref = 2 * (12 - 12 / math.sqrt(2))
    rh_err = max(abs(rh.lambda_minus - lam_ref) / lam_ref, abs(rh.eta_minus - eta_ref) / eta_ref)
    rhombus_form = rhombus_bounds(1.0, math.pi / 4)
    form_err = abs(rhombus_form.lambda_minus - lam_ref) / lam_ref
    ok = sq_err < 1e-12 and rh_err < 1e-12 and form_err < 1e-12 and rh.eta_minus < rh.lambda_minus
    detail = f"square err {sq_err:.1e}, rhombus err {rh_err:.1e}, eta_- {rh.eta_minus:.6f} < lambda_- {rh.lambda_minus:.6f}"
    assert record_criterion(2, ok, detail)


def test_criterion_03_dominance(parallelogram_scan):
    records, elapsed = parallelogram_scan
    dominance = ("mu2_le_min_lam_eta", "mu3_le_lam_plus")
    par_bad = sum(1 for r in records for v in r.verdicts if v.name in dominance and not v.passed)
    par_fail = sum(r.error is not None for r in records)
    start = time.perf_counter()
    strips = scan_strips(sample_strips(STRIP_COUNT, ratio=(0.25, 4.0)))
    elapsed += time.perf_counter() - start
    strip_names = ("mu2_le_lam_minus", "mu3_le_lam_plus")
    strip_bad = sum(1 for r in strips for v in r.verdicts if v.name in strip_names and not v.passed)
    strip_fail = sum(r.error is not None for r in strips)
    refined = sum(r.n > 24 for r in records) + sum(r.n > 24 for r in strips)
    ok = par_bad == strip_bad == par_fail == strip_fail == 0 and len(records) >= 10_000 and len(strips) >= 100
    detail = (
        f"{len(records)} parallelograms, {len(strips)} strips, {par_bad + strip_bad} violations, "
        f"{par_fail + strip_fail} solver failures, {refined} refined at n=48/96, {elapsed:.0f}s"
    )
    assert record_criterion(3, ok, detail)


def test_criterion_04_certificate():
    start = time.perf_counter()
    a, b = quasi_random_parameters(1_000_000)
    out = certificate_cases(a, b)
    covered = bool(np.all(out["case"] > 0))
    chain_sound = bool(np.all(out["start"] <= out["middle"] * (1 + 1e-14)))
    case3 = out["case"] == 3
    relax_ok = bool(np.all(out["middle"][case3] <= out["relax3"][case3] * (1 + 1e-14)))
    strict = bool(np.all(out["start"] < SIXTEEN_PI2)) and bool(np.all(out["relax3"][case3] < SIXTEEN_PI2))
    ends = bool(np.all(out["middle"] <= SIXTEEN_PI2 * (1 + 1e-15)))
    sq = certificate_case(0.0, 1.0)
    equality = sq.start == pytest.approx(SIXTEEN_PI2, rel=1e-15)
    elapsed = time.perf_counter() - start
    counts = np.bincount(out["case"], minlength=4)
    ok = covered and chain_sound and relax_ok and strict and ends and equality and a.size == 1_000_000 and elapsed < 60
    detail = (
        f"{a.size} points, cases 1/2/3 = {counts[1]}/{counts[2]}/{counts[3]}, uncovered {counts[0]}, "
        f"max L^2 bound / 16pi^2 = {out['start'].max() / SIXTEEN_PI2:.6f}, square gives equality, {elapsed:.1f}s"
    )
    assert record_criterion(4, ok, detail)


def test_criterion_05_isoperimetric(parallelogram_scan):
    records, _ = parallelogram_scan
    products = [(r.prod_perim, r) for r in records if not math.isnan(r.prod_perim)]
    over = sum(p > SIXTEEN_PI2 * (1 + 1e-5) for p, _ in products)
    summary = scan_summary(records)
    best = max(products, key=lambda x: x[0])[1]
    closest = min(records, key=lambda r: math.hypot(r.a, r.b - 1.0))
    near = abs(summary["max_prod_perim"] - SIXTEEN_PI2) / SIXTEEN_PI2
    ok = over == 0 and near < 1e-3 and best.idx == closest.idx
    detail = (
        f"{over} products above 16pi^2 (1 + 1e-5); max {summary['max_prod_perim']:.6f} "
        f"(rel gap {near:.1e}) at sample {best.idx} (a, b) = ({best.a:.3g}, {best.b:.3g})"
    )
    assert record_criterion(5, ok, detail)


def test_criterion_06_equality_audit():
    reports = [equality_audit(Parallelogram(1.0, l2, RIGHT)) for l2 in (1.0, 1.25, 1.6, 2.0)]
    equal_ok = all(
        rep.checks["mu2_equals_lambda_minus"][0] and rep.checks["mu3_equals_lambda_plus"][0] for rep in reports
    )
    long = equality_audit(Parallelogram(1.0, 3.0, RIGHT))
    exact = 4 * PI2 / 9
    long_ok = (
        long.checks["mu3_equals_exact"][0]
        and long.checks["mu3_strict"][0]
        and "mu3_strict" not in long.inconclusive
        and abs(long.bounds.lambda_plus - PI2) < 1e-12
    )
    worst = max(max(rep.checks["mu2_equals_lambda_minus"][1] / (3 * rep.mu2_err),
                    rep.checks["mu3_equals_lambda_plus"][1] / (3 * rep.mu3_err)) for rep in reports)
    ok = equal_ok and long_ok
    detail = (
        f"4 rectangles with l2 <= 2 l1 hit both bounds (worst gap {worst:.1e} x 3 err); "
        f"1x3: mu3 = {long.mu3:.6f} vs 4pi^2/9 = {exact:.6f}, lambda_+ = {long.bounds.lambda_plus:.6f}"
    )
    assert record_criterion(6, ok, detail)


def test_criterion_07_constant_width_long_strips():
    strips = sample_strips(50, seed=0x5EED + 7, ratio=(1.0, 4.0), rectangles=0.1)
    records = scan_strips(strips)
    assert all(r.domain.length >= r.domain.d for r in records)
    dominated = all(v.passed for r in records for v in r.verdicts if v.name == "mu2_le_pi2_over_l2")
    rect = [r for r in records if r.rectangle]
    other = [r for r in records if not r.rectangle]
    rect_ok = all(r.equality == "equal" for r in rect)
    strict_ok = all(r.equality == "strict" for r in other)
    min_ratio = min((PI2 / r.domain.length**2 - r.oracle_mu2) / (3 * r.mu2_err) for r in other)
    ok = dominated and rect_ok and strict_ok and len(rect) > 0
    detail = (
        f"{len(records)} strips with l >= d, {len(rect)} rectangles at equality, "
        f"{len(other)} others strict; smallest gap / (3 err) = {min_ratio:.1f}"
    )
    assert record_criterion(7, ok, detail)


def test_criterion_08_omega_eps():
    S = domain_from_json(json.loads((DEMOS / "omega_eps.json").read_text()))
    eps = 0.05
    B = strip_bounds(S)
    geometry_ok = abs(S.length - math.pi) < 1e-15 and abs(S.d - (math.pi + 2 * eps)) < 1e-12
    branch = abs(B.lambda_minus - PI2 / S.length**2) < 1e-12
    above = B.lambda_minus > PI2 / (S.length * S.d)
    ok = geometry_ok and abs(B.I2) < 1e-12 and branch and above
    detail = f"I2 = {B.I2:.1e}, lambda_- = {B.lambda_minus:.15f}, pi^2/(l d) = {PI2 / (S.length * S.d):.6f}"
    assert record_criterion(8, ok, detail)


def test_criterion_09_perturbation():
    rep = derivative_check(BumpProfile())
    M = rep.matrix
    alpha1, alpha2 = rep.alpha
    diag_ok = abs(M[0, 1]) < 1e-10 and np.allclose(M, rep.matrix_reduced, atol=1e-10, rtol=0)
    order_ok = 0 < alpha1 < alpha2
    match = rep.slope_match[-0.01]
    exceed = [t for t, F, err in zip(rep.t, rep.F, rep.F_err) if t < 0 and F - SIXTEEN_PI2 > 3 * err]
    ok = diag_ok and order_ok and match["ok"] and rep.length_exponent >= 1.9 and exceed
    i = rep.t.index(-0.01)
    detail = (
        f"alpha = ({alpha1:.4f}, {alpha2:.4f}); slopes at t=-0.01 rel err "
        f"{max(match['rel_err']):.1e}; L exponent {rep.length_exponent:.3f}; "
        f"F(-0.01) - 16pi^2 = {rep.F[i] - SIXTEEN_PI2:.4f} (3 err = {3 * rep.F_err[i]:.4f}); t* = {rep.t_star}"
    )
    assert record_criterion(9, ok, detail)


def test_criterion_10_class_a_rho():
    lines, ok = [], abs(m_rho(0.5) - math.sqrt(1.25)) <= 1e-15
    for rho in (0.3, 0.5, 0.8):
        records = scan_strips(class_member_strips(rho, 20), rhos=(rho,))
        members = all(r.class_membership[rho] for r in records)
        margins = [SIXTEEN_PI2 - r.prod_perim for r in records]
        errs = [3 * r.mu2_err * r.perimeter**2 for r in records]
        ok = ok and members and all(m > e for m, e in zip(margins, errs)) and len(records) == 20
        lines.append(f"rho={rho}: min margin {min(margins):.3f}")
    assert record_criterion(10, ok, "; ".join(lines) + f"; M_0.5 = {m_rho(0.5):.16f}")
