"""Parameter scans, equality audits and the three-case perimeter certificate.

Parallelograms are normalised as in the perimeter argument: spanned by
``(a, b)`` and ``(1, 0)`` with ``a >= 0``, ``b > 0`` and ``a^2 + b^2 <= 1``,
so ``l1 = r = sqrt(a^2 + b^2)``, ``l2 = 1``, ``|P| = b`` and ``L = 2(1 + r)``.

Scans gather evidence; a finite sample proves nothing about the inequality.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .bounds import m_rho, nonconvex_class_bound, parallelogram_bounds, strip_bounds
from .exceptions import CoverageGap, NeumannBoundsError
from .geometry import StripDomain, WidthProfile, area, parallelogram_from_vectors, perimeter
from .solver import extrapolated_eigenvalues

__all__ = [
    "CASE1_B",
    "CASE2_R",
    "CASE3_A",
    "Verdict",
    "Certificate",
    "ScanRecord",
    "StripRecord",
    "AuditReport",
    "certificate_case",
    "certificate_cases",
    "perimeter_product_bounds",
    "normalized_parallelogram",
    "sample_parameters",
    "quasi_random_parameters",
    "oracle",
    "scan_parallelograms",
    "scan_summary",
    "equality_audit",
    "sample_strips",
    "scan_strips",
    "class_member_strips",
    "write_scan_csv",
    "write_strip_csv",
]

PI2 = math.pi**2
SIXTEEN_PI2 = 16.0 * PI2
DEFAULT_SEED = 0x5EED
MIN_B = 1e-3

CASE1_B = math.sqrt(1.0 - 64.0 / PI2**2)
CASE2_R = math.pi / math.sqrt(3.0) - 1.0
CASE3_A = 12.0 / PI2 + 1.0 - math.pi / math.sqrt(3.0)

DOMINANCE_RTOL = 1e-6
PRODUCT_RTOL = 1e-5


# -- certificate ------------------------------------------------------------


def perimeter_product_bounds(a, b):
    """``L^2 lambda_-`` and ``L^2 eta_-`` for the normalised parallelogram.

    These are the two right-hand sides the three cases start from; the lower
    roots use ``S - R = (S^2 - R^2)/(S + R)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r2 = a * a + b * b
    r = np.sqrt(r2)
    s = r2 + 1.0
    root_cos = np.sqrt((r2 - 1.0) ** 2 + 256.0 / PI2**2 * a * a)
    root_lin = np.sqrt((r2 - 1.0) ** 2 + 4.0 * a * a)
    lower_cos = (4.0 * b * b + 4.0 * a * a * (1.0 - 64.0 / PI2**2)) / (s + root_cos)
    lower_lin = 4.0 * b * b / (s + root_lin)
    first = 2.0 * PI2 / (b * b) * (1.0 + r) ** 2 * lower_cos
    second = 24.0 / (b * b) * (1.0 + r) ** 2 * lower_lin
    return first, second


@dataclass(frozen=True)
class Certificate:
    """Which case covers ``(a, b)`` and the values along that case's chain.

    ``start`` is the trial-function bound the case starts from, ``middle`` the
    case's intermediate expression and ``end`` the constant it is compared to.
    """

    a: float
    b: float
    case: int
    cases_holding: tuple
    start: float
    middle: float
    end: float

    @property
    def product_bound(self):
        return self.start

    @property
    def sound(self):
        return self.start <= self.middle * (1 + 1e-14) and self.middle <= self.end * (1 + 1e-14)


def _case_flags(a, b):
    r = np.hypot(a, b)
    c1 = b > CASE1_B
    c2 = r < CASE2_R
    c3 = (a > CASE3_A) & (r >= CASE2_R)
    return c1, c2, c3, r


def certificate_case(a, b):
    """Lowest-numbered case covering ``(a, b)`` with its inequality chain.

    Case 1: ``b > sqrt(1 - 64/pi^4)``, chain ``L^2 lambda_- <= 4 pi^2 (1 + r)^2 <= 16 pi^2``.
    Case 2: ``r < pi/sqrt(3) - 1``, chain ``L^2 eta_- <= 48 (1 + r)^2 < 16 pi^2``.
    Case 3: ``a > 12/pi^2 + 1 - pi/sqrt(3)`` and ``r >= pi/sqrt(3) - 1``, chain
    ``L^2 eta_- <= 48 (1 + r)^2 / (r + a) <= 192 / (r + a) < 16 pi^2``.

    Raises
    ------
    CoverageGap
        If no case holds.
    """
    if not (a >= 0.0 and b > 0.0 and a * a + b * b <= 1.0 + 1e-15):
        raise ValueError(f"(a, b) = ({a}, {b}) is outside the normalised region")
    c1, c2, c3, r = _case_flags(a, b)
    holding = tuple(i + 1 for i, c in enumerate((c1, c2, c3)) if c)
    if not holding:
        raise CoverageGap(f"(a, b) = ({a}, {b}) satisfies none of the three cases")
    first, second = perimeter_product_bounds(a, b)
    case = holding[0]
    if case == 1:
        start, middle = float(first), 4.0 * PI2 * (1.0 + r) ** 2
    elif case == 2:
        start, middle = float(second), 48.0 * (1.0 + r) ** 2
    else:
        start, middle = float(second), 48.0 * (1.0 + r) ** 2 / (r + a)
    return Certificate(float(a), float(b), case, holding, start, float(middle), SIXTEEN_PI2)


def certificate_cases(a, b):
    """Vectorised certificate over arrays of ``(a, b)``.

    Returns a dict with the case id per point (0 if uncovered), the start and
    middle values of the selected chain and the case-3 relaxation ``192/(r+a)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c1, c2, c3, r = _case_flags(a, b)
    case = np.where(c1, 1, np.where(c2, 2, np.where(c3, 3, 0)))
    first, second = perimeter_product_bounds(a, b)
    with np.errstate(divide="ignore"):
        mid3 = 48.0 * (1.0 + r) ** 2 / (r + a)
        relax3 = 192.0 / (r + a)
    start = np.where(case == 1, first, second)
    middle = np.select([case == 1, case == 2, case == 3], [4.0 * PI2 * (1.0 + r) ** 2, 48.0 * (1.0 + r) ** 2, mid3], np.nan)
    return {"case": case, "start": start, "middle": middle, "relax3": relax3, "r": r, "c1": c1, "c2": c2, "c3": c3}


def quasi_random_parameters(count, seed=DEFAULT_SEED):
    """Scrambled Sobol points mapped area-uniformly onto the normalised region."""
    m = max(1, math.ceil(math.log2(count)))
    u = qmc.Sobol(2, scramble=True, seed=seed).random_base2(m)[:count]
    r = np.sqrt(u[:, 0])
    theta = 0.5 * math.pi * u[:, 1]
    a, b = r * np.cos(theta), r * np.sin(theta)
    keep = b > 0.0
    return a[keep], b[keep]


# -- records ----------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """``value <= bound (1 + rtol)``; soft verdicts are recorded, never counted as violations."""

    name: str
    value: float
    bound: float
    rtol: float = 0.0
    hard: bool = True

    @property
    def margin(self):
        return self.bound - self.value

    @property
    def passed(self):
        return self.value <= self.bound + self.rtol * abs(self.bound)

    def encode(self):
        status = "PASS" if self.passed else ("FAIL" if self.hard else "DATA")
        return f"{self.name}:{status}:{self.margin:.17g}"


@dataclass
class ScanRecord:
    idx: int
    a: float
    b: float
    domain: object
    bounds: object
    oracle_mu2: float = math.nan
    oracle_mu3: float = math.nan
    mu2_err: float = math.nan
    mu3_err: float = math.nan
    n: int = 0
    prod_perim: float = math.nan
    prod_area: float = math.nan
    scaled_mean: float = math.nan
    certificate_case: int = 0
    verdicts: list = field(default_factory=list)
    error: str | None = None

    @property
    def violations(self):
        return [v for v in self.verdicts if v.hard and not v.passed]


def normalized_parallelogram(a, b):
    return parallelogram_from_vectors((a, b), (1.0, 0.0))


def oracle(domain, n=24, k=3, refine_n=48, tight=None):
    """Extrapolated eigenvalues on ``n/2n``, refined to ``refine_n/2 refine_n`` on demand.

    ``tight(result)`` returns True when some verdict margin is below three
    error indicators; the refined solve then replaces the first one.
    """
    res = extrapolated_eigenvalues(domain, n, k)
    if tight is not None and refine_n and refine_n > n and tight(res):
        res = extrapolated_eigenvalues(domain, refine_n, k)
    return res


def _parallelogram_verdicts(P, B, mu2, mu3):
    L = P.perimeter
    S2 = P.l1**2 + P.l2**2
    return [
        Verdict("mu2_le_min_lam_eta", mu2, B.mu2_bound, DOMINANCE_RTOL),
        Verdict("mu3_le_lam_plus", mu3, B.lambda_plus, DOMINANCE_RTOL),
        Verdict("perim_product", mu2 * L * L, SIXTEEN_PI2, PRODUCT_RTOL),
        Verdict("area_product", mu2 * P.area, PI2, PRODUCT_RTOL),
        Verdict("scaled_mean", 0.5 * (mu2 + mu3) * P.area**2 / S2, 0.5 * PI2, DOMINANCE_RTOL),
        Verdict("bound_perim_product", B.mu2_bound * L * L, SIXTEEN_PI2, 1e-12, hard=False),
    ]


def _tight(verdict_fn):
    def check(res):
        for v in verdict_fn(res.mu2, res.mu3):
            if not v.hard:
                continue
            scale = v.value / res.mu2 if v.name != "mu3_le_lam_plus" else 1.0
            err = res.mu2_err * abs(scale) if v.name != "mu3_le_lam_plus" else res.mu3_err
            if v.margin < 3.0 * err:
                return True
        return False

    return check


def _scan_one(job):
    idx, a, b, n, refine_n = job
    P = normalized_parallelogram(a, b)
    B = parallelogram_bounds(P)
    rec = ScanRecord(idx, a, b, P, B)
    try:
        rec.certificate_case = certificate_case(a, b).case
    except CoverageGap:
        rec.certificate_case = 0
    if b < MIN_B:
        rec.verdicts = [_parallelogram_verdicts(P, B, B.mu2_bound, B.lambda_plus)[-1]]
        return rec
    try:
        res = oracle(P, n, 3, refine_n, _tight(lambda m2, m3: _parallelogram_verdicts(P, B, m2, m3)))
    except NeumannBoundsError as exc:
        rec.error = str(exc)
        return rec
    L = P.perimeter
    rec.oracle_mu2, rec.oracle_mu3 = res.mu2, res.mu3
    rec.mu2_err, rec.mu3_err, rec.n = res.mu2_err, res.mu3_err, res.n
    rec.prod_perim = res.mu2 * L * L
    rec.prod_area = res.mu2 * P.area
    rec.scaled_mean = 0.5 * (res.mu2 + res.mu3) * P.area**2 / (P.l1**2 + P.l2**2)
    rec.verdicts = _parallelogram_verdicts(P, B, res.mu2, res.mu3)
    return rec


def sample_parameters(kind="random", count=1000, seed=DEFAULT_SEED, include_square=True, min_b=MIN_B):
    """``(a, b)`` samples from the normalised region.

    ``random`` draws area-uniform points from a seeded generator; ``grid``
    lays a polar grid over the quarter disk; ``square`` is the square alone.
    The square ``(0, 1)`` is put first when ``include_square``.
    """
    if kind == "square":
        return [(0.0, 1.0)]
    if kind == "random":
        rng = np.random.default_rng(seed)
        pts = []
        while len(pts) < count:
            r = math.sqrt(rng.uniform())
            th = 0.5 * math.pi * rng.uniform()
            a, b = r * math.cos(th), r * math.sin(th)
            if b >= min_b:
                pts.append((a, b))
    elif kind == "grid":
        side = max(2, math.ceil(math.sqrt(count)))
        rs = np.linspace(1.0 / side, 1.0, side)
        ths = np.linspace(0.0, 0.5 * math.pi, side + 1)[1:]
        pts = [(r * math.cos(t), r * math.sin(t)) for r in rs for t in ths]
        pts = [(max(a, 0.0), b) for a, b in pts if b >= min_b][:count]
    else:
        raise ValueError(f"unknown sampler kind {kind!r}")
    if include_square:
        pts = [(0.0, 1.0)] + pts[: max(0, count - 1)]
    return pts


def _parallel_map(fn, jobs, threads):
    if threads and threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * threads))))
    return [fn(j) for j in jobs]


def default_threads():
    env = os.environ.get("NBL_THREADS")
    return int(env) if env else 1


def scan_parallelograms(samples=None, n=24, refine_n=48, threads=None, **sampler):
    """Bounds, oracle eigenvalues, certificate case and verdicts per sample.

    Solver failures are stored on the record (``error``) and do not abort the
    scan.  Output order follows the sample index.
    """
    if samples is None:
        samples = sample_parameters(**sampler)
    jobs = [(i, float(a), float(b), n, refine_n) for i, (a, b) in enumerate(samples)]
    return _parallel_map(_scan_one, jobs, threads if threads is not None else default_threads())


def scan_summary(records):
    valid = [r for r in records if not math.isnan(r.prod_perim)]
    best = max(valid, key=lambda r: r.prod_perim) if valid else None
    return {
        "max_prod_perim": best.prod_perim if best else None,
        "argmax": {"idx": best.idx, "a": best.a, "b": best.b} if best else None,
        "violations": sum(len(r.violations) for r in records),
        "failures": sum(r.error is not None for r in records),
        "records": len(records),
    }


# -- equality audit ---------------------------------------------------------


@dataclass
class AuditReport:
    classification: str
    mu2: float
    mu3: float
    mu2_err: float
    mu3_err: float
    bounds: object
    checks: dict = field(default_factory=dict)
    inconclusive: list = field(default_factory=list)

    @property
    def passed(self):
        return all(ok for ok, _ in self.checks.values())


def _classify(P):
    if not P.is_rectangle:
        return "generic"
    if P.is_square:
        return "square"
    return "rectangle_short" if P.l2 <= 2.0 * P.l1 else "rectangle_long"


def equality_audit(P, n=24):
    """Check the equality clauses against the oracle.

    Rectangles must reach ``mu_2 = lambda_-``; rectangles with ``l2 <= 2 l1``
    also ``mu_3 = lambda_+``.  Otherwise the bound must be strict by more than
    three error indicators; smaller gaps are reported as inconclusive.
    """
    B = parallelogram_bounds(P)
    res = extrapolated_eigenvalues(P, n, 3)
    kind = _classify(P)
    rep = AuditReport(kind, res.mu2, res.mu3, res.mu2_err, res.mu3_err, B)
    tol2, tol3 = 3.0 * res.mu2_err, 3.0 * res.mu3_err

    def strict(name, bound, value, tol):
        gap = bound - value
        if gap > tol:
            rep.checks[name] = (True, gap)
        elif gap >= -tol:
            rep.inconclusive.append(name)
            rep.checks[name] = (True, gap)
        else:
            rep.checks[name] = (False, gap)

    if kind == "generic":
        strict("mu2_strict", B.mu2_bound, res.mu2, tol2)
        strict("mu3_strict", B.lambda_plus, res.mu3, tol3)
        return rep
    gap2 = abs(res.mu2 - B.lambda_minus)
    rep.checks["mu2_equals_lambda_minus"] = (gap2 < tol2, gap2)
    if kind == "rectangle_long":
        strict("mu3_strict", B.lambda_plus, res.mu3, tol3)
        exact = min(PI2 / P.l1**2, 4.0 * PI2 / P.l2**2)
        gap = abs(res.mu3 - exact)
        rep.checks["mu3_equals_exact"] = (gap < max(tol3, 1e-6 * exact), gap)
    else:
        gap3 = abs(res.mu3 - B.lambda_plus)
        rep.checks["mu3_equals_lambda_plus"] = (gap3 < tol3, gap3)
    return rep


# -- strips -----------------------------------------------------------------


@dataclass
class StripRecord:
    idx: int
    domain: StripDomain
    bounds: object
    oracle_mu2: float = math.nan
    oracle_mu3: float = math.nan
    mu2_err: float = math.nan
    mu3_err: float = math.nan
    n: int = 0
    perimeter: float = math.nan
    prod_perim: float = math.nan
    rectangle: bool = False
    equality: str = ""
    class_membership: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    error: str | None = None

    @property
    def violations(self):
        return [v for v in self.verdicts if v.hard and not v.passed]


def _random_profile(rng, length, max_k, slope_cap):
    """Random trigonometric lower profile with ``sup |g'|`` rescaled to ``slope_cap``."""
    terms = []
    for k in range(1, max_k + 1):
        terms.append((rng.normal(), k, "sin"))
        terms.append((rng.normal(), k, "cos"))
    g = WidthProfile(0.0, 0.0, tuple(terms))
    xs = np.linspace(0.0, length, 4096)
    sup = float(np.abs(g.deriv(xs, length)).max())
    scale = slope_cap / sup
    return WidthProfile(0.0, 0.0, tuple((a * scale, k, kind) for a, k, kind in terms))


def sample_strips(count=100, seed=DEFAULT_SEED, ratio=(1.0, 4.0), max_k=3, slope=(0.3, 1.5), rectangles=0.1, width=1.0):
    """Constant-width strips with ``l / d`` drawn from ``ratio``.

    A fraction ``rectangles`` of the samples is flat; the others get a random
    trigonometric lower profile with ``sup |g'|`` uniform in ``slope``.
    """
    rng = np.random.default_rng(seed)
    out = []
    n_rect = int(round(rectangles * count))
    for i in range(count):
        length = width * rng.uniform(*ratio)
        if i < n_rect:
            out.append(StripDomain.rectangle(length, width))
        else:
            g = _random_profile(rng, length, int(rng.integers(1, max_k + 1)), rng.uniform(*slope))
            out.append(StripDomain.constant_width(length, width, g))
    return out


def class_member_strips(rho, count=20, seed=DEFAULT_SEED, max_k=3, width=1.0):
    """Random members of A_rho: ``d/l <= rho`` and ``sup |g'| <= M_rho``."""
    rng = np.random.default_rng([seed, int(round(rho * 1e6))])
    cap = m_rho(rho)
    out = []
    for _ in range(count):
        length = width / rho * rng.uniform(1.0, 2.0)
        g = _random_profile(rng, length, int(rng.integers(1, max_k + 1)), cap * rng.uniform(0.3, 1.0))
        out.append(StripDomain.constant_width(length, width, g))
    return out


def _strip_one(job):
    idx, S, n, refine_n, rhos = job
    B = strip_bounds(S)
    rec = StripRecord(idx, S, B, rectangle=S.is_rectangle)
    L = perimeter(S)
    rec.perimeter = L
    long_bound = PI2 / S.length**2 if S.length >= S.d else math.inf

    def verdicts(mu2, mu3):
        out = [
            Verdict("mu2_le_lam_minus", mu2, B.lambda_minus, DOMINANCE_RTOL),
            Verdict("mu3_le_lam_plus", mu3, B.lambda_plus, DOMINANCE_RTOL),
            Verdict("mu2_le_simple", mu2, B.mu2_simple, DOMINANCE_RTOL),
            Verdict("mean_le_bound", 0.5 * (mu2 + mu3), B.mean_bound, DOMINANCE_RTOL),
        ]
        if S.length >= S.d:
            out.append(Verdict("mu2_le_pi2_over_l2", mu2, long_bound, DOMINANCE_RTOL))
        return out

    try:
        res = oracle(S, n, 3, refine_n, _tight(verdicts))
    except NeumannBoundsError as exc:
        rec.error = str(exc)
        return rec
    rec.oracle_mu2, rec.oracle_mu3 = res.mu2, res.mu3
    rec.mu2_err, rec.mu3_err, rec.n = res.mu2_err, res.mu3_err, res.n
    rec.prod_perim = res.mu2 * L * L
    rec.verdicts = verdicts(res.mu2, res.mu3)
    if S.length >= S.d:
        gap = long_bound - res.mu2
        if rec.rectangle:
            rec.equality = "equal" if abs(gap) < 3.0 * res.mu2_err else "MISMATCH"
        else:
            rec.equality = "strict" if gap > 3.0 * res.mu2_err else "inconclusive"
    for rho in rhos:
        cv = nonconvex_class_bound(S, rho)
        rec.class_membership[rho] = cv.member
        if cv.member:
            rec.verdicts.append(Verdict(f"class_{rho:g}_product", rec.prod_perim, SIXTEEN_PI2, 0.0))
    return rec


def scan_strips(strips=None, n=24, refine_n=48, rhos=(), threads=None, **sampler):
    """Oracle check of the constant-width bounds over a list of strips."""
    if strips is None:
        strips = sample_strips(**sampler)
    jobs = [(i, S, n, refine_n, tuple(rhos)) for i, S in enumerate(strips)]
    return _parallel_map(_strip_one, jobs, threads if threads is not None else default_threads())


# -- output -----------------------------------------------------------------

SCAN_HEADER = [
    "idx", "a", "b", "l1", "l2", "phi", "area", "perim", "lam_minus", "lam_plus",
    "eta_minus", "eta_plus", "mu2_oracle", "mu3_oracle", "mu2_err", "mu3_err",
    "prod_perim", "prod_area", "case", "verdicts",
]

STRIP_HEADER = [
    "idx", "l", "d", "g_terms", "area", "perim", "lam_minus", "lam_plus", "mu2_simple",
    "mu2_oracle", "mu3_oracle", "mu2_err", "mu3_err", "prod_perim", "equality", "verdicts",
]


def _f(x):
    return f"{x:.17g}"


def write_scan_csv(records, fh):
    """One CSV line per record, floats with 17 significant digits."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    for r in records:
        P, B = r.domain, r.bounds
        w.writerow(
            [r.idx]
            + [_f(v) for v in (r.a, r.b, P.l1, P.l2, P.phi, P.area, P.perimeter)]
            + [_f(v) for v in (B.lambda_minus, B.lambda_plus, B.eta_minus, B.eta_plus)]
            + [_f(v) for v in (r.oracle_mu2, r.oracle_mu3, r.mu2_err, r.mu3_err, r.prod_perim, r.prod_area)]
            + [r.certificate_case, ";".join(v.encode() for v in r.verdicts)]
        )


def write_strip_csv(records, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(STRIP_HEADER)
    for r in records:
        S, B = r.domain, r.bounds
        terms = getattr(S.lower, "terms", ())
        enc = " ".join(f"{kind}{k}:{_f(a)}" for a, k, kind in terms)
        w.writerow(
            [r.idx, _f(S.length), _f(S.d), enc, _f(area(S)), _f(r.perimeter)]
            + [_f(v) for v in (B.lambda_minus, B.lambda_plus, B.mu2_simple)]
            + [_f(v) for v in (r.oracle_mu2, r.oracle_mu3, r.mu2_err, r.mu3_err, r.prod_perim)]
            + [r.equality, ";".join(v.encode() for v in r.verdicts)]
        )


def scan_csv_text(records):
    buf = io.StringIO()
    write_scan_csv(records, buf)
    return buf.getvalue()


def summary_json(records):
    return json.dumps(scan_summary(records), indent=2, sort_keys=True)
