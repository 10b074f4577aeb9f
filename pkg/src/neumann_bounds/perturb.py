"""Boundary perturbation of the unit square and the shape derivative of mu_2.

The bottom side of ``Q = (0, 1)^2`` is moved to ``y = -t f(x)``; the other
sides stay put.  The normal velocity on the bottom side is ``f`` (positive
pushes outward) and vanishes elsewhere.  For the double eigenvalue ``pi^2``
of the square, the one-sided derivatives at ``t = 0`` are the eigenvalues of

    M_ij = int_{dQ} (grad u_i . grad u_j - pi^2 u_i u_j) (chi . nu)

with ``u_1 = sqrt(2) cos(pi x)`` and ``u_2 = sqrt(2) cos(pi y)``.  For a
profile symmetric about ``x = 1/2`` the matrix is diagonal:
``M = -2 pi^2 diag(int cos(2 pi x) f, int f)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .geometry import ScaledProfile, StripDomain, WidthProfile, perimeter
from .solver import extrapolated_eigenvalues
from .verify import _parallel_map, default_threads

__all__ = [
    "BumpProfile",
    "hadamard_matrix",
    "reduced_hadamard_matrix",
    "deformed_domain",
    "PerturbationReport",
    "derivative_check",
    "DEFAULT_T",
]

PI2 = math.pi**2
SIXTEEN_PI2 = 16.0 * PI2
DEFAULT_T = (-0.02, -0.01, -0.005, -0.0025)
QUAD_TOL = 1e-13


def _quartic(x, c):
    # c (x (1/4 - x))^2 on [0, 1/4], zero elsewhere
    inside = (x >= 0.0) & (x <= 0.25)
    return np.where(inside, c * (x * (0.25 - x)) ** 2, 0.0)


def _quartic_deriv(x, c):
    inside = (x >= 0.0) & (x <= 0.25)
    return np.where(inside, 2.0 * c * x * (0.25 - x) * (0.25 - 2.0 * x), 0.0)


@dataclass(frozen=True)
class BumpProfile:
    """Nonnegative normal-velocity profile ``f`` on ``[0, 1]``.

    ``kind`` selects the shape:

    * ``"quartic"``: ``c (x (1/4 - x))^2`` on ``(0, 1/4)`` plus its mirror image
      on ``(3/4, 1)``; ``c = 15360`` gives ``int f = 1``.  C^1, supported away
      from the middle half.
    * ``"sine"``: ``c sin^2(pi x)``; ``c = 2`` gives ``int f = 1``.
    * ``"flat"``: the constant ``c``.

    ``restricted`` asserts the support lies in ``[0, 1/4] U [3/4, 1]``.
    """

    kind: str = "quartic"
    scale: float = 15360.0
    restricted: bool = True

    def __post_init__(self):
        if self.kind not in ("quartic", "sine", "flat"):
            raise ValueError(f"unknown bump kind {self.kind!r}")
        if self.scale < 0:
            raise ValueError("bump scale must be nonnegative")
        if self.restricted and self.kind != "quartic":
            raise ValueError(f"{self.kind} bump is not supported in [0, 1/4] U [3/4, 1]")
        xs = np.linspace(0.0, 1.0, 1025)
        if not np.allclose(self.value(xs), self.value(1.0 - xs), rtol=0.0, atol=1e-12 * max(1.0, self.scale)):
            raise ValueError("bump must be symmetric about x = 1/2")

    @classmethod
    def sine(cls, scale=2.0):
        return cls("sine", scale, restricted=False)

    @classmethod
    def flat(cls, scale=1.0):
        return cls("flat", scale, restricted=False)

    def value(self, x, length=1.0):
        x = np.asarray(x, dtype=float) / length
        c = self.scale
        if self.kind == "quartic":
            return _quartic(x, c) + _quartic(1.0 - x, c)
        if self.kind == "sine":
            return c * np.sin(np.pi * x) ** 2
        return np.full_like(x, c)

    def deriv(self, x, length=1.0):
        x = np.asarray(x, dtype=float) / length
        c = self.scale
        if self.kind == "quartic":
            out = _quartic_deriv(x, c) - _quartic_deriv(1.0 - x, c)
        elif self.kind == "sine":
            out = c * np.pi * np.sin(2.0 * np.pi * x)
        else:
            out = np.zeros_like(x)
        return out / length

    def breakpoints(self, length=1.0):
        if self.kind == "quartic":
            return np.array([0.0, 0.25, 0.75, 1.0]) * length
        return np.array([0.0, length])

    @property
    def max_value(self):
        return {"quartic": self.scale / 4096.0, "sine": self.scale, "flat": self.scale}[self.kind]

    def integral(self, weight=None):
        """``int_0^1 weight(x) f(x) dx`` by adaptive quadrature on the smooth pieces."""
        wfn = (lambda x: 1.0) if weight is None else weight
        pts = self.breakpoints()
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            val, _ = integrate.quad(lambda x: wfn(x) * float(self.value(x)), lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
            total += val
        return total


def reduced_hadamard_matrix(f):
    """Diagonal form valid for profiles symmetric about ``x = 1/2``."""
    m11 = -2.0 * PI2 * f.integral(lambda x: math.cos(2.0 * math.pi * x))
    m22 = -2.0 * PI2 * f.integral()
    return np.array([[m11, 0.0], [0.0, m22]])


def _eigenfunctions():
    r2 = math.sqrt(2.0)
    u = (lambda x, y: r2 * math.cos(math.pi * x), lambda x, y: r2 * math.cos(math.pi * y))
    grad = (
        lambda x, y: (-r2 * math.pi * math.sin(math.pi * x), 0.0),
        lambda x, y: (0.0, -r2 * math.pi * math.sin(math.pi * y)),
    )
    return u, grad


def hadamard_matrix(f):
    """Boundary-integral form of the shape-derivative matrix over all four sides.

    Only the bottom side carries a nonzero normal velocity here, but every
    side is integrated so a change to the deformation field shows up.
    """
    u, grad = _eigenfunctions()
    sides = [
        (lambda s: (s, 0.0), lambda s: float(f.value(s)), f.breakpoints()),  # bottom
        (lambda s: (1.0, s), lambda s: 0.0, np.array([0.0, 1.0])),  # right
        (lambda s: (s, 1.0), lambda s: 0.0, np.array([0.0, 1.0])),  # top
        (lambda s: (0.0, s), lambda s: 0.0, np.array([0.0, 1.0])),  # left
    ]
    M = np.zeros((2, 2))
    for i in range(2):
        for j in range(i, 2):
            total = 0.0
            for point, vel, pts in sides:
                def integrand(s, i=i, j=j, point=point, vel=vel):
                    x, y = point(s)
                    gi, gj = grad[i](x, y), grad[j](x, y)
                    return (gi[0] * gj[0] + gi[1] * gj[1] - PI2 * u[i](x, y) * u[j](x, y)) * vel(s)

                for lo, hi in zip(pts[:-1], pts[1:]):
                    val, _ = integrate.quad(integrand, lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
                    total += val
            M[i, j] = M[j, i] = total
    return M


def deformed_domain(t, f):
    """Square with bottom side ``y = -t f(x)``; ``t < 0`` pushes the side inward."""
    if abs(t) * f.max_value >= 0.5:
        raise ValueError(f"|t| max f = {abs(t) * f.max_value:.3g} leaves too thin a domain")
    return StripDomain(1.0, ScaledProfile(f, -float(t)), WidthProfile(1.0))


@dataclass
class PerturbationReport:
    """Finite-difference check of the one-sided derivatives at ``t = 0``.

    ``alpha`` holds ``-eig(M)`` ascending; for ``t < 0`` the two branches move
    with slopes ``-alpha``.  ``fd_slopes`` maps each ``t`` to the sorted
    ``(mu2, mu3)`` difference quotients, ``richardson_slopes`` to their
    two-step extrapolation (needs ``2t`` in the list).  ``above_threshold``
    records ``F(t) - 16 pi^2 > 3 F_err`` and ``t_star`` is the largest ``|t|``
    with ``t < 0`` up to which this holds for every smaller tested ``|t|``.
    """

    matrix: np.ndarray
    matrix_reduced: np.ndarray
    alpha: tuple
    t: list
    L: list
    mu2: list
    mu3: list
    mu2_err: list
    mu3_err: list
    F: list
    F_err: list
    baseline: tuple
    fd_slopes: dict = field(default_factory=dict)
    richardson_slopes: dict = field(default_factory=dict)
    slope_match: dict = field(default_factory=dict)
    length_exponent: float = math.nan
    above_threshold: dict = field(default_factory=dict)
    t_star: float | None = None
    branch_ambiguity: list = field(default_factory=list)
    n: int = 0

    def rows(self):
        return list(zip(self.t, self.L, self.mu2, self.mu3, self.F, self.mu2_err))

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "L", "mu2", "mu3", "F", "mu2_err"])
        for row in self.rows():
            w.writerow([f"{v:.17g}" for v in row])

    def to_json(self):
        return json.dumps(
            {
                "matrix": self.matrix.tolist(),
                "matrix_reduced": self.matrix_reduced.tolist(),
                "alpha": list(self.alpha),
                "predicted_F_slope": -16.0 * self.alpha[0],
                "baseline": list(self.baseline),
                "fd_slopes": {f"{k:g}": list(v) for k, v in self.fd_slopes.items()},
                "richardson_slopes": {f"{k:g}": list(v) for k, v in self.richardson_slopes.items()},
                "slope_match": {f"{k:g}": v for k, v in self.slope_match.items()},
                "length_exponent": self.length_exponent,
                "above_threshold": {f"{k:g}": v for k, v in self.above_threshold.items()},
                "t_star": self.t_star,
                "branch_ambiguity": self.branch_ambiguity,
                "n": self.n,
            },
            indent=2,
            sort_keys=True,
        )


def _relative_match(measured, predicted):
    return [abs(m - p) / abs(p) if p else abs(m) for m, p in zip(sorted(measured), sorted(predicted))]


def _solve_t(job):
    t, f, n = job
    S = deformed_domain(t, f)
    return extrapolated_eigenvalues(S, n, 3), perimeter(S)


def derivative_check(f=None, t_list=DEFAULT_T, n=32, slope_rtol=0.05, threads=None):
    """Compare finite differences of ``mu_2, mu_3`` along ``t`` with ``-eig(M)``.

    Both grids ``n`` and ``2n`` must align with the breakpoints of ``f`` at
    ``1/4`` and ``3/4``, so ``n`` is a multiple of 4.  The unperturbed values
    come from the same grids, which cancels most discretization error in the
    difference quotients.  Branches are compared as sorted pairs: the
    eigenvalues leave the double eigenvalue in ascending order, whichever
    eigenvector each one continues.
    """
    f = BumpProfile() if f is None else f
    if n % 4:
        raise ValueError("n must be a multiple of 4")
    M = hadamard_matrix(f)
    Mr = reduced_hadamard_matrix(f)
    alpha = tuple(sorted(-np.linalg.eigvalsh(M)))
    base = extrapolated_eigenvalues(deformed_domain(0.0, f), n, 3)
    mu0 = (base.mu2, base.mu3)
    rep = PerturbationReport(M, Mr, alpha, [], [], [], [], [], [], [], [], mu0, n=n)

    jobs = [(float(t), f, n) for t in t_list]
    solved = _parallel_map(_solve_t, jobs, threads if threads is not None else default_threads())
    for t, (res, L) in zip(t_list, solved):
        rep.t.append(float(t))
        rep.L.append(L)
        rep.mu2.append(res.mu2)
        rep.mu3.append(res.mu3)
        rep.mu2_err.append(res.mu2_err)
        rep.mu3_err.append(res.mu3_err)
        rep.F.append(res.mu2 * L * L)
        rep.F_err.append(res.mu2_err * L * L)
        rep.fd_slopes[float(t)] = ((res.mu2 - mu0[0]) / t, (res.mu3 - mu0[1]) / t)
        if abs(res.mu3 - res.mu2) < 10.0 * max(res.mu2_err, res.mu3_err):
            rep.branch_ambiguity.append(float(t))

    for t in rep.t:
        if 2.0 * t in rep.fd_slopes:
            d1, d2 = rep.fd_slopes[t], rep.fd_slopes[2.0 * t]
            rich = tuple(2.0 * a - b for a, b in zip(d1, d2))
            rep.richardson_slopes[t] = rich
            predicted = [-a if t < 0 else -b for a, b in zip(alpha, alpha[::-1])]
            errs = _relative_match(rich, predicted)
            rep.slope_match[t] = {"rel_err": errs, "ok": bool(max(errs) <= slope_rtol)}

    dev = [(abs(t), abs(L - 4.0)) for t, L in zip(rep.t, rep.L) if t != 0 and abs(L - 4.0) > 0]
    if len(dev) >= 2:
        x, y = np.log([d[0] for d in dev]), np.log([d[1] for d in dev])
        rep.length_exponent = float(np.polyfit(x, y, 1)[0])

    for t, F, err in zip(rep.t, rep.F, rep.F_err):
        rep.above_threshold[t] = bool(F - SIXTEEN_PI2 > 3.0 * err)
    negatives = sorted((t for t in rep.t if t < 0), key=abs)
    for t in negatives:
        if not rep.above_threshold[t]:
            break
        rep.t_star = t
    return rep
