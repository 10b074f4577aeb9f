"""Closed-form upper bounds for the second and third Neumann eigenvalues.

Parallelogram bounds come from two trial families on the unit square:
``alpha cos(pi s) + beta cos(pi t)`` gives ``lambda_-/+`` and affine functions
give ``eta_-/+``.  Constant-width strips use the cosine family only.

The lower roots are evaluated through the conjugate product
``S - R = (S^2 - R^2) / (S + R)``, which avoids cancellation near the square.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import NotConstantWidth
from .geometry import Parallelogram, StripDomain, perimeter

__all__ = [
    "ParallelogramBounds",
    "StripBounds",
    "ClassVerdict",
    "parallelogram_bounds",
    "rhombus_bounds",
    "cosine_trial_matrices",
    "strip_integrals",
    "strip_bounds",
    "strip_trial_matrix",
    "m_rho",
    "nonconvex_class_bound",
]

PI2 = math.pi**2


@dataclass(frozen=True)
class ParallelogramBounds:
    lambda_minus: float
    lambda_plus: float
    eta_minus: float
    eta_plus: float
    mu2_bound: float
    mu3_bound: float
    mean_bound: float

    def to_dict(self):
        return asdict(self)


def _bounds_from(l1sq, l2sq, cos2, sin2, area):
    S = l1sq + l2sq
    diff2 = (l1sq - l2sq) ** 2
    prod = l1sq * l2sq
    r_lam = math.sqrt(diff2 + (256.0 / PI2**2) * prod * cos2)
    r_eta = math.sqrt(diff2 + 4.0 * prod * cos2)
    a2 = area * area
    lam_plus = PI2 / (2.0 * a2) * (S + r_lam)
    eta_plus = 6.0 / a2 * (S + r_eta)
    # (S - R)(S + R) = 4 l1^2 l2^2 (1 - 64 cos^2/pi^4)  and  4 l1^2 l2^2 sin^2
    lam_minus = PI2 / (2.0 * a2) * (4.0 * prod * (1.0 - 64.0 * cos2 / PI2**2)) / (S + r_lam)
    eta_minus = 6.0 / a2 * (4.0 * prod * sin2) / (S + r_eta)
    lam_minus = min(lam_minus, lam_plus)
    eta_minus = min(eta_minus, eta_plus)
    return ParallelogramBounds(
        lambda_minus=lam_minus,
        lambda_plus=lam_plus,
        eta_minus=eta_minus,
        eta_plus=eta_plus,
        mu2_bound=min(lam_minus, eta_minus),
        mu3_bound=lam_plus,
        mean_bound=PI2 * S / (2.0 * a2),
    )


def parallelogram_bounds(P: Parallelogram) -> ParallelogramBounds:
    """``lambda_-/+``, ``eta_-/+`` and the derived bounds for ``mu_2``, ``mu_3``.

    ``mu2_bound = min(lambda_-, eta_-)``, ``mu3_bound = lambda_+`` and
    ``mean_bound = (lambda_- + lambda_+)/2 = pi^2 (l1^2 + l2^2) / (2 |P|^2)``.
    """
    c, s = math.cos(P.phi), math.sin(P.phi)
    return _bounds_from(P.l1**2, P.l2**2, c * c, s * s, P.area)


def rhombus_bounds(l: float, phi: float) -> ParallelogramBounds:
    """Specialisation to equal sides, e.g. ``lambda_- = (pi^2 l^2/|P|^2)(1 - 8|cos phi|/pi^2)``."""
    if l <= 0 or not 0 < phi < math.pi:
        raise ValueError("need l > 0 and 0 < phi < pi")
    c = abs(math.cos(phi))
    a2 = (l * l * math.sin(phi)) ** 2
    k = l * l / a2
    lam_minus = PI2 * k * (1.0 - 8.0 * c / PI2)
    lam_plus = PI2 * k * (1.0 + 8.0 * c / PI2)
    eta_minus = 12.0 * k * (1.0 - c)
    eta_plus = 12.0 * k * (1.0 + c)
    return ParallelogramBounds(
        lambda_minus=lam_minus,
        lambda_plus=lam_plus,
        eta_minus=eta_minus,
        eta_plus=eta_plus,
        mu2_bound=min(lam_minus, eta_minus),
        mu3_bound=lam_plus,
        mean_bound=PI2 * k,
    )


def cosine_trial_matrices(P: Parallelogram):
    """Energy and mass matrices of the cosine trial family in ``(alpha, beta)``.

    Returns ``(E, G)`` with ``E = (pi^2 / 2|P|) Atilde`` and ``G = (|P|/2) I``,
    so the generalized eigenvalues of ``(E, G)`` are ``lambda_-/+``.
    """
    a = P.area
    off = -(8.0 / PI2) * P.l1 * P.l2 * math.cos(P.phi)
    At = np.array([[P.l2**2, off], [off, P.l1**2]])
    return PI2 / (2.0 * a) * At, 0.5 * a * np.eye(2)


@dataclass(frozen=True)
class StripBounds:
    lambda_minus: float
    lambda_plus: float
    mu2_simple: float
    mean_bound: float
    I1: float
    I2: float
    length: float
    width: float

    def to_dict(self):
        return asdict(self)


def _gauss_panels(fn, a, b, panels, order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        total += half * float(np.dot(w, fn(lo + half * (x + 1.0))))
    return total


def _breakpoint_gauss(fn, S, panels_per_piece):
    pts = np.union1d(S.lower.breakpoints(S.length), [0.0, S.length])
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += _gauss_panels(fn, lo, hi, panels_per_piece)
    return total


def strip_integrals(S: StripDomain):
    """``I1 = int (1 + g'^2)`` and ``I2 = int g'(x) sin(pi x / l)`` over ``[0, l]``.

    Composite 16-point Gauss-Legendre on ``1 + max frequency`` panels per
    smooth piece of ``g``, which integrates the trigonometric profile class to
    rounding error.
    """
    length = S.length
    k = getattr(S.lower, "max_frequency", None)
    panels = 8 if k is None else 1 + k
    i1 = _breakpoint_gauss(lambda x: 1.0 + S.dg(x) ** 2, S, panels)
    i2 = _breakpoint_gauss(lambda x: S.dg(x) * np.sin(np.pi * x / length), S, panels)
    return i1, i2


def strip_bounds(S: StripDomain) -> StripBounds:
    """Bounds for a constant-width strip.

    Raises
    ------
    NotConstantWidth
        If ``h - g`` is not constant.
    """
    if not S.is_constant_width:
        raise NotConstantWidth("strip bounds need h - g constant")
    l, d = S.length, S.d
    i1, i2 = strip_integrals(S)
    p = d / l
    q = i1 / d
    r = math.sqrt((p - q) ** 2 + 64.0 / (PI2 * l * l) * i2 * i2)
    scale = PI2 / (2.0 * l * d)
    lam_plus = scale * (p + q + r)
    # (p + q)^2 - r^2 = 4 I1 / l - 64 I2^2 / (pi^2 l^2)
    lam_minus = scale * (4.0 * i1 / l - 64.0 * i2 * i2 / (PI2 * l * l)) / (p + q + r)
    return StripBounds(
        lambda_minus=min(lam_minus, lam_plus),
        lambda_plus=lam_plus,
        mu2_simple=min(PI2 / l**2, PI2 * i1 / (d * d * l)),
        mean_bound=0.5 * PI2 * (1.0 / l**2 + i1 / (l * d * d)),
        I1=i1,
        I2=i2,
        length=l,
        width=d,
    )


def strip_trial_matrix(S: StripDomain):
    """Energy matrix ``M`` of the cosine trial family on a constant-width strip.

    Its eigenvalues are ``(l d / 2) lambda_-/+``.
    """
    l, d = S.length, S.d
    i1, i2 = strip_integrals(S)
    off = -4.0 / (math.pi * l) * i2
    return 0.5 * PI2 * np.array([[d / l, off], [off, i1 / d]])


def m_rho(rho: float) -> float:
    """Slope cap ``sqrt((2 - rho)^2 - 1)`` of the class A_rho."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    return math.sqrt((2.0 - rho) ** 2 - 1.0)


@dataclass(frozen=True)
class ClassVerdict:
    rho: float
    m_rho: float
    aspect: float
    sup_slope: float
    member: bool
    product_bound: float
    chain_value: float
    bound_ok: bool


def nonconvex_class_bound(S: StripDomain, rho: float) -> ClassVerdict:
    """Membership in A_rho and the resulting ``L^2 mu_2 < 16 pi^2`` chain.

    ``product_bound = L^2 pi^2 / l^2`` bounds ``L^2 mu_2`` for any constant
    width strip with ``l >= d``; ``chain_value = 4 pi^2 (d/l + sqrt(1 + sup|g'|^2))^2``
    dominates it.
    """
    if not S.is_constant_width:
        raise NotConstantWidth("class A_rho needs constant width")
    cap = m_rho(rho)
    aspect = S.d / S.length
    slope = S.sup_abs_dg()
    member = aspect <= rho and slope <= cap
    L = perimeter(S)
    product = L * L * PI2 / S.length**2
    chain = 4.0 * PI2 * (aspect + math.sqrt(1.0 + slope * slope)) ** 2
    ok = (not member) or product < 16.0 * PI2
    return ClassVerdict(rho, cap, aspect, slope, member, product, chain, ok)
