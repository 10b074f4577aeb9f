"""Pull the Neumann Laplacian on a domain back to the unit square.

For a diffeomorphism ``Phi`` from the domain onto ``Q = (0, 1)^2`` the Dirichlet
energy becomes ``int_Q <A grad u, grad u>`` with

    A = [(1/|det DPhi|) DPhi DPhi^T] o Phi^{-1}

and the L2 mass becomes ``int_Q w |u|^2`` with ``w = 1/|det DPhi| o Phi^{-1}``.
The Neumann spectrum of the domain equals the spectrum of this weighted pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DegenerateDomain, NotSPD
from .geometry import WIDTH_MARGIN, Parallelogram, StripDomain

__all__ = ["FormCoefficients", "SPDReport", "parallelogram_form", "strip_form", "form_for", "spd_certify"]


@dataclass(frozen=True)
class FormCoefficients:
    """Pointwise coefficient data on the unit square.

    ``matrix_field(s, t)`` returns an array of shape ``s.shape + (2, 2)`` and
    ``weight(s, t)`` an array of shape ``s.shape``.  When ``is_constant`` the
    constant values are also available as ``constant_matrix`` and
    ``constant_weight``.
    """

    matrix_field: Callable
    weight: Callable
    is_constant: bool = False
    constant_matrix: np.ndarray | None = None
    constant_weight: float | None = None


def _constant_form(A, w):
    A = np.array(A, dtype=float)
    A.setflags(write=False)

    def matrix_field(s, t):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(A, s.shape + (2, 2))

    def weight(s, t):
        s = np.asarray(s, dtype=float)
        return np.full(s.shape, w)

    return FormCoefficients(matrix_field, weight, True, A, float(w))


def parallelogram_form(P: Parallelogram) -> FormCoefficients:
    """Constant ``A = (1/|P|) [[l2^2, -l1 l2 cos phi], [., l1^2]]`` and ``w = |P|``."""
    area = P.area
    off = -P.l1 * P.l2 * np.cos(P.phi)
    A = np.array([[P.l2**2, off], [off, P.l1**2]]) / area
    return _constant_form(A, area)


def strip_form(S: StripDomain) -> FormCoefficients:
    """Coefficients for ``Phi(x, y) = (x/l, (y - g(x))/d(x))``.

    With ``q = g'(ls) + t d'(ls)``::

        A(s, t) = [[d/l, -q], [-q, (l/d)(1 + q^2)]],   w(s, t) = l d(ls)
    """
    if S.min_width < WIDTH_MARGIN:
        raise DegenerateDomain("strip width margin violated")
    length = S.length

    if S.is_rectangle:
        d = S.d
        return _constant_form(np.diag([d / length, length / d]), length * d)

    def matrix_field(s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        x = length * s
        d = S.width(x)
        q = S.dg(x) + t * S.dwidth(x)
        out = np.empty(np.broadcast(s, t).shape + (2, 2))
        out[..., 0, 0] = d / length
        out[..., 0, 1] = -q
        out[..., 1, 0] = -q
        out[..., 1, 1] = (length / d) * (1.0 + q * q)
        return out

    def weight(s, t):
        s = np.asarray(s, dtype=float)
        w = length * S.width(length * s)
        return np.broadcast_to(w, np.broadcast(s, np.asarray(t)).shape).copy()

    return FormCoefficients(matrix_field, weight, False)


def form_for(domain) -> FormCoefficients:
    if isinstance(domain, Parallelogram):
        return parallelogram_form(domain)
    if isinstance(domain, StripDomain):
        return strip_form(domain)
    raise TypeError(f"no pullback for {type(domain).__name__}")


@dataclass(frozen=True)
class SPDReport:
    min_eigenvalue: float
    max_eigenvalue: float
    min_weight: float
    condition_number: float
    nodes: int


def spd_certify(F: FormCoefficients, n: int = 64) -> SPDReport:
    """Check ``A`` is SPD and ``w > 0`` at all ``(n+1)^2`` grid nodes.

    Raises
    ------
    NotSPD
        At the first node where the smallest eigenvalue of ``A`` or the weight
        is not positive.
    """
    if n < 2:
        raise ValueError("grid resolution must be at least 2")
    x = np.linspace(0.0, 1.0, n + 1)
    S, T = np.meshgrid(x, x)
    A = np.asarray(F.matrix_field(S, T))
    w = np.asarray(F.weight(S, T))
    ev = np.linalg.eigvalsh(A)
    lo, hi = ev[..., 0], ev[..., 1]
    if not np.all(lo > 0.0):
        j, i = np.unravel_index(np.argmin(lo), lo.shape)
        raise NotSPD(f"A is not positive definite at (s, t) = ({x[i]}, {x[j]})", (x[i], x[j]))
    if not np.all(w > 0.0):
        j, i = np.unravel_index(np.argmin(w), w.shape)
        raise NotSPD(f"weight is not positive at (s, t) = ({x[i]}, {x[j]})", (x[i], x[j]))
    return SPDReport(
        float(lo.min()),
        float(hi.max()),
        float(w.min()),
        float((hi / lo).max()),
        (n + 1) ** 2,
    )
