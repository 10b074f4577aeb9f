"""Domain families: parallelograms and strip domains between two graphs.

A strip domain is ``{0 < x < l, g(x) < y < h(x)}`` with ``h - g`` uniformly
positive.  Boundary profiles are anything exposing ``value(x, length)``,
``deriv(x, length)`` and ``breakpoints(length)``; :class:`WidthProfile` is the
trigonometric class used throughout, :class:`ScaledProfile` rescales another
profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .exceptions import DegenerateDomain

__all__ = [
    "Parallelogram",
    "WidthProfile",
    "ScaledProfile",
    "StripDomain",
    "parallelogram_from_vectors",
    "perimeter",
    "area",
    "domain_from_json",
    "domain_to_json",
    "profile_from_json",
]

WIDTH_SAMPLES = 4096
WIDTH_MARGIN = 1e-9
CONSTANT_WIDTH_RTOL = 1e-12


@dataclass(frozen=True)
class Parallelogram:
    """Parallelogram in canonical form: ``l1 <= l2`` and angle ``phi`` in (0, pi)."""

    l1: float
    l2: float
    phi: float

    def __post_init__(self):
        l1, l2, phi = float(self.l1), float(self.l2), float(self.phi)
        if not (np.isfinite(l1) and np.isfinite(l2) and np.isfinite(phi)):
            raise DegenerateDomain("parallelogram parameters must be finite")
        if not 0.0 < l1 <= l2:
            raise DegenerateDomain(f"need 0 < l1 <= l2, got l1={l1}, l2={l2}")
        if not 0.0 < phi < math.pi:
            raise DegenerateDomain(f"need 0 < phi < pi, got phi={phi}")
        object.__setattr__(self, "l1", l1)
        object.__setattr__(self, "l2", l2)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_sides(cls, a, b, phi):
        """Build from two side lengths in either order."""
        return cls(min(a, b), max(a, b), phi)

    @property
    def area(self):
        return self.l1 * self.l2 * math.sin(self.phi)

    @property
    def perimeter(self):
        return 2.0 * (self.l1 + self.l2)

    @property
    def is_rectangle(self):
        return abs(math.cos(self.phi)) < 1e-12

    @property
    def is_square(self):
        return self.is_rectangle and abs(self.l2 - self.l1) <= 1e-12 * self.l2

    def vectors(self):
        """Spanning vectors ``(l1, 0)`` and ``l2 (cos phi, sin phi)``."""
        return (
            np.array([self.l1, 0.0]),
            np.array([self.l2 * math.cos(self.phi), self.l2 * math.sin(self.phi)]),
        )

    def scaled(self, c):
        return Parallelogram(c * self.l1, c * self.l2, self.phi)


def parallelogram_from_vectors(v1, v2):
    """Canonical :class:`Parallelogram` spanned by two plane vectors.

    Raises
    ------
    DegenerateDomain
        If the vectors are (nearly) collinear.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n1, n2 = float(np.hypot(*v1)), float(np.hypot(*v2))
    cross = float(v1[0] * v2[1] - v1[1] * v2[0])
    if n1 == 0.0 or n2 == 0.0 or abs(cross) <= 1e-14 * n1 * n2:
        raise DegenerateDomain("spanning vectors are collinear")
    dot = float(v1 @ v2)
    phi = math.atan2(abs(cross), dot)
    return Parallelogram.from_sides(n1, n2, phi)


@dataclass(frozen=True)
class WidthProfile:
    """``offset + slope*x + sum amp * trig(k*pi*x/length)`` with exact derivative.

    ``terms`` holds ``(amp, k, kind)`` triples with ``kind`` in {"sin", "cos"}.
    """

    offset: float = 0.0
    slope: float = 0.0
    terms: tuple = ()

    def __post_init__(self):
        terms = []
        for amp, k, kind in self.terms:
            if kind not in ("sin", "cos"):
                raise ValueError(f"unknown term kind {kind!r}")
            if int(k) != k or k < 1:
                raise ValueError(f"frequency index must be a positive integer, got {k}")
            if not np.isfinite(amp):
                raise ValueError("term amplitude must be finite")
            terms.append((float(amp), int(k), kind))
        object.__setattr__(self, "terms", tuple(terms))
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "slope", float(self.slope))

    @property
    def max_frequency(self):
        return max((k for _, k, _ in self.terms), default=0)

    def value(self, x, length):
        x = np.asarray(x, dtype=float)
        out = self.offset + self.slope * x
        for amp, k, kind in self.terms:
            arg = k * np.pi * x / length
            out = out + amp * (np.sin(arg) if kind == "sin" else np.cos(arg))
        return out

    def deriv(self, x, length):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.slope)
        for amp, k, kind in self.terms:
            w = k * np.pi / length
            if kind == "sin":
                out = out + amp * w * np.cos(w * x)
            else:
                out = out - amp * w * np.sin(w * x)
        return out

    def breakpoints(self, length):
        return np.array([0.0, length])

    def shifted(self, c):
        return WidthProfile(self.offset + c, self.slope, self.terms)

    def to_json(self):
        return {
            "offset": self.offset,
            "slope": self.slope,
            "terms": [{"amp": a, "k": k, "kind": kind} for a, k, kind in self.terms],
        }


@dataclass(frozen=True)
class ScaledProfile:
    """``factor * base + offset`` for any profile ``base``."""

    base: object
    factor: float = 1.0
    offset: float = 0.0

    @property
    def max_frequency(self):
        return getattr(self.base, "max_frequency", 0)

    def value(self, x, length):
        return self.factor * self.base.value(x, length) + self.offset

    def deriv(self, x, length):
        return self.factor * self.base.deriv(x, length)

    def breakpoints(self, length):
        return self.base.breakpoints(length)


def profile_from_json(obj):
    terms = tuple((t["amp"], t["k"], t.get("kind", "sin")) for t in obj.get("terms", ()))
    return WidthProfile(obj.get("offset", 0.0), obj.get("slope", 0.0), terms)


def _panel_points(profile_a, profile_b, length):
    pts = np.union1d(profile_a.breakpoints(length), profile_b.breakpoints(length))
    return [p for p in pts if 0.0 < p < length]


@dataclass(frozen=True)
class StripDomain:
    """Domain ``{0 < x < length, lower(x) < y < upper(x)}``.

    Width positivity is checked on a uniform grid of 4096 points with a margin
    of 1e-9; no interval arithmetic is attempted.
    """

    length: float
    lower: object
    upper: object
    _samples: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        length = float(self.length)
        if not (np.isfinite(length) and length > 0.0):
            raise DegenerateDomain(f"strip length must be positive, got {length}")
        object.__setattr__(self, "length", length)
        xs = np.linspace(0.0, length, WIDTH_SAMPLES)
        widths = self.upper.value(xs, length) - self.lower.value(xs, length)
        if not np.all(np.isfinite(widths)):
            raise DegenerateDomain("strip profiles are not finite on [0, l]")
        if widths.min() < WIDTH_MARGIN:
            i = int(np.argmin(widths))
            raise DegenerateDomain(
                f"width h - g = {widths[i]:.3e} at x = {xs[i]:.6g} is below margin {WIDTH_MARGIN}"
            )
        object.__setattr__(self, "_samples", widths)

    @classmethod
    def constant_width(cls, length, width, lower=None):
        """Strip with lower profile ``lower`` (default flat) and ``h = g + width``."""
        lower = WidthProfile() if lower is None else lower
        if isinstance(lower, WidthProfile):
            upper = lower.shifted(width)
        else:
            upper = ScaledProfile(lower, 1.0, width)
        return cls(length, lower, upper)

    @classmethod
    def rectangle(cls, length, width):
        return cls.constant_width(length, width)

    @cached_property
    def is_constant_width(self):
        w = self._samples
        return bool(w.max() - w.min() <= CONSTANT_WIDTH_RTOL * np.abs(w).max())

    @property
    def d(self):
        """Width at ``x = 0`` (the constant width for constant-width strips)."""
        return float(self.width(0.0))

    @property
    def min_width(self):
        return float(self._samples.min())

    def g(self, x):
        return self.lower.value(x, self.length)

    def dg(self, x):
        return self.lower.deriv(x, self.length)

    def h(self, x):
        return self.upper.value(x, self.length)

    def dh(self, x):
        return self.upper.deriv(x, self.length)

    def width(self, x):
        return self.h(x) - self.g(x)

    def dwidth(self, x):
        return self.dh(x) - self.dg(x)

    def sup_abs_dg(self, samples=WIDTH_SAMPLES):
        xs = np.linspace(0.0, self.length, samples)
        return float(np.abs(self.dg(xs)).max())

    @property
    def is_rectangle(self):
        xs = np.linspace(0.0, self.length, 257)
        return self.is_constant_width and float(np.abs(self.dg(xs)).max()) < 1e-12

    @property
    def quad_points(self):
        return _panel_points(self.lower, self.upper, self.length)


def _quad(fn, a, b, points, epsrel):
    val, _ = integrate.quad(fn, a, b, points=points or None, epsabs=0.0, epsrel=epsrel, limit=400)
    return val


def perimeter(domain):
    """Perimeter; strip arc lengths by adaptive quadrature (rtol 1e-10)."""
    if isinstance(domain, Parallelogram):
        return domain.perimeter
    S = domain
    pts = S.quad_points
    lower = _quad(lambda x: math.sqrt(1.0 + float(S.dg(x)) ** 2), 0.0, S.length, pts, 1e-12)
    upper = _quad(lambda x: math.sqrt(1.0 + float(S.dh(x)) ** 2), 0.0, S.length, pts, 1e-12)
    return float(S.width(0.0) + S.width(S.length) + lower + upper)


def area(domain):
    if isinstance(domain, Parallelogram):
        return domain.area
    S = domain
    return _quad(lambda x: float(S.width(x)), 0.0, S.length, S.quad_points, 1e-13)


def domain_from_json(obj):
    """Parse ``{"type": "parallelogram", ...}`` or ``{"type": "strip", ...}``."""
    kind = obj.get("type")
    if kind == "parallelogram":
        if "v1" in obj:
            return parallelogram_from_vectors(obj["v1"], obj["v2"])
        return Parallelogram.from_sides(obj["l1"], obj["l2"], obj["phi"])
    if kind == "strip":
        return StripDomain(obj["l"], profile_from_json(obj["g"]), profile_from_json(obj["h"]))
    raise ValueError(f"unknown domain type {kind!r}")


def domain_to_json(domain):
    if isinstance(domain, Parallelogram):
        v1, v2 = domain.vectors()
        return {"type": "parallelogram", "v1": v1.tolist(), "v2": v2.tolist()}
    if isinstance(domain.lower, WidthProfile) and isinstance(domain.upper, WidthProfile):
        return {
            "type": "strip",
            "l": domain.length,
            "g": domain.lower.to_json(),
            "h": domain.upper.to_json(),
        }
    raise TypeError("only trigonometric strip profiles serialize to JSON")
