"""Neumann eigenvalue bounds for parallelograms and constant-width strips.

Closed-form upper bounds for mu_2 and mu_3, a bilinear finite-element oracle
on the pulled-back unit-square problem, parameter scans for the perimeter
inequality ``mu_2 L^2 <= 16 pi^2`` and a boundary-perturbation study of the
unit square.
"""
from .bounds import (
    ParallelogramBounds,
    StripBounds,
    m_rho,
    nonconvex_class_bound,
    parallelogram_bounds,
    rhombus_bounds,
    strip_bounds,
)
from .exceptions import (
    CoverageGap,
    DegenerateDomain,
    NotConstantWidth,
    NotSPD,
    SolverFailure,
)
from .geometry import (
    Parallelogram,
    StripDomain,
    WidthProfile,
    area,
    domain_from_json,
    parallelogram_from_vectors,
    perimeter,
)
from .solver import (
    EigenResult,
    Grid,
    assemble,
    extrapolate,
    extrapolated_eigenvalues,
    lowest_eigenpairs,
    solve_domain,
)
from .transform import FormCoefficients, parallelogram_form, spd_certify, strip_form

__version__ = "0.1.0"
