"""
The finite-element oracle
=========================

Every domain is pulled back to the unit square, where bilinear elements on a
uniform mesh solve a weighted eigenproblem.  Two mesh sizes and one
Richardson step give an estimate and an error indicator.
"""
import math

from neumann_bounds import Parallelogram, StripDomain, WidthProfile, extrapolated_eigenvalues, solve_domain
from neumann_bounds.transform import form_for, spd_certify

PI2 = math.pi**2

# Raw eigenvalues converge from above like h^2.
square = Parallelogram(1.0, 1.0, math.pi / 2)
for n in (8, 16, 32, 64):
    mu2 = solve_domain(square, n, 3).mu2
    print(f"n = {n:3d}   mu2 - pi^2 = {mu2 - PI2:.3e}")

# One extrapolation step removes the leading term.
res = extrapolated_eigenvalues(square, 32, 3)
print(f"extrapolated mu2 = {res.mu2:.10f}  (pi^2 = {PI2:.10f}, indicator {res.mu2_err:.1e})")

# A strip with a wavy lower boundary: the coefficient matrix now varies over
# the square, and is checked to be positive definite before solving.
g = WidthProfile(0.0, 0.0, ((0.25, 1, "sin"), (0.1, 3, "cos")))
strip = StripDomain.constant_width(2.0, 1.0, g)
report = spd_certify(form_for(strip))
print(f"strip coefficients: eigenvalues in [{report.min_eigenvalue:.3f}, {report.max_eigenvalue:.3f}]")
res = extrapolated_eigenvalues(strip, 24, 3)
print(f"strip mu2 = {res.mu2:.6f} +- {res.mu2_err:.1e},  mu3 = {res.mu3:.6f}")
