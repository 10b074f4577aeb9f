"""
Pushing in a side of the square
===============================

Denting the bottom side of the unit square by ``t f(x)`` with a bump ``f``
supported near the corners splits the double eigenvalue ``pi^2``.  The
splitting rates are the eigenvalues of a 2x2 boundary-integral matrix, and the
perimeter only changes at second order.  So for small inward pushes the
non-convex domain has ``mu_2 L^2 > 16 pi^2``.
"""
import math

from neumann_bounds.perturb import BumpProfile, derivative_check, hadamard_matrix

f = BumpProfile()
M = hadamard_matrix(f)
print("matrix:\n", M)

report = derivative_check(f, (-0.02, -0.01, -0.005, -0.0025), n=32)
print(f"predicted rates alpha = {report.alpha[0]:.4f}, {report.alpha[1]:.4f}")
for t, slopes in report.richardson_slopes.items():
    print(f"t = {t:+.4f}: finite-difference slopes {slopes[0]:.4f}, {slopes[1]:.4f}")
print(f"perimeter change exponent {report.length_exponent:.3f}")
for t, F, err in zip(report.t, report.F, report.F_err):
    print(f"t = {t:+.4f}: mu2 L^2 - 16 pi^2 = {F - 16 * math.pi**2:+.4f}  (+- {err:.4f})")
