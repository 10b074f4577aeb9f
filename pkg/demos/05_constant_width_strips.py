"""
Strips of constant width
========================

A strip ``{0 < x < l, g(x) < y < g(x) + d}`` has the cosine bounds in closed
form through two integrals of ``g'``.  When ``l >= d`` this gives
``mu_2 <= pi^2 / l^2``, with equality only for the rectangle.
"""
import json
import math
import pathlib

from neumann_bounds import StripDomain, WidthProfile, domain_from_json, extrapolated_eigenvalues, strip_bounds
from neumann_bounds.bounds import m_rho, nonconvex_class_bound

here = pathlib.Path(__file__).parent

# A sine-shaped channel whose width exceeds its length; the integral I2
# vanishes and lambda_- lands on pi^2 / l^2 = 1.
omega = domain_from_json(json.loads((here / "omega_eps.json").read_text()))
b = strip_bounds(omega)
print(f"sine channel: I2 = {b.I2:.1e}, lambda_- = {b.lambda_minus:.12f}, equal-area square gives {math.pi**2 / (omega.length * omega.d):.6f}")

# Bending a rectangle strictly lowers mu_2 below pi^2 / l^2.
for amp in (0.0, 0.2, 0.4):
    S = StripDomain.constant_width(2.0, 1.0, WidthProfile(0.0, 0.0, ((amp, 2, "sin"),)))
    res = extrapolated_eigenvalues(S, 24, 3)
    print(f"amp {amp:.1f}: mu2 = {res.mu2:.6f}  pi^2/l^2 = {math.pi**2 / 4:.6f}  lambda_- = {strip_bounds(S).lambda_minus:.6f}")

# Non-convex members of the class A_rho stay below 16 pi^2 in mu_2 L^2.
rho = 0.5
S = StripDomain.constant_width(2.5, 1.0, WidthProfile(0.0, 0.0, ((0.25, 3, "sin"),)))
cv = nonconvex_class_bound(S, rho)
res = extrapolated_eigenvalues(S, 24, 3)
L2 = cv.product_bound * S.length**2 / math.pi**2
print(f"A_{rho}: slope cap {m_rho(rho):.4f}, sup|g'| {cv.sup_slope:.4f}, member {cv.member}")
print(f"  mu2 L^2 = {res.mu2 * L2:.3f} <= L^2 pi^2/l^2 = {cv.product_bound:.3f} < {16 * math.pi**2:.3f}")
