"""
Closed-form bounds for parallelograms
=====================================

Two trial families give upper bounds for the second and third Neumann
eigenvalues: products of cosines along the sides (``lambda_-``, ``lambda_+``)
and affine functions (``eta_-``, ``eta_+``).  Neither family wins everywhere.
"""
import math

import numpy as np

from neumann_bounds import Parallelogram, parallelogram_bounds, rhombus_bounds

# The unit square: both cosine bounds sit exactly on pi^2, the true double
# eigenvalue, while the affine bounds are stuck at 12.
square = parallelogram_bounds(Parallelogram(1.0, 1.0, math.pi / 2))
print(f"square      lambda = {square.lambda_minus:.6f}, {square.lambda_plus:.6f}   eta = {square.eta_minus:.1f}")

# Shear the square into a rhombus.  At 45 degrees the affine bound drops
# below the cosine bound.
rh = rhombus_bounds(1.0, math.pi / 4)
print(f"rhombus 45  lambda_- = {rh.lambda_minus:.6f}   eta_- = {rh.eta_minus:.6f}")

# Where does the switch happen?  Sweep the angle of a unit rhombus.
angles = np.linspace(0.2, math.pi / 2, 400)
lam = np.array([rhombus_bounds(1.0, a).lambda_minus for a in angles])
eta = np.array([rhombus_bounds(1.0, a).eta_minus for a in angles])
switch = angles[np.argmax(lam <= eta)]
print(f"cosine bound is the smaller one for angles above {math.degrees(switch):.2f} degrees")

# Long thin rectangles: lambda_- tracks pi^2 / l2^2, the exact mu_2.
for l2 in (1.5, 2.0, 4.0):
    b = parallelogram_bounds(Parallelogram(1.0, l2, math.pi / 2))
    print(f"1 x {l2:<4} mu2 bound {b.mu2_bound:.6f}   pi^2/l2^2 = {math.pi**2 / l2**2:.6f}")
