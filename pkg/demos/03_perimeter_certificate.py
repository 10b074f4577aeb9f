"""
Certifying mu_2 L^2 <= 16 pi^2 for parallelograms
=================================================

After scaling, every parallelogram is spanned by ``(a, b)`` and ``(1, 0)``
with ``a^2 + b^2 <= 1``.  Three elementary cases cover this quarter disk, and
in each one a chain of explicit inequalities ends at ``16 pi^2``.
"""
import math

import numpy as np

from neumann_bounds.verify import CASE1_B, CASE2_R, CASE3_A, certificate_case, certificate_cases, quasi_random_parameters

print(f"case 1: b > {CASE1_B:.5f}")
print(f"case 2: r < {CASE2_R:.5f}")
print(f"case 3: a > {CASE3_A:.5f} and r >= {CASE2_R:.5f}")

# A single point, with the values along its chain.
c = certificate_case(0.5, 0.3)
print(f"(0.5, 0.3) -> case {c.case}: {c.start:.3f} <= {c.middle:.3f} <= {c.end:.3f}")

# A million quasi-random points, vectorised.
a, b = quasi_random_parameters(1_000_000)
out = certificate_cases(a, b)
print("points per case:", np.bincount(out["case"], minlength=4)[1:], " uncovered:", int(np.sum(out["case"] == 0)))
print(f"largest L^2 bound / 16 pi^2 = {out['start'].max() / (16 * math.pi**2):.6f}")

# Only the square reaches the constant.
print(f"square: {certificate_case(0.0, 1.0).start / (16 * math.pi**2):.15f}")
