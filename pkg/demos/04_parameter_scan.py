"""
Scanning parallelograms against the oracle
==========================================

Each sample gets its closed-form bounds, extrapolated eigenvalues and a list
of verdicts.  The CSV written here has the same layout as ``nbl scan``.
"""
import sys

from neumann_bounds.verify import sample_parameters, scan_parallelograms, scan_summary, write_scan_csv

samples = sample_parameters("random", count=40, seed=0x5EED)
records = scan_parallelograms(samples)

summary = scan_summary(records)
print(f"{summary['records']} samples, {summary['violations']} violations")
print(f"max mu2 L^2 = {summary['max_prod_perim']:.6f} at {summary['argmax']}")

# The tightest non-square sample.
tight = sorted(records[1:], key=lambda r: r.verdicts[0].margin)[:3]
for r in tight:
    print(f"a={r.a:.3f} b={r.b:.3f}  mu2={r.oracle_mu2:.5f}  bound={r.bounds.mu2_bound:.5f}  case {r.certificate_case}")

write_scan_csv(records[:3], sys.stdout)
