"""Spectral side: approximant bands, the counting staircase, and what the
measure looks like up close.

The operator family here is the discrete Schrodinger operator with cosine
potential at coupling lambda, sampled along rational approximants p/q of the
golden rotation number.  CLI twins: butterfly, ids, gaps, holder, localdim,
map-beta-delta.
"""

import math

from amofractal import (
    LadderInstability,
    approximant_spectrum,
    beta_of_delta,
    convergent_ladder,
    delta_of_beta,
    duality_defect,
    gap_labels,
    holder_check,
    ids,
    ids_table,
    local_dim_estimate,
    named_alpha,
)
from amofractal.cli import band_energies

# -- exact anchors ---------------------------------------------------------

free = approximant_spectrum(0.0, 0, 1)
const = approximant_spectrum(0.5, 0, 1)
half = approximant_spectrum(0.5, 1, 2)
print("exact anchors")
print(f"  lambda=0:          bands {free.bands}")
print(f"  q=1, lambda=0.5:   extent {const.extent}")
print(f"  q=2, lambda=0.5:   edges +-{half.extent[1]:.12f} (sqrt 5 = {math.sqrt(5):.12f})")

# -- ladder trends ---------------------------------------------------------

golden = named_alpha("golden")
print("\nband geometry along the convergent ladder, lambda=0.5")
print("  q     bands  total length  duality defect")
for p, q in convergent_ladder(golden.spec, 144):
    ap = approximant_spectrum(0.5, p, q)
    print(f"  {q:>3}  {len(ap.bands):>6}  {ap.total_band_length:>12.6f}"
          f"  {duality_defect(0.5, p, q):>14.2e}")
# total length drifts to 4(1 - lambda) = 2 as q grows

# -- staircase and gap labels ----------------------------------------------

table = ids_table(0.5, 89, 144)
print(f"\ncounting function at q=144: N(0) = {ids(0.5, 89, 144, 0.0)}")
print(f"symmetry N(E) + N(-E) - 1 at a few breakpoints:",
      max(abs(table.eval(E) + table.eval(-E) - 1.0)
          for E, _ in table.breakpoints[:40]))

labels = sorted(gap_labels(table), key=lambda g: g.interval[0] - g.interval[1])[:5]
print("\nfive widest gaps and their orbit labels (plateau value = frac(k p/q))")
for g in labels:
    width = g.interval[1] - g.interval[0]
    print(f"  E in [{g.interval[0]:+.4f}, {g.interval[1]:+.4f}]"
          f"  width {width:.4f}  N = {g.j}/144  k = {g.k:+d}")

# -- regularity of the staircase -------------------------------------------

energies = band_energies(table, 40, seed=0)
eps = [1e-1 * (1e-5) ** (i / 10) for i in range(11)]
rep = holder_check(table, energies, eps)
print(f"\nenvelope fit on 40 energies x 11 scales: "
      f"{rep.c_low:.4f} eps^1.5 <= dN <= {rep.c_high:.4f} eps^0.5, "
      f"{len(rep.violations)} violations")

# -- local dimension of the band measure -----------------------------------

ladder = convergent_ladder(golden.spec, 377)
grid = [1e-1 * (1e-5) ** (i / 15) for i in range(16)]
fine = gap_labels(ids_table(0.5, 233, 377))
widest = max(fine, key=lambda g: g.interval[1] - g.interval[0])

edge = local_dim_estimate(0.5, ladder, widest.interval[0], grid)
generic = local_dim_estimate(0.5, ladder, 0.0, grid)
print("\nlocal dimension of the band measure (square-root edges vs interior)")
print(f"  widest-gap edge E={widest.interval[0]:+.4f}: "
      f"slopes in [{edge.lower_est:.4f}, {edge.upper_est:.4f}]  (nominal 1/2)")
print(f"  generic E=0:            slopes in [{generic.lower_est:.4f}, "
      f"{generic.upper_est:.4f}]  (nominal 1)")
try:
    local_dim_estimate(0.5, ladder, 0.5, grid)
except LadderInstability as e:
    print(f"  inside a gap, the ladder disagrees and says so: {e}")

# -- exponent dictionary ---------------------------------------------------

d = delta_of_beta(0.75, 0.5)
print(f"\nexponent map at lambda=1/2: beta=3/4 -> delta={d:.6f} "
      f"-> back to beta={beta_of_delta(d, 0.5):.6f}")

raise SystemExit(0)
