"""Build the level-1 nested family at full rigor and weigh it.

Walks the same pipeline the test suite freezes: scale choice, window
enumeration, ball selection with the cardinality bounds, the audit pass,
then the measure that the lower-bound certificate runs on.  Takes a few
seconds; CLI twins are cantor-build / cantor-audit / mass-assign / mdp-cert.
"""

import time
from fractions import Fraction

from amofractal import (
    assign_mass,
    build_tree,
    child_sum_deviation,
    faithful_constants,
    mass_of_ball,
    mdp_certificate,
    named_alpha,
    node_bound_report,
    tree_hash,
    verify_tree,
)

golden = named_alpha("golden")
constants = faithful_constants()
print(f"constants: mode={constants.mode} c={constants.c} a0={constants.a0}")

# -- build ------------------------------------------------------------------

t0 = time.monotonic()
tree = build_tree(golden, Fraction(1), constants, depth=1)
lvl = tree.root.child_params
print(f"\nbuilt level 1 in {time.monotonic() - t0:.1f}s: "
      f"k1={lvl.k_t} j1={lvl.j_t} h1={lvl.h_t} windows={lvl.built_windows}")
print(f"tree hash {tree_hash(tree)[:16]}...")

print("\nwindow          q      picked  lower   upper")
total = 0
for ts in tree.root.selections:
    sel = ts.base
    n0, n1 = sel.window
    picked = len(ts.survivors)
    total += picked
    size = sel.region_measure[1]  # certified upper bracket of |I|
    lo = float(size * sel.q) / 8
    hi = float(size * sel.q)
    mark = "ok" if lo <= picked <= hi else "VIOLATION"
    print(f"({n0:>5},{n1:>5})  {sel.q:>5}  {picked:>6}  {lo:>6.1f}  {hi:>6.1f}  {mark}")
print(f"children kept after thinning: {sum(1 for _ in tree.root.children)} "
      f"(selected {total})")

# -- audit ------------------------------------------------------------------

rep = verify_tree(tree)
print(f"\naudit: {len(rep.entries)} checks, {len(rep.failures())} failed")
for e in rep.entries[:4]:
    print(f"  {e.check:<22} {'pass' if e.passed else 'FAIL'}  {e.detail}")
print("  ...")

# -- measure ----------------------------------------------------------------

mu = assign_mass(tree)
print(f"\nmass: normalizer {float(mu.normalizers[()]):.6f}, "
      f"child sums exact (deviation {child_sum_deviation(tree, mu)})")
bound = node_bound_report(tree, mu)
print(f"node bound: max ratio {float(bound.max_ratio):.4f}, "
      f"{len(bound.violations)} violations")

x = tree.node_at((72,)).annulus.center
r0 = tree.r0()
print(f"smallest sibling gap r0 = {float(r0):.3e}")
print(f"ball of r0/2 at the first center weighs {float(mass_of_ball(tree, mu, x, r0 / 2)):.6f} "
      f"= mass of that node alone")

# a light certificate run; the acceptance gate does 1000 samples
cert = mdp_certificate(tree, mu, 32, [r0 / 2, r0 / 8, r0 / 64, r0 / 1024])
print(f"\ncertificate: passed={cert.passed} constant={cert.constant} "
      f"-> lower bound constant {cert.conclusion}")
print(f"worst margin 10^{cert.worst_margin_log10:.2f} over {len(cert.samples)} samples")

raise SystemExit(0 if not rep.failures() and cert.passed else 1)
