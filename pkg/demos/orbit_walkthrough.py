"""Arithmetic side, end to end: expansions, separation, counting, resonance.

Run as a script; prints a guided tour and exits nonzero if any printed
claim fails.  Everything here has a CLI twin (cf, separation, discrepancy,
resonance, tail) that writes the same numbers into artifacts.
"""

from fractions import Fraction

from amofractal import (
    borel_cantelli_tail,
    cf_expand,
    check_separation,
    classify_D_delta,
    count_in_interval,
    dc_check,
    named_alpha,
    orbit_point,
    partial_sum,
    resonance_strength,
)

golden = named_alpha("golden")
silver = named_alpha("silver")
failures = 0


def claim(label: str, ok: bool, detail: str = "") -> None:
    global failures
    failures += 0 if ok else 1
    print(f"  [{'ok' if ok else 'FAIL'}] {label}" + (f"  {detail}" if detail else ""))


# -- 1. continued fractions ------------------------------------------------

print("1. expansions to depth 30")
g = cf_expand(golden, 30)
s = cf_expand(silver, 30)
print(f"  golden q: {list(g.q[1:8])} ...  q_30 = {g.q[30]}")
print(f"  silver q: {list(s.q[1:8])} ...  q_30 = {s.q[30]}")
det_ok = all(g.p[k] * g.q[k - 1] - g.p[k - 1] * g.q[k] == (-1) ** (k + 1)
             for k in range(1, 31))
claim("determinant identity exact at every depth", det_ok)

# -- 2. three-distance separation ------------------------------------------

print("\n2. orbit separation: min over k < q_n of |k.alpha| sits at k = q_(n-1)")
for n in (5, 10, 15):
    rep = check_separation(golden, n)
    claim(f"n={n}: argmin k = {rep.argmin_k} = q_{n-1}, "
          f"min > 1/(2*{rep.q_n})", rep.argmin_is_q_prev and rep.exceeds_half_inverse_q,
          f"min in [{float(rep.min_dist_lo):.3e}, {float(rep.min_dist_hi):.3e}]")

# -- 3. orbit counts vs interval length ------------------------------------

print("\n3. counting orbit points in an interval, stretch 10^4")
iv = (Fraction(1, 5), Fraction(1, 2))
rep = count_in_interval(golden, 0, 10_000, iv)
claim(f"count {rep.count} within [{float(rep.lower_bound):.0f}, "
      f"{float(rep.upper_bound):.0f}]",
      rep.applicable and rep.lower_bound <= rep.count <= rep.upper_bound)

# -- 4. Diophantine scan ---------------------------------------------------

# the golden worst case is k=1 at |alpha| = 0.381966..., so gamma = 0.4
# already fails there; the liminf trend 1/sqrt(5) = 0.447 never rescues it
print("\n4. Diophantine condition |k.alpha| >= gamma / k, scan k <= 10^5")
for gamma in (Fraction(7, 20), Fraction(2, 5)):
    rep = dc_check(golden, gamma)
    print(f"  gamma={float(gamma):.2f}: passed={rep.passed} "
          f"worst_k={rep.worst_k} worst={float(rep.worst_value):.6f}")
claim("gamma below the k=1 dip passes, above it fails",
      dc_check(golden, Fraction(7, 20)).passed
      and not dc_check(golden, Fraction(2, 5)).passed)

# -- 5. resonance ----------------------------------------------------------

print("\n5. resonance strength (-log|x - k.alpha|)/k")
hit = resonance_strength(golden, orbit_point(golden, 3), 1, 100)
claim("an exact orbit point certifies an infinite value",
      hit.exact_orbit_hit == 3 and hit.value == float("inf"))

v = classify_D_delta(golden, 0, 1.0, 100)
print(f"  x=0, window 1..100: best k={v.best_k} ratio={v.best_ratio:.4f} "
      f"consistent={v.consistent}")
v10 = classify_D_delta(golden, 0, 1.0, (10, 1000))
print(f"  x=0, window 10..1000: best k={v10.best_k} ratio={v10.best_ratio:.4f} "
      f"lower_evidence={v10.lower_evidence}")
claim("small k dominate the profile; excluding them kills the evidence",
      v.lower_evidence and not v10.lower_evidence)

# -- 6. tail sums of the resonance gauge -----------------------------------

print("\n6. tails of sum exp(-s.eta.k) style gauges, s=2, eta=1")
for K in (100, 1000, 10_000):
    rep = borel_cantelli_tail(golden, 1.0, 2.0, K)
    ratio = (rep.tail_lo + rep.tail_hi) / (2 * rep.prediction)
    print(f"  K={K:>6}: tail ~ {rep.tail_hi:.4e}  prediction {rep.prediction:.4e}"
          f"  ratio {ratio:.4f}")
claim("s=2 tail matches the integral comparison within 5% at K=10^4",
      abs(ratio - 1.0) < 0.05)

# s=1 diverges logarithmically: decade blocks approach 2 ln 10 = 4.6052
blocks = [partial_sum(1.0, 1.0, 10 ** d, 10 ** (d + 1)) for d in (1, 2, 3)]
print(f"  s=1 decade blocks: {[round(b, 3) for b in blocks]} -> 2 ln 10 = 4.605")
claim("s=1 partial sums grow logarithmically", abs(blocks[-1] / 4.6052 - 1) < 0.1)

print(f"\n{failures} failed claims")
raise SystemExit(1 if failures else 0)
