"""Node masses on a nested annulus tree and the ball-decay certificate.

The measure splits each node's mass among its recorded children in
proportion to (delta_t n)^{-1}, so masses are exact rationals and children
sum to their parent with no tolerance at all.  When a window cap or branch
sampling truncated a level, the normalizer runs over what was actually
recorded; the built subtree then carries exactly the share those children
would have received, and the per-node decay bound stays checkable instead
of silently assumed.

Ball bounds walk the tree and sum the deepest built nodes whose annuli
could meet B(x, r).  The geometry runs on integer residues at the sample
point's own dyadic scale; annulus radii are converted to integer units with
outward rounding, so a reported bound holds for the recorded tree even
though the sample point sits millions of bits deep.  Pairing those bounds
with the gauge (-log r)^{-1} over a grid of radii below the recorded
sibling-gap scale r0 reproduces, sample by sample, the decay chain behind
the lower-bound constant; margins are reported and nothing is claimed
beyond the sampled pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence

from .cantor import (
    CantorNode,
    CantorTree,
    ConstructionConstants,
    _bits_bucket,
    _dyadic_obj,
    _frac_str,
    _log10,
    cantor_point,
)
from .circle import CirclePoint
from .numeric import neg_log_bounds

__all__ = [
    "MassDistribution",
    "MdpSample",
    "MdpCertificate",
    "NodeBoundReport",
    "assign_mass",
    "child_sum_deviation",
    "node_bound_constant",
    "level_inflation",
    "certificate_constant",
    "node_bound_report",
    "mass_of_ball",
    "mdp_certificate",
    "distribution_to_json",
    "certificate_to_json",
]


@dataclass
class MassDistribution:
    """Exact node masses keyed by path, plus the per-parent normalizers.

    node_mass[()] is the root mass 1; for every node with recorded children
    the children's masses sum to the node's exactly, because the shares are
    computed as rationals of the same normalizer.
    """

    node_mass: Dict[tuple, Fraction]
    a0: Fraction
    normalizers: Dict[tuple, Fraction]

    def mass(self, path: Sequence[int]) -> Fraction:
        return self.node_mass[tuple(path)]


def assign_mass(tree: CantorTree) -> MassDistribution:
    """Distribute unit mass down the recorded tree.

    Each child n receives the fraction (delta n)^{-1} / sum over its
    recorded siblings of the same, times the parent mass.  delta cancels
    inside one level, but the normalizer is recorded in the stated form so
    reports can quote it directly.  Expects an audited tree; nothing here
    re-checks the geometry.
    """
    node_mass: Dict[tuple, Fraction] = {(): Fraction(1)}
    normalizers: Dict[tuple, Fraction] = {}
    for node in tree.iter_nodes():
        if not node.children:
            continue
        delta = node.children[0].annulus.delta
        harmonic = Fraction(0)
        for ch in node.children:
            harmonic += Fraction(1, ch.n)
        normalizers[node.path] = harmonic / delta
        parent = node_mass[node.path]
        for ch in node.children:
            # (1/(delta n)) / (harmonic/delta) = 1 / (n * harmonic)
            node_mass[ch.path] = parent / (ch.n * harmonic)
    return MassDistribution(node_mass=node_mass, a0=tree.constants.a0, normalizers=normalizers)


def child_sum_deviation(tree: CantorTree, mu: MassDistribution) -> Fraction:
    """Largest relative gap |sum of children - node| / node over internal nodes.

    Exactly zero for distributions built by assign_mass; kept as a check so
    deserialized or hand-edited distributions can be audited the same way.
    """
    worst = Fraction(0)
    for node in tree.iter_nodes():
        if not node.children:
            continue
        total = Fraction(0)
        for ch in node.children:
            total += mu.node_mass[ch.path]
        m = mu.node_mass[node.path]
        dev = abs(total - m) / m
        if dev > worst:
            worst = dev
    return worst


# ---------------------------------------------------------------------------
# decay constants

# The per-node bound mu(A(n)) <= K (n delta)^{-1} comes from two steps: the
# window-count floor loses 2^4, and replacing j by its floor expression loses
# another 2 p_j.  The ball constant stacks 2^5 from ball length against 2^4 p_j
# from the normalizer floor and p_a^{-1} from the guard scale, and each level
# of induction multiplies in lambda = 2^5 p_j p_a.  The pinned powers make
# lambda exactly one, so the faithful value is 2^32 a0 at every depth.


def node_bound_constant(constants: ConstructionConstants) -> Fraction:
    """K in the per-node decay bound mu(A(n)) <= K (n delta)^{-1}."""
    return 32 * constants.p_j * constants.a0


def level_inflation(constants: ConstructionConstants) -> Fraction:
    """Per-level growth 2^5 p_j p_a of the decay constant; 1 when pinned."""
    return 32 * constants.p_j * constants.p_a


def certificate_constant(constants: ConstructionConstants, depth: int) -> Fraction:
    """Ball-vs-gauge constant re-derived from the configured powers."""
    lam = level_inflation(constants)
    return 512 * constants.p_j / constants.p_a * lam ** max(depth - 1, 0) * constants.a0


@dataclass(frozen=True)
class NodeBoundReport:
    constant: Fraction
    max_ratio: Fraction
    worst_path: tuple
    violations: tuple


def node_bound_report(tree: CantorTree, mu: MassDistribution) -> NodeBoundReport:
    """Check mu(A(n)) * n * delta against the per-node constant everywhere.

    The bound is an invariant only under the pinned faithful powers; for toy
    trees (whose truncated levels can concentrate mass) the report records
    the overshoot instead of asserting.
    """
    constant = node_bound_constant(tree.constants)
    worst = Fraction(0)
    worst_path: tuple = ()
    violations = []
    for node in tree.iter_nodes():
        if node.n is None:
            continue
        ratio = mu.node_mass[node.path] * node.n * node.annulus.delta / constant
        if ratio > worst:
            worst, worst_path = ratio, node.path
        if ratio > 1:
            violations.append(node.path)
    return NodeBoundReport(
        constant=constant, max_ratio=worst, worst_path=worst_path, violations=tuple(violations)
    )


# ---------------------------------------------------------------------------
# ball bounds

# Unit conversions below decompose every denominator into odd * 2^v so the
# only divisions are by small odd integers; this is what keeps the geometry
# linear-time when the sample point lives at a multi-megabit dyadic scale.


def _floor_units(f: Fraction, bits: int) -> int:
    den = f.denominator
    v = (den & -den).bit_length() - 1
    q = (f.numerator << bits) >> v
    odd = den >> v
    return q // odd if odd > 1 else q


def _ceil_units(f: Fraction, bits: int) -> int:
    return -_floor_units(-f, bits)


def _frame(x: CirclePoint) -> tuple[int, int, int]:
    """(X, B, pad): integer position of x at scale 2^-B with error <= pad units."""
    vb = x.value.denominator.bit_length() - 1
    B = vb if vb > 0 and (vb & 0xFFFF) == 0 else _bits_bucket(vb)
    X, rem = divmod(x.value.numerator << B, x.value.denominator)
    pad = (1 if rem else 0) + (_ceil_units(x.err, B) if x.err else 0)
    return X, B, pad


def _child_frame(ch: CantorNode, A: int, M: int, B: int) -> tuple[int, int, int]:
    rc = (ch.n * A) % M
    out_u = _ceil_units(ch.annulus.outer_bounds[1], B)
    inn_u = _floor_units(ch.annulus.inner_bounds[0], B)
    return rc, out_u, inn_u


def _ball_total(
    tree: CantorTree,
    mu: MassDistribution,
    X: int,
    B: int,
    pad: int,
    r_units: int,
    cache: Optional[dict],
) -> Fraction:
    M = 1 << B
    A = tree.alpha.fixed_point(B)
    half = M >> 1
    total = Fraction(0)
    stack = [tree.root]
    while stack:
        node = stack.pop()
        for ch in node.children:
            if cache is not None:
                key = (B, ch.path)
                entry = cache.get(key)
                if entry is None:
                    entry = _child_frame(ch, A, M, B)
                    cache[key] = entry
            else:
                entry = _child_frame(ch, A, M, B)
            rc, out_u, inn_u = entry
            d = (X - rc) % M
            if d > half:
                d = M - d
            # center residue error < n units; the sample pad rides on top
            err = pad + ch.n + 1
            if d > out_u + r_units + err:
                continue
            if d < inn_u - r_units - err:
                continue
            if ch.children:
                stack.append(ch)
            else:
                total += mu.node_mass[ch.path]
    return total


def mass_of_ball(tree: CantorTree, mu: MassDistribution, x: CirclePoint, r) -> Fraction:
    """Certified upper bound for the mass of B(x, r).

    Sums the masses of the deepest built nodes whose annuli could meet the
    ball, treating an unexpanded node as carrying all its mass.  The meet
    test rounds every radius outward (including the point's own error
    bound), so the result can only overshoot, never undershoot.
    """
    r = Fraction(r)
    if r <= 0:
        raise ValueError("ball radius must be positive")
    if 2 * r >= 1:
        return mu.node_mass[()]
    X, B, pad = _frame(x)
    r_units = _ceil_units(r, B)
    return _ball_total(tree, mu, X, B, pad, r_units, None)


# ---------------------------------------------------------------------------
# certificate


@dataclass(frozen=True)
class MdpSample:
    branch: tuple
    x: CirclePoint
    r: Fraction
    mass_upper: Fraction
    bound: Fraction
    ok: bool
    margin_log10: float


@dataclass(frozen=True)
class MdpCertificate:
    """Sampled mass-vs-gauge comparison; pass means every sample held.

    conclusion is the lower bound mass/constant the samples support (None
    when some sample failed).  The samples field keeps the exact rationals
    so serialization can round however the consumer needs.
    """

    samples: tuple
    constant: Fraction
    conclusion: Optional[Fraction]
    passed: bool
    worst_margin_log10: float
    depth: int
    r0: Fraction


def mdp_certificate(
    tree: CantorTree, mu: MassDistribution, sample_count: int, r_grid: Sequence
) -> MdpCertificate:
    """Check mass_of_ball(x, r) <= constant * (-log r)^{-1} over a sample grid.

    Points come from cantor_point over distinct leaf branches in recorded
    order; radii cycle through r_grid, which must sit strictly inside
    (0, r0) so balls stay below the certified sibling-gap scale.  Failures
    are recorded, not raised.
    """
    if sample_count < 1:
        raise ValueError("need sample_count >= 1")
    r0 = tree.r0()
    if r0 is None:
        raise ValueError("tree records no positive sibling gap to scale radii against")
    grid = [Fraction(r) for r in r_grid]
    if not grid:
        raise ValueError("r_grid must be non-empty")
    for r in grid:
        if not 0 < r < r0:
            raise ValueError(f"radius {float(r):.6g} outside (0, r0) with r0 = {float(r0):.6g}")
    leaves = tree.leaves()
    constant = certificate_constant(tree.constants, tree.depth)
    neg_log_hi = {r: neg_log_bounds(r)[1] for r in grid}
    points: Dict[tuple, CirclePoint] = {}
    frames: Dict[tuple, tuple[int, int, int]] = {}
    cache: dict = {}
    samples = []
    worst = math.inf
    ng = len(grid)
    for i in range(sample_count):
        branch = leaves[(i // ng) % len(leaves)]
        r = grid[i % ng]
        x = points.get(branch)
        if x is None:
            x = cantor_point(tree, branch)
            points[branch] = x
            frames[branch] = _frame(x)
        X, B, pad = frames[branch]
        bound = _ball_total(tree, mu, X, B, pad, _ceil_units(r, B), cache)
        nl = neg_log_hi[r]
        ok = bound * nl <= constant
        threshold = constant / nl
        margin = math.log10(float(threshold)) - math.log10(float(bound)) if bound else math.inf
        if margin < worst:
            worst = margin
        samples.append(
            MdpSample(
                branch=branch, x=x, r=r, mass_upper=bound, bound=threshold, ok=ok,
                margin_log10=margin,
            )
        )
    passed = all(s.ok for s in samples)
    conclusion = mu.node_mass[()] / constant if passed else None
    return MdpCertificate(
        samples=tuple(samples),
        constant=constant,
        conclusion=conclusion,
        passed=passed,
        worst_margin_log10=worst,
        depth=tree.depth,
        r0=r0,
    )


# ---------------------------------------------------------------------------
# serialization


def _mass_obj(m: Fraction) -> object:
    # exact when compact, else a 256-bit dyadic upper bound
    if m.denominator.bit_length() <= 256:
        return _frac_str(m)
    return _dyadic_obj(m, up=True, bits=256)


def distribution_to_json(tree: CantorTree, mu: MassDistribution) -> dict:
    report = node_bound_report(tree, mu)
    nodes = []
    for node in tree.iter_nodes():
        m = mu.node_mass[node.path]
        rec: dict = {
            "path": list(node.path),
            "mass": _mass_obj(m),
            "mass_float": float(m),
        }
        if node.n is not None:
            rec["n"] = node.n
        nodes.append(rec)
    return {
        "schema": "mass-distribution/1",
        "mode": tree.constants.mode,
        "a0": _frac_str(mu.a0),
        "node_bound_constant": _frac_str(report.constant),
        "node_bound_max_ratio": float(report.max_ratio),
        "node_bound_violations": len(report.violations),
        "child_sum_max_rel_dev": _frac_str(child_sum_deviation(tree, mu)),
        "normalizers": {
            ",".join(map(str, path)): _frac_str(norm) for path, norm in sorted(mu.normalizers.items())
        },
        "nodes": nodes,
    }


def certificate_to_json(cert: MdpCertificate) -> dict:
    return {
        "schema": "mdp-certificate/1",
        "pass": cert.passed,
        "constant": _frac_str(cert.constant),
        "constant_float": float(cert.constant),
        "conclusion": None if cert.conclusion is None else _frac_str(cert.conclusion),
        "conclusion_float": None if cert.conclusion is None else float(cert.conclusion),
        "depth": cert.depth,
        "r0": _frac_str(cert.r0),
        "sample_count": len(cert.samples),
        "worst_margin_log10": round(cert.worst_margin_log10, 6),
        "samples": [
            {
                "branch": list(s.branch),
                "x_float": float(s.x.value),
                "x_err_log10": _log10(s.x.err) if s.x.err else None,
                "r": _frac_str(s.r),
                "mass_upper": _mass_obj(s.mass_upper),
                "mass_upper_float": float(s.mass_upper),
                "bound_float": float(s.bound),
                "ok": s.ok,
                "margin_log10": round(s.margin_log10, 6),
            }
            for s in cert.samples
        ],
    }
