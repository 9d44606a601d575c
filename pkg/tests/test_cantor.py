"""Nested annulus construction: schedules, constants, recorded structure,
audits, serialization and the scan-cap guard rails.

Structural numbers (child counts, window parameters, hashes, r0) were frozen
from independent probe runs; the builds are deterministic so they must
reproduce bit for bit.
"""

import csv
import json
import math
from fractions import Fraction

import pytest

from amofractal import (
    AuditEntry,
    AuditReport,
    CardinalityViolation,
    InadmissibleScale,
    ScanCapExceeded,
    ConstructionConstants,
    build_tree,
    cantor_point,
    delta_sequence,
    faithful_constants,
    make_annulus,
    named_alpha,
    select_in_interval,
    toy_constants,
    toy_delta_schedule,
    tree_hash,
    tree_to_json,
    verify_tree,
    write_audit_csv,
)
from amofractal.circle import circle_dist_bounds


class TestDeltaSchedule:
    def test_small_index_caps_at_one(self):
        assert delta_sequence(5, 5) == Fraction(1)
        assert delta_sequence(Fraction(1, 2), 5) == Fraction(1, 2)

    def test_large_index_caps_at_loglog(self):
        cap = delta_sequence(float("inf"), 21)
        assert cap == pytest.approx(math.log(math.log(21)))
        # a small target survives the cap exactly
        assert delta_sequence(Fraction(1, 2), 100) == Fraction(1, 2)
        assert isinstance(delta_sequence(3, 25), float)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            delta_sequence(3, 0)
        with pytest.raises(ValueError):
            delta_sequence(-1, 5)
        with pytest.raises(ValueError):
            delta_sequence(float("-inf"), 3)

    def test_toy_schedule_values(self):
        assert toy_delta_schedule() == (
            Fraction(27, 512),
            Fraction(33, 512),
            Fraction(2),
        )

    def test_schedule_validation(self, golden):
        consts = toy_constants()
        with pytest.raises(ValueError):
            build_tree(golden, 2, consts, depth=1, delta_schedule=())
        with pytest.raises(ValueError):
            build_tree(golden, 2, consts, depth=1, delta_schedule=(2, 1))
        with pytest.raises(ValueError):
            build_tree(golden, 2, consts, depth=1, delta_schedule=(3,))
        with pytest.raises(ValueError):
            build_tree(golden, 2, consts, depth=1, delta_schedule=(0,))

    def test_default_schedule_stops_at_irrational_levels(self, golden):
        with pytest.raises(InadmissibleScale):
            build_tree(golden, float("inf"), toy_constants(), depth=21)


class TestConstants:
    def test_faithful_defaults(self):
        consts = faithful_constants()
        assert consts.mode == "faithful"
        assert consts.c == Fraction(1, 1024)
        assert consts.a0 == Fraction(1, 2048)
        assert consts.p_a == Fraction(1, 1 << 14)
        assert consts.p_j == 1 << 9
        assert consts.p_h == Fraction(1, 1 << 16)
        consts.validate(Fraction(1))

    def test_faithful_pins_powers(self):
        with pytest.raises(ValueError):
            ConstructionConstants(
                c=Fraction(1, 1024), a0=Fraction(1, 2048), mode="faithful", p_j=64
            )

    def test_toy_defaults(self):
        consts = toy_constants()
        assert consts.mode == "toy"
        assert consts.c == Fraction(1, 20)
        assert consts.a0 == Fraction(1, 1250)
        assert consts.p_a == Fraction(1, 128)
        assert consts.p_j == 64
        consts.validate(Fraction(27, 512))

    def test_validate_rejections(self):
        fat = ConstructionConstants(c=Fraction(3, 5), a0=Fraction(1, 1250), mode="toy",
                                    p_a=Fraction(1, 128), p_j=64)
        with pytest.raises(InadmissibleScale):
            fat.validate(Fraction(1))
        big_c = ConstructionConstants(c=Fraction(1, 100), a0=Fraction(1, 2048))
        with pytest.raises(InadmissibleScale):
            big_c.validate(Fraction(1))
        big_a = ConstructionConstants(c=Fraction(1, 1024), a0=Fraction(1, 512))
        with pytest.raises(InadmissibleScale):
            big_a.validate(Fraction(1))
        lazy = ConstructionConstants(c=Fraction(1, 20), a0=Fraction(1, 2), mode="toy",
                                     p_a=Fraction(1, 128), p_j=64)
        with pytest.raises(InadmissibleScale):
            lazy.validate(Fraction(1))

    def test_mode_string_checked(self):
        with pytest.raises(ValueError):
            ConstructionConstants(c=Fraction(1, 20), a0=Fraction(1, 1250), mode="exact")


class TestAnnulus:
    def test_shape_and_measure(self, golden):
        ann = make_annulus(golden, 72, 11, Fraction(27, 512), Fraction(1, 20))
        r = math.exp(-72 * 27 / 512)
        assert ann.outer == pytest.approx(r)
        assert ann.inner == pytest.approx(r / 20)
        assert float(ann.outer_bounds[0]) == pytest.approx(r)
        lo, hi = ann.measure_bounds
        assert float(lo) == pytest.approx(2 * (1 - 1 / 20) * r)
        assert lo <= hi

    def test_window_membership_checked(self, golden):
        # q_11 = 144: the harvest window is 72 <= n < 144
        with pytest.raises(ValueError):
            make_annulus(golden, 71, 11, Fraction(1, 2), Fraction(1, 20))
        with pytest.raises(ValueError):
            make_annulus(golden, 144, 11, Fraction(1, 2), Fraction(1, 20))


class TestFaithfulLevelOne:
    def test_window_parameters(self, faithful_tree):
        p = faithful_tree.root.child_params
        assert (p.k_t, p.j_t, p.h_t, p.built_windows) == (11, 4, 8, 4)
        assert p.delta_t == Fraction(1)
        scales = [ts.base.scale_index for ts in faithful_tree.root.selections]
        assert scales == [11, 13, 15, 17]
        windows = [ts.base.window for ts in faithful_tree.root.selections]
        assert windows == [(72, 144), (189, 377), (494, 987), (1292, 2584)]

    def test_child_count_and_no_thinning_losses(self, faithful_tree):
        assert len(faithful_tree.root.children) == 2045
        for ts in faithful_tree.root.selections:
            assert ts.base.applicable
            assert len(ts.survivors) * 2 >= len(ts.base.members)

    def test_sibling_gap_and_r0(self, faithful_tree):
        r0 = faithful_tree.r0()
        assert r0 is not None and r0 > 0
        assert float(r0) == 0.00028003358207258274

    def test_canonical_hash(self, faithful_tree):
        assert tree_hash(faithful_tree) == (
            "8845ea8d4f5fa00052d0a1bdf2d1a3c6d558eb694d4134723229f889667e6cf3"
        )

    def test_audit_clean(self, faithful_tree):
        rep = verify_tree(faithful_tree)
        assert rep.passed
        assert rep.summary() == "26 checks, 0 failed"

    def test_target_delta_beyond_one_changes_nothing(self, golden, faithful_tree):
        # the first-level delta saturates at 1, so deeper targets rebuild the
        # identical level; only the serialized target differs
        other = build_tree(golden, 2, faithful_constants(), depth=1)
        assert other.schedule[0] == Fraction(1)
        assert [ch.n for ch in other.root.children] == [
            ch.n for ch in faithful_tree.root.children
        ]
        p, q = other.root.child_params, faithful_tree.root.child_params
        assert (p.k_t, p.j_t, p.h_t) == (q.k_t, q.j_t, q.h_t)
        assert other.r0() == faithful_tree.r0()


class TestToyTree:
    def test_node_counts(self, toy_tree):
        assert sum(1 for _ in toy_tree.iter_nodes()) == 91
        assert len(toy_tree.leaves()) == 84
        assert len(toy_tree.root.children) == 72

    def test_level_parameters(self, toy_tree):
        root_p = toy_tree.root.child_params
        assert (root_p.k_t, root_p.j_t, root_p.h_t) == (11, 1, 14)
        l2 = toy_tree.node_at((72,))
        assert (l2.child_params.k_t, l2.child_params.j_t, l2.child_params.h_t) == (13, 1, 13)
        assert [ch.n for ch in l2.children] == [195, 216, 250, 271, 326, 339, 360]
        l3 = toy_tree.node_at((72, 195))
        assert l3.child_params.k_t == 27
        assert l3.child_params.j_t == 91443
        assert l3.child_params.built_windows == 1  # max_windows truncation

    def test_deep_leaves(self, toy_tree):
        deep = sorted(p for p in toy_tree.leaves() if len(p) == 3)
        assert deep == [
            (72, 195, 196613),
            (72, 216, 832256),
            (73, 196, 196614),
            (73, 217, 832257),
        ]

    def test_schedule_resolved_with_lookahead(self, toy_tree):
        assert toy_tree.schedule == (
            Fraction(27, 512),
            Fraction(33, 512),
            Fraction(2),
            Fraction(2),
        )

    def test_r0_comes_from_second_level(self, toy_tree):
        # first-level toy annuli overlap, so only deeper gaps count
        assert toy_tree.root.child_gap[1] < 0
        r0 = toy_tree.r0()
        assert float(r0) == 0.003102139277166347

    def test_canonical_hash(self, toy_tree):
        assert tree_hash(toy_tree) == (
            "02a6cb4342220f09f7cc8e1aa7c80c868108b315b264dc4b00a53853264d2438"
        )

    def test_audit_clean(self, toy_tree):
        rep = verify_tree(toy_tree, exclusion_samples=5)
        assert rep.summary() == "123 checks, 0 failed"

    def test_node_at_missing_child(self, toy_tree):
        with pytest.raises(KeyError):
            toy_tree.node_at((72, 9999))

    def test_point_lies_in_shallow_leaf_annulus(self, toy_tree):
        for path in ((74,), (72, 250)):
            leaf = toy_tree.node_at(path)
            assert not leaf.children
            pt = cantor_point(toy_tree, path)
            d_lo, d_hi = circle_dist_bounds(pt, leaf.annulus.center)
            assert leaf.annulus.inner_bounds[1] <= d_lo
            assert d_hi <= leaf.annulus.outer_bounds[0]

    def test_point_lies_in_deep_leaf_annulus(self, toy_tree):
        # the recorded center point is too coarse to certify distances at
        # e^(-2n) scale, so re-derive its residue at the point's resolution
        leaf = toy_tree.node_at((72, 195, 196613))
        pt = cantor_point(toy_tree, (72, 195, 196613))
        M = pt.value.denominator
        xbits = M.bit_length() - 1
        assert M == 1 << xbits
        n = leaf.n
        rc = (n * toy_tree.alpha.fixed_point(xbits)) % M
        diff = (pt.value.numerator - rc) % M
        dist = min(diff, M - diff)
        err = n + 2 + -(-pt.err.numerator * M // pt.err.denominator)
        inn = leaf.annulus.inner_bounds[1]
        out = leaf.annulus.outer_bounds[0]
        inn_units = -(-inn.numerator * M // inn.denominator)
        out_units = out.numerator * M // out.denominator
        assert inn_units + err < dist < out_units - err

    def test_point_rejects_internal_nodes(self, toy_tree):
        with pytest.raises(ValueError):
            cantor_point(toy_tree, ())
        with pytest.raises(ValueError):
            cantor_point(toy_tree, (72,))


class TestToyDepthOne:
    def test_overlapping_level_has_no_gap(self, golden):
        tree = build_tree(golden, 2, toy_constants(), depth=1,
                          delta_schedule=toy_delta_schedule(), max_windows=1)
        assert len(tree.root.children) == 72
        assert tree.root.child_gap[1] < 0
        assert tree.r0() is None
        assert tree_hash(tree) == (
            "4c0477be6ea8c38b2abc9f105b184d3f38fbc01420bede9e6829329087ab44bd"
        )

    def test_infinite_target_serializes(self, golden):
        tree = build_tree(golden, float("inf"), toy_constants(), depth=1,
                          delta_schedule=toy_delta_schedule(), max_windows=1)
        obj = json.loads(tree_to_json(tree))
        assert obj["schema"] == "cantor-tree/1"
        assert obj["delta"] == "inf"


class TestSelections:
    def test_full_circle_window_is_complete(self, golden):
        sel = select_in_interval(golden, (0, 1), 11, 1)
        assert sel.q == 144
        assert sel.window == (72, 144)
        assert sel.members == tuple(range(72, 144))
        assert sel.applicable
        assert sel.dhat == Fraction(5, 12)

    def test_faithful_discrepancy_gate(self, golden):
        with pytest.raises(InadmissibleScale):
            select_in_interval(golden, (0, Fraction(1, 10)), 11, 1, mode="faithful")
        sel = select_in_interval(golden, (0, Fraction(1, 10)), 11, 1, mode="toy")
        assert not sel.applicable
        assert all(0 <= m < 144 for m in sel.members)

    def test_ball_radius_floor(self, golden):
        with pytest.raises(InadmissibleScale):
            select_in_interval(golden, (0, 1), 2, 1)

    def test_narrow_interval_rejected(self, golden):
        with pytest.raises((InadmissibleScale, CardinalityViolation)):
            select_in_interval(golden, (0, Fraction(1, 10**6)), 11, 1, mode="toy")


class TestScanCap:
    def test_interval_build_reports_needed_points(self, golden):
        with pytest.raises(ScanCapExceeded) as exc:
            build_tree(golden, Fraction(1), faithful_constants(), depth=1, scan_cap=10)
        assert exc.value.needed == 17
        assert exc.value.cap == 10
        assert "level 1 under node root" in str(exc.value)

    def test_cap_carries_last_diagnostic(self, golden):
        with pytest.raises(ScanCapExceeded) as exc:
            build_tree(golden, Fraction(1), faithful_constants(), depth=1, scan_cap=50)
        assert exc.value.needed == 72
        assert "discrepancy surrogate" in str(exc.value)

    def test_generous_cap_builds_same_structure(self, golden, faithful_tree):
        # the full-circle window is enumerated, not scanned, so a small cap
        # only constrains the scale probe
        tree = build_tree(golden, Fraction(1), faithful_constants(), depth=1,
                          scan_cap=200)
        assert len(tree.root.children) == len(faithful_tree.root.children)
        p, q = tree.root.child_params, faithful_tree.root.child_params
        assert (p.k_t, p.j_t) == (q.k_t, q.j_t)


class TestBuildArguments:
    def test_depth_policy_window_checks(self, golden):
        consts = toy_constants()
        sched = toy_delta_schedule()
        with pytest.raises(ValueError):
            build_tree(golden, 2, consts, depth=0, delta_schedule=sched)
        with pytest.raises(ValueError):
            build_tree(golden, 2, consts, depth=1, branch_policy=("bogus",),
                       delta_schedule=sched)
        with pytest.raises(ValueError):
            build_tree(golden, 2, consts, depth=1, branch_policy=("sample", 0),
                       delta_schedule=sched)
        with pytest.raises(ValueError):
            build_tree(golden, 2, consts, depth=1, max_windows=0,
                       delta_schedule=sched)


class TestAuditReport:
    def test_report_partitions_entries(self, tmp_path):
        good = AuditEntry("root", "nesting", True, 0.25, "")
        bad = AuditEntry("72", "cardinality", False, -1.0, "count below floor")
        rep = AuditReport(entries=(good, bad))
        assert not rep.passed
        assert rep.failures() == [bad]
        assert rep.summary() == "2 checks, 1 failed"

        out = tmp_path / "audit.csv"
        write_audit_csv(rep, str(out))
        with out.open() as fh:
            rows = list(csv.DictReader(fh))
        assert [r["check"] for r in rows] == ["nesting", "cardinality"]
        assert [r["passed"] for r in rows] == ["1", "0"]


class TestSerialization:
    def test_json_roundtrip_fields(self, toy_tree):
        obj = json.loads(tree_to_json(toy_tree))
        assert obj["schema"] == "cantor-tree/1"
        assert obj["constants"]["c"] == "1/20"
        assert obj["constants"]["mode"] == "toy"
        assert obj["branch_policy"] == ["sample", 2]
        assert obj["max_windows"] == 1
        assert obj["schedule"] == ["27/512", "33/512", "2/1", "2/1"]
        root = obj["root"]
        assert len(root["children"]) == 72
        first = root["children"][0]
        assert first["n"] == 72
        assert first["annulus"]["l"] == 11

    def test_radii_serialized_outward(self, faithful_tree):
        obj = json.loads(tree_to_json(faithful_tree))
        child = obj["root"]["children"][0]
        out = child["annulus"]["outer"]
        lo = out["lo"]["m"] * 2.0 ** out["lo"]["e"]
        hi = out["hi"]["m"] * 2.0 ** out["hi"]["e"]
        n = child["annulus"]["n"]
        assert lo <= math.exp(-n) <= hi
