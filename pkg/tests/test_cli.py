"""Plan parsing, config layering, deterministic manifests and the sampling
helpers behind the batch commands."""

import json
from fractions import Fraction

import pytest

from amofractal import Cover, dhat_estimate, named_alpha, transport_cover
from amofractal.cli import (
    UsageError,
    admissible_covers,
    applicable_intervals,
    band_energies,
    main,
    parse_plan,
    run_plan,
)


class TestParsePlan:
    def test_defaults_and_canonical_echo(self):
        plan = parse_plan(["tail"])
        assert plan.command == "tail"
        v = plan.values
        assert v["s"] == Fraction(2)
        assert v["eta"] == Fraction(1)
        assert (v["K"], v["terms"], v["seed"], v["precision"]) == (100, 200_000, 0, 96)
        assert plan.canon[0] == ("command", "tail")
        keys = [k for k, _ in plan.canon[1:]]
        assert keys == sorted(keys)
        assert "out" not in keys  # output location never enters the canon
        assert plan.echo().startswith("plan command=tail")

    def test_coercions(self):
        plan = parse_plan(["tail", "--s", "3/2", "--eta", "0.25", "--K", "50"])
        assert plan.values["s"] == Fraction(3, 2)
        assert plan.values["eta"] == Fraction(1, 4)
        assert plan.values["K"] == 50
        assert ("eta", "1/4") in plan.canon
        assert ("K", "50") in plan.canon

    def test_bool_flag(self):
        assert parse_plan(["ids", "--lambda", "0", "--pq", "1/3", "--E", "0"]).values["table"] is False
        plan = parse_plan(["ids", "--lambda", "0", "--pq", "1/3", "--E", "0", "--table"])
        assert plan.values["table"] is True
        assert ("table", "true") in plan.canon

    def test_rejections(self):
        with pytest.raises(UsageError):
            parse_plan([])
        with pytest.raises(UsageError):
            parse_plan(["frobnicate"])
        with pytest.raises(UsageError):
            parse_plan(["tail", "--nonsense", "1"])
        with pytest.raises(UsageError):
            parse_plan(["tail", "--K", "many"])
        with pytest.raises(UsageError):
            parse_plan(["tail", "--s", "one-half"])
        with pytest.raises(UsageError):
            parse_plan(["ids", "--pq", "1/3", "--E", "0"])  # missing --lambda

    def test_cross_field_validation(self):
        with pytest.raises(UsageError):
            parse_plan(["map-beta-delta", "--lambda", "1/2"])
        with pytest.raises(UsageError):
            parse_plan(["map-beta-delta", "--lambda", "1/2", "--beta", "1/2",
                        "--delta", "1"])
        with pytest.raises(UsageError):
            parse_plan(["resonance", "--x", "0", "--delta", "1"])
        with pytest.raises(UsageError):
            parse_plan(["resonance", "--x", "0", "--delta", "1", "--K", "10",
                        "--kmin", "1"])
        parse_plan(["resonance", "--x", "0", "--delta", "1", "--kmin", "5",
                    "--kmax", "50"])
        with pytest.raises(UsageError):
            parse_plan(["cantor-build", "--mode", "exact"])
        with pytest.raises(UsageError):
            parse_plan(["cantor-build", "--branch", "partial"])
        parse_plan(["cantor-build", "--branch", "sample:3", "--mode", "toy"])
        with pytest.raises(UsageError):
            parse_plan(["transport-cover", "--direction", "sideways"])

    def test_config_layering(self, tmp_path):
        cfg = tmp_path / "plan.cfg"
        cfg.write_text(
            "# gauge tail run\n"
            "command = tail\n"
            "s = 3/2\n"
            "K = 500  # start\n"
        )
        plan = parse_plan(["--config", str(cfg)])
        assert plan.command == "tail"
        assert plan.values["s"] == Fraction(3, 2)
        assert plan.values["K"] == 500
        # flags override the config
        plan = parse_plan(["tail", "--config", str(cfg), "--K", "900"])
        assert plan.values["K"] == 900
        assert plan.values["s"] == Fraction(3, 2)

    def test_config_rejections(self, tmp_path):
        cfg = tmp_path / "plan.cfg"
        cfg.write_text("command = tail\nwidget = 3\n")
        with pytest.raises(UsageError):
            parse_plan(["--config", str(cfg)])
        cfg.write_text("command = tail\n")
        with pytest.raises(UsageError):
            parse_plan(["butterfly", "--config", str(cfg)])  # command mismatch
        cfg.write_text("just words\n")
        with pytest.raises(UsageError):
            parse_plan(["--config", str(cfg)])
        with pytest.raises(UsageError):
            parse_plan(["--config", str(tmp_path / "absent.cfg")])
        with pytest.raises(UsageError):
            parse_plan(["tail", "--config"])

    def test_frequency_parsing(self):
        plan = parse_plan(["cf", "--alpha", "cf:1,2,3"])
        assert plan.values["alpha"] == "cf:1,2,3"
        with pytest.raises(UsageError):
            run_plan(parse_plan(["cf", "--alpha", "unobtainium"]))


class TestSamplingHelpers:
    def test_applicable_intervals(self, golden):
        draws = applicable_intervals(golden, 10_000, 20, seed=3)
        assert len(draws) == 20
        assert draws == applicable_intervals(golden, 10_000, 20, seed=3)
        dh = dhat_estimate(golden, 10_000)
        for m, n, (a, b) in draws:
            assert n - m == 10_000
            assert 0 <= a < b <= 1
            assert b - a > 2 * dh

    def test_band_energies(self, staircase_144):
        es = band_energies(staircase_144, 40, seed=1)
        assert len(es) == 40
        assert es == band_energies(staircase_144, 40, seed=1)
        bands = staircase_144.covered
        for e in es:
            assert any(lo < e < hi for lo, hi in bands)

    def test_forward_covers_respect_cap(self, staircase_144):
        cover = admissible_covers(staircase_144, "F->D", 30, seed=2, c=0.5)
        cap = 0.5 ** 6
        lo = min(e for e, _ in staircase_144.breakpoints)
        hi = max(e for e, _ in staircase_144.breakpoints)
        for a, b in cover.intervals:
            assert 0 < b - a <= cap
            assert lo <= a < b <= hi

    def test_backward_covers_force_gap_straddles(self, staircase_144):
        cover = admissible_covers(staircase_144, "D->F", 16, seed=0, c=0.5)
        cap = (0.5 / 6.0) ** 2
        assert all(0 < b - a <= cap for a, b in cover.intervals)
        rep = transport_cover(staircase_144, cover, 2.0, "D->F", 0.5)
        assert sum(1 for item in rep.items if item.case == 2) >= 1
        assert rep.within_bound


class TestRunPlan:
    def test_tail_run_and_manifest(self, tmp_path):
        out = tmp_path / "tail"
        plan = parse_plan(["tail", "--out", str(out)])
        result = run_plan(plan)
        assert result.status == 0
        assert result.artifacts == ("tail.json",)
        rep = json.loads((out / "tail.json").read_text())
        assert rep["prediction"] == 0.020139597049122125
        assert rep["verdict"] == "convergent; tail < 0.0202413"
        assert rep["tail"][0] <= rep["tail"][1]

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["schema"] == "run-manifest/1"
        assert manifest["plan"]["command"] == "tail"
        assert "out" not in manifest["plan"]
        assert set(manifest["artifacts"]) == {"tail.json"}
        assert manifest["status"] == 0
        assert "wall_time_s" not in json.dumps(manifest)
        timing = json.loads((out / "timing.json").read_text())
        assert timing["wall_time_s"] >= 0

    def test_tail_sweep_writes_decay_table(self, tmp_path):
        out = tmp_path / "sweep"
        rc = main(["tail", "--sweep", "100,1000,10000", "--out", str(out)])
        assert rc == 0
        lines = (out / "tail.csv").read_text().splitlines()
        assert lines[0] == "# schema amofractal.tail 1"
        assert lines[1] == "K,tail_lo,tail_hi,prediction"
        ks = [int(row.split(",")[0]) for row in lines[2:]]
        assert ks == [100, 1000, 10000]
        # the decay table halves in slope nowhere: tail ~ 1/K throughout
        his = [float(row.split(",")[2]) for row in lines[2:]]
        assert his[0] / his[1] == pytest.approx(10.0, rel=0.02)
        assert main(["tail", "--sweep", "10,-3"]) == 1

    def test_holder_table_writes_increments(self, tmp_path):
        out = tmp_path / "holder"
        rc = main(["holder", "--samples", "4", "--eps-count", "3",
                   "--table", "--out", str(out)])
        assert rc == 0
        lines = (out / "holder.csv").read_text().splitlines()
        assert lines[1] == "E,eps,dN"
        assert len(lines) == 2 + 4 * 3
        for row in lines[2:]:
            _, eps, dn = (float(x) for x in row.split(","))
            assert 0 < dn <= 1 and 0 < eps < 1

    def test_manifest_reproducible_from_config(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        rc = main(["tail", "--K", "200", "--out", str(a)])
        assert rc == 0
        cfg = tmp_path / "rerun.cfg"
        cfg.write_text("command = tail\nK = 200\n")
        rc = main(["--config", str(cfg), "--out", str(b)])
        assert rc == 0
        assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()

    def test_ids_value_and_table(self, tmp_path):
        out = tmp_path / "ids"
        rc = main(["ids", "--lambda", "0", "--pq", "1/3", "--E", "0",
                   "--table", "--out", str(out)])
        assert rc == 0
        rep = json.loads((out / "ids.json").read_text())
        assert rep["value"] == 0.5
        assert (out / "ids.csv").read_text().startswith("# schema amofractal.ids")

    def test_map_both_directions(self, tmp_path):
        out = tmp_path / "map"
        rc = main(["map-beta-delta", "--lambda", "1/2", "--beta", "3/4",
                   "--out", str(out)])
        assert rc == 0
        rep = json.loads((out / "map.json").read_text())
        assert rep["direction"] == "beta->delta"
        assert rep["output"] == 1.0397207708399179
        rc = main(["map-beta-delta", "--lambda", "1/2", "--delta",
                   repr(rep["output"]), "--out", str(out)])
        assert rc == 0
        back = json.loads((out / "map.json").read_text())
        assert back["output"] == pytest.approx(0.75, abs=1e-12)

    def test_resonance_run(self, tmp_path):
        out = tmp_path / "res"
        rc = main(["resonance", "--x", "0", "--delta", "1", "--K", "100",
                   "--out", str(out)])
        assert rc == 0
        rep = json.loads((out / "resonance.json").read_text())
        assert rep["consistent"] is True
        assert rep["best_k"] == 1
        assert rep["best_ratio"] == 0.9624236501192058

    def test_cf_run(self, tmp_path):
        out = tmp_path / "cf"
        rc = main(["cf", "--out", str(out)])
        assert rc == 0
        rep = json.loads((out / "cf.json").read_text())
        assert rep["q_last"] == 1346269
        lines = (out / "cf.csv").read_text().splitlines()
        assert lines[0].startswith("# schema amofractal.cf")
        assert len(lines) == 32  # schema + header + 30 rows

    def test_localdim_generic_energy(self, tmp_path):
        out = tmp_path / "ld"
        rc = main(["localdim", "--E", "0", "--qmax", "144", "--out", str(out)])
        assert rc == 0
        rep = json.loads((out / "localdim.json").read_text())
        assert rep["stable"] is True
        assert rep["lower_est"] == 1.0531049268814745
        assert rep["upper_est"] == 1.086898959530007

    def test_localdim_instability_is_nonfatal(self, tmp_path):
        out = tmp_path / "ld2"
        rc = main(["localdim", "--E", "1/2", "--qmax", "144", "--out", str(out)])
        assert rc == 0
        rep = json.loads((out / "localdim.json").read_text())
        assert rep["stable"] is False
        assert rep["lower_est"] is None
        assert "slope range" in rep["detail"]

    def test_usage_errors_exit_one(self, capsys):
        assert main([]) == 1
        assert main(["frobnicate"]) == 1
        assert main(["ids", "--lambda", "0", "--pq", "5/3", "--E", "0"]) == 1
        err = capsys.readouterr().err
        assert "usage error" in err
