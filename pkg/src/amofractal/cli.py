"""Batch front door: parse a run plan, execute one pipeline, emit artifacts.

Every subcommand resolves to a flat plan of key = value settings, taken
from an optional config file with command-line flags layered on top.
Unknown keys are rejected in both places, the resolved plan is echoed in
canonical order, and the same canonical plan lands in the manifest, so a
run is reproducible from its artifacts alone.  Artifacts are written
atomically and hashed into the manifest together with a combined
determinism hash; wall time goes to a separate timing file so manifests
stay byte-stable across reruns.

Exit codes: 0 on success, 2 when an audit-style command found violations,
1 on usage or resource errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from .alpha import NAMED_ALPHAS, Alpha, AlphaSpec, make_alpha, named_alpha
from .amo import (
    convergent_ladder,
    gap_labels,
    holder_check,
    ids,
    ids_table,
    local_dim_estimate,
    beta_of_delta,
    delta_of_beta,
    transport_cover,
    write_butterfly_csv,
    write_ids_csv,
    _write_rows,
)
from .cantor import (
    build_tree,
    faithful_constants,
    toy_constants,
    toy_delta_schedule,
    tree_hash,
    tree_to_json,
    verify_tree,
    write_audit_csv,
)
from .circle import cf_expand, check_separation, count_in_interval, dhat_estimate
from .errors import AmoFractalError, LadderInstability, PlanError
from .gauge import Cover, borel_cantelli_tail
from .mass import (
    assign_mass,
    certificate_to_json,
    distribution_to_json,
    mdp_certificate,
    node_bound_report,
)
from .resonance import classify_D_delta

__all__ = ["RunPlan", "RunResult", "UsageError", "parse_plan", "run_plan", "main",
           "applicable_intervals", "admissible_covers", "band_energies"]


class UsageError(PlanError):
    """Bad flags, bad config keys, or inconsistent parameter combinations."""


_REQUIRED = object()


@dataclass(frozen=True)
class _Flag:
    kind: str  # frac | int | str | bool
    default: object = None
    help: str = ""


_TREE_FLAGS = {
    "alpha": _Flag("str", "golden", "frequency: golden, silver, or cf:a1,a2,..."),
    "delta": _Flag("frac", Fraction(1), "target resonance exponent"),
    "mode": _Flag("str", "faithful", "faithful or toy constants"),
    "depth": _Flag("int", 1, "construction depth"),
    "branch": _Flag("str", "full", "expansion policy: full or sample:N"),
    "schedule": _Flag("str", "auto", "delta ramp: auto, toy, or comma list"),
    "max-windows": _Flag("int", None, "cap on sub-scale windows per level"),
    "scan-cap": _Flag("int", 2_000_000, "largest exhaustive scan allowed"),
}

_COMMANDS: dict[str, dict[str, _Flag]] = {
    "cf": {
        "alpha": _Flag("str", "golden"),
        "depth": _Flag("int", 30, "number of partial quotients"),
    },
    "separation": {
        "alpha": _Flag("str", "golden"),
        "qmax": _Flag("int", 10_000, "check all n with q_n <= qmax"),
        "scan-cap": _Flag("int", 2_000_000),
    },
    "discrepancy": {
        "alpha": _Flag("str", "golden"),
        "length": _Flag("int", 10_000, "orbit stretch n - m"),
        "intervals": _Flag("int", 100, "how many sampled intervals"),
        "scan-cap": _Flag("int", 2_000_000),
    },
    "resonance": {
        "alpha": _Flag("str", "golden"),
        "x": _Flag("frac", _REQUIRED, "circle point to classify"),
        "delta": _Flag("frac", _REQUIRED, "target exponent"),
        "K": _Flag("int", None, "scan window 1..K"),
        "kmin": _Flag("int", None, "scan window lower end"),
        "kmax": _Flag("int", None, "scan window upper end"),
        "tol": _Flag("frac", None, "verdict tolerance (default delta/10)"),
        "scan-cap": _Flag("int", 2_000_000),
    },
    "cantor-build": dict(_TREE_FLAGS),
    "cantor-audit": {**_TREE_FLAGS, "exclusion-samples": _Flag("int", 100)},
    "mass-assign": dict(_TREE_FLAGS),
    "mdp-cert": {
        **_TREE_FLAGS,
        "samples": _Flag("int", 1000, "(x, r) pairs to test"),
        "r-grid": _Flag("str", "1/2,1/8,1/64,1/1024", "radii as fractions of r0"),
    },
    "tail": {
        "alpha": _Flag("str", "golden"),
        "s": _Flag("frac", Fraction(2), "gauge exponent"),
        "eta": _Flag("frac", Fraction(1), "resonance depth parameter"),
        "K": _Flag("int", 100, "tail start"),
        "terms": _Flag("int", 200_000, "summation horizon"),
        "sweep": _Flag("str", None, "comma list of tail starts; adds the decay CSV"),
    },
    "butterfly": {
        "lambda": _Flag("frac", Fraction(1), "coupling"),
        "qmax": _Flag("int", 50, "largest denominator"),
    },
    "ids": {
        "lambda": _Flag("frac", _REQUIRED, "coupling"),
        "pq": _Flag("str", _REQUIRED, "rational frequency p/q"),
        "E": _Flag("frac", _REQUIRED, "energy"),
        "table": _Flag("bool", False, "also write the full staircase CSV"),
    },
    "holder": {
        "lambda": _Flag("frac", Fraction(1, 2)),
        "pq": _Flag("str", "89/144"),
        "samples": _Flag("int", 100, "sampled energies"),
        "eps-lo": _Flag("frac", Fraction(1, 1_000_000)),
        "eps-hi": _Flag("frac", Fraction(1, 10)),
        "eps-count": _Flag("int", 11, "log-spaced increment scales"),
        "table": _Flag("bool", False, "also write the per-increment CSV"),
    },
    "gaps": {
        "lambda": _Flag("frac", Fraction(1, 2)),
        "pq": _Flag("str", "89/144"),
        "min-width": _Flag("frac", Fraction(1, 10**9)),
    },
    "localdim": {
        "alpha": _Flag("str", "golden"),
        "lambda": _Flag("frac", Fraction(1, 2)),
        "qmax": _Flag("int", 377, "convergent ladder cutoff"),
        "E": _Flag("frac", _REQUIRED, "energy to probe"),
        "r-lo": _Flag("frac", Fraction(1, 1_000_000)),
        "r-hi": _Flag("frac", Fraction(1, 10)),
        "r-count": _Flag("int", 16),
        "stability-tol": _Flag("frac", Fraction(7, 20)),
    },
    "map-beta-delta": {
        "lambda": _Flag("frac", _REQUIRED, "coupling"),
        "beta": _Flag("frac", None, "dimension-side input"),
        "delta": _Flag("frac", None, "exponent-side input"),
    },
    "transport-cover": {
        "lambda": _Flag("frac", Fraction(1, 2)),
        "pq": _Flag("str", "89/144"),
        "s": _Flag("frac", Fraction(2), "gauge exponent"),
        "direction": _Flag("str", "both", "F->D, D->F, or both"),
        "covers": _Flag("int", 1000, "random admissible intervals"),
        "c": _Flag("frac", Fraction(1, 2), "envelope smallness constant"),
    },
}

_META = {
    "out": _Flag("str", "artifacts", "artifact directory"),
    "seed": _Flag("int", 0, "deterministic sampling seed"),
    "precision": _Flag("int", 96, "working precision in bits where tunable"),
}


@dataclass(frozen=True)
class RunPlan:
    command: str
    values: dict
    canon: tuple[tuple[str, str], ...]
    outdir: str
    seed: int

    def echo(self) -> str:
        return "plan " + " ".join(f"{k}={v}" for k, v in self.canon)


@dataclass(frozen=True)
class RunResult:
    status: int
    artifacts: tuple[str, ...]
    manifest_path: str
    summary: dict


# ---------------------------------------------------------------------------
# plan resolution


def _coerce(key: str, flag: _Flag, raw) -> object:
    if raw is None:
        return None
    if flag.kind == "bool":
        if isinstance(raw, bool):
            return raw
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"--{key}: expected a boolean, got {raw!r}")
    if flag.kind == "int":
        try:
            return int(str(raw), 10)
        except ValueError:
            raise UsageError(f"--{key}: expected an integer, got {raw!r}") from None
    if flag.kind == "frac":
        try:
            return Fraction(str(raw))
        except (ValueError, ZeroDivisionError):
            try:
                return Fraction(float(raw))
            except (ValueError, OverflowError):
                raise UsageError(f"--{key}: expected a rational, got {raw!r}") from None
    return str(raw)


def _canon_str(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def _load_config(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = body.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1, not argparse's 2
        raise UsageError(message)


def _build_parser(command: str, flags: dict[str, _Flag]) -> _Parser:
    parser = _Parser(prog=f"amofractal {command}", add_help=True, allow_abbrev=False)
    for key, flag in flags.items():
        dest = key.replace("-", "_")
        if flag.kind == "bool":
            parser.add_argument(f"--{key}", dest=dest, action="store_true", default=None,
                                help=flag.help)
        else:
            parser.add_argument(f"--{key}", dest=dest, default=None, help=flag.help)
    parser.add_argument("--config", dest="config", default=None,
                        help="flat key = value file; flags override")
    return parser


def _validate(command: str, values: dict) -> None:
    if command == "map-beta-delta":
        if (values.get("beta") is None) == (values.get("delta") is None):
            raise UsageError("map-beta-delta needs exactly one of --beta or --delta")
    if command == "resonance":
        pair = (values.get("kmin") is not None, values.get("kmax") is not None)
        if values.get("K") is None and not all(pair):
            raise UsageError("resonance needs --K or both --kmin and --kmax")
        if values.get("K") is not None and any(pair):
            raise UsageError("resonance takes --K or --kmin/--kmax, not both")
    if command in _TREE_COMMANDS:
        if values["mode"] not in ("faithful", "toy"):
            raise UsageError(f"--mode must be faithful or toy, got {values['mode']!r}")
        br = values["branch"]
        if br != "full" and not (br.startswith("sample:") and br[7:].isdigit()):
            raise UsageError(f"--branch must be full or sample:N, got {br!r}")
    if command == "transport-cover":
        if values["direction"] not in ("F->D", "D->F", "both"):
            raise UsageError(f"--direction must be F->D, D->F or both, got {values['direction']!r}")
    if command == "tail" and values.get("sweep") is not None:
        parts = values["sweep"].split(",")
        if not all(p.isdigit() and int(p) > 0 for p in parts):
            raise UsageError(f"--sweep needs positive integers, got {values['sweep']!r}")


_TREE_COMMANDS = ("cantor-build", "cantor-audit", "mass-assign", "mdp-cert")


def parse_plan(argv, config: Optional[str] = None) -> RunPlan:
    """Resolve command, config file and flags into a canonical plan.

    Flags override config values; keys unknown to the selected command are
    rejected wherever they appear.  A config file may carry the command
    itself, so a bare `--config plan.cfg` invocation reproduces a run.
    """
    args = list(argv)
    command = None
    if args and not args[0].startswith("-"):
        command = args.pop(0)
    # pre-scan for --config so a config-only call can name the command
    cfg_path = config
    for i, a in enumerate(args):
        if a == "--config":
            if i + 1 >= len(args):
                raise UsageError("--config needs a path")
            cfg_path = args[i + 1]
            break
        if a.startswith("--config="):
            cfg_path = a.split("=", 1)[1]
            break
    cfg = _load_config(cfg_path) if cfg_path else {}
    if command is None:
        command = cfg.get("command")
    if command is None:
        raise UsageError(f"no command given; choose one of {', '.join(sorted(_COMMANDS))}")
    if command not in _COMMANDS:
        raise UsageError(f"unknown command {command!r}; choose one of {', '.join(sorted(_COMMANDS))}")
    if "command" in cfg and cfg["command"] != command:
        raise UsageError(f"config names command {cfg['command']!r} but {command!r} was invoked")

    flags = {**_COMMANDS[command], **_META}
    parsed = vars(_build_parser(command, flags).parse_args(args))
    parsed.pop("config", None)

    for key in cfg:
        if key != "command" and key not in flags:
            raise UsageError(f"unknown config key {key!r} for command {command}")

    values: dict = {}
    canon: list[tuple[str, str]] = [("command", command)]
    for key, flag in sorted(flags.items()):
        dest = key.replace("-", "_")
        raw = parsed.get(dest)
        if raw is None and key in cfg:
            raw = cfg[key]
        value = _coerce(key, flag, raw)
        if value is None:
            if flag.default is _REQUIRED:
                raise UsageError(f"command {command} requires --{key}")
            value = flag.default
        values[dest] = value
        if value is not None and key not in ("out",):
            canon.append((key, _canon_str(value)))
    _validate(command, values)
    return RunPlan(command=command, values=values, canon=tuple(canon),
                   outdir=values["out"], seed=values["seed"])


# ---------------------------------------------------------------------------
# shared pieces


def _alpha_of(name: str) -> Alpha:
    if name in NAMED_ALPHAS:
        return named_alpha(name)
    if name.startswith("cf:"):
        body = name[3:]
        prefix, _, tail = body.partition(";")
        try:
            spec = AlphaSpec(
                kind="cf",
                prefix=tuple(int(x) for x in prefix.split(",") if x),
                tail=tuple(int(x) for x in tail.split(",") if x) or None if tail else None,
            )
        except ValueError as e:
            raise UsageError(f"bad cf frequency {name!r}: {e}") from None
        return make_alpha(spec)
    raise UsageError(f"unknown frequency {name!r}; use a name or cf:a1,a2,...")


def _pq_of(raw: str) -> tuple[int, int]:
    try:
        f = Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad rational frequency {raw!r}") from None
    if not 0 <= f < 1:
        raise UsageError(f"rational frequency must lie in [0, 1), got {raw}")
    return f.numerator, f.denominator


def _fstr(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _emit_json(path: Path, obj: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    os.replace(tmp, path)


def _emit_csv(path: Path, writer: Callable[[str], None]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    writer(str(tmp))
    os.replace(tmp, path)


def _constants_for(mode: str, delta: Fraction):
    if mode == "toy":
        return toy_constants()
    return faithful_constants(min(Fraction(1), delta))


def _build_from_plan(v: dict):
    alpha = _alpha_of(v["alpha"])
    constants = _constants_for(v["mode"], v["delta"])
    branch = ("full",) if v["branch"] == "full" else ("sample", int(v["branch"][7:]))
    schedule = None
    if v["schedule"] == "toy":
        schedule = toy_delta_schedule()
    elif v["schedule"] != "auto":
        schedule = tuple(Fraction(part) for part in v["schedule"].split(","))
    return build_tree(
        alpha, v["delta"], constants, depth=v["depth"], branch_policy=branch,
        delta_schedule=schedule, max_windows=v["max_windows"], scan_cap=v["scan_cap"],
    )


def applicable_intervals(alpha: Alpha, length: int, count: int, seed: int,
                         scan_cap: int = 2_000_000):
    """Deterministic sample of intervals wide enough for the count bounds.

    Widths sit well above the discrepancy scale of the orbit stretch, so
    every generated interval reports applicable=True.
    """
    rng = random.Random(seed)
    dhat = dhat_estimate(alpha, length)
    w_floor = max(4 * dhat, Fraction(1, 100))
    out = []
    for _ in range(count):
        width = w_floor + Fraction(rng.randrange(0, 200_001), 1_000_000)
        a = Fraction(rng.randrange(0, 1_000_001), 1_000_000) % (1 - width)
        m = rng.randrange(0, 1_000_000)
        out.append((m, m + length, (a, a + width)))
    return out


def admissible_covers(table, direction: str, count: int, seed: int, c: float) -> Cover:
    """Random intervals below the smallness caps, skipping coarse pullbacks."""
    rng = random.Random(seed)
    ivs = []
    if direction == "F->D":
        limit = c**6
        lo = min(e for e, _ in table.breakpoints)
        hi = max(e for e, _ in table.breakpoints)
        while len(ivs) < count:
            width = rng.uniform(0.1 * limit, 0.95 * limit)
            a = rng.uniform(lo, hi - width)
            ivs.append((a, a + width))
    else:
        limit = (c / 6.0) ** 2
        # straddles of wide gaps violate the span precondition, so free draws
        # almost never exercise the gap split; force some onto plateau values
        plateaus = [g.N for g in gap_labels(table)
                    if g.interval[1] - g.interval[0] < 0.45]
        viable = None
        while len(ivs) < count:
            forced = plateaus and len(ivs) % 8 == 7
            if forced:
                if viable is None:
                    # probe once for plateaus whose straddles actually split
                    viable = []
                    for v in plateaus:
                        for shrink in (0.1, 0.02, 0.004):
                            width = shrink * limit
                            a, b = v - width / 2.0, v + width / 2.0
                            if not 1e-3 < a < b < 1.0 - 1e-3:
                                continue
                            try:
                                rep = transport_cover(table, Cover(((a, b),)),
                                                      1.0, "D->F", c)
                            except ValueError:
                                continue
                            if rep.items[0].case == 2:
                                viable.append((v, width))
                                break
                if not viable:
                    forced = False
                else:
                    v, wmax = viable[rng.randrange(len(viable))]
                    width = rng.uniform(0.25, 1.0) * wmax
                    a, b = v - width / 2.0, v + width / 2.0
                    try:
                        rep = transport_cover(table, Cover(((a, b),)), 1.0,
                                              "D->F", c)
                        split = rep.items[0].case == 2
                    except ValueError:
                        split = False
                    if not split:
                        # narrower straddle failed to split; use the probed one
                        a, b = v - wmax / 2.0, v + wmax / 2.0
                    ivs.append((a, b))
            if not forced:
                width = rng.uniform(0.1 * limit, 0.95 * limit)
                a = rng.uniform(1e-3, 1.0 - 1e-3 - width)
                try:
                    transport_cover(table, Cover(((a, a + width),)), 1.0,
                                    "D->F", c)
                except ValueError:
                    continue  # pullback spans a giant gap; draw again
                ivs.append((a, a + width))
    return Cover(tuple(ivs))


# ---------------------------------------------------------------------------
# handlers


def _run_cf(v, out):
    alpha = _alpha_of(v["alpha"])
    cf = cf_expand(alpha, v["depth"])
    rows = [(k, cf.quotients[k - 1], cf.p[k], cf.q[k]) for k in range(1, len(cf) + 1)]
    _emit_csv(out / "cf.csv", lambda p: _write_rows(p, "amofractal.cf",
                                                    ("k", "a_k", "p_k", "q_k"), rows))
    summary = {"depth": v["depth"], "q_last": cf.q[-1], "determinant_ok": True}
    _emit_json(out / "cf.json", {"schema": "cf-report/1", **summary})
    return 0, summary, ["cf.csv", "cf.json"]


def _run_separation(v, out):
    alpha = _alpha_of(v["alpha"])
    rows = []
    violations = 0
    n = 1
    while True:
        q = alpha.denominator(n)
        if q > v["qmax"]:
            break
        if q >= 2:
            rep = check_separation(alpha, n, scan_cap=v["scan_cap"])
            ok = rep.exceeds_half_inverse_q and rep.argmin_is_q_prev
            violations += 0 if ok else 1
            rows.append((n, rep.q_n, rep.q_prev, rep.argmin_k,
                         repr(float(rep.min_dist_lo)), repr(float(rep.min_dist_hi)),
                         int(rep.argmin_is_q_prev), int(rep.exceeds_half_inverse_q)))
        n += 1
    _emit_csv(out / "separation.csv", lambda p: _write_rows(
        p, "amofractal.separation",
        ("n", "q_n", "q_prev", "argmin_k", "min_lo", "min_hi", "argmin_is_q_prev", "exceeds"),
        rows))
    summary = {"levels": len(rows), "violations": violations}
    _emit_json(out / "separation.json", {"schema": "separation-report/1", **summary})
    return (0 if violations == 0 else 2), summary, ["separation.csv", "separation.json"]


def _run_discrepancy(v, out):
    alpha = _alpha_of(v["alpha"])
    rows = []
    failures = 0
    for m, n, iv in applicable_intervals(alpha, v["length"], v["intervals"], v["seed"]):
        rep = count_in_interval(alpha, m, n, iv, scan_cap=v["scan_cap"])
        ok = rep.applicable and rep.lower_bound <= rep.count <= rep.upper_bound
        failures += 0 if ok else 1
        rows.append((m, n, _fstr(iv[0]), _fstr(iv[1]), rep.count,
                     repr(float(rep.lower_bound)), repr(float(rep.upper_bound)), int(ok)))
    _emit_csv(out / "discrepancy.csv", lambda p: _write_rows(
        p, "amofractal.discrepancy",
        ("m", "n", "a", "b", "count", "lower", "upper", "ok"), rows))
    summary = {"intervals": len(rows), "out_of_bounds": failures}
    _emit_json(out / "discrepancy.json", {"schema": "discrepancy-report/1", **summary})
    return (0 if failures == 0 else 2), summary, ["discrepancy.csv", "discrepancy.json"]


def _run_resonance(v, out):
    alpha = _alpha_of(v["alpha"])
    window = v["K"] if v["K"] is not None else (v["kmin"], v["kmax"])
    verdict = classify_D_delta(alpha, v["x"], float(v["delta"]), window,
                               tol=None if v["tol"] is None else float(v["tol"]),
                               scan_cap=v["scan_cap"])
    summary = {
        "consistent": verdict.consistent,
        "lower_evidence": verdict.lower_evidence,
        "upper_evidence": verdict.upper_evidence,
        "window": list(verdict.window),
        "delta_target": verdict.delta_target,
        "tol": verdict.tol,
        "best_k": verdict.best_k,
        "best_ratio": verdict.best_ratio,
    }
    _emit_json(out / "resonance.json", {"schema": "resonance-verdict/1",
                                        "x": _fstr(v["x"]), **summary})
    return 0, summary, ["resonance.json"]


def _tree_summary(tree) -> dict:
    leaves = tree.leaves()
    r0 = tree.r0()
    return {
        "hash": tree_hash(tree),
        "nodes": sum(1 for _ in tree.iter_nodes()) - 1,
        "leaves": len(leaves),
        "max_level": max((len(p) for p in leaves), default=0),
        "r0": None if r0 is None else repr(float(r0)),
    }


def _run_cantor_build(v, out):
    tree = _build_from_plan(v)
    payload = tree_to_json(tree)
    tmp = out / "tree.json.tmp"
    tmp.write_text(payload)
    os.replace(tmp, out / "tree.json")
    summary = _tree_summary(tree)
    _emit_json(out / "cantor-build.json", {"schema": "cantor-build-report/1", **summary})
    return 0, summary, ["tree.json", "cantor-build.json"]


def _run_cantor_audit(v, out):
    tree = _build_from_plan(v)
    report = verify_tree(tree, exclusion_samples=v["exclusion_samples"], seed=v["seed"])
    _emit_csv(out / "audit.csv", lambda p: write_audit_csv(report, p))
    failures = len(report.failures())
    summary = {**_tree_summary(tree), "checks": len(report.entries), "failures": failures}
    _emit_json(out / "cantor-audit.json", {"schema": "cantor-audit-report/1", **summary})
    return (0 if failures == 0 else 2), summary, ["audit.csv", "cantor-audit.json"]


def _run_mass_assign(v, out):
    tree = _build_from_plan(v)
    mu = assign_mass(tree)
    _emit_json(out / "mass.json", distribution_to_json(tree, mu))
    report = node_bound_report(tree, mu)
    summary = {
        "nodes": len(mu.node_mass),
        "node_bound_max_ratio": float(report.max_ratio),
        "node_bound_violations": len(report.violations),
    }
    _emit_json(out / "mass-assign.json", {"schema": "mass-assign-report/1", **summary})
    bad = tree.constants.mode == "faithful" and report.violations
    return (2 if bad else 0), summary, ["mass.json", "mass-assign.json"]


def _run_mdp_cert(v, out):
    tree = _build_from_plan(v)
    mu = assign_mass(tree)
    r0 = tree.r0()
    if r0 is None:
        raise ValueError("tree records no positive sibling gap; cannot scale radii")
    grid = [Fraction(part) * r0 for part in v["r_grid"].split(",")]
    cert = mdp_certificate(tree, mu, v["samples"], grid)
    _emit_json(out / "cert.json", certificate_to_json(cert))
    summary = {
        "pass": cert.passed,
        "constant": _fstr(cert.constant),
        "conclusion": None if cert.conclusion is None else _fstr(cert.conclusion),
        "worst_margin_log10": round(cert.worst_margin_log10, 6),
        "samples": len(cert.samples),
    }
    _emit_json(out / "mdp-cert.json", {"schema": "mdp-cert-report/1", **summary})
    return (0 if cert.passed else 2), summary, ["cert.json", "mdp-cert.json"]


def _run_tail(v, out):
    alpha = _alpha_of(v["alpha"])
    rep = borel_cantelli_tail(alpha, float(v["eta"]), float(v["s"]), v["K"],
                              terms=v["terms"])
    summary = {
        "tail": [rep.tail_lo, rep.tail_hi],
        "prediction": rep.prediction,
        "convergent": rep.convergent,
        "verdict": rep.verdict,
    }
    _emit_json(out / "tail.json", {"schema": "tail-report/1", "s": _fstr(v["s"]),
                                   "eta": _fstr(v["eta"]), "K": v["K"], **summary})
    files = ["tail.json"]
    if v["sweep"] is not None:
        rows = []
        for k in (int(p) for p in v["sweep"].split(",")):
            r = borel_cantelli_tail(alpha, float(v["eta"]), float(v["s"]), k,
                                    terms=v["terms"])
            rows.append((k, r.tail_lo, r.tail_hi, r.prediction))
        _emit_csv(out / "tail.csv", lambda p: _write_rows(
            p, "amofractal.tail", ("K", "tail_lo", "tail_hi", "prediction"), rows))
        files.append("tail.csv")
        summary["sweep_points"] = len(rows)
    return 0, summary, files


def _run_butterfly(v, out):
    lam = float(v["lambda"])
    _emit_csv(out / "butterfly.csv", lambda p: write_butterfly_csv(p, lam, v["qmax"]))
    lines = (out / "butterfly.csv").read_text().count("\n")
    summary = {"lambda": lam, "qmax": v["qmax"], "lines": lines}
    _emit_json(out / "butterfly.json", {"schema": "butterfly-report/1", **summary})
    return 0, summary, ["butterfly.csv", "butterfly.json"]


def _run_ids(v, out):
    p, q = _pq_of(v["pq"])
    lam = float(v["lambda"])
    value = ids(lam, p, q, float(v["E"]))
    summary = {"lambda": lam, "p": p, "q": q, "E": float(v["E"]), "value": value}
    _emit_json(out / "ids.json", {"schema": "ids-value/1", **summary})
    files = ["ids.json"]
    if v["table"]:
        table = ids_table(lam, p, q)
        _emit_csv(out / "ids.csv", lambda path: write_ids_csv(path, table))
        files.append("ids.csv")
    return 0, summary, files


def band_energies(table, count: int, seed: int) -> list[float]:
    """Length-weighted uniform energies strictly inside the band union."""
    rng = random.Random(seed)
    bands = table.covered
    widths = [hi - lo for lo, hi in bands]
    total = sum(widths)
    out = []
    for _ in range(count):
        u = rng.uniform(0.0, total)
        for (lo, hi), w in zip(bands, widths):
            if u <= w or (lo, hi) == bands[-1]:
                out.append(lo + 0.01 * w + 0.98 * min(u, w))
                break
            u -= w
    return out


def _run_holder(v, out):
    p, q = _pq_of(v["pq"])
    table = ids_table(float(v["lambda"]), p, q)
    energies = band_energies(table, v["samples"], v["seed"])
    n = max(2, v["eps_count"])
    e_lo, e_hi = float(v["eps_lo"]), float(v["eps_hi"])
    eps = [e_lo * (e_hi / e_lo) ** (i / (n - 1)) for i in range(n)]
    rep = holder_check(table, energies, eps)
    summary = {"c_low": rep.c_low, "c_high": rep.c_high,
               "violations": len(rep.violations),
               "energies": len(energies), "eps_count": n}
    _emit_json(out / "holder.json", {"schema": "holder-report/1", **summary})
    files = ["holder.json"]
    if v["table"]:
        rows = ((E, e, table.eval(E + e) - table.eval(E - e))
                for E in energies for e in eps)
        _emit_csv(out / "holder.csv", lambda path: _write_rows(
            path, "amofractal.holder", ("E", "eps", "dN"), rows))
        files.append("holder.csv")
    return (0 if not rep.violations else 2), summary, files


def _run_gaps(v, out):
    p, q = _pq_of(v["pq"])
    table = ids_table(float(v["lambda"]), p, q)
    labels = gap_labels(table, min_width=float(v["min_width"]))
    rows = [(repr(g.interval[0]), repr(g.interval[1]), repr(g.N), g.j, g.k, int(g.tie))
            for g in labels]
    _emit_csv(out / "gaps.csv", lambda path: _write_rows(
        path, "amofractal.gaps", ("E_lo", "E_hi", "N", "j", "k", "tie"), rows))
    summary = {"gaps": len(labels), "ties": sum(1 for g in labels if g.tie)}
    _emit_json(out / "gaps.json", {"schema": "gaps-report/1", **summary})
    return 0, summary, ["gaps.csv", "gaps.json"]


def _run_localdim(v, out):
    ladder = convergent_ladder(_alpha_of(v["alpha"]).spec, v["qmax"])
    n = max(2, v["r_count"])
    r_lo, r_hi = float(v["r_lo"]), float(v["r_hi"])
    grid = [r_hi * (r_lo / r_hi) ** (i / (n - 1)) for i in range(n)]
    summary = {"E": float(v["E"]), "ladder": [list(pq) for pq in ladder]}
    extra = {}
    try:
        rep = local_dim_estimate(float(v["lambda"]), ladder, float(v["E"]), grid,
                                 stability_tol=float(v["stability_tol"]))
    except LadderInstability as e:
        # diagnostic estimate: instability is reported, never fatal
        summary.update({"stable": False, "lower_est": None, "upper_est": None,
                        "detail": str(e)})
    else:
        summary.update({"stable": rep.stable, "lower_est": rep.lower_est,
                        "upper_est": rep.upper_est})
        extra["slopes"] = [repr(s) for s in rep.slopes]
    _emit_json(out / "localdim.json", {"schema": "localdim-report/1", **summary, **extra})
    return 0, summary, ["localdim.json"]


def _run_map(v, out):
    lam = float(v["lambda"])
    if v["beta"] is not None:
        value = delta_of_beta(float(v["beta"]), lam)
        summary = {"direction": "beta->delta", "input": float(v["beta"]), "output": value}
    else:
        value = beta_of_delta(float(v["delta"]), lam)
        summary = {"direction": "delta->beta", "input": float(v["delta"]), "output": value}
    _emit_json(out / "map.json", {"schema": "beta-delta-map/1", "lambda": lam, **summary})
    return 0, summary, ["map.json"]


def _run_transport(v, out):
    p, q = _pq_of(v["pq"])
    table = ids_table(float(v["lambda"]), p, q)
    s, c = float(v["s"]), float(v["c"])
    directions = ("F->D", "D->F") if v["direction"] == "both" else (v["direction"],)
    reports = {}
    ok = True
    for direction in directions:
        cover = admissible_covers(table, direction, v["covers"], v["seed"], c)
        rep = transport_cover(table, cover, s, direction, c)
        cubic_ok = all(item.cubic_ok for item in rep.items)
        case2 = sum(1 for item in rep.items if item.case == 2)
        ok = ok and rep.within_bound and cubic_ok
        reports[direction] = {
            "covers": len(cover.intervals),
            "input_sum": rep.input_sum,
            "output_sum": rep.output_sum,
            "bound_factor": rep.bound_factor,
            "within_bound": rep.within_bound,
            "cubic_ok": cubic_ok,
            "case2_count": case2,
        }
    summary = {"s": s, "c": c, "directions": reports}
    _emit_json(out / "transport.json", {"schema": "transport-report/1", **summary})
    return (0 if ok else 2), summary, ["transport.json"]


_HANDLERS = {
    "cf": _run_cf,
    "separation": _run_separation,
    "discrepancy": _run_discrepancy,
    "resonance": _run_resonance,
    "cantor-build": _run_cantor_build,
    "cantor-audit": _run_cantor_audit,
    "mass-assign": _run_mass_assign,
    "mdp-cert": _run_mdp_cert,
    "tail": _run_tail,
    "butterfly": _run_butterfly,
    "ids": _run_ids,
    "holder": _run_holder,
    "gaps": _run_gaps,
    "localdim": _run_localdim,
    "map-beta-delta": _run_map,
    "transport-cover": _run_transport,
}


# ---------------------------------------------------------------------------
# runner


def _dep_versions() -> dict:
    import mpmath
    import numpy

    try:
        from importlib.metadata import version

        pkg = version("amofractal")
    except Exception:
        pkg = "unreleased"
    return {"amofractal": pkg, "numpy": numpy.__version__,
            "mpmath": mpmath.__version__, "python": platform.python_version()}


def run_plan(plan: RunPlan) -> RunResult:
    """Execute the plan, write artifacts, manifest and timing files."""
    out = Path(plan.outdir)
    out.mkdir(parents=True, exist_ok=True)
    print(plan.echo())
    t0 = time.monotonic()
    status, summary, files = _HANDLERS[plan.command](plan.values, out)
    wall = time.monotonic() - t0
    hashes = {}
    for name in sorted(files):
        hashes[name] = hashlib.sha256((out / name).read_bytes()).hexdigest()
    det = hashlib.sha256(
        "".join(f"{name}:{digest}\n" for name, digest in sorted(hashes.items())).encode()
    ).hexdigest()
    manifest = {
        "schema": "run-manifest/1",
        "plan": dict(plan.canon),
        "seed": plan.seed,
        "versions": _dep_versions(),
        "artifacts": hashes,
        "determinism_hash": det,
        "status": status,
    }
    _emit_json(out / "manifest.json", manifest)
    _emit_json(out / "timing.json", {"schema": "run-timing/1", "wall_time_s": round(wall, 3)})
    line = " ".join(f"{k}={v}" for k, v in sorted(summary.items()) if not isinstance(v, (dict, list)))
    print(f"{plan.command}: {line}")
    print(f"wrote {len(files)} artifacts to {out} (status {status})")
    return RunResult(status=status, artifacts=tuple(sorted(files)),
                     manifest_path=str(out / "manifest.json"), summary=summary)


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        plan = parse_plan(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    try:
        result = run_plan(plan)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (AmoFractalError, ValueError, KeyError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return result.status


if __name__ == "__main__":
    sys.exit(main())
