"""Command-line front end: ``driftlap verify | delta | diagram``.

Exit codes: 0 verification passed, 1 verification failed, 2 configuration
error. Reports are JSON (versioned) or CSV (flat projection of the records).

Defaults live in one table, :data:`DEFAULTS`; a ``--config`` JSON file may
override them and explicit flags override both.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from . import grushin as G
from . import heisenberg as H
from .errors import ConfigInvalid, DriftLapError, ExcludedParameter
from .params import DriftParams, parse_float_list
from .verify.delta import DEFAULT_STABILITY, DeltaMassEstimate, delta_mass
from .verify.diagram import DEFAULT_L_LADDER, DEFAULT_P_LADDER, DiagramReport, diagram_check
from .verify.sweep import ResidualReport, SweepConfig, SweepRecord, run_sweep

SCHEMA_VERSION = 1

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "space": "heisenberg",
    "candidate": "power",
    "p": "2,3,5",
    "L": "0,0.4",
    "n": 1,
    "a": 0.0,
    "b": 0.0,
    "c": 1.0,
    "points": 200,
    "shell": "0.5:4.0",
    "seed": 42,
    "tol": 1e-8,
    "eps": "0.2,0.1,0.05",
    "resolution": None,  # per space, see verify.delta.DEFAULT_RESOLUTION
    "stability": DEFAULT_STABILITY,
    "p_ladder": ",".join(f"{p:g}" for p in DEFAULT_P_LADDER),
    "L_ladder": ",".join(f"{L:g}" for L in DEFAULT_L_LADDER),
    "line_margin": 0.1,
    "any_half_plane": False,
    "threads": None,
    "format": "json",
    "out": None,
}

# fields that legitimately differ between otherwise identical runs
VOLATILE_KEYS = ("timestamp", "wall_ms", "threads")


# ---------------------------------------------------------------- parsing


def _parse_shell(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in str(text).split(":"))
    except ValueError as exc:
        raise ConfigInvalid(f"shell must look like MIN:MAX, got {text!r}") from exc
    if not (0 < lo < hi):
        raise ConfigInvalid(f"shell must satisfy 0 < MIN < MAX, got {text!r}")
    return lo, hi


def _floats(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    return parse_float_list(str(value))


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON file with default overrides")
    sp.add_argument("--space", choices=["heisenberg", "grushin"])
    sp.add_argument("--p", help="comma-separated list of p values")
    sp.add_argument("--L", help="comma-separated list of L values")
    sp.add_argument("--n", type=int, help="Grushin step n >= 1")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--c", type=float)
    sp.add_argument("--points", type=int)
    sp.add_argument("--shell", help="gauge shell MIN:MAX")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out", help="report path (stdout when omitted)")
    sp.add_argument("--format", choices=["json", "csv"])
    sp.add_argument("--threads", type=int, help="worker threads (else DRIFTLAP_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="driftlap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"driftlap {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="residual sweep over a (p, L) grid")
    _add_common(v)
    v.add_argument(
        "--candidate", choices=["power", "legacy", "bgg2", "infinity", "mollified"]
    )
    v.add_argument("--eps", help="epsilon for the mollified candidate (first value used)")
    v.add_argument("--line-margin", dest="line_margin", type=float)
    v.add_argument(
        "--any-half-plane", dest="any_half_plane", action="store_true", default=None,
        help="Grushin: also sample where Re g < 0",
    )

    d = sub.add_parser("delta", help="delta-mass stability over an epsilon ladder")
    _add_common(d)
    d.add_argument("--eps", help="strictly decreasing epsilon ladder")
    d.add_argument("--resolution", type=int, help="nodes per axis (>= 32)")
    d.add_argument("--stability", type=float, help="allowed relative mass drift")

    g = sub.add_parser("diagram", help="p -> inf / L -> 0 commuting square")
    _add_common(g)
    g.add_argument("--p-ladder", dest="p_ladder")
    g.add_argument("--L-ladder", dest="L_ladder")
    return ap


NUMERIC_FLAGS = ("--p", "--L", "--eps", "--a", "--b", "--c", "--p-ladder", "--L-ladder")


def _glue_negative_lists(argv: list[str]) -> list[str]:
    """Turn ``--L -1.2,0.4`` into ``--L=-1.2,0.4``.

    argparse only recognises bare negative numbers, so a comma list starting
    with a minus sign would otherwise be read as an unknown option.
    """
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in NUMERIC_FLAGS and nxt is not None and nxt[:1] == "-" and nxt[1:2] in "0123456789.":
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def resolve_config(args: argparse.Namespace) -> tuple[dict, str | None]:
    """Layer the optional config file over DEFAULTS, then apply explicit flags."""
    cfg = dict(DEFAULTS)
    digest = None
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            raw = path.read_bytes()
            loaded = json.loads(raw)
        except (OSError, ValueError) as exc:
            raise ConfigInvalid(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
        digest = hashlib.sha256(raw).hexdigest()
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    return cfg, digest


def _shape(cfg: dict) -> G.GrushinShape:
    return G.GrushinShape(float(cfg["a"]), float(cfg["b"]), float(cfg["c"]), int(cfg["n"]))


def _manifest(cfg: dict, digest: str | None) -> dict:
    config = {k: v for k, v in cfg.items() if k not in ("out", "format", "threads", "command")}
    return {
        "subcommand": cfg["command"],
        "config": config,
        "version": __version__,
        "seed": int(cfg["seed"]),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config_hash": digest,
        "threads": cfg["threads"],
    }


# ---------------------------------------------------------------- commands


def _run_verify(cfg: dict) -> tuple[list[dict], bool, list[str]]:
    grid = [(p, L) for p in _floats(cfg["p"]) for L in _floats(cfg["L"])]
    kind = cfg["candidate"]
    eps = _floats(cfg["eps"])[0] if kind == "mollified" else 0.0
    sc = SweepConfig(
        space=cfg["space"],
        grid=tuple(grid),
        candidate=kind,
        points=int(cfg["points"]),
        shell=_parse_shell(cfg["shell"]),
        seed=int(cfg["seed"]),
        tol=float(cfg["tol"]),
        shapes=(_shape(cfg),),
        epsilon=eps,
        line_margin=float(cfg["line_margin"]),
        positive_only=not cfg["any_half_plane"],
        threads=cfg["threads"],
    )
    report = run_sweep(sc)
    warnings = []
    if report.vacuous:
        warnings.append("every grid entry is excluded; the suite passes vacuously")
    return report.to_dict()["records"], report.passed, warnings


def _run_delta(cfg: dict) -> tuple[list[dict], bool, list[str]]:
    shape = _shape(cfg) if cfg["space"] == "grushin" else None
    records, warnings = [], []
    for p in _floats(cfg["p"]):
        for L in _floats(cfg["L"]):
            est = delta_mass(
                cfg["space"], DriftParams(p, L), _floats(cfg["eps"]), cfg["resolution"],
                shape, float(cfg["stability"]),
            )
            if est.degenerate:
                warnings.append(f"p={p:g}, L={L:g}: degenerate prefactor, masses are zero")
            records.append(est.to_dict())
    return records, all(r["passed"] for r in records), warnings


def _run_diagram(cfg: dict) -> tuple[list[dict], bool, list[str]]:
    shell = _parse_shell(cfg["shell"])
    points = int(cfg["points"])
    if points < 1:
        raise ConfigInvalid("point count must be >= 1")
    if cfg["space"] == "heisenberg":
        shape = None
        pts = H.sample_shell(points, shell, np.random.default_rng(int(cfg["seed"])))
    else:
        shape = _shape(cfg)
        rng = np.random.default_rng([int(cfg["seed"]), 0])
        pts = G.sample_shell(points, shell, shape, rng, float(cfg["line_margin"]))
    rep = diagram_check(
        cfg["space"], pts, _floats(cfg["p_ladder"]), _floats(cfg["L_ladder"]), shape,
        float(cfg["tol"]),
    )
    return [rep.to_dict()], rep.passed, []


RUNNERS = {"verify": _run_verify, "delta": _run_delta, "diagram": _run_diagram}


# ---------------------------------------------------------------- output


def _csv_cell(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else v


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    records = report["records"]
    if not records:
        return ""
    w = csv.writer(buf)
    w.writerow(list(records[0]))
    for r in records:
        w.writerow([_csv_cell(v) for v in r.values()])
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(report)
    return json.dumps(report, indent=2) + "\n"


def load_report(text: str) -> dict:
    """Parse a JSON report back into typed records (schema round-trip)."""
    d = json.loads(text)
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ConfigInvalid(f"unsupported schema_version {d.get('schema_version')!r}")
    cmd = d["manifest"]["subcommand"]
    if cmd == "verify":
        tol = d["manifest"]["config"]["tol"]
        d["parsed"] = ResidualReport(tol, [SweepRecord.from_dict(r) for r in d["records"]])
    elif cmd == "delta":
        d["parsed"] = [DeltaMassEstimate.from_dict(r) for r in d["records"]]
    elif cmd == "diagram":
        d["parsed"] = [DiagramReport.from_dict(r) for r in d["records"]]
    return d


def strip_volatile(obj):
    """Remove the VOLATILE_KEYS fields so reports can be compared bitwise."""
    if isinstance(obj, dict):
        return {k: strip_volatile(v) for k, v in obj.items() if k not in VOLATILE_KEYS}
    if isinstance(obj, list):
        return [strip_volatile(v) for v in obj]
    return obj


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_lists(argv))  # argparse exits with 2 on bad flags
    try:
        cfg, digest = resolve_config(args)
        if cfg["format"] not in ("json", "csv"):
            raise ConfigInvalid(f"format must be json or csv, got {cfg['format']!r}")
        records, passed, warnings = RUNNERS[args.command](cfg)
    except (ConfigInvalid, ExcludedParameter) as exc:
        print(f"driftlap: config error [{exc.kind}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DriftLapError, ValueError) as exc:
        print(f"driftlap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = _manifest(cfg, digest)
    if args.command == "delta":
        manifest["backend"] = _kernels.backend()
    report = {
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest,
        "records": records,
        "pass": passed,
    }
    for w in warnings:
        print(f"driftlap: warning: {w}", file=sys.stderr)
    text = render(report, cfg["format"])
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
