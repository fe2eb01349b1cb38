"""Command-line entry point: ``su2pulse {verify,evolve,bench,scan}``.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
Every data file is written next to a ``<command>_manifest.json`` holding the
resolved config, seed, package version and SHA-256 checksums of the outputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .bench import BenchConfig, config_to_dict, run_benchmark, write_bench_csv
from .fields import FieldProfile, half_sine
from .model import BlockParams, ModelParams, block_params, verify_block_equivalence
from .propagator import EvolutionSpec, StepOrder, evolve
from .su2 import extract_gate_form, polar_unitary, unitarity_defect
from .synthesis import ScanConfig, scan_plane, write_scan_csv

THREADS_ENV = "SU2PULSE_THREADS"
RESIDUAL_LIMIT = 1e-4


class ConfigError(ValueError):
    pass


def _load_json(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {sorted(extra)}")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, command: str, config: dict, seed, files: list[Path]) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "outputs": {f.name: _sha256(f) for f in files},
    }
    path = out / f"{command}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _threads(args) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    return max(1, args.threads or 1)


# --- verify ----------------------------------------------------------------


def cmd_verify(args) -> int:
    directions = [args.h] if args.h else [1, 2, 3]
    rng = np.random.default_rng(args.seed)
    rows = []
    failed = False
    for h in directions:
        worst = {1: (0.0, None), 2: (0.0, None)}
        leak_max = 0.0
        dev_max = {1: 0.0, 2: 0.0}
        for _ in range(args.draws):
            J1, J2, J3, B1, B2 = rng.uniform(-5.0, 5.0, size=5)
            m = ModelParams(h, (J1, J2, J3), B1, B2)
            rep = verify_block_equivalence(m, args.tol)
            leak_max = max(leak_max, rep.max_leakage)
            for k in (1, 2):
                err = max(rep.deviation_by_block[k], rep.max_leakage)
                dev_max[k] = max(dev_max[k], rep.deviation_by_block[k])
                if err > worst[k][0]:
                    worst[k] = (err, m)
        for k in (1, 2):
            ok = dev_max[k] <= args.tol and leak_max <= args.tol
            failed |= not ok
            print(f"h={h} k={k} max_leakage={leak_max:.3e} max_deviation={dev_max[k]:.3e} {'PASS' if ok else 'FAIL'}")
            if not ok and worst[k][1] is not None:
                m = worst[k][1]
                print(f"  worst case: h={m.h} J={list(m.J)!r} B1={m.B1!r} B2={m.B2!r}")
            rows.append([h, k, repr(leak_max), repr(dev_max[k]), int(ok)])
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "verify.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["h", "k", "max_leakage", "max_deviation", "passed"])
            w.writerows(rows)
        cfg = {"h": directions, "draws": args.draws, "tol": args.tol}
        _write_manifest(out, "verify", cfg, args.seed, [path])
    return 1 if failed else 0


# --- evolve ----------------------------------------------------------------


def _evolution_from_config(cfg: dict) -> tuple[EvolutionSpec, dict]:
    _check_keys(cfg, {"model", "k", "effective", "field", "n", "order", "attach_global_phase", "unitarize"}, "config")
    if ("model" in cfg) == ("effective" in cfg):
        raise ConfigError("config: give exactly one of 'model' or 'effective'")
    try:
        field = FieldProfile.from_dict(cfg["field"]) if "field" in cfg else None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field: {exc}") from exc
    if "model" in cfg:
        md = cfg["model"]
        if not isinstance(md, dict):
            raise ConfigError("model: must be an object")
        _check_keys(md, {"h", "J", "B1", "B2"}, "model")
        try:
            m = ModelParams(int(md["h"]), tuple(md["J"]), float(md.get("B1", 0.0)), float(md.get("B2", 0.0)))
        except KeyError as exc:
            raise ConfigError(f"model: missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: {exc}") from exc
        k = cfg.get("k", 1)
        if k not in (1, 2):
            raise ConfigError(f"k: must be 1 or 2, got {k!r}")
        block = block_params(m, k)
        if field is None:
            field = half_sine(1.0)
    else:
        ed = cfg["effective"]
        if not isinstance(ed, dict):
            raise ConfigError("effective: must be an object")
        _check_keys(ed, {"ampl", "J", "q", "J0"}, "effective")
        try:
            ampl = float(ed.get("ampl", 1.0 if field is not None else 0.0))
            block = BlockParams.effective(float(ed.get("J", 0.0)), 1.0, int(ed.get("q", 1)), float(ed.get("J0", 0.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"effective: {exc}") from exc
        field = half_sine(ampl) if field is None else field.scaled(ampl)
    n = cfg.get("n", 100)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError(f"n: partition count must be a positive integer, got {n!r}")
    try:
        order = StepOrder(cfg.get("order", "quadratic"))
    except ValueError as exc:
        raise ConfigError(f"order: {exc}") from exc
    spec = EvolutionSpec(block, field, n, order, bool(cfg.get("attach_global_phase", False)), bool(cfg.get("unitarize", False)))
    return spec, cfg


def cmd_evolve(args) -> int:
    cfg = _load_json(args.config)
    spec, resolved = _evolution_from_config(cfg)
    U = evolve(spec)
    defect = unitarity_defect(U)
    g = extract_gate_form(polar_unitary(U))
    result = {
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in U],
        "gate": {"varphi": g.varphi, "A": g.A, "B": g.B, "phi": g.phi, "theta": g.theta},
        "unitarity_defect": defect,
    }
    print(json.dumps(result["gate"] | {"unitarity_defect": defect}))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    jpath = out / "evolve.json"
    jpath.write_text(json.dumps(result, indent=2) + "\n")
    cpath = out / "evolve.csv"
    with cpath.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["varphi", "A", "B", "phi", "theta", "unitarity_defect"])
        w.writerow([repr(x) for x in (g.varphi, g.A, g.B, g.phi, g.theta, defect)])
    _write_manifest(out, "evolve", resolved, None, [jpath, cpath])
    return 0


# --- bench -----------------------------------------------------------------


def cmd_bench(args) -> int:
    cfg = _load_json(args.config)
    _check_keys(cfg, set(BenchConfig.__dataclass_fields__), "config")
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        bc = BenchConfig(**cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from exc
    result = run_benchmark(bc, threads=_threads(args))
    text = write_bench_csv(result.records)
    sys.stdout.write(text)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "bench.csv"
    path.write_text(text)
    _write_manifest(out, "bench", config_to_dict(bc), bc.seed, [path])
    return 0 if result.skipped == 0 else 1


# --- scan ------------------------------------------------------------------


def _parse_targets(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"--target-a: {exc}") from exc


def cmd_scan(args) -> int:
    cfg = _load_json(args.config)
    allowed = set(ScanConfig.__dataclass_fields__)
    _check_keys(cfg, allowed, "config")
    targets = cfg.pop("target_a", [0.0, 0.5, 1.0])
    if args.target_a is not None:
        targets = _parse_targets(args.target_a)
    if not isinstance(targets, list):
        targets = [targets]
    for flag in ("q", "resolution", "n"):
        if getattr(args, flag) is not None:
            cfg[flag] = getattr(args, flag)
    try:
        configs = [ScanConfig(target_a=float(t), **cfg) for t in targets]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from exc

    threads = _threads(args)
    points = []
    status = 0
    for sc in configs:
        res = scan_plane(sc, threads=threads)
        points.extend(res.points)
        worst = max((p.residual for p in res.points), default=0.0)
        print(f"target_A={sc.target_a:g} q={sc.q}: {len(res.points)} points on {len(res.theta_std)} curves, "
              f"max residual {worst:.2e}")
        for c, s in res.theta_std.items():
            size = sum(1 for p in res.points if p.curve == c)
            flag = "" if s <= 0.05 else "  [theta not constant]"
            print(f"  curve {c}: {size} points, theta std {s:.3e}{flag}")
        if sc.recheck and not worst <= RESIDUAL_LIMIT:
            status = 1
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "scan.csv"
    path.write_text(write_scan_csv(points))
    resolved = {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items()}
    resolved["target_a"] = [sc.target_a for sc in configs]
    _write_manifest(out, "scan", resolved, None, [path])
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="su2pulse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--threads", type=int, default=1, help=f"worker threads (env {THREADS_ENV} overrides)")

    p = sub.add_parser("verify", help="check the Bell-basis block decomposition on random parameters")
    p.add_argument("--h", type=int, choices=(1, 2, 3), help="restrict to one field direction")
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    common(p, config=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evolve", help="evolve one block and report its gate form")
    common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("bench", help="linear vs quadratic precision/runtime benchmark")
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("scan", help="contours of fixed gate amplitude in the (ampl, J) plane")
    p.add_argument("--target-a", help="comma-separated target amplitudes, e.g. 0,0.5,1")
    p.add_argument("--q", type=int, choices=(1, 2))
    p.add_argument("--resolution", type=int)
    p.add_argument("--n", type=int)
    common(p)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and (args.draws < 1 or not math.isfinite(args.tol) or args.tol < 0):
        parser.error("--draws must be positive and --tol a non-negative number")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
