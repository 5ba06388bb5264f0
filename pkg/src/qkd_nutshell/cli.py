"""Command-line runner: ``qkd-nutshell run`` and ``qkd-nutshell sweep``.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import sys
import time
from pathlib import Path

from . import __version__
from . import config as cfgmod
from .config import ConfigError
from .runner import run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> str:
    data = text.encode("utf-8")
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def _apply_overrides(raw: dict, args) -> dict:
    raw = dict(raw)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.shots is not None:
        exp = raw.get("experiment")
        if exp not in cfgmod.COUNT_KEY:
            raise ConfigError(f"experiment: expected one of {sorted(cfgmod.SCHEMAS)}, got {exp!r}")
        raw[cfgmod.COUNT_KEY[exp]] = args.shots
    if args.label is not None:
        raw["label"] = args.label
    return raw


def _out_dir(base: Path, cfg: dict, force: bool) -> Path:
    label = cfg.get("label") or _dt.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    path = base / cfg["experiment"] / label
    if path.exists() and any(path.iterdir()) and not force:
        raise ConfigError(f"output directory {path} exists; use --force to overwrite")
    path.mkdir(parents=True, exist_ok=True)
    return path


def execute(raw: dict, out: Path, workers: int, force: bool) -> tuple[Path, dict]:
    """Validate, run and write one artifact set; returns its directory and summary."""
    cfg = cfgmod.validate(raw)
    target = _out_dir(out, cfg, force)
    t0 = time.perf_counter()
    header, rows, summary = run_experiment(cfg, workers)
    wall = time.perf_counter() - t0
    digests = {
        "results.csv": _write(target / "results.csv", csv_text(header, rows)),
        "summary.json": _write(target / "summary.json", _json_text(summary)),
    }
    manifest = {"config": cfgmod.public(cfg), "tool_version": __version__, "master_seed": cfg["seed"],
                "wall_time_s": wall, "workers": workers, "digests": digests}
    _write(target / "manifest.json", _json_text(manifest))
    return target, summary


def _grid(text: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ConfigError("--grid: empty grid")
    try:
        return [float(t) for t in items]
    except ValueError:
        raise ConfigError(f"--grid: cannot parse {text!r}") from None


def cmd_run(args) -> int:
    raw = _apply_overrides(cfgmod.load(args.config), args)
    target, summary = execute(raw, Path(args.out), args.workers, args.force)
    print(f"wrote {target}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    raw = _apply_overrides(cfgmod.load(args.config), args)
    path = cfgmod.sweep_path(raw, args.param)
    grid = _grid(args.grid)
    base = raw.get("label") or _dt.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    for value in grid:  # validate every point before running any
        cfgmod.validate({**cfgmod.set_path(raw, path, value), "label": f"{base}/{args.param}={value!r}"})
    merged, keys = [], None
    for value in grid:
        point = {**cfgmod.set_path(raw, path, value), "label": f"{base}/{args.param}={value!r}"}
        _, summary = execute(point, Path(args.out), args.workers, args.force)
        scalars = {k: v for k, v in summary.items() if isinstance(v, (int, float, bool)) or v is None}
        keys = keys or list(scalars)
        merged.append([value] + [scalars.get(k) for k in keys])
    sweep_dir = Path(args.out) / raw["experiment"] / base
    _write(sweep_dir / "sweep.csv", csv_text([args.param] + keys, merged))
    print(f"wrote {sweep_dir / 'sweep.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qkd-nutshell", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="experiment config (JSON) or a manifest.json to re-run")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--shots", type=int, help="shots or rounds, depending on the experiment")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out", default="results")
        sp.add_argument("--label", help="output sub-directory name (default: timestamp)")
        sp.add_argument("--force", action="store_true", help="overwrite an existing output directory")

    run = sub.add_parser("run", help="run one experiment")
    common(run)
    run.set_defaults(func=cmd_run)
    sweep = sub.add_parser("sweep", help="run an experiment over a parameter grid")
    common(sweep)
    sweep.add_argument("--param", required=True)
    sweep.add_argument("--grid", required=True, help="comma-separated values")
    sweep.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
