"""Command-line entry point: ``vlc-secrecy run|list|dump-config``.

Exit status is 0 on success, 1 for configuration errors and 2 when a
numerical step fails (infeasible targets, singular Gram matrix, solver
divergence).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import time

from . import __version__
from .config import MODE_HELP, PRESETS, dump_config, load_config, sweep_points
from .errors import ConfigError, ConvergenceError, InfeasibleError, SingularGramError
from .experiments import run_point

log = logging.getLogger("vlc_secrecy")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, list):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def write_csv(rows: list[dict], stream) -> None:
    """RFC 4180 CSV with a header row and ``\\n`` line endings."""
    fields: list[str] = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[k]) if k in r else "" for k in fields])


def _summary(point_no, total, swept, rows, elapsed):
    head = ", ".join(f"{k}={_fmt(v)}" for k, v in swept.items()) or "single point"
    if len(rows) == 1:
        keys = [k for k in rows[0] if k.startswith(("sop_", "bf_sop_")) and not k.endswith("_se")]
        keys = keys or [k for k in rows[0] if k.endswith("_db")][:3]
        body = ", ".join(f"{k}={rows[0][k]:.6g}" for k in keys)
    else:
        body = f"{len(rows)} rows"
    return f"[{point_no}/{total}] {head}: {body} ({elapsed:.2f} s)"


def cmd_run(args) -> int:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    if args.workers is not None:
        overrides.append(f"run.workers={args.workers}")
    cfg = load_config(args.config, overrides)
    seed, workers = cfg["run"]["seed"], cfg["run"]["workers"]
    if workers < 1:
        raise ConfigError("run.workers must be >= 1")
    out = args.out or cfg["run"].get("output")
    points = sweep_points(cfg)
    rows = []
    for k, point in enumerate(points, 1):
        t0 = time.perf_counter()
        swept = point.pop("_swept")
        got = run_point(point, seed=seed, workers=workers)
        for r in got:
            row = {key: v for key, v in swept.items()}
            row.update(r)
            row["seed"] = seed
            row["workers"] = workers
            rows.append(row)
        print(_summary(k, len(points), swept, got, time.perf_counter() - t0), file=sys.stderr)
    if out and out != "-":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
        print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    else:
        buf = io.StringIO()
        write_csv(rows, buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_list(args) -> int:
    print("presets:")
    for name, desc in PRESETS.items():
        print(f"  {name:<12}{desc}")
    print("modes (experiment.mode):")
    for name, desc in MODE_HELP.items():
        print(f"  {name:<12}{desc}")
    return EXIT_OK


def cmd_dump(args) -> int:
    cfg = load_config(args.config, list(args.set or []))
    sys.stdout.write(dump_config(cfg))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vlc-secrecy", description="Secrecy of multi-LED VLC downlinks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a TOML file or preset")
    r.add_argument("config", help="path to a TOML config, or a preset name (see `list`)")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a key, e.g. room.length_m=12")
    r.add_argument("--seed", type=int, help="master RNG seed")
    r.add_argument("--out", help="CSV output path ('-' for stdout)")
    r.add_argument("--workers", type=int, help="worker threads for Monte Carlo")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list presets and experiment modes")
    ls.set_defaults(func=cmd_list)

    d = sub.add_parser("dump-config", help="print the fully resolved config as TOML")
    d.add_argument("config", help="path to a TOML config, or a preset name")
    d.add_argument("--set", action="append", metavar="KEY=VALUE")
    d.set_defaults(func=cmd_dump)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, SingularGramError, ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
