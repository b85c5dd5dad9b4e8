"""Command-line front end.

Exit codes: 0 success, 1 internal solver failure, 2 unstable point,
3 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config, parse_config_text
from .errors import ConfigError, MagnomechError
from .model import compute_entanglement
from .plotting import emit_plot_script
from .sweep import SWEEPABLE, optimize, stability_region, sweep

log = logging.getLogger("magnomech")

EXIT_OK, EXIT_INTERNAL, EXIT_UNSTABLE, EXIT_CONFIG = 0, 1, 2, 3


def fmt(value) -> str:
    """Fixed 9-significant-digit scientific notation."""
    return f"{float(value):.8e}"


def _write_csv(path, header, rows) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _result_cells(stable: bool, nu, e_n) -> list[str]:
    if not stable:
        return ["0", "nan", fmt(0.0)]
    return ["1", fmt(nu), fmt(e_n)]


def run(config: RunConfig, output_path=None, threads: int | None = None) -> int:
    """Execute ``config`` and write its CSV; returns the process exit code."""
    out = output_path or config.output_path or f"{config.mode}.csv"
    threads = config.threads if threads is None else threads
    params = config.params.to_physical()
    try:
        if config.mode == "point":
            r = compute_entanglement(params)
            _write_csv(out, ["stable", "nu_minus", "E_N"], [_result_cells(r.stable, r.nu_minus, r.E_N)])
            if r.stable:
                print(f"stable=1 nu_minus={fmt(r.nu_minus)} E_N={fmt(r.E_N)}")
                return EXIT_OK
            print(f"stable=0 nu_minus=nan E_N={fmt(0.0)}")
            return EXIT_UNSTABLE

        if config.mode in ("sweep", "stability"):
            header = [ax.column for ax in config.axes]
            if config.mode == "sweep":
                res = sweep(params, config.axes, threads=threads)
                header += ["stable", "nu_minus", "E_N"]
                rows = (
                    [fmt(c) for c in coords]
                    + _result_cells(res.stability[idx], res.nu_minus[idx], res.values[idx])
                    for idx, coords in res.coordinates()
                )
            else:
                res = stability_region(params, config.axes, threads=threads)
                header += ["stable"]
                rows = (
                    [fmt(c) for c in coords] + [str(int(res.stability[idx]))]
                    for idx, coords in res.coordinates()
                )
            _write_csv(out, header, rows)
            if config.mode == "sweep":
                where = ", ".join(f"{a.column}={fmt(v)}" for a, v in zip(config.axes, res.argmax or ()))
                print(f"max E_N={fmt(res.max_value)} {where}".rstrip())
            else:
                print(f"stable cells: {int(res.stability.sum())}/{res.stability.size}")
            return EXIT_OK

        free = [f.parameter for f in config.free]
        res = optimize(
            params,
            free,
            [(f.lower, f.upper) for f in config.free],
            grid_points=config.grid_points,
            threads=threads,
        )
        header = [SWEEPABLE[name][1] for name in free] + ["E_N"]
        _write_csv(out, header, ([fmt(c) for c in coords] + [fmt(v)] for coords, v in res.trace))
        best = ", ".join(f"{SWEEPABLE[n][1]}={fmt(v)}" for n, v in zip(free, res.best_coords))
        print(f"best E_N={fmt(res.best_value)} {best} evaluations={res.evaluations}")
        return EXIT_OK
    except MagnomechError as exc:
        log.error("solver failure: %s", exc)
        return EXIT_INTERNAL
    except np.linalg.LinAlgError as exc:
        log.error("linear algebra failure: %s", exc)
        return EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magnomech", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for mode, help_ in [
        ("point", "entanglement at a single parameter point"),
        ("sweep", "1D/2D grid of E_N"),
        ("optimize", "maximize E_N over 1-3 parameters"),
        ("stability", "Hurwitz map on a grid"),
    ]:
        p = sub.add_parser(mode, help=help_)
        p.add_argument("--config", help="JSON run configuration (default: baseline point)")
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--threads", type=int, default=None, help="worker threads, 0 = auto")
    p = sub.add_parser("plot", help="write a matplotlib script for a result CSV")
    p.add_argument("csv", help="sweep CSV")
    p.add_argument("--kind", choices=["heatmap", "curve"], required=True)
    p.add_argument("--out", help="script path (default: plot_<csv stem>.py next to the CSV)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "plot":
            path = emit_plot_script(args.csv, args.kind, args.out)
            print(path)
            return EXIT_OK
        if args.threads is not None and args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        if args.config:
            config = parse_config(args.config, mode=args.command)
        else:
            config = parse_config_text("{}", mode=args.command, name="<defaults>")
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return run(config, output_path=args.out, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
