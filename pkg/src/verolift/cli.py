"""Command line entry point: ``verolift solve`` and ``verolift bench``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import BENCH_MODES, ConfigError, ExperimentConfig, run_monte_carlo
from .measure import MeasurementSet
from .pipeline import INVARIANCE_MODES, METHODS, recover
from .svg import line_plot

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3

log = logging.getLogger("verolift")


def _encode(a):
    if a is None:
        return None
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return a.tolist()


def _overrides(args, doc: dict) -> dict:
    doc = dict(doc)
    if args.method is not None:
        doc["method"] = args.method
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.invariance is not None:
        doc["invariance"] = args.invariance
    if args.autocorr is not None:
        doc["autocorr"] = args.autocorr == "on"
    return doc


def _load_config(args) -> ExperimentConfig:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    return ExperimentConfig.from_dict(_overrides(args, doc))


def cmd_solve(args) -> int:
    config = _load_config(args)
    try:
        ms = MeasurementSet.load(args.input)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read measurements {args.input}: {exc}") from exc
    rec = recover(ms, config.options())
    doc = {
        "variant": ms.variant,
        "x_hat": _encode(rec.x_hat),
        "lifted": _encode(rec.lifted),
        "certificate": rec.certificate.to_json(),
        "record": rec.record.to_json(),
    }
    Path(args.out).write_text(json.dumps(doc, indent=1))
    if rec.record.failure and rec.record.failure.startswith("infeasible"):
        log.error("%s", rec.record.failure)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _load_config(args)
    config.check_mode(args.mode)
    result = run_monte_carlo(config)
    csv_path = args.csv or config.csv
    if csv_path is None:
        raise ConfigError("no CSV output path given")
    Path(csv_path).write_text(result.to_csv())
    svg_path = args.svg or config.svg
    if svg_path:
        xs = [r.sweep_value for r in result.rows]
        series = {"exact": [r.success_rate for r in result.rows], "support": [r.support_rate for r in result.rows]}
        xlabel = "N" if config.sweep_name == "N" else "||x0||_0"
        Path(svg_path).write_text(line_plot(xs, series, xlabel, title=f"{args.mode}: {config.method}"))
    for r in result.rows:
        log.info("%s=%d success=%.3f support=%.3f", config.sweep_name, r.sweep_value, r.success_rate, r.support_rate)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verolift", description="Sparse phase retrieval by lifted group sparsity.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--method", choices=METHODS)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--invariance", choices=INVARIANCE_MODES)
        sp.add_argument("--autocorr", choices=("on", "off"))

    s = sub.add_parser("solve", help="recover a signal from one measurement file")
    common(s)
    s.add_argument("--input", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="Monte Carlo success-rate sweep")
    b.add_argument("mode", choices=BENCH_MODES)
    common(b)
    b.add_argument("--csv")
    b.add_argument("--svg")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
