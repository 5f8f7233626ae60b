"""Command-line front end.

Every command prints one record to stdout, JSON by default or CSV with
``--format csv``.  Floats are written with 17 significant digits so the
output round-trips exactly and repeated runs are byte-identical.

Exit status: 0 success, 2 invalid input, 3 a numerical check exceeded its
tolerance, 4 the heralded slice of an experiment was empty.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__, _accel
from .duality import duality_sweep, few_photon_table
from .errors import ConfigError, CutoffError, EmptySliceError, NoSolutionError, ParameterError
from .experiment import analyze, build_tables, load_config, run_experiment, TABLE_TAIL
from .fock import DEFAULT_TAIL_BOUND
from .gaussian import BS, PDC
from .interference import (
    classical_bs,
    classical_pdc,
    coincidence_bs,
    coincidence_pdc,
    pair_distribution,
    partial_coincidence,
)
from .retrodiction import retro_check

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE, EXIT_EMPTY = 0, 2, 3, 4
DUALITY_TOL = 1e-9
RETRO_TOL = 1e-8
DEFAULT_GAINS = (1.0, 1.25, 1.5, 2.0, math.e, 4.0)


class ToleranceFailure(Exception):
    def __init__(self, record: dict):
        super().__init__("numerical tolerance exceeded")
        self.record = record


def _encode(value) -> str:
    if isinstance(value, (bool, type(None), str)):
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"refusing to emit non-finite number {value}")
        return format(value, ".17g")
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in value) + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _csv_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return _encode(value)
    return str(value)


def render(record: dict, fmt: str) -> str:
    if fmt == "json":
        return _encode(record) + "\n"
    buf = io.StringIO()
    for section in ("parameters", "metadata"):
        for key, value in record[section].items():
            buf.write(f"# {section}.{key}={_encode(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(record["columns"])
    for row in record["series"]:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _record(command: str, parameters: dict, columns, series, metadata: dict) -> dict:
    return {"command": command, "parameters": parameters, "columns": list(columns),
            "series": [list(r) for r in series], "metadata": metadata}


def _gain_from(args) -> PDC:
    given = [(k, getattr(args, k)) for k in ("gain", "r", "db") if getattr(args, k) is not None]
    if len(given) != 1:
        raise ParameterError("give exactly one of --gain, --r, --db")
    kind, value = given[0]
    return {"gain": PDC, "r": PDC.from_r, "db": PDC.from_db}[kind](value)


def _add_gain(p: argparse.ArgumentParser, required: bool = True) -> None:
    grp = p.add_mutually_exclusive_group(required=required)
    grp.add_argument("--gain", type=float, help="parametric gain g = cosh^2 r")
    grp.add_argument("--r", type=float, help="squeezing parameter r")
    grp.add_argument("--db", type=float, help="squeezing in dB")


_SCAN_PARAMS = {"bs": {"eta": BS, "theta": BS.from_theta},
                "pdc": {"gain": PDC, "r": PDC.from_r, "db": PDC.from_db}}


def cmd_dip_scan(args) -> dict:
    coupler_kind = args.coupler
    param = args.param or ("eta" if coupler_kind == "bs" else "gain")
    if param not in _SCAN_PARAMS[coupler_kind]:
        raise ParameterError(f"--param {param} does not apply to a {coupler_kind} scan")
    start = args.start if args.start is not None else (0.0 if coupler_kind == "bs" or param != "gain" else 1.0)
    if args.stop is not None:
        stop = args.stop
    else:
        stop = {"eta": 1.0, "theta": math.pi / 2, "gain": 4.0, "r": 1.5, "db": 12.0}[param]
    if args.steps < 1:
        raise ParameterError("--steps must be at least 1")
    if args.steps > 1 and not stop > start:
        raise ParameterError("--stop must exceed --start")
    make = _SCAN_PARAMS[coupler_kind][param]
    xs = [start] if args.steps == 1 else np.linspace(start, stop, args.steps).tolist()
    rows = []
    for x in xs:
        c = make(x)
        if isinstance(c, BS):
            rows.append((x, c.eta, coincidence_bs(c.eta), classical_bs(c.eta), partial_coincidence(c, args.s)))
        else:
            rows.append((x, c.gain, coincidence_pdc(c.gain), classical_pdc(c.gain), partial_coincidence(c, args.s)))
    best = min(rows, key=lambda r: r[2])
    native = "eta" if coupler_kind == "bs" else "gain"
    return _record("dip-scan",
                   {"coupler": coupler_kind, "param": param, "start": start, "stop": stop,
                    "steps": args.steps, "s": args.s},
                   ("x", native, "quantum", "classical", "interpolated"), rows,
                   {"argmin": best[0], "minimum": best[2]})


def cmd_pair_dist(args) -> dict:
    pdc = _gain_from(args)
    dist = pair_distribution(pdc.gain, args.n_max)
    rows = [(n, float(p)) for n, p in enumerate(dist.probs)]
    return _record("pair-dist", {"gain": pdc.gain, "n_max": args.n_max}, ("n", "p"), rows,
                   {"cutoff": args.n_max, "tail_mass": dist.tail, "total": dist.total()})


def _gain_list(text: str) -> list[float]:
    out = []
    for token in text.split(","):
        token = token.strip()
        out.append(math.e if token == "e" else float(token))
    return out


def cmd_duality_check(args) -> dict:
    gains = [PDC(g).gain for g in (_gain_list(args.gains) if args.gains else DEFAULT_GAINS)]
    if args.max_photons < 0:
        raise ParameterError("--max-photons must be non-negative")
    if args.table:
        rows, worst = [], 0.0
        for g in gains:
            for row in few_photon_table(g, args.cutoff):
                rows.append((g, "<%d,%d|BS|%d,%d>" % row.bs_counts, row.bs_expected, row.bs_closed,
                             row.bs_oracle, "<%d,%d|PDC|%d,%d>" % row.pdc_counts, row.pdc_expected,
                             row.pdc_closed, row.pdc_oracle))
                worst = max(worst, row.closed_err, row.oracle_err)
        record = _record("duality-check", {"gains": gains, "table": True, "cutoff": args.cutoff},
                         ("gain", "bs_element", "bs_expected", "bs_closed", "bs_oracle",
                          "pdc_element", "pdc_expected", "pdc_closed", "pdc_oracle"), rows,
                         {"max_residual": worst, "tolerance": DUALITY_TOL, "cutoff": args.cutoff,
                          "tail_bound": DEFAULT_TAIL_BOUND})
    else:
        rows = [(g, duality_sweep(args.max_photons, [g])) for g in gains]
        worst = max(r[1] for r in rows)
        record = _record("duality-check", {"gains": gains, "max_photons": args.max_photons},
                         ("gain", "max_residual"), rows,
                         {"max_residual": worst, "tolerance": DUALITY_TOL, "cutoff": None})
    if worst > DUALITY_TOL:
        raise ToleranceFailure(record)
    return record


def cmd_experiment(args) -> dict:
    config = load_config(args.config)
    tables = build_tables(config)
    tally = run_experiment(config)
    report = analyze(tally, config, confidence=args.confidence)
    rows = [(*k, v) for k, v in sorted(tally.counts.items())]
    meta = {"shots_run": tally.shots_run, **report.as_dict(),
            "herald_levels": tables.herald_levels, "output_pairs": tables.output_pairs,
            "cutoff": tables.photon_levels - 1, "tail_bound": TABLE_TAIL,
            "seed": config.seed, "backend": _accel.backend()}
    return _record("experiment", {"config": str(args.config), **config.as_dict()},
                   ("trigger_a", "trigger_b", "out_a", "out_b", "count"), rows, meta)


def cmd_retro_check(args) -> dict:
    pdc = _gain_from(args)
    if args.max_photons < 0 or args.max_photons > args.cutoff:
        raise ParameterError("--max-photons must lie in [0, cutoff]")
    result = retro_check(pdc.gain, args.max_photons, args.cutoff)
    record = _record("retro-check",
                     {"gain": pdc.gain, "max_photons": args.max_photons, "cutoff": args.cutoff},
                     ("i", "m", "max_abs_diff"), result.rows,
                     {"max_discrepancy": result.max_discrepancy, "compared": result.compared,
                      "unreachable": result.unreachable, "tolerance": RETRO_TOL,
                      "cutoff": args.cutoff, "tail_bound": DEFAULT_TAIL_BOUND})
    if result.max_discrepancy > RETRO_TOL:
        raise ToleranceFailure(record)
    return record


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    parser = argparse.ArgumentParser(prog="ptrdual", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dip-scan", parents=[common],
                       help="coincidence probability across a coupler parameter range")
    p.add_argument("--coupler", choices=("bs", "pdc"), default="bs")
    p.add_argument("--param", choices=("eta", "theta", "gain", "r", "db"),
                   help="scanned parameter (default eta for bs, gain for pdc)")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--s", type=float, default=1.0, help="path indistinguishability in [0, 1]")
    p.set_defaults(func=cmd_dip_scan)

    p = sub.add_parser("pair-dist", parents=[common],
                       help="photon-pair number distribution behind an amplified |1,1>")
    _add_gain(p)
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(func=cmd_pair_dist)

    p = sub.add_parser("duality-check", parents=[common],
                       help="compare amplifier and beam-splitter elements under partial transpose")
    p.add_argument("--max-photons", type=int, default=10)
    p.add_argument("--gains", help="comma-separated gains; 'e' is accepted")
    p.add_argument("--table", action="store_true", help="emit the few-photon element table")
    p.add_argument("--cutoff", type=int, default=12, help="oracle cutoff for --table")
    p.set_defaults(func=cmd_duality_check)

    p = sub.add_parser("experiment", parents=[common],
                       help="Monte Carlo heralded amplifier experiment from an INI file")
    p.add_argument("config", help="path to an INI file with an [experiment] section")
    p.add_argument("--confidence", type=float, default=0.99)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("retro-check", parents=[common],
                       help="Bayes versus retrodicted-evolution intermediate probabilities")
    _add_gain(p)
    p.add_argument("--max-photons", type=int, default=3)
    p.add_argument("--cutoff", type=int, default=24)
    p.set_defaults(func=cmd_retro_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        record = args.func(args)
    except ToleranceFailure as exc:
        sys.stdout.write(render(exc.record, args.format))
        print("error: numerical tolerance exceeded", file=sys.stderr)
        return EXIT_TOLERANCE
    except (ParameterError, ConfigError, NoSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CutoffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except EmptySliceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    sys.stdout.write(render(record, args.format))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
