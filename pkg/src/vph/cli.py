"""Command-line surface: diagrams from CSV clouds, distances, experiments.

Exit codes are a stable contract: 0 pass, 2 usage or config error,
3 statistical verdict failure, 4 resource budget exceeded. All randomness
flows from --seed; outputs carry no timestamps, so a fixed seed reproduces
byte-identical files regardless of VPH_THREADS.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .diagram import write_measure_csv
from .errors import BudgetExceededError, CloudFormatError, ConfigError
from .filtration import DEFAULT_SIMPLEX_BUDGET, build_filtered_complex, \
    filtration_by_name
from .geometry import read_cloud_csv
from .homology import read_diagrams_csv, verbose_diagram, write_diagrams_csv
from .stochastic import config_from_dict, run_experiment

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_STATISTICAL = 3
EXIT_RESOURCE = 4


def _jsonify(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return x
    if isinstance(x, dict):
        return {k: _jsonify(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonify(v) for v in x]
    if hasattr(x, "item"):  # numpy scalars
        return _jsonify(x.item())
    return x


def _dump_json(path: Path, obj) -> None:
    with open(path, "w") as f:
        json.dump(_jsonify(obj), f, sort_keys=True, indent=2)
        f.write("\n")


def cmd_diagram(args) -> int:
    cloud = read_cloud_csv(args.cloud)
    kappa = filtration_by_name(args.kappa, r0=cloud.r0)
    t_max = math.inf if args.tmax is None else args.tmax
    fc = build_filtered_complex(cloud, kappa, q_max=args.qmax, t_max=t_max,
                                budget=args.budget)
    degrees = [args.q] if args.q is not None else list(range(args.qmax + 1))
    if any(q < 0 or q > args.qmax for q in degrees):
        raise ConfigError([f"q: must lie in 0..{args.qmax}"])
    diagrams = {q: verbose_diagram(fc, q, field=args.field) for q in degrees}
    out = Path(args.out)
    (out / "diagrams").mkdir(parents=True, exist_ok=True)
    write_diagrams_csv(out / "diagrams" / "diagram.csv", diagrams)
    summary = {
        "input": Path(args.cloud).name,
        "kappa": kappa.name,
        "field": args.field,
        "t_max": t_max,
        "q_max": args.qmax,
        "n_points": len(cloud),
        "simplex_counts_by_dim": {str(d): c
                                  for d, c in sorted(fc.counts_by_dim().items())},
        "cardinalities": {str(q): len(diagrams[q]) for q in degrees},
    }
    _dump_json(out / "summary.json", summary)
    return EXIT_OK


def cmd_dist(args) -> int:
    from .diagram import matching_distance

    da = read_diagrams_csv(args.a)
    db = read_diagrams_csv(args.b)
    if args.q not in da:
        raise ConfigError([f"q: degree {args.q} absent from {args.a}"])
    if args.q not in db:
        raise ConfigError([f"q: degree {args.q} absent from {args.b}"])
    rep = matching_distance(da[args.q], db[args.q])
    doc = {"q": args.q, "value": rep.value}
    if rep.witness is not None and math.isfinite(rep.value):
        doc["witness"] = [list(p) for p in rep.witness]
    json.dump(_jsonify(doc), sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _write_table(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(str(c) for c in row) + "\n")


def write_report_bundle(report, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    _dump_json(outdir / "report.json", report.to_json_dict())
    if report.measures:
        mdir = outdir / "measures"
        mdir.mkdir(exist_ok=True)
        for name in sorted(report.measures):
            write_measure_csv(mdir / f"{name}.csv", report.measures[name],
                              sidecar_path=mdir / f"{name}.grid.json")
    for name in sorted(report.tables):
        header, rows = report.tables[name]
        _write_table(outdir / f"{name}.csv", header, rows)


def cmd_experiment(args) -> int:
    try:
        with open(args.config) as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError([f"config: {e}"]) from None
    config = config_from_dict(raw, args.name, seed=args.seed)
    report = run_experiment(args.name, config)
    write_report_bundle(report, Path(args.out))
    for v in report.verdicts:
        status = {True: "pass", False: "FAIL", None: "inconclusive"}[v["passed"]]
        print(f"[{status}] {v['name']}: {v['detail']}")
    for w in report.warnings:
        print(f"[warning] {w}")
    return EXIT_OK if report.passed else EXIT_STATISTICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vph",
        description="Verbose persistence diagrams, matching distances, and "
                    "seeded growing-window experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diagram", help="compute verbose diagrams of a point cloud")
    p.add_argument("cloud", help="point cloud CSV (header x1..xN[,mark])")
    p.add_argument("--kappa", default="rips",
                   help="rips | cech | rips-marked | cech-marked | shift(<base>,k,t)")
    p.add_argument("--q", type=int, default=None,
                   help="restrict output to one degree (default: all up to --qmax)")
    p.add_argument("--qmax", type=int, default=2, help="maximal homology degree")
    p.add_argument("--tmax", type=float, default=None,
                   help="truncation threshold (default: no truncation)")
    p.add_argument("--field", type=int, default=2, help="coefficient field")
    p.add_argument("--budget", type=int, default=DEFAULT_SIMPLEX_BUDGET,
                   help="simplex record budget")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("dist", help="matching distance between two diagram CSVs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--q", type=int, required=True, help="homology degree")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("experiment", help="run a seeded experiment")
    p.add_argument("name",
                   choices=["slln", "mass", "clt", "support", "stability"])
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--seed", type=int, default=None,
                   help="seed override (wins over the config seed)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except BudgetExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CloudFormatError, ConfigError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
