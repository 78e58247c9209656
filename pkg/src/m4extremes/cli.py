"""Command-line interface.

Subcommands: preset, validate, exact, simulate, estimate, mc-study, ingest,
report.  Outputs default to JSON on stdout; table-shaped results accept
``--format csv``.  Every randomized command requires an explicit ``--seed``
and echoes it (plus the specification fingerprint and tool version) into
its outputs.

Exit codes: 0 success, 2 usage, 3 data/validation problem, 4 capacity cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._version import __version__
from .dependence import (
    contagion_index_region,
    extremal_coefficient_matrix,
    fragility_index,
    summarize,
)
from .errors import CapacityError, M4Error, ParseError
from .estimate import (
    estimate_contagion,
    estimate_extremal_coefficient,
    estimate_stability,
    monte_carlo_study,
    rank_transform,
)
from .lattice import LatticePoint, Region, neighbors
from .patterns import (
    M4Spec,
    PRESETS,
    dump_spec,
    load_spec,
    preset,
    validate,
)
from .simulate import export_sample, read_sample_csv, simulate_m4
from .stations import ingest_stations, station_indices


def _parse_point(text: str) -> LatticePoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParseError(f"expected 'x,y', got {text!r}")
    try:
        return LatticePoint(int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise ParseError(f"expected integer coordinates, got {text!r}") from exc


def _parse_region(text: str, site: LatticePoint | None = None) -> Region:
    text = text.strip()
    if text == "neighbors":
        if site is None:
            raise ParseError("--region neighbors requires --site")
        return neighbors(site)
    points = [_parse_point(part) for part in text.split(";") if part.strip()]
    if not points:
        raise ParseError("region must name at least one point")
    return Region(points)


def _load_spec_arg(value: str) -> M4Spec:
    path = Path(value)
    if path.exists():
        spec = load_spec(path)
    elif value in PRESETS:
        spec = preset(value)
    else:
        raise ParseError(
            f"{value!r} is neither a spec file nor a preset name "
            f"(presets: {sorted(PRESETS)})"
        )
    validate(spec).raise_if_invalid()
    return spec


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_csv(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _meta(spec: M4Spec | None = None, seed: int | None = None) -> dict:
    doc: dict = {"tool": "m4extremes", "version": __version__}
    if spec is not None:
        doc["spec_fingerprint"] = spec.fingerprint()
    if seed is not None:
        doc["seed"] = seed
    return doc


def _csv_meta_lines(spec: M4Spec | None = None, seed: int | None = None) -> list[str]:
    lines = [f"# m4extremes={__version__}"]
    if spec is not None:
        lines.append(f"# spec_fingerprint={spec.fingerprint()}")
    if seed is not None:
        lines.append(f"# seed={seed}")
    return lines


# -- commands -----------------------------------------------------------------


def cmd_preset(args: argparse.Namespace) -> int:
    spec = preset(args.name)
    text = dump_spec(spec)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.spec)
    spec = load_spec(path, check=False) if path.exists() else _load_spec_arg(args.spec)
    report = validate(spec)
    doc = _meta(spec)
    doc["valid"] = report.ok
    doc["problems"] = str(report) if not report.ok else None
    _emit_json(doc, args.out)
    return 0 if report.ok else 3


def cmd_exact(args: argparse.Namespace) -> int:
    spec = _load_spec_arg(args.spec)
    site = _parse_point(args.site)
    region = _parse_region(args.region, site)
    summary = summarize(spec, region, site)
    doc = _meta(spec)
    doc.update(summary.to_json_dict())
    if args.matrix:
        doc["extremal_coefficient_matrix"] = [
            [float(v) for v in row] for row in extremal_coefficient_matrix(spec, site)
        ]
    if args.given:
        given = _parse_region(args.given, site)
        doc["region_to_region_contagion"] = float(
            contagion_index_region(spec, region, given)
        )
        if given == region:
            doc["fragility_index"] = float(fragility_index(spec, region))
    if args.format == "csv":
        lines = _csv_meta_lines(spec)
        lines.append("quantity,value")
        lines.append(f"contagion_index,{doc['contagion_index']['value']!r}")
        lines.append(f"stability_index,{doc['stability_index']['value']!r}")
        lines.append(
            f"joint_extremal_coefficient,{doc['joint_extremal_coefficient']['value']!r}"
        )
        _emit_csv(lines, args.out)
    else:
        _emit_json(doc, args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = _load_spec_arg(args.spec)
    if args.locations == "domain":
        locations = Region(spec.domain_points())
    else:
        locations = _parse_region(args.locations)
    sample = simulate_m4(spec, locations, args.n, args.seed)
    csv_path, meta_path = export_sample(sample, args.out)
    _emit_json(
        {**_meta(spec, sample.seed), "csv": str(csv_path), "metadata": str(meta_path),
         "n": sample.n_replicates, "locations": len(sample.locations)},
        None,
    )
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    sample = read_sample_csv(args.sample, args.meta)
    site = _parse_point(args.site)
    region = _parse_region(args.region, site)
    scores = rank_transform(sample)
    pairwise = []
    for point in region:
        est = estimate_extremal_coefficient(scores, Region((site, point)))
        pairwise.append(
            {"point": str(point), "value": est.value, "out_of_range": est.out_of_range}
        )
    joint = estimate_extremal_coefficient(scores, Region((site,)).union(region))
    doc = {
        "tool": "m4extremes",
        "version": __version__,
        "spec_fingerprint": sample.spec_fingerprint,
        "seed": sample.seed,
        "n": sample.n_replicates,
        "site": str(site),
        "region": [str(p) for p in region],
        "contagion_index_estimate": estimate_contagion(scores, region, site),
        "stability_index_estimate": estimate_stability(scores, region, site),
        "pairwise_extremal_estimates": pairwise,
        "joint_extremal_estimate": joint.value,
    }
    _emit_json(doc, args.out)
    return 0


def cmd_mc_study(args: argparse.Namespace) -> int:
    spec = _load_spec_arg(args.spec)
    site = _parse_point(args.site)
    region = _parse_region(args.region, site)
    ci_result, si_result = monte_carlo_study(
        spec, region, site, args.reps, args.n, args.seed
    )
    if args.format == "csv":
        lines = _csv_meta_lines(spec, args.seed)
        lines.append("index,true_value,mean_estimate,mse,replications,sample_size,seed")
        for result in (ci_result, si_result):
            lines.append(",".join(str(v) for v in result.csv_row()))
        _emit_csv(lines, args.out)
    else:
        doc = _meta(spec, args.seed)
        doc["contagion"] = ci_result.to_json_dict()
        doc["stability"] = si_result.to_json_dict()
        _emit_json(doc, args.out)
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    dataset = ingest_stations(
        args.data, missing=args.missing, metadata_path=args.meta
    )
    doc = {
        "tool": "m4extremes",
        "version": __version__,
        "stations": [
            {"name": s.name, "x": s.x, "y": s.y} for s in dataset.stations
        ],
        "n": dataset.n,
        "years": list(dataset.years),
        "dropped_years": list(dataset.dropped_years),
    }
    _emit_json(doc, args.out)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    dataset = ingest_stations(
        args.data, missing=args.missing, metadata_path=args.meta
    )
    regions = [
        [name.strip() for name in region.split(",") if name.strip()]
        for region in args.region
    ]
    reports = [
        station_indices(dataset, args.condition, names) for names in regions
    ]
    if args.format == "csv":
        lines = [f"# m4extremes={__version__}"]
        lines.append("region,contagion_index_estimate,stability_index_estimate,n")
        for rep in reports:
            region_label = ";".join(rep.region)
            lines.append(
                f"{region_label},{rep.contagion!r},{rep.stability!r},{rep.n}"
            )
        _emit_csv(lines, args.out)
    else:
        doc = {
            "tool": "m4extremes",
            "version": __version__,
            "conditioning": args.condition,
            "reports": [rep.to_json_dict() for rep in reports],
        }
        _emit_json(doc, args.out)
    return 0


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="m4extremes",
        description="Contagion and stability indices for M4 max-stable random fields.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="write a built-in specification as JSON")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--out")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("validate", help="check a specification file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("exact", help="closed-form indices for a site and region")
    p.add_argument("--spec", required=True, help="spec file or preset name")
    p.add_argument("--site", required=True, help="x,y")
    p.add_argument("--region", required=True, help="'neighbors' or 'x,y;x,y;...'")
    p.add_argument("--given", help="conditioning region for region-to-region contagion")
    p.add_argument("--matrix", action="store_true",
                   help="include the 3x3 neighbor coefficient matrix")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="draw replicates of the field to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--locations", default="domain",
                   help="'domain' (default) or 'x,y;x,y;...'")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="rank-based indices from a sample CSV")
    p.add_argument("--sample", required=True)
    p.add_argument("--meta", help="metadata sidecar JSON")
    p.add_argument("--site", required=True)
    p.add_argument("--region", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("mc-study", help="Monte Carlo study of the estimators")
    p.add_argument("--spec", required=True)
    p.add_argument("--site", required=True)
    p.add_argument("--region", required=True)
    p.add_argument("--reps", required=True, type=int)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mc_study)

    p = sub.add_parser("ingest", help="parse and summarize a station CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--meta", help="station coordinate CSV (station,x,y)")
    p.add_argument("--missing", choices=("error", "drop-year"), default="error")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("report", help="station-to-region index estimates")
    p.add_argument("--data", required=True)
    p.add_argument("--meta")
    p.add_argument("--missing", choices=("error", "drop-year"), default="error")
    p.add_argument("--condition", required=True, help="conditioning station name")
    p.add_argument("--region", required=True, action="append",
                   help="comma-separated station names (repeatable)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/diagnostics
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except M4Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
