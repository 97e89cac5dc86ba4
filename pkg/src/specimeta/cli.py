"""``specimeta`` command line: ingest, graph, validate, export, query, serve, generate."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import ark as arks
from .errors import SpecimetaError
from .export import build_bundle
from .graph import format_binding, owl_export, parse_pattern, parse_serialized, query, serialize
from .ingest import parse_record_table, render_rejects
from .pipeline import (
    DEFAULT_BATCH_COLUMN,
    DEFAULT_ID_COLUMN,
    atomic_write,
    default_rules_dir,
    issue_counts,
    load_rules_dir,
    render_issues,
    run_pipeline,
)
from .service import DEFAULT_ADDR, DEFAULT_CITATION, SpecimetaService, serve
from .terms import DEFAULT_REGISTRY, EntityClass, Term
from .validate import (
    DEFAULT_LABEL_FIELDS,
    DEFAULT_PASS_THRESHOLD,
    DEFAULT_REQUIRED,
    DEFAULT_SIM_THRESHOLD,
    ReportRow,
    completeness,
    render_report_csv,
    validate_label,
)

log = logging.getLogger("specimeta")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


def _fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in (0, 1], got {value}")
    return value


def _rate(text: str) -> float:
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1), got {value}")
    return value


def _naan(text: str) -> str:
    if len(text) != 5 or not text.isdigit():
        raise argparse.ArgumentTypeError(f"NAAN must be 5 digits, got {text!r}")
    return text


def _terms(text: str) -> list[Term]:
    try:
        return [DEFAULT_REGISTRY.check_term(Term.parse(t.strip())) for t in text.split(",") if t.strip()]
    except SpecimetaError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _split_assignment(text: str) -> tuple[str | None, str]:
    name, sep, value = text.partition("=")
    if sep and name and "/" not in name and "\\" not in name:
        return name, value
    return None, text


def read_config(path: str | Path) -> dict[str, str]:
    """``key=value`` lines; blank lines and ``#`` comments ignored."""
    out: dict[str, str] = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SpecimetaError(f"{path}:{number}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _citation(args: argparse.Namespace) -> str:
    if getattr(args, "citation_file", None):
        return Path(args.citation_file).read_text(encoding="utf-8")
    return args.citation_text


def _root_ark(text: str) -> arks.ArkId:
    """Accept ``ark:/...`` or the resolver IRI, with or without angle brackets."""
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        text = text[1:-1]
    return arks.from_iri(text) if text.startswith(arks.RESOLVER) else arks.parse(text)


def _load_graph(path: str):
    return parse_serialized(Path(path).read_bytes())


# -- subcommands -------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    path = Path(args.input)
    delivery = parse_record_table(path.read_bytes(), args.id_column, args.source_name or path.stem)
    if args.rejects:
        atomic_write(args.rejects, render_rejects(delivery.rejected))
    summary = {
        "source": delivery.source_name,
        "records": len(delivery.records),
        "fields": sum(len(r.fields) for r in delivery.records),
        "blankFields": sum(len(r.blank_fields) for r in delivery.records),
        "rejectedRows": len(delivery.rejected),
    }
    print(json.dumps(summary))
    for r in delivery.rejected:
        log.warning("%s row %d rejected: %s", path, r.row, r.reason)
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    rules = load_rules_dir(args.rules)
    inputs: dict[str, bytes] = {}
    for spec in args.input:
        source, path = _split_assignment(spec)
        source = source or Path(path).stem
        if source in inputs:
            raise SpecimetaError(f"source {source!r} given twice")
        inputs[source] = Path(path).read_bytes()
    id_columns: dict[str, str] = {}
    default_id = DEFAULT_ID_COLUMN
    for spec in args.id_column or ():
        source, column = _split_assignment(spec)
        if source is None:
            default_id = column
        else:
            id_columns[source] = column
    result = run_pipeline(
        inputs,
        rules,
        naan=args.naan,
        id_columns=id_columns,
        default_id_column=default_id,
        batch_column=args.batch_column,
        rights_text=args.rights_text,
        license_iri=args.license_iri,
    )
    atomic_write(args.out, serialize(result.graph))
    if args.owl:
        atomic_write(args.owl, owl_export(result.graph))
    if args.issues:
        atomic_write(args.issues, render_issues(result.issues))
    if args.rejects:
        rows = [r for rejected in result.rejected.values() for r in rejected]
        atomic_write(args.rejects, render_rejects(rows))
    for source, rejected in result.rejected.items():
        for r in rejected:
            log.warning("%s row %d rejected: %s", source, r.row, r.reason)
    log.info("%d statements, %d entities, %d issues", len(result.graph), len(result.graph.entities()), result.issue_count)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    graph = _load_graph(args.graph)
    counts = issue_counts(Path(args.issues).read_bytes()) if args.issues else {}
    labels: dict[str, str] = {}
    if args.labels:
        text = Path(args.labels).read_text(encoding="utf-8-sig")
        for row in csv.DictReader(io.StringIO(text, newline="")):
            if "ark" in row and row["ark"]:
                a = arks.parse(row["ark"].strip())
            else:
                a = arks.mint(args.naan, EntityClass.COLLECTION_EVENT, row["sourceKey"].strip())
            labels[str(a)] = row["text"]

    required = args.required or list(DEFAULT_REQUIRED[EntityClass.COLLECTION_EVENT])
    rows: list[ReportRow] = []
    failures = 0
    for a in graph.entities(EntityClass.COLLECTION_EVENT):
        node = graph.entity(a)
        quality = completeness(node, required)
        validation = None
        if str(a) in labels:
            try:
                validation = validate_label(labels[str(a)], node, args.fields, args.sim_threshold, args.pass_threshold)
            except SpecimetaError as exc:
                log.warning("%s: %s", a, exc)
                failures += 1
            else:
                failures += not validation.passed
        rows.append(ReportRow(a, validation, quality, counts.get(str(a), 0)))
    missing = set(labels) - {str(r.ark) for r in rows}
    for m in sorted(missing):
        log.warning("label for %s has no CollectionEvent in the graph", m)

    report = render_report_csv(rows)
    if args.report:
        atomic_write(args.report, report)
    else:
        sys.stdout.write(report.decode("utf-8"))
    if args.json:
        atomic_write(args.json, json.dumps([r.to_dict() for r in rows], indent=2).encode("utf-8"))
    if args.figure:
        from .plots import save_report_figure

        save_report_figure(rows, args.figure, pass_threshold=args.pass_threshold)
    log.info("%d entities checked, %d labels failed", len(rows), failures)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    graph = _load_graph(args.graph)
    bundle = build_bundle(graph, _root_ark(args.root), _citation(args))
    atomic_write(args.out, bundle.zip_bytes())
    log.info("wrote %s (%d entries)", args.out, len(bundle.entries))
    return EXIT_OK


def cmd_query(args: argparse.Namespace) -> int:
    graph = _load_graph(args.graph)
    patterns = [parse_pattern(p, graph.registry) for p in args.pattern]
    select = [s.lstrip("?") for s in args.select.split(",")] if args.select else None
    for binding in query(graph, patterns, select):
        print(format_binding(binding, graph.registry))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    service = SpecimetaService(_load_graph(args.graph), _citation(args))
    serve(service, args.addr)
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    from .fixtures import CorpusSpec, generate

    corpus = generate(CorpusSpec(args.records, args.seed, missing_field_rate=args.missing_rate, ocr_noise_rate=args.noise_rate))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, data in corpus.files().items():
        atomic_write(out / name, data)
    log.info("wrote %d files to %s", len(corpus.files()), out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="specimeta", description="Specimen-image metadata pipeline.")
    parser.add_argument("--config", help="key=value file supplying flag defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    env_naan = os.environ.get("SPECIMETA_NAAN", arks.DEFAULT_NAAN)
    subs: dict[str, argparse.ArgumentParser] = {}

    p = sub.add_parser("ingest", help="parse one CSV delivery and report rejected rows")
    p.add_argument("--input", required=True)
    p.add_argument("--id-column", default=DEFAULT_ID_COLUMN)
    p.add_argument("--source-name")
    p.add_argument("--rejects", help="write rejected rows (rowNumber,reason) here")
    p.set_defaults(func=cmd_ingest)
    subs["ingest"] = p

    p = sub.add_parser("graph", help="crosswalk deliveries into the canonical graph")
    p.add_argument("--input", action="append", required=True, metavar="[SOURCE=]PATH",
                   help="delivery CSV; SOURCE defaults to the file stem and selects rules/SOURCE.csv")
    p.add_argument("--rules", default=str(default_rules_dir()), help="directory of rule CSVs")
    p.add_argument("--naan", type=_naan, default=env_naan)
    p.add_argument("--id-column", action="append", metavar="[SOURCE=]COLUMN")
    p.add_argument("--batch-column", default=DEFAULT_BATCH_COLUMN)
    p.add_argument("--rights-text")
    p.add_argument("--license-iri")
    p.add_argument("--out", required=True)
    p.add_argument("--owl", help="also write the OWL export here")
    p.add_argument("--issues", help="write crosswalk issues CSV here")
    p.add_argument("--rejects", help="write rejected rows CSV here")
    p.set_defaults(func=cmd_graph)
    subs["graph"] = p

    p = sub.add_parser("validate", help="check OCR labels and completeness")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", help="CSV with columns sourceKey|ark,text")
    p.add_argument("--naan", type=_naan, default=env_naan)
    p.add_argument("--fields", type=_terms, default=list(DEFAULT_LABEL_FIELDS))
    p.add_argument("--required", type=_terms)
    p.add_argument("--sim-threshold", type=_fraction, default=DEFAULT_SIM_THRESHOLD)
    p.add_argument("--pass-threshold", type=_fraction, default=DEFAULT_PASS_THRESHOLD)
    p.add_argument("--issues", help="issues CSV written by 'graph --issues'")
    p.add_argument("--report", help="CSV report path (default: stdout)")
    p.add_argument("--json", help="also write the report as JSON")
    p.add_argument("--figure", help="render score/completeness histograms to this image file")
    p.set_defaults(func=cmd_validate)
    subs["validate"] = p

    p = sub.add_parser("export", help="build a zip bundle for one ARK")
    p.add_argument("--graph", required=True)
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--citation-text", default=DEFAULT_CITATION)
    p.add_argument("--citation-file")
    p.set_defaults(func=cmd_export)
    subs["export"] = p

    p = sub.add_parser("query", help="run a basic graph pattern query")
    p.add_argument("--graph", required=True)
    p.add_argument("--pattern", action="append", required=True, help='e.g. ?s dwc:genus "Carassius"')
    p.add_argument("--select", help="comma-separated variables to project")
    p.set_defaults(func=cmd_query)
    subs["query"] = p

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--graph", required=True)
    p.add_argument("--addr", default=os.environ.get("SPECIMETA_ADDR", DEFAULT_ADDR))
    p.add_argument("--citation-text", default=DEFAULT_CITATION)
    p.add_argument("--citation-file")
    p.set_defaults(func=cmd_serve)
    subs["serve"] = p

    p = sub.add_parser("generate", help="write a synthetic corpus")
    p.add_argument("--records", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--missing-rate", type=_rate, default=0.0)
    p.add_argument("--noise-rate", type=_rate, default=0.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)
    subs["generate"] = p
    return parser, subs


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    try:
        if known.config:
            command = next((a for a in rest if a in subs), None)
            if command is None:
                parser.error("--config needs a subcommand")
            _apply_config(parser, subs[command], read_config(known.config))
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (SpecimetaError, OSError) as exc:
        print(f"specimeta: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="specimeta: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except SpecimetaError as exc:
        print(f"specimeta: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"specimeta: {exc}", file=sys.stderr)
        return EXIT_DATA


def _apply_config(parser: argparse.ArgumentParser, target: argparse.ArgumentParser, config: dict[str, str]) -> None:
    """Install config values as defaults, run through each option's ``type``."""
    actions = {a.dest: a for a in target._actions}
    unknown = sorted(set(config) - set(actions))
    if unknown:
        parser.error(f"unknown config keys: {', '.join(unknown)}")
    for dest, raw in config.items():
        action = actions[dest]
        try:
            value = action.type(raw) if callable(action.type) else raw
        except (argparse.ArgumentTypeError, ValueError) as exc:
            parser.error(f"config key {dest}: {exc}")
        if isinstance(action, argparse._AppendAction):
            value = [value]
        target.set_defaults(**{dest: value})
        action.required = False


if __name__ == "__main__":
    sys.exit(main())
