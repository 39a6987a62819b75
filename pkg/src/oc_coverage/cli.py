"""Command-line entry point: ``occov <stage> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__, pipeline
from .config import ConfigInvalid, build_config
from .dumps import DumpLayoutError, UnreadableDumpFile
from .iris_ingest import IngestError
from .miur import MappingError
from .reporting import OutputUnwritable

EXIT_OK, EXIT_CONFIG, EXIT_STAGE_INPUT, EXIT_DATA = 0, 1, 2, 3

NEEDS = {
    "convert": ("iris_dir", "mapping"),
    "analyze": (),
    "map-meta": ("meta_dump",),
    "map-index": ("index_dump",),
    "report": (),
    "run-all": ("iris_dir", "mapping", "meta_dump", "index_dump"),
}

HELP = {
    "convert": "ingest the IRIS tables and write the normalized record file",
    "analyze": "extract, validate and type-filter PIDs; write the PID summary",
    "map-meta": "match PIDs against the OpenCitations Meta dump",
    "map-index": "collect citations from the OpenCitations Index dump",
    "report": "write coverage tables, sub-datasets and the HTML report",
    "run-all": "run every stage in order",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file (see oc_coverage.config)")
    common.add_argument("--iris-dir", dest="iris_dir", help="directory holding the seven IRIS export CSVs")
    common.add_argument("--mapping", help="raw_type,miur_type mapping CSV")
    common.add_argument("--meta-dump", dest="meta_dump", help="OpenCitations Meta dump (dir, csv, zip or tar)")
    common.add_argument("--index-dump", dest="index_dump", help="OpenCitations Index dump (dir, csv, zip or tar)")
    common.add_argument("--out", help="output directory for intermediates and reports")
    common.add_argument("--year-cutoff", dest="year_cutoff", type=int, help="last publication year analysed (default 2024)")
    common.add_argument("--shards", type=int, help="worker processes for dump scans (default 1)")
    common.add_argument("--emit-citation-detail", dest="emit_citation_detail", action="store_true", default=None,
                        help="also write citations_detail.csv.gz")
    common.add_argument("--force", action="store_true", default=None, help="run even if intermediates look stale")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="occov",
        description="Measure how much of an IRIS export is covered by OpenCitations Meta and Index.",
        epilog="Every option can also be set through an OCCOV_<NAME> environment variable, e.g. OCCOV_META_DUMP.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in NEEDS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    log = logging.getLogger("occov")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "verbose")}
    try:
        cfg = build_config(flags)
        cfg.validate(NEEDS[args.command])
        if args.command == "run-all":
            pipeline.run_all(cfg)
        else:
            pipeline.STAGE_FUNCS[args.command](cfg)
    except ConfigInvalid as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except pipeline.StageError as exc:
        log.error("%s", exc)
        return EXIT_STAGE_INPUT
    except (IngestError, MappingError, DumpLayoutError, UnreadableDumpFile, OutputUnwritable) as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
