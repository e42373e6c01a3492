"""One command-line entry point per converter."""

from __future__ import annotations

import argparse
import sys

from kbconvert.mitchell import DEFAULT_GRID_SIZE, convert_mitchell
from kbconvert.report import ConversionReport
from kbconvert.swow import convert_swow_raw
from kbconvert.wordnet import extract_wordnet


def _run(fn) -> int:
    try:
        fn()
        return 0
    except (ValueError, OSError, KeyError) as exc:
        print(f"kbconvert: error: {exc}", file=sys.stderr)
        return 1


def main_swow(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kbconvert-swow",
        description="Aggregate a raw word-association CSV into a strength TSV.",
    )
    parser.add_argument("--input", required=True, help="raw response CSV")
    parser.add_argument("--output", required=True, help="strength TSV to write")
    parser.add_argument("--report", help="write the conversion report JSON here")
    args = parser.parse_args(argv)

    def go():
        report = convert_swow_raw(args.input, args.output)
        if args.report:
            report.save(args.report)
        print(
            f"read {report.records_read} response slots, wrote {report.records_written}, "
            f"dropped {report.n_dropped}"
        )

    return _run(go)


def main_mitchell(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kbconvert-mitchell",
        description="Convert 60-noun fMRI .mat archives to canonical activation files.",
    )
    parser.add_argument("--input", required=True, nargs="+", help=".mat archive(s)")
    parser.add_argument("--output", required=True, help="output directory")
    parser.add_argument("--report", help="write the conversion report JSON here")
    parser.add_argument("--grid-size", default=DEFAULT_GRID_SIZE)
    args = parser.parse_args(argv)

    def go():
        combined = ConversionReport(source=", ".join(args.input))
        for mat in args.input:
            out_path, report = convert_mitchell(mat, args.output, grid_size=args.grid_size)
            combined.records_read += report.records_read
            combined.records_written += report.records_written
            for reason, count in report.records_dropped.items():
                combined.drop(reason, count)
            combined.output_digests.update(report.output_digests)
            print(f"{mat} -> {out_path}")
        if args.report:
            combined.save(args.report)
        print(
            f"read {combined.records_read} trials, wrote {combined.records_written}, "
            f"dropped {combined.n_dropped}"
        )

    return _run(go)


def main_wordnet(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kbconvert-wordnet",
        description="Extract synset edges, memberships, and word edges from WordNet 3.0.",
    )
    parser.add_argument("--input", required=True, help="WordNet database directory")
    parser.add_argument("--output", required=True, help="output directory")
    parser.add_argument("--report", help="write the conversion report JSON here")
    args = parser.parse_args(argv)

    def go():
        paths, report = extract_wordnet(args.input, args.output)
        if args.report:
            report.save(args.report)
        for name, path in paths.items():
            print(f"{name}: {path}")
        print(
            f"read {report.records_read} pointers, wrote {report.records_written}, "
            f"dropped {report.n_dropped}"
        )

    return _run(go)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main_swow())
