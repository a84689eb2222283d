"""Extraction entry point.

    gesturekit-extract --input <dir|video> --setting <1..4|stages.json> \
        --num-hands <1|2> --out <replay.jsonl> [--backend mediapipe|synthetic]

Exit codes: 0 success, 1 usage error, 2 per-file extraction errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import create_extractor
from .extract import ExtractionJob, parse_setting_arg, run_extraction

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gesturekit-extract", description=__doc__)
    parser.add_argument("--input", required=True, help="image directory or video file")
    parser.add_argument("--setting", default="1", help="augmentation setting id 1-4 or a JSON stage file")
    parser.add_argument("--num-hands", type=int, choices=[1, 2], default=1)
    parser.add_argument("--out", required=True, help="replay JSONL file to write")
    parser.add_argument(
        "--backend",
        choices=["mediapipe", "synthetic"],
        default="mediapipe",
        help="landmark model; 'synthetic' is a deterministic stub for pipeline tests",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        extractor = create_extractor(args.backend, args.num_hands)
        job = ExtractionJob(
            input_path=Path(args.input),
            setting=parse_setting_arg(args.setting),
            output_path=Path(args.out),
            num_hands=args.num_hands,
        )
        report = run_extraction(job, extractor)
    except (RuntimeError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR

    print(
        f"{report.samples} samples -> {report.lines} replay lines "
        f"({report.detections} with a hand) -> {args.out}"
    )
    for message in report.errors:
        print(f"error: {message}", file=sys.stderr)
    return 0 if report.ok else DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
