"""summarize: batch CHQ -> summary JSONL for the faqmatch engine."""

from __future__ import annotations

import argparse
import logging
import sys

from .summarize import LEAD_MODEL, AdapterError, summarize_file


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="summarize", description=__doc__)
    parser.add_argument("--in", dest="in_path", required=True, help="input JSONL with id/chq fields")
    parser.add_argument("--out", dest="out_path", required=True, help="output summary JSONL")
    parser.add_argument(
        "--model",
        default=LEAD_MODEL,
        help=f"seq2seq checkpoint name, or {LEAD_MODEL!r} for the extractive baseline",
    )
    parser.add_argument("--max-len", type=int, default=32, help="summary length cap in words")
    parser.add_argument("--beams", type=int, default=1, help="beam count (1 = greedy)")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        written = summarize_file(
            args.in_path,
            args.out_path,
            model_name=args.model,
            max_len=args.max_len,
            beams=args.beams,
        )
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"records={written} model={args.model} out={args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
