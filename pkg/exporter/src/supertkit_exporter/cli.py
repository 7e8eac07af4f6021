import argparse
import logging
import sys

from .encode import DEFAULT_CHECKPOINT, ExportError, ExportJob, export
from .reader import ReaderError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="supertkit-export",
        description="Compute contextual embeddings for a corpus and write "
                    "the evaluator's embedding jsonl format",
    )
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--format", choices=("plain_dirs", "jsonl"),
                        default="plain_dirs")
    parser.add_argument("--model", default=DEFAULT_CHECKPOINT,
                        help="checkpoint name or local path")
    parser.add_argument("--out", required=True)
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-length", type=int, default=None,
                        help="override the encoder's sequence limit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    job = ExportJob(
        corpus_path=args.corpus,
        corpus_format=args.format,
        model_name_or_path=args.model,
        out_path=args.out,
        batch_size=args.batch,
        device=args.device,
        max_length=args.max_length,
    )
    try:
        count = export(job)
    except (ExportError, ReaderError, OSError) as exc:
        logging.getLogger("supertkit_exporter").error("%s", exc)
        return 2
    print(f"{count} records -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
