"""Command line: batch export and the /embed server."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import EmbedkitError
from .export import ExportJob, export
from .preprocess import TextPreprocessor
from .server import serve_embed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedkit", description="Export corpus embeddings or serve /embed."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export", help="encode a document file to disk")
    p_export.add_argument("--input", required=True, help="CSV or NDJSON documents")
    p_export.add_argument("--model", required=True, help="minilm | bert | roberta | hash")
    p_export.add_argument("--out-emb", required=True, help="output embedding file")
    p_export.add_argument("--out-catalog", required=True, help="output catalog NDJSON")
    p_export.add_argument("--batch-size", type=int, default=64)
    p_export.add_argument("--no-strip-html", action="store_true")
    p_export.add_argument("--no-lowercase", action="store_true")
    p_export.add_argument("--remove-stopwords", action="store_true")
    p_export.add_argument("--lemmatize", action="store_true")

    p_serve = sub.add_parser("serve", help="run the /embed HTTP server")
    p_serve.add_argument("--model", required=True)
    p_serve.add_argument("--port", type=int, default=8900)
    p_serve.add_argument("--host", default="127.0.0.1")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            job = ExportJob(
                input_path=args.input,
                model_name=args.model,
                out_embeddings=args.out_emb,
                out_catalog=args.out_catalog,
                batch_size=args.batch_size,
                preprocess=TextPreprocessor(
                    strip_html=not args.no_strip_html,
                    lowercase=not args.no_lowercase,
                    remove_stopwords=args.remove_stopwords,
                    lemmatize=args.lemmatize,
                ),
            )
            count, dim = export(job)
            print(json.dumps({"documents": count, "dim": dim, "model": args.model}))
            return 0
        serve_embed(args.model, port=args.port, host=args.host)
        return 0
    except EmbedkitError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
