"""Command-line entry point.

Subcommands: diff, recognize, eval, render, corpus (extract|build),
serve-mock. Exit codes: 0 success, 1 domain failure, 2 usage or
configuration error. Machine-readable JSON goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import backend as backend_mod
from . import corpus as corpus_mod
from .imagediff import DimensionMismatchError, compose_model_view, delta_view
from .metrics import bleu4, edit_score, exact_match
from .orchestrator import recognize, tokenize
from .raster import load_image, normalize, save_image
from .render import (
    FixtureRenderer,
    RenderStatus,
    ToolchainError,
    kind_by_name,
    render_pipeline,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _cmd_diff(args) -> int:
    gt = load_image(args.gt_image)
    rendered = load_image(args.rendered_image)
    dv = delta_view(gt, rendered)
    if args.out:
        save_image(compose_model_view(dv), args.out)
    summary = dv.stats()
    summary["op_counts"] = dv.script.op_counts()
    summary["op_blocks"] = dv.script.run_length_counts()
    _emit(summary)
    return EXIT_OK


def _load_backend(args):
    if args.mock:
        return backend_mod.MockBackend.from_file(args.mock)
    if args.backend:
        return backend_mod.HttpBackend(args.backend)
    raise SystemExit2("one of --backend URL or --mock FIXTURE is required")


class SystemExit2(Exception):
    """Usage/config error carrying a message for stderr."""


def _cmd_recognize(args) -> int:
    kind = kind_by_name(args.kind)
    gt = normalize(load_image(args.image), kind.spec)
    backend = _load_backend(args)
    renderer = None
    if args.render_fixture:
        manifest = json.loads(Path(args.render_fixture).read_text(encoding="utf-8"))
        renderer = FixtureRenderer.from_manifest(manifest)
    trace = recognize(gt, kind, backend, budget=args.budget, renderer=renderer)
    if args.trace_out:
        Path(args.trace_out).write_text(
            json.dumps(trace.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
    if args.emit_delta:
        delta_dir = Path(args.emit_delta)
        delta_dir.mkdir(parents=True, exist_ok=True)
        for i, dv in enumerate(trace.delta_views, start=1):
            save_image(compose_model_view(dv), delta_dir / f"delta_round_{i}.png")
    result = {
        "status": trace.status.value,
        "rounds": len(trace.rounds),
        "latex": trace.final_candidate.raw if trace.final_candidate else None,
    }
    _emit(result)
    if trace.status.value != "matched" and args.require_match:
        return EXIT_DOMAIN
    return EXIT_OK


def _cmd_eval(args) -> int:
    kind = kind_by_name(args.kind)
    rows = [
        json.loads(line)
        for line in Path(args.manifest).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    match_count = 0
    edit_sum = 0.0
    bleu_values = []
    failures = 0
    for row in rows:
        gt = normalize(load_image(row["gt_image"]), kind.spec)
        if "candidate_image" in row:
            rendered = normalize(load_image(row["candidate_image"]), kind.spec)
        else:
            outcome = render_pipeline(row["candidate_source"], kind)
            if outcome.status is not RenderStatus.OK:
                failures += 1
                continue
            rendered = outcome.image
        match_count += exact_match(gt, rendered)
        edit_sum += edit_score(gt, rendered)
        if "gt_source" in row and "candidate_source" in row:
            bleu_values.append(
                bleu4(tokenize(row["candidate_source"]), tokenize(row["gt_source"]))
            )
    scored = len(rows) - failures
    _emit(
        {
            "samples": len(rows),
            "render_failures": failures,
            "match_rate": match_count / scored if scored else 0.0,
            "mean_edit_score": edit_sum / scored if scored else 0.0,
            "mean_bleu4": sum(bleu_values) / len(bleu_values) if bleu_values else None,
        }
    )
    return EXIT_OK


def _cmd_render(args) -> int:
    kind = kind_by_name(args.kind)
    source = Path(args.source).read_text(encoding="utf-8") if args.source else args.text
    outcome = render_pipeline(source, kind)
    if outcome.status is not RenderStatus.OK:
        _emit({"status": outcome.status.value, "log_excerpt": outcome.log_excerpt})
        return EXIT_DOMAIN
    save_image(outcome.image, args.out)
    _emit({"status": "ok", "out": args.out})
    return EXIT_OK


def _cmd_corpus(args) -> int:
    kind = kind_by_name(args.kind)
    if args.corpus_cmd == "extract":
        text = Path(args.tex).read_text(encoding="utf-8", errors="replace")
        bodies = corpus_mod.extract_tabulars(text)
        _emit({"count": len(bodies), "bodies": bodies})
        return EXIT_OK
    records = corpus_mod.build_manifest(
        args.input_dirs, kind, args.output, image_dir=args.image_dir, workers=args.workers
    )
    _emit({"records": len(records), "manifest": args.output})
    return EXIT_OK


def _cmd_serve_mock(args) -> int:
    backend = backend_mod.MockBackend.from_file(args.fixture)
    print(f"serving mock backend from {args.fixture} on {args.host}:{args.port}", file=sys.stderr)
    backend_mod.serve(backend, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latte", description="LaTeX recognition pipeline tools"
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for any randomized extension")
    parser.add_argument(
        "--json",
        action="store_true",
        help="machine-readable output (already the default; kept for explicit scripting)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diff", help="delta-view between a ground-truth and a rendered image")
    p.add_argument("gt_image")
    p.add_argument("rendered_image")
    p.add_argument("--out", help="write the composed delta-view PNG here")
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("recognize", help="run the iterative recognition loop on one image")
    p.add_argument("--image", required=True)
    p.add_argument("--kind", choices=["formula", "table"], default="formula")
    p.add_argument("--backend", help="backend base URL (or LATTE_BACKEND_URL)")
    p.add_argument("--mock", help="mock fixture JSONL path")
    p.add_argument("--budget", type=int, default=4)
    p.add_argument("--trace-out", help="write the JSON iteration trace here")
    p.add_argument("--emit-delta", help="directory for per-round delta-view PNGs")
    p.add_argument(
        "--render-fixture",
        help="JSON map of source body -> PNG path, used instead of the TeX toolchain",
    )
    p.add_argument("--require-match", action="store_true", help="exit 1 unless matched")
    p.set_defaults(func=_cmd_recognize)

    p = sub.add_parser("eval", help="aggregate metrics over a JSONL manifest")
    p.add_argument("manifest")
    p.add_argument("--kind", choices=["formula", "table"], default="formula")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("render", help="render one source to a normalized PNG")
    p.add_argument("--kind", choices=["formula", "table"], default="formula")
    p.add_argument("--source", help="read the body from this file")
    p.add_argument("--text", help="body given inline")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("corpus", help="dataset extraction and manifest building")
    corpus_sub = p.add_subparsers(dest="corpus_cmd", required=True)
    pe = corpus_sub.add_parser("extract", help="list tabular environments in one .tex file")
    pe.add_argument("tex")
    pe.add_argument("--kind", choices=["formula", "table"], default="table")
    pb = corpus_sub.add_parser("build", help="extract, render, and write a JSONL manifest")
    pb.add_argument("input_dirs", nargs="+")
    pb.add_argument("--kind", choices=["formula", "table"], default="table")
    pb.add_argument("--output", required=True)
    pb.add_argument("--image-dir")
    pb.add_argument("--workers", type=int, help="render pool size (default: CPU count)")
    p.set_defaults(func=_cmd_corpus)

    p = sub.add_parser("serve-mock", help="serve a fixture-backed mock backend over HTTP")
    p.add_argument("fixture")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8041)
    p.set_defaults(func=_cmd_serve_mock)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "recognize" and not args.backend and not args.mock:
        args.backend = os.environ.get("LATTE_BACKEND_URL")
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ToolchainError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DimensionMismatchError, backend_mod.BackendError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
