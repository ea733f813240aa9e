"""Dataset construction: pull tabular environments out of .tex trees,
render them, and write a deterministic JSONL manifest."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .raster import save_image
from .render import RenderKind, RenderOutcome, RenderStatus, render_many

logger = logging.getLogger(__name__)

_BEGIN = "\\begin{tabular}"
_END = "\\end{tabular}"


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    kind: str
    latex: str
    image_path: str
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "latex": self.latex,
            "image_path": self.image_path,
            "provenance": self.provenance,
        }


def strip_comments(tex: str) -> str:
    """Drop everything from an unescaped % to end of line; \\% survives.

    A % is a comment only when preceded by an even number of backslashes
    (\\\\% is an escaped backslash followed by a comment).
    """
    return _strip_comments_indexed(tex)[0]


def _strip_comments_indexed(tex: str) -> tuple[str, list[int]]:
    """Comment-stripped text plus, per kept character, its original index."""
    out: list[str] = []
    index_map: list[int] = []
    i, n = 0, len(tex)
    while i < n:
        ch = tex[i]
        if ch == "\\" and i + 1 < n:
            out.append(ch)
            out.append(tex[i + 1])
            index_map.extend((i, i + 1))
            i += 2
            continue
        if ch == "%":
            while i < n and tex[i] != "\n":
                i += 1
            continue
        out.append(ch)
        index_map.append(i)
        i += 1
    return "".join(out), index_map


def extract_tabulars(tex: str) -> list[str]:
    """Outermost balanced tabular environments, comments removed first
    so a commented-out \\end{tabular} cannot terminate a span. Nested
    tabulars stay inside their parent. Unbalanced spans are skipped with
    a warning."""
    return [body for body, _ in extract_tabulars_with_spans(tex)]


def extract_tabulars_with_spans(tex: str) -> list[tuple[str, tuple[int, int]]]:
    """Like extract_tabulars, also reporting each span's byte range in
    the original (pre-stripping) text."""
    stripped, index_map = _strip_comments_indexed(tex)
    results: list[tuple[str, tuple[int, int]]] = []
    pos = 0
    while True:
        start = stripped.find(_BEGIN, pos)
        if start == -1:
            break
        depth = 0
        cursor = start
        end = -1
        while cursor < len(stripped):
            next_begin = stripped.find(_BEGIN, cursor)
            next_end = stripped.find(_END, cursor)
            if next_end == -1:
                break
            if next_begin != -1 and next_begin < next_end:
                depth += 1
                cursor = next_begin + len(_BEGIN)
            else:
                depth -= 1
                cursor = next_end + len(_END)
                if depth == 0:
                    end = cursor
                    break
        if end == -1:
            # Depth never returns to zero after this begin, so nothing
            # later in the file can be an outermost span either.
            logger.warning("unbalanced tabular environment at offset %d; span skipped", start)
            break
        body = stripped[start:end]
        orig_start = index_map[start]
        orig_end = index_map[end - 1] + 1
        results.append((body, (orig_start, orig_end)))
        pos = end
    return results


def record_id(latex: str) -> str:
    """Stable id: sha256 of the source text, truncated."""
    return hashlib.sha256(latex.encode("utf-8")).hexdigest()[:16]


def _iter_sources(
    input_dirs: Iterable[str | Path], kind: RenderKind
) -> Iterable[tuple[str, dict]]:
    for input_dir in sorted(str(d) for d in input_dirs):
        for tex_path in sorted(Path(input_dir).rglob("*.tex")):
            try:
                text = tex_path.read_text(encoding="utf-8", errors="replace")
            except OSError as exc:
                logger.warning("skipping unreadable %s: %s", tex_path, exc)
                continue
            if kind.kind == "table":
                for body, span in extract_tabulars_with_spans(text):
                    yield body, {"source": str(tex_path), "span": list(span)}
            else:
                body = strip_comments(text).strip()
                if body:
                    yield body, {"source": str(tex_path), "span": [0, len(text)]}


def build_manifest(
    input_dirs: Iterable[str | Path],
    kind: RenderKind,
    output: str | Path,
    image_dir: str | Path | None = None,
    renderer: Callable[[str, RenderKind], RenderOutcome] | None = None,
    workers: int | None = None,
) -> list[CorpusRecord]:
    """Extract, render, and normalize every source under ``input_dirs``;
    write a JSONL manifest ordered by record id. Sources that fail to
    render are excluded (and logged), so the manifest is self-consistent:
    re-rendering any record reproduces its stored image.

    The default renderer fans out on the render worker pool; an injected
    renderer runs serially.
    """
    output = Path(output)
    images = Path(image_dir) if image_dir is not None else output.parent / "images"

    records: dict[str, CorpusRecord] = {}
    pending: dict[str, tuple[str, dict]] = {}
    for body, provenance in _iter_sources(input_dirs, kind):
        rid = record_id(body)
        if rid not in pending:
            pending[rid] = (body, provenance)

    ordered_ids = sorted(pending)
    if renderer is None:
        outcomes = render_many([pending[rid][0] for rid in ordered_ids], kind, max_workers=workers)
    else:
        outcomes = [renderer(pending[rid][0], kind) for rid in ordered_ids]

    images.mkdir(parents=True, exist_ok=True)
    for rid, outcome in zip(ordered_ids, outcomes):
        body, provenance = pending[rid]
        if outcome.status is not RenderStatus.OK:
            logger.info(
                "excluding %s from %s: %s", rid, provenance["source"], outcome.status.value
            )
            continue
        image_path = images / f"{rid}.png"
        save_image(outcome.image, image_path)
        records[rid] = CorpusRecord(
            id=rid,
            kind=kind.kind,
            latex=body,
            image_path=str(image_path),
            provenance=provenance,
        )

    output.parent.mkdir(parents=True, exist_ok=True)
    with output.open("w", encoding="utf-8") as fh:
        for rid in sorted(records):
            fh.write(json.dumps(records[rid].to_dict(), sort_keys=True) + "\n")
    return [records[rid] for rid in sorted(records)]
