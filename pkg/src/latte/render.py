"""LaTeX source to normalized PixelGrid: wrap, compile, rasterize, pad.

The compiler and rasterizer are external binaries resolved from
LATTE_TEX_BIN / LATTE_RASTER_BIN (defaults: pdflatex, pdftoppm). Each job
runs in its own scratch directory with non-interactive flags and a wall
clock cap, so a bad source yields a compile_error/timeout value instead
of wedging a batch.
"""

from __future__ import annotations

import enum
import os
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .raster import (
    FORMULA_SPEC,
    NormalizationSpec,
    PixelGrid,
    TABLE_SPEC,
    load_image,
    normalize,
)

TEX_BIN_ENV = "LATTE_TEX_BIN"
RASTER_BIN_ENV = "LATTE_RASTER_BIN"
DEFAULT_TEX_BIN = "pdflatex"
DEFAULT_RASTER_BIN = "pdftoppm"
DEFAULT_TIMEOUT_S = 20.0
LOG_EXCERPT_LINES = 20


class ToolchainError(RuntimeError):
    """The TeX compiler or PDF rasterizer is not available (configuration
    problem, distinct from a source that fails to compile)."""


class RenderStatus(enum.Enum):
    OK = "ok"
    COMPILE_ERROR = "compile_error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class RenderKind:
    kind: str  # "formula" | "table"
    spec: NormalizationSpec


FORMULA = RenderKind(kind="formula", spec=FORMULA_SPEC)
TABLE = RenderKind(kind="table", spec=TABLE_SPEC)

_KINDS = {"formula": FORMULA, "table": TABLE}


def kind_by_name(name: str) -> RenderKind:
    try:
        return _KINDS[name]
    except KeyError:
        raise ValueError(f"unknown render kind {name!r}; expected formula or table") from None


@dataclass(frozen=True)
class RenderOutcome:
    status: RenderStatus
    image: PixelGrid | None
    log_excerpt: str

    def __post_init__(self):
        if (self.status is RenderStatus.OK) != (self.image is not None):
            raise ValueError("status ok iff image present")


@dataclass(frozen=True)
class Toolchain:
    tex_bin: str
    raster_bin: str


def probe_toolchain(env: dict | None = None) -> Toolchain:
    """Resolve the compiler and rasterizer, failing fast with an
    actionable message when either is missing."""
    env = dict(os.environ if env is None else env)
    tex = env.get(TEX_BIN_ENV, DEFAULT_TEX_BIN)
    raster = env.get(RASTER_BIN_ENV, DEFAULT_RASTER_BIN)
    missing = [name for name in (tex, raster) if shutil.which(name) is None]
    if missing:
        raise ToolchainError(
            "missing executables: "
            + ", ".join(missing)
            + f" (set {TEX_BIN_ENV} / {RASTER_BIN_ENV} or install them on PATH)"
        )
    return Toolchain(tex_bin=tex, raster_bin=raster)


def toolchain_available() -> bool:
    try:
        probe_toolchain()
        return True
    except ToolchainError:
        return False


_PREAMBLE = "\n".join(
    [
        r"\documentclass[border=0pt]{standalone}",
        r"\usepackage{amsmath}",
        r"\usepackage{amssymb}",
        r"\usepackage{array}",
        r"\usepackage{booktabs}",
        r"\usepackage{multirow}",
        r"\usepackage{graphicx}",
        r"\usepackage{xcolor}",
        r"\pagestyle{empty}",
    ]
)


def wrap_source(kind: RenderKind, body: str) -> str:
    """Embed a formula or table body in a compilable standalone document.

    The standalone class crops to the content, so normalized geometry is
    governed by the body's ink, not page margins. Deterministic for
    identical inputs.
    """
    if not body.strip():
        raise ValueError("body must be non-empty")
    if kind.kind == "formula":
        content = "$\\displaystyle " + body + "$"
    else:
        content = body
    return _PREAMBLE + "\n\\begin{document}\n" + content + "\n\\end{document}\n"


def _tail(text: str, lines: int = LOG_EXCERPT_LINES) -> str:
    return "\n".join(text.splitlines()[-lines:])


def render_pipeline(
    source: str,
    kind: RenderKind,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    toolchain: Toolchain | None = None,
) -> RenderOutcome:
    """Compile ``source`` (a formula/table body) and return the normalized
    raster, or a compile_error/timeout outcome carrying the log tail."""
    tc = toolchain if toolchain is not None else probe_toolchain()
    document = wrap_source(kind, source)
    with tempfile.TemporaryDirectory(prefix="latte-render-") as scratch:
        scratch_path = Path(scratch)
        tex_file = scratch_path / "job.tex"
        tex_file.write_text(document, encoding="utf-8")
        try:
            compile_proc = subprocess.run(
                [tc.tex_bin, "-interaction=nonstopmode", "-halt-on-error", "job.tex"],
                cwd=scratch,
                capture_output=True,
                text=True,
                timeout=timeout_s,
            )
        except subprocess.TimeoutExpired:
            return RenderOutcome(RenderStatus.TIMEOUT, None, f"compiler exceeded {timeout_s}s")
        pdf_file = scratch_path / "job.pdf"
        if compile_proc.returncode != 0 or not pdf_file.exists():
            log_file = scratch_path / "job.log"
            log = log_file.read_text(errors="replace") if log_file.exists() else compile_proc.stdout
            return RenderOutcome(RenderStatus.COMPILE_ERROR, None, _tail(log))
        try:
            raster_proc = subprocess.run(
                [
                    tc.raster_bin,
                    "-png",
                    "-r",
                    str(kind.spec.dpi),
                    "-singlefile",
                    "job.pdf",
                    "page",
                ],
                cwd=scratch,
                capture_output=True,
                text=True,
                timeout=timeout_s,
            )
        except subprocess.TimeoutExpired:
            return RenderOutcome(RenderStatus.TIMEOUT, None, f"rasterizer exceeded {timeout_s}s")
        png_file = scratch_path / "page.png"
        if raster_proc.returncode != 0 or not png_file.exists():
            return RenderOutcome(
                RenderStatus.COMPILE_ERROR, None, _tail(raster_proc.stderr or raster_proc.stdout)
            )
        image = normalize(load_image(png_file), kind.spec)
        return RenderOutcome(RenderStatus.OK, image, "")


def render_many(
    sources: Sequence[str],
    kind: RenderKind,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    max_workers: int | None = None,
) -> list[RenderOutcome]:
    """Render a batch on a bounded worker pool (default: CPU count).
    Jobs are isolated subprocesses, so threads are the right pool type."""
    tc = probe_toolchain()
    workers = max_workers or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(lambda src: render_pipeline(src, kind, timeout_s=timeout_s, toolchain=tc), sources)
        )


class FixtureRenderer:
    """Renderer substitute mapping exact source bodies to pre-rendered
    images; unknown sources come back as compile errors. Lets the
    recognition loop run where no TeX toolchain exists."""

    def __init__(self, mapping: dict[str, PixelGrid]):
        self._mapping = dict(mapping)

    @classmethod
    def from_manifest(cls, manifest: dict[str, str | Path]) -> "FixtureRenderer":
        """``manifest`` maps source body -> PNG path."""
        return cls({src: load_image(path) for src, path in manifest.items()})

    def __call__(self, source: str, kind: RenderKind) -> RenderOutcome:
        image = self._mapping.get(source)
        if image is None:
            return RenderOutcome(RenderStatus.COMPILE_ERROR, None, "no fixture for source")
        return RenderOutcome(RenderStatus.OK, normalize(image, kind.spec), "")
