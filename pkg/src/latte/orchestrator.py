"""Recognition loop: generate, render, compare, localize, refine, repeat.

Also owns the LaTeX-aware token model used for fault indices, refinement
prompts, and script reconstruction.
"""

from __future__ import annotations

import enum
import re
import string
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import backend as backend_mod
from .imagediff import DeltaView, compose_model_view, delta_view
from .metrics import exact_match
from .raster import PixelGrid
from .render import RenderKind, RenderOutcome, render_pipeline

SEPARATOR_TOKEN = "<s>"

_CONTROL_WORD = re.compile(r"\\[A-Za-z]+\Z")
_LETTERS = set(string.ascii_letters)


def tokenize(raw: str) -> tuple[str, ...]:
    """Lex LaTeX into tokens: control sequences (backslash + letters, or
    backslash + one non-letter), and single characters otherwise.
    Whitespace separates tokens but is not one.
    """
    tokens = []
    i, n = 0, len(raw)
    while i < n:
        ch = raw[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "\\" and i + 1 < n:
            if raw[i + 1] in _LETTERS:
                j = i + 1
                while j < n and raw[j] in _LETTERS:
                    j += 1
                tokens.append(raw[i:j])
                i = j
            else:
                tokens.append(raw[i : i + 2])
                i += 2
        else:
            tokens.append(ch)
            i += 1
    return tuple(tokens)


def detokenize(tokens: Sequence[str]) -> str:
    """Inverse of tokenize up to insignificant whitespace.

    A space is kept after a control word when the next token starts with
    a letter, so the control word does not absorb it on re-lexing.
    """
    parts = []
    for idx, tok in enumerate(tokens):
        parts.append(tok)
        if (
            _CONTROL_WORD.match(tok)
            and idx + 1 < len(tokens)
            and tokens[idx + 1][:1] in _LETTERS
        ):
            parts.append(" ")
    return "".join(parts)


@dataclass(frozen=True)
class LatexScript:
    raw: str
    tokens: tuple[str, ...]

    @classmethod
    def from_raw(cls, raw: str) -> "LatexScript":
        return cls(raw=raw, tokens=tokenize(raw))

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "LatexScript":
        toks = tuple(tokens)
        return cls(raw=detokenize(toks), tokens=toks)

    def __len__(self) -> int:
        return len(self.tokens)


class FaultSource(enum.Enum):
    BACKEND = "backend"
    GROUND_TRUTH_LABEL = "ground_truth_label"


@dataclass(frozen=True)
class FaultLocation:
    index: int
    source: FaultSource

    def validate(self, script: LatexScript) -> None:
        if not 0 <= self.index <= len(script.tokens):
            raise IndexError(
                f"fault index {self.index} out of range for {len(script.tokens)} tokens"
            )


def build_refine_prompt(script: LatexScript, location: FaultLocation) -> tuple[str, ...]:
    """Prompt layout: faulty suffix, separator, known-good prefix."""
    location.validate(script)
    l = location.index
    return script.tokens[l:] + (SEPARATOR_TOKEN,) + script.tokens[:l]


def reconstruct(
    script: LatexScript, location: FaultLocation, completion: Sequence[str]
) -> LatexScript:
    """Replace everything from the fault onward with the completion."""
    location.validate(script)
    return LatexScript.from_tokens(script.tokens[: location.index] + tuple(completion))


def first_divergence(incorrect: LatexScript, gt: LatexScript) -> FaultLocation:
    """Index of the first differing token; equals the common length when
    one sequence is a prefix of the other (or both are identical, meaning
    no fault)."""
    for idx, (a, b) in enumerate(zip(incorrect.tokens, gt.tokens)):
        if a != b:
            return FaultLocation(index=idx, source=FaultSource.GROUND_TRUTH_LABEL)
    return FaultLocation(
        index=min(len(incorrect.tokens), len(gt.tokens)),
        source=FaultSource.GROUND_TRUTH_LABEL,
    )


def make_training_pair(incorrect: LatexScript, gt: LatexScript) -> dict:
    """Supervision triple for the localization/refinement roles."""
    if incorrect.tokens == gt.tokens:
        raise ValueError("scripts are identical; nothing to refine")
    label = first_divergence(incorrect, gt)
    return {
        "prompt_tokens": build_refine_prompt(incorrect, label),
        "fault_label": label.index,
        "refinement_target": gt.tokens[label.index :],
    }


class TraceStatus(enum.Enum):
    MATCHED = "matched"
    BUDGET_EXHAUSTED = "budget_exhausted"
    BACKEND_ERROR = "backend_error"


@dataclass
class RoundRecord:
    round: int
    candidate: LatexScript
    outcome: RenderOutcome
    matched: bool
    delta_stats: dict | None = None
    fault: FaultLocation | None = None
    completion: tuple[str, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "candidate": {"raw": self.candidate.raw, "tokens": list(self.candidate.tokens)},
            "render": {"status": self.outcome.status.value, "log_excerpt": self.outcome.log_excerpt},
            "matched": self.matched,
            "delta": self.delta_stats,
            "fault": None
            if self.fault is None
            else {"index": self.fault.index, "source": self.fault.source.value},
            "completion_tokens": None if self.completion is None else list(self.completion),
        }


@dataclass
class IterationTrace:
    status: TraceStatus
    rounds: list[RoundRecord] = field(default_factory=list)
    error: str | None = None
    delta_views: list[DeltaView] = field(default_factory=list)

    @property
    def final_candidate(self) -> LatexScript | None:
        return self.rounds[-1].candidate if self.rounds else None

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "error": self.error,
            "rounds": [r.to_dict() for r in self.rounds],
        }


Renderer = Callable[[str, RenderKind], RenderOutcome]


def recognize(
    gt_image: PixelGrid,
    kind: RenderKind,
    backend: "backend_mod.Backend",
    budget: int = 4,
    renderer: Renderer | None = None,
) -> IterationTrace:
    """Run the full loop: one generation round, then refinement rounds
    until the render matches the ground truth pixel-exactly or the budget
    of ``budget`` total rounds is spent.

    ``gt_image`` must already be normalized to ``kind.spec``. Candidates
    that fail to render are refined against an all-white stand-in image.
    Backend failures are recorded in the trace, not raised.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1 round")
    render = renderer if renderer is not None else render_pipeline
    trace = IterationTrace(status=TraceStatus.BUDGET_EXHAUSTED)

    def rendered_or_blank(outcome: RenderOutcome) -> PixelGrid:
        if outcome.image is not None:
            return outcome.image
        return PixelGrid.white(kind.spec.target_height, kind.spec.target_width)

    try:
        candidate = LatexScript.from_raw(backend.generate(gt_image))
    except backend_mod.BackendError as exc:
        trace.status = TraceStatus.BACKEND_ERROR
        trace.error = str(exc)
        return trace
    outcome = render(candidate.raw, kind)
    matched = outcome.image is not None and exact_match(gt_image, outcome.image)
    trace.rounds.append(RoundRecord(round=1, candidate=candidate, outcome=outcome, matched=matched))
    if matched:
        trace.status = TraceStatus.MATCHED
        return trace

    for round_no in range(2, budget + 1):
        dv = delta_view(gt_image, rendered_or_blank(outcome))
        trace.delta_views.append(dv)
        view = compose_model_view(dv)
        try:
            fault = FaultLocation(
                index=backend.localize(view, list(candidate.tokens)),
                source=FaultSource.BACKEND,
            )
            fault.validate(candidate)
            prompt = build_refine_prompt(candidate, fault)
            completion = tuple(backend.refine(view, list(prompt)))
        except (backend_mod.BackendError, IndexError) as exc:
            trace.status = TraceStatus.BACKEND_ERROR
            trace.error = str(exc)
            return trace
        candidate = reconstruct(candidate, fault, completion)
        outcome = render(candidate.raw, kind)
        matched = outcome.image is not None and exact_match(gt_image, outcome.image)
        trace.rounds.append(
            RoundRecord(
                round=round_no,
                candidate=candidate,
                outcome=outcome,
                matched=matched,
                delta_stats=dv.stats(),
                fault=fault,
                completion=completion,
            )
        )
        if matched:
            trace.status = TraceStatus.MATCHED
            return trace
    return trace
