"""Iterative LaTeX recognition toolkit.

Library surface: raster grids and normalization, the pixel-column edit
distance with delta-view annotation, evaluation metrics, TeX render
automation, the model backend protocol (mock + HTTP), and the
generate/localize/refine orchestration loop.
"""

from .backend import (
    AttentionHead,
    Backend,
    BackendRequest,
    BackendResponse,
    HttpBackend,
    MockBackend,
    Role,
    fl_head_forward,
    image_key,
)
from .imagediff import (
    DeltaView,
    EditKind,
    EditOp,
    EditScript,
    Orientation,
    compose_model_view,
    delta_view,
    image_edit,
    show_diff,
    wagner_fischer_star,
)
from .metrics import EvalReport, bleu4, edit_score, evaluate, exact_match
from .orchestrator import (
    SEPARATOR_TOKEN,
    FaultLocation,
    FaultSource,
    IterationTrace,
    LatexScript,
    TraceStatus,
    build_refine_prompt,
    detokenize,
    first_divergence,
    make_training_pair,
    recognize,
    reconstruct,
    tokenize,
)
from .raster import (
    FORMULA_SPEC,
    TABLE_SPEC,
    NormalizationSpec,
    Pixel,
    PixelGrid,
    load_image,
    normalize,
    save_image,
    transpose,
)
from .render import (
    FORMULA,
    TABLE,
    FixtureRenderer,
    RenderKind,
    RenderOutcome,
    RenderStatus,
    ToolchainError,
    render_pipeline,
    wrap_source,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionHead",
    "Backend",
    "BackendRequest",
    "BackendResponse",
    "DeltaView",
    "EditKind",
    "EditOp",
    "EditScript",
    "EvalReport",
    "FaultLocation",
    "FaultSource",
    "FixtureRenderer",
    "FORMULA",
    "FORMULA_SPEC",
    "HttpBackend",
    "IterationTrace",
    "LatexScript",
    "MockBackend",
    "NormalizationSpec",
    "Orientation",
    "Pixel",
    "PixelGrid",
    "RenderKind",
    "RenderOutcome",
    "RenderStatus",
    "Role",
    "SEPARATOR_TOKEN",
    "TABLE",
    "TABLE_SPEC",
    "ToolchainError",
    "TraceStatus",
    "bleu4",
    "build_refine_prompt",
    "compose_model_view",
    "delta_view",
    "detokenize",
    "edit_score",
    "evaluate",
    "exact_match",
    "first_divergence",
    "fl_head_forward",
    "image_edit",
    "image_key",
    "load_image",
    "make_training_pair",
    "normalize",
    "recognize",
    "reconstruct",
    "render_pipeline",
    "save_image",
    "show_diff",
    "tokenize",
    "transpose",
    "wagner_fischer_star",
    "wrap_source",
]
