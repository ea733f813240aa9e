"""Column-sequence image edit distance and delta-view annotation.

An image is treated as a sequence of pixel columns. A banded
Levenshtein DP (with unit costs and exact column equality) finds the
cheapest way to transform the rendered image into the ground truth; the
backtracked operations drive per-column recoloring that marks edited
regions with light-red/light-blue backgrounds and single-image ink with
pure red/blue.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .raster import PixelGrid, transpose

LIGHT_RED = (255, 200, 200)
RED = (255, 0, 0)
LIGHT_BLUE = (200, 200, 255)
BLUE = (0, 0, 255)
DIVIDER_GRAY = (128, 128, 128)
DIVIDER_ROWS = 4


class DimensionMismatchError(ValueError):
    pass


class EditKind(enum.Enum):
    COPY = "Copy"
    SUBSTITUTE = "Substitute"
    DELETE = "Delete"
    INSERT = "Insert"


@dataclass(frozen=True)
class EditOp:
    """One column operation.

    The script transforms the rendered image into the ground truth:
    Delete drops a rendered-only column (carries rendered_index only),
    Insert adds a ground-truth-only column (carries gt_index only),
    Copy/Substitute pair up one column from each image.
    """

    kind: EditKind
    gt_index: int | None
    rendered_index: int | None

    def __post_init__(self):
        if self.kind in (EditKind.COPY, EditKind.SUBSTITUTE):
            ok = self.gt_index is not None and self.rendered_index is not None
        elif self.kind is EditKind.DELETE:
            ok = self.gt_index is None and self.rendered_index is not None
        else:
            ok = self.gt_index is not None and self.rendered_index is None
        if not ok:
            raise ValueError(f"{self.kind.value} op carries the wrong indices")


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...]
    distance: int

    def run_length_counts(self) -> dict[str, int]:
        """Number of maximal same-kind runs ("blocks") per non-copy kind."""
        counts = {k.value: 0 for k in (EditKind.SUBSTITUTE, EditKind.DELETE, EditKind.INSERT)}
        prev = None
        for op in self.ops:
            if op.kind is not EditKind.COPY and op.kind is not prev:
                counts[op.kind.value] += 1
            prev = op.kind
        return counts

    def op_counts(self) -> dict[str, int]:
        counts = {k.value: 0 for k in EditKind}
        for op in self.ops:
            counts[op.kind.value] += 1
        return counts


class Orientation(enum.Enum):
    COLUMN = "column"
    ROW = "row"


@dataclass(frozen=True)
class DeltaView:
    gt_annotated: PixelGrid
    rendered_annotated: PixelGrid
    orientation: Orientation
    distance: int
    edit_percentage: float
    script: EditScript

    def stats(self) -> dict:
        return {
            "distance": self.distance,
            "edit_percentage": self.edit_percentage,
            "orientation": self.orientation.value,
        }


def _intern_columns(gt: PixelGrid, rendered: PixelGrid) -> tuple[np.ndarray, np.ndarray]:
    """Map each pixel column to an integer id; equal columns share an id.

    Interning costs O(H*W) once so the O(W^2) DP compares scalars instead
    of H x 3 pixel vectors.
    """
    h = gt.height
    flat_g = np.ascontiguousarray(np.transpose(gt.array, (1, 0, 2))).reshape(gt.width, h * 3)
    flat_r = np.ascontiguousarray(np.transpose(rendered.array, (1, 0, 2))).reshape(
        rendered.width, h * 3
    )
    both = np.concatenate([flat_g, flat_r], axis=0)
    _, inverse = np.unique(both, axis=0, return_inverse=True)
    return inverse[: gt.width], inverse[gt.width :]


def _distance_table(gt_ids: np.ndarray, r_ids: np.ndarray) -> np.ndarray:
    """Full (W_gt+1) x (W_r+1) Levenshtein DP table, filled row-vectorized.

    D[i][j] = cost of transforming the first j rendered columns into the
    first i ground-truth columns. The within-row dependency (Delete chain)
    is resolved with a cumulative minimum instead of a scalar loop.
    """
    wg, wr = len(gt_ids), len(r_ids)
    dist = np.empty((wg + 1, wr + 1), dtype=np.int32)
    dist[0] = np.arange(wr + 1, dtype=np.int32)
    offsets = np.arange(wr + 1, dtype=np.int32)
    prev = dist[0]
    for i in range(1, wg + 1):
        sub = prev[:-1] + (gt_ids[i - 1] != r_ids)
        candidate = np.concatenate(([i], np.minimum(sub, prev[1:] + 1))).astype(np.int32)
        cur = np.minimum.accumulate(candidate - offsets) + offsets
        dist[i] = cur
        prev = cur
    return dist


def wagner_fischer_star(gt: PixelGrid, rendered: PixelGrid) -> EditScript:
    """Minimal column edit script turning ``rendered`` into ``gt``.

    Costs are unit insertions/deletions/substitutions with exact column
    pixel equality. Ties during backtracking prefer Insert over
    Substitute/Copy over Delete; Copy is emitted only for equal columns.
    """
    if gt.height != rendered.height:
        raise DimensionMismatchError(
            f"column comparison needs equal heights, got {gt.height} and {rendered.height}"
        )
    gt_ids, r_ids = _intern_columns(gt, rendered)
    dist = _distance_table(gt_ids, r_ids)

    ops: list[EditOp] = []
    i, j = len(gt_ids), len(r_ids)
    while i > 0 and j > 0:
        same = gt_ids[i - 1] == r_ids[j - 1]
        cost_sub = dist[i - 1][j - 1] + (0 if same else 1)
        cost_ins = dist[i - 1][j] + 1
        cost_del = dist[i][j - 1] + 1
        cost_min = min(cost_sub, cost_ins, cost_del)
        if cost_ins == cost_min:
            ops.append(EditOp(EditKind.INSERT, gt_index=i - 1, rendered_index=None))
            i -= 1
        elif cost_sub == cost_min:
            kind = EditKind.COPY if same else EditKind.SUBSTITUTE
            ops.append(EditOp(kind, gt_index=i - 1, rendered_index=j - 1))
            i -= 1
            j -= 1
        else:
            ops.append(EditOp(EditKind.DELETE, gt_index=None, rendered_index=j - 1))
            j -= 1
    while i > 0:
        ops.append(EditOp(EditKind.INSERT, gt_index=i - 1, rendered_index=None))
        i -= 1
    while j > 0:
        ops.append(EditOp(EditKind.DELETE, gt_index=None, rendered_index=j - 1))
        j -= 1
    ops.reverse()
    return EditScript(ops=tuple(ops), distance=int(dist[len(gt_ids)][len(r_ids)]))


def _column_masks(gt_col: np.ndarray, rendered_col: np.ndarray):
    gt_white = np.all(gt_col == 255, axis=-1)
    r_white = np.all(rendered_col == 255, axis=-1)
    differs = np.any(gt_col != rendered_col, axis=-1)
    return gt_white, r_white, differs


def show_diff(gt_col: np.ndarray, rendered_col: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Recolor one aligned column pair. Masks come from the ORIGINAL pixels:

    - ground-truth white pixels -> light red background
    - rendered white pixels -> light blue background
    - ground-truth ink missing from the rendered column -> red
    - rendered ink missing from the ground truth -> blue
    - ink present identically in both stays untouched (shown in black)
    """
    gt_col = np.asarray(gt_col, dtype=np.uint8)
    rendered_col = np.asarray(rendered_col, dtype=np.uint8)
    if gt_col.shape != rendered_col.shape:
        raise DimensionMismatchError(
            f"column shapes differ: {gt_col.shape} vs {rendered_col.shape}"
        )
    gt_white, r_white, differs = _column_masks(gt_col, rendered_col)
    out_gt = gt_col.copy()
    out_r = rendered_col.copy()
    out_gt[gt_white] = LIGHT_RED
    out_r[r_white] = LIGHT_BLUE
    out_gt[differs & r_white] = RED
    out_r[differs & gt_white] = BLUE
    return out_gt, out_r


def image_edit(gt: PixelGrid, rendered: PixelGrid) -> DeltaView:
    """Column-wise delta view: run the DP, then recolor per operation.

    Deleted rendered columns are diffed against an all-white column,
    inserted ground-truth columns likewise; copied columns pass through
    bit-identical.
    """
    script = wagner_fischer_star(gt, rendered)
    white_col = np.full((gt.height, 3), 255, dtype=np.uint8)
    out_gt = gt.array.copy()
    out_r = rendered.array.copy()
    for op in script.ops:
        if op.kind is EditKind.DELETE:
            out_r[:, op.rendered_index] = show_diff(white_col, out_r[:, op.rendered_index])[1]
        elif op.kind is EditKind.INSERT:
            out_gt[:, op.gt_index] = show_diff(out_gt[:, op.gt_index], white_col)[0]
        elif op.kind is EditKind.SUBSTITUTE:
            annotated = show_diff(out_gt[:, op.gt_index], out_r[:, op.rendered_index])
            out_gt[:, op.gt_index] = annotated[0]
            out_r[:, op.rendered_index] = annotated[1]
    return DeltaView(
        gt_annotated=PixelGrid(out_gt),
        rendered_annotated=PixelGrid(out_r),
        orientation=Orientation.COLUMN,
        distance=script.distance,
        edit_percentage=script.distance / gt.width,
        script=script,
    )


def delta_view(gt: PixelGrid, rendered: PixelGrid) -> DeltaView:
    """Delta view in the better of the two orientations.

    Computes the column-wise view and the row-wise view (annotate the
    transposed pair, transpose back) and keeps the one with the smaller
    edit percentage. Ties keep the column-wise view. Requires equal
    dimensions; normalize both images first.
    """
    if gt.height != rendered.height or gt.width != rendered.width:
        raise DimensionMismatchError(
            "both orientations need equal dimensions, got "
            f"{gt.height}x{gt.width} and {rendered.height}x{rendered.width}"
        )
    by_column = image_edit(gt, rendered)
    rowwise = image_edit(transpose(gt), transpose(rendered))
    by_row = DeltaView(
        gt_annotated=transpose(rowwise.gt_annotated),
        rendered_annotated=transpose(rowwise.rendered_annotated),
        orientation=Orientation.ROW,
        distance=rowwise.distance,
        edit_percentage=rowwise.distance / gt.height,
        script=rowwise.script,
    )
    if by_row.edit_percentage < by_column.edit_percentage:
        return by_row
    return by_column


def compose_model_view(dv: DeltaView) -> PixelGrid:
    """Pack the annotated pair into one image for model consumption.

    Ground truth on top, a 4-row mid-gray divider, rendered below; the
    narrower half is right-padded with white.
    """
    top = dv.gt_annotated.array
    bottom = dv.rendered_annotated.array
    width = max(top.shape[1], bottom.shape[1])
    height = top.shape[0] + DIVIDER_ROWS + bottom.shape[0]
    canvas = np.full((height, width, 3), 255, dtype=np.uint8)
    canvas[: top.shape[0], : top.shape[1]] = top
    canvas[top.shape[0] : top.shape[0] + DIVIDER_ROWS, :] = DIVIDER_GRAY
    canvas[top.shape[0] + DIVIDER_ROWS :, : bottom.shape[1]] = bottom
    return PixelGrid(canvas)
