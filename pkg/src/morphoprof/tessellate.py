"""Tessellating hexagonal label masks and coverage-based selection.

The lattice is pointy-top with circumradius R and origin at pixel
(0, 0): hexagon (i, j) is centered at column sqrt(3)*R*(i + 0.5*(j % 2))
and row 1.5*R*j.  Every pixel center belongs to exactly one hexagon
(boundary ties go to the lexicographically smaller lattice index, hence
the smaller label), and the hexagons that own at least one pixel are
labeled densely from 1 in (j, i) lattice order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LabelMask


@dataclass(frozen=True)
class HexGridParams:
    width: int
    height: int
    circumradius: float
    min_coverage: float = 0.5

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("canvas dims must be positive")
        if not self.circumradius > 0:
            raise ValueError("circumradius must be > 0")
        if not 0.0 <= self.min_coverage <= 1.0:
            raise ValueError("min_coverage must be in [0, 1]")


def hex_metric(d_row: np.ndarray, d_col: np.ndarray, circumradius: float) -> np.ndarray:
    """Normalized containment metric for a pointy-top hexagon at the origin.

    <= 1 inside or on the hexagon, with 1 exactly on the boundary.
    """
    r = circumradius
    ax = np.abs(d_col)
    ay = np.abs(d_row)
    return np.maximum(ax / (math.sqrt(3.0) / 2.0 * r), (ax + math.sqrt(3.0) * ay) / (math.sqrt(3.0) * r))


def hex_tessellation(params: HexGridParams) -> LabelMask:
    """Labeled hexagonal partition of the canvas; every pixel gets a label."""
    r = params.circumradius
    height, width = params.height, params.width
    rows = np.arange(height, dtype=np.float64)[:, None, None]
    cols = np.arange(width, dtype=np.float64)[None, :, None]

    # 3x3 lattice neighborhood around each pixel's nearest (j, i) estimate;
    # the owning hexagon's center is always within one lattice step.
    j_base = np.rint(rows / (1.5 * r)).astype(np.int64)
    candidates_j = j_base + np.array([-1, 0, 1], dtype=np.int64).reshape(1, 1, 3)
    best_metric = np.full((height, width), np.inf)
    best_j = np.zeros((height, width), dtype=np.int64)
    best_i = np.zeros((height, width), dtype=np.int64)

    # Candidates are scanned in ascending (j, i); strict improvement keeps
    # the lowest lattice index on boundary ties.
    for dj in range(3):
        j_cand = candidates_j[:, :, dj]
        center_row = 1.5 * r * j_cand
        parity = 0.5 * (j_cand % 2)
        i_base = np.rint(cols[:, :, 0] / (math.sqrt(3.0) * r) - parity).astype(np.int64)
        for di in (-1, 0, 1):
            i_cand = i_base + di
            center_col = math.sqrt(3.0) * r * (i_cand + parity)
            metric = hex_metric(rows[:, :, 0] - center_row, cols[:, :, 0] - center_col, r)
            better = metric < best_metric
            tie = metric == best_metric
            lower = (j_cand < best_j) | ((j_cand == best_j) & (i_cand < best_i))
            take = better | (tie & lower)
            best_metric = np.where(take, metric, best_metric)
            best_j = np.where(take, j_cand, best_j)
            best_i = np.where(take, i_cand, best_i)

    keys = np.stack([best_j.ravel(), best_i.ravel()], axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    # np.unique sorts lexicographically, which is exactly (j, i) label order.
    labels = (inverse + 1).reshape(height, width)
    return LabelMask(labels.astype(np.int64))


def filter_by_coverage(
    hex_mask: LabelMask, foreground: LabelMask, min_coverage: float
) -> LabelMask:
    """Zero out hexagons whose fraction of foreground pixels is below the
    threshold; survivors keep their labels."""
    if hex_mask.labels.shape != foreground.labels.shape:
        raise ValueError(
            f"foreground dims {foreground.width}x{foreground.height} do not match "
            f"hexagon dims {hex_mask.width}x{hex_mask.height}"
        )
    labels = hex_mask.labels
    fg = foreground.labels > 0
    max_label = int(labels.max(initial=0))
    totals = np.bincount(labels.ravel(), minlength=max_label + 1)
    covered = np.bincount(labels.ravel(), weights=fg.ravel(), minlength=max_label + 1)
    keep = np.zeros(max_label + 1, dtype=bool)
    present = totals > 0
    keep[present] = covered[present] / totals[present] >= min_coverage
    keep[0] = False
    return LabelMask(np.where(keep[labels], labels, 0))
