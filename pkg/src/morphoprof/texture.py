"""Haralick texture features from object-restricted co-occurrence matrices.

Intensities are quantized per object into equal-width bins between the
object's min and max, one symmetric GLCM is built for each of the four
standard directions at the configured distance, and the 13 classic
Haralick statistics are averaged over the directions that produced at
least one pixel pair.  Entropies use log base 2 with 0*log(0) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MISSING, ImagePlane, ObjectRegion

FEATURES = (
    "AngularSecondMoment",
    "Contrast",
    "Correlation",
    "Variance",
    "InverseDifferenceMoment",
    "SumAverage",
    "SumVariance",
    "SumEntropy",
    "Entropy",
    "DifferenceVariance",
    "DifferenceEntropy",
    "InfoMeas1",
    "InfoMeas2",
)


@dataclass(frozen=True)
class TextureParams:
    distance: int = 1
    gray_levels: int = 8

    def __post_init__(self):
        if self.distance < 1:
            raise ValueError("texture distance must be >= 1")
        if not 2 <= self.gray_levels <= 256:
            raise ValueError("gray_levels must be in [2, 256]")


def directions(distance: int) -> tuple[tuple[int, int], ...]:
    """Pair offsets (drow, dcol) for 0, 45, 90 and 135 degrees."""
    d = distance
    return ((0, d), (-d, d), (-d, 0), (-d, -d))


def quantize(region: ObjectRegion, plane: ImagePlane, gray_levels: int) -> np.ndarray:
    """Per-pixel gray level in {0..G-1} on the region's bbox; -1 off-object.

    Bins are equal-width between the object's min and max intensity; a
    constant object maps entirely to level 0.
    """
    return quantize_crop(region.local_mask, region.crop(plane.pixels), gray_levels)


def quantize_crop(local_mask: np.ndarray, crop: np.ndarray, gray_levels: int) -> np.ndarray:
    values = crop[local_mask]
    lo = float(values.min())
    hi = float(values.max())
    levels = np.full(local_mask.shape, -1, dtype=np.int32)
    if hi == lo:
        levels[local_mask] = 0
        return levels
    scaled = np.floor(gray_levels * (values - lo) / (hi - lo))
    levels[local_mask] = np.minimum(gray_levels - 1, scaled).astype(np.int32)
    return levels


def glcm(
    levels: np.ndarray,
    local_mask: np.ndarray,
    distance: int,
    direction: tuple[int, int],
    gray_levels: int | None = None,
) -> tuple[np.ndarray, bool]:
    """Symmetric normalized co-occurrence matrix for one direction.

    Counts pairs (p, p + offset) with both pixels in the object, adds the
    transpose, and normalizes to sum 1.  Returns (matrix, had_pairs);
    with no pairs the matrix is all-zero.  ``gray_levels`` defaults to
    one past the highest level present.
    """
    d = distance
    if direction not in ((0, d), (-d, d), (-d, 0), (-d, -d)):
        raise ValueError(f"direction {direction} invalid for distance {d}")
    if gray_levels is None:
        gray_levels = int(levels[local_mask].max()) + 1 if local_mask.any() else 1
    counts = _pair_counts(levels, local_mask, direction, gray_levels)
    total = counts.sum()
    if total == 0:
        return counts.astype(np.float64), False
    return counts.astype(np.float64) / float(total), True


def _pair_counts(levels, local_mask, offset, gray_levels) -> np.ndarray:
    dr, dc = offset
    h, w = local_mask.shape
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    counts = np.zeros((gray_levels, gray_levels), dtype=np.int64)
    if r0 >= r1 or c0 >= c1:
        return counts
    a_mask = local_mask[r0:r1, c0:c1]
    b_mask = local_mask[r0 + dr : r1 + dr, c0 + dc : c1 + dc]
    both = a_mask & b_mask
    a = levels[r0:r1, c0:c1][both]
    b = levels[r0 + dr : r1 + dr, c0 + dc : c1 + dc][both]
    np.add.at(counts, (a, b), 1)
    return counts + counts.T


def haralick_features(p: np.ndarray) -> dict[str, float]:
    """The 13 Haralick statistics of one normalized symmetric GLCM."""
    g = p.shape[0]
    idx = np.arange(g, dtype=np.float64)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float((idx * px).sum())
    mu_y = float((idx * py).sum())
    var_x = float(((idx - mu_x) ** 2 * px).sum())
    var_y = float(((idx - mu_y) ** 2 * py).sum())
    std_x = math.sqrt(var_x)
    std_y = math.sqrt(var_y)

    i_idx = idx[:, None]
    j_idx = idx[None, :]
    diff2 = (i_idx - j_idx) ** 2

    # Distributions of i+j (k = 0..2G-2) and |i-j| (k = 0..G-1).
    ij_sum = np.add.outer(np.arange(g), np.arange(g))
    ij_diff = np.abs(np.subtract.outer(np.arange(g), np.arange(g)))
    p_sum = np.bincount(ij_sum.ravel(), weights=p.ravel(), minlength=2 * g - 1)
    p_diff = np.bincount(ij_diff.ravel(), weights=p.ravel(), minlength=g)
    k_sum = np.arange(2 * g - 1, dtype=np.float64)
    k_diff = np.arange(g, dtype=np.float64)

    sum_average = float((k_sum * p_sum).sum())
    sum_variance = float(((k_sum - sum_average) ** 2 * p_sum).sum())
    diff_mean = float((k_diff * p_diff).sum())
    diff_variance = float(((k_diff - diff_mean) ** 2 * p_diff).sum())

    if std_x == 0.0 or std_y == 0.0:
        correlation = 0.0
    else:
        correlation = (float((i_idx * j_idx * p).sum()) - mu_x * mu_y) / (std_x * std_y)

    hxy = _entropy(p)
    marg = px[:, None] * py[None, :]
    nz = p > 0
    hxy1 = -float((p[nz] * np.log2(marg[nz])).sum())
    hxy2 = _entropy(marg)
    hx = _entropy(px)
    hy = _entropy(py)
    denom = max(hx, hy)
    info1 = 0.0 if denom == 0.0 else (hxy - hxy1) / denom
    info2 = math.sqrt(max(0.0, 1.0 - math.exp(-2.0 * (hxy2 - hxy))))

    return {
        "AngularSecondMoment": float((p * p).sum()),
        "Contrast": float((diff2 * p).sum()),
        "Correlation": correlation,
        "Variance": var_x,
        "InverseDifferenceMoment": float((p / (1.0 + diff2)).sum()),
        "SumAverage": sum_average,
        "SumVariance": sum_variance,
        "SumEntropy": _entropy(p_sum),
        "Entropy": hxy,
        "DifferenceVariance": diff_variance,
        "DifferenceEntropy": _entropy(p_diff),
        "InfoMeas1": info1,
        "InfoMeas2": info2,
    }


def _entropy(dist: np.ndarray) -> float:
    nz = dist[dist > 0]
    return -float((nz * np.log2(nz)).sum())


def measure_texture(
    region: ObjectRegion, plane: ImagePlane, params: TextureParams = TextureParams()
) -> dict[str, float]:
    """Direction-averaged Haralick features; all missing when no direction
    has a co-occurring pixel pair."""
    return texture_from_crop(region.local_mask, region.crop(plane.pixels), params)


def texture_from_crop(
    local_mask: np.ndarray, crop: np.ndarray, params: TextureParams
) -> dict[str, float]:
    levels = quantize_crop(local_mask, crop, params.gray_levels)
    per_direction = []
    for direction in directions(params.distance):
        counts = _pair_counts(levels, local_mask, direction, params.gray_levels)
        total = counts.sum()
        if total == 0:
            continue
        per_direction.append(haralick_features(counts.astype(np.float64) / float(total)))
    if not per_direction:
        return {name: MISSING for name in FEATURES}
    # fsum makes the average independent of direction enumeration order,
    # so 90-degree rotations reproduce it bit for bit.
    return {
        name: math.fsum(d[name] for d in per_direction) / len(per_direction)
        for name in FEATURES
    }
