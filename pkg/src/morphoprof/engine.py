"""Measurement planner and deterministic, memory-bounded batch executor.

The engine expands an experiment into tasks over object-sets, channels
and channel pairs, then measures objects in ascending-label batches.
Determinism is structural: labels ascend, channels keep declaration
order, families keep a fixed canonical order, and every measurement is
a pure function of one object's cropped data, so the output tables are
byte-identical for any worker count or batch size.

Workers receive per-object bbox crops rather than whole images, which
bounds the peak working set by batch size and image size instead of the
total object count.
"""

from __future__ import annotations

import itertools
import re
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field

import numpy as np

from . import coloc, granularity, intensity, radial, shape, texture
from .core import FeatureTable, ImagePlane, LabelMask, ObjectRegion, extract_objects

FAMILIES = ("shape", "intensity", "texture", "granularity", "radial", "coloc")

FAMILY_TOKENS = {
    "shape": "Shape",
    "intensity": "Intensity",
    "texture": "Texture",
    "granularity": "Granularity",
    "radial": "RadialDistribution",
    "coloc": "Coloc",
}

#: Families measured from the mask alone / one channel / a channel pair.
TYPE1_FAMILIES = ("shape",)
TYPE2_FAMILIES = ("intensity", "texture", "granularity", "radial")
TYPE3_FAMILIES = ("coloc",)

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9]*$")


class SpecValidationError(ValueError):
    """An ExperimentSpec violates its invariants (bad names, dims, families)."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything the engine needs to featurize one experiment."""

    channels: tuple[tuple[str, ImagePlane], ...]
    object_sets: tuple[tuple[str, LabelMask], ...]
    families: tuple[str, ...] = FAMILIES
    shape_params: shape.ShapeParams = field(default_factory=shape.ShapeParams)
    texture_params: texture.TextureParams = field(default_factory=texture.TextureParams)
    granularity_params: granularity.GranularityParams = field(
        default_factory=granularity.GranularityParams
    )
    radial_params: radial.RadialParams = field(default_factory=radial.RadialParams)
    coloc_params: coloc.ColocParams = field(default_factory=coloc.ColocParams)
    batch_size: int = 256
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "object_sets", tuple(self.object_sets))
        families = tuple(self.families)
        unknown = [f for f in families if f not in FAMILIES]
        if unknown:
            raise SpecValidationError(f"unknown measurement families: {unknown}")
        # Canonical family order, independent of how the caller listed them.
        object.__setattr__(
            self, "families", tuple(f for f in FAMILIES if f in families)
        )
        self._validate()

    def _validate(self):
        names = [name for name, _ in self.channels] + [name for name, _ in self.object_sets]
        for name in names:
            if not _NAME_RE.match(name):
                raise SpecValidationError(
                    f"name {name!r} must match [A-Za-z][A-Za-z0-9]*"
                )
        channel_names = [name for name, _ in self.channels]
        if len(set(channel_names)) != len(channel_names):
            raise SpecValidationError("channel names must be unique")
        set_names = [name for name, _ in self.object_sets]
        if len(set(set_names)) != len(set_names):
            raise SpecValidationError("object set names must be unique")
        shapes = [plane.pixels.shape for _, plane in self.channels]
        shapes += [mask.labels.shape for _, mask in self.object_sets]
        if len(set(shapes)) > 1:
            raise SpecValidationError(f"planes/masks are not dimension-aligned: {shapes}")
        if self.batch_size < 1:
            raise SpecValidationError("batch_size must be >= 1")
        if self.workers < 1:
            raise SpecValidationError("workers must be >= 1")
        needs_channel = [f for f in self.families if f in TYPE2_FAMILIES + TYPE3_FAMILIES]
        if needs_channel and not self.channels:
            raise SpecValidationError(
                f"families {needs_channel} need at least one channel"
            )
        if "coloc" in self.families and len(self.channels) < 2:
            raise SpecValidationError("coloc needs at least two channels")

    @property
    def channel_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.channels)


@dataclass(frozen=True)
class Task:
    """One planned measurement: an object set, a family, and its channels."""

    object_set: str
    family: str
    channel: str | None = None
    channel_pair: tuple[str, str] | None = None


def channel_pairs(channel_names) -> list[tuple[str, str]]:
    """Unordered pairs in declaration order: (0,1), (0,2), (1,2), ..."""
    return list(itertools.combinations(channel_names, 2))


def plan(spec: ExperimentSpec) -> list[Task]:
    """Expand the experiment into its canonical nested task order."""
    tasks = []
    for set_name, _ in spec.object_sets:
        for family in spec.families:
            if family in TYPE1_FAMILIES:
                tasks.append(Task(set_name, family))
            elif family in TYPE2_FAMILIES:
                tasks.extend(
                    Task(set_name, family, channel=ch) for ch in spec.channel_names
                )
            else:
                tasks.extend(
                    Task(set_name, family, channel_pair=pair)
                    for pair in channel_pairs(spec.channel_names)
                )
    return tasks


def feature_name(
    object_set: str,
    family_token: str,
    feature: str,
    channels: tuple[str, ...] = (),
    params: str = "",
) -> str:
    """Column name grammar: ObjectSet_Family_Feature[_Chan[_Chan2]][_params]."""
    parts = [object_set, family_token, feature, *channels]
    if params:
        parts.append(params)
    return "_".join(parts)


def _family_columns(family: str, spec: ExperimentSpec) -> list[tuple[str, tuple[str, ...], str]]:
    """(feature, channels, param token) triples in canonical order."""
    if family == "shape":
        return [(key, (), "") for key in shape.feature_keys(spec.shape_params)]
    if family == "intensity":
        return [
            (key, (ch,), "")
            for ch in spec.channel_names
            for key in intensity.FEATURES
        ]
    if family == "texture":
        token = f"d{spec.texture_params.distance}_g{spec.texture_params.gray_levels}"
        return [
            (key, (ch,), token)
            for ch in spec.channel_names
            for key in texture.FEATURES
        ]
    if family == "granularity":
        length = spec.granularity_params.spectrum_length
        return [
            (str(i), (ch,), "")
            for ch in spec.channel_names
            for i in range(1, length + 1)
        ]
    if family == "radial":
        bins = spec.radial_params.bins
        return [
            (stat, (ch,), f"{b}of{bins}")
            for ch in spec.channel_names
            for stat in radial.STATS
            for b in range(1, bins + 1)
        ]
    if family == "coloc":
        return [
            (key, pair, "")
            for pair in channel_pairs(spec.channel_names)
            for key in coloc.FEATURES
        ]
    raise SpecValidationError(f"unknown family {family!r}")


def table_columns(spec: ExperimentSpec, object_set: str) -> list[str]:
    """Full canonical column list for one object set's table."""
    cols = []
    for family in spec.families:
        token = FAMILY_TOKENS[family]
        for feature, chans, params in _family_columns(family, spec):
            cols.append(feature_name(object_set, token, feature, chans, params))
    return cols


def _measure_object(local_mask, bbox, crops, spec: ExperimentSpec) -> np.ndarray:
    """All enabled features of one object, flattened in canonical column order."""
    row: list[float] = []
    for family in spec.families:
        if family == "shape":
            region = ObjectRegion(label=1, bbox=bbox, local_mask=local_mask)
            values = shape.measure_shape(region, spec.shape_params)
            row.extend(values[key] for key in shape.feature_keys(spec.shape_params))
        elif family == "intensity":
            for ch in spec.channel_names:
                values = intensity.intensity_from_crop(local_mask, crops[ch])
                row.extend(values[key] for key in intensity.FEATURES)
        elif family == "texture":
            for ch in spec.channel_names:
                values = texture.texture_from_crop(local_mask, crops[ch], spec.texture_params)
                row.extend(values[key] for key in texture.FEATURES)
        elif family == "granularity":
            for ch in spec.channel_names:
                values = granularity.granularity_from_crop(
                    local_mask, crops[ch], spec.granularity_params
                )
                row.extend(
                    values[str(i)]
                    for i in range(1, spec.granularity_params.spectrum_length + 1)
                )
        elif family == "radial":
            for ch in spec.channel_names:
                values = radial.radial_from_crop(local_mask, crops[ch], spec.radial_params)
                row.extend(values[key] for key in radial.feature_keys(spec.radial_params))
        elif family == "coloc":
            for ch_a, ch_b in channel_pairs(spec.channel_names):
                values = coloc.coloc_from_crops(
                    local_mask, crops[ch_a], crops[ch_b], spec.coloc_params
                )
                row.extend(values[key] for key in coloc.FEATURES)
    return np.asarray(row, dtype=np.float64)


def _measure_batch(payload):
    """Worker entry point: measure a batch of pre-cropped objects."""
    spec, objects = payload
    return [
        (label, _measure_object(local_mask, bbox, crops, spec))
        for label, bbox, local_mask, crops in objects
    ]


def _batch_objects(spec: ExperimentSpec, regions: list[ObjectRegion]):
    planes = {name: plane.pixels for name, plane in spec.channels}
    needs_channels = any(f != "shape" for f in spec.families)
    objects = []
    for region in regions:
        crops = {}
        if needs_channels:
            crops = {name: region.crop(arr).copy() for name, arr in planes.items()}
        objects.append((region.label, region.bbox, region.local_mask, crops))
    return objects


_TINY_PLANE = ImagePlane(np.zeros((1, 1)))
_TINY_MASK = LabelMask(np.zeros((1, 1), dtype=np.int64))


def _bare_spec(spec: ExperimentSpec) -> ExperimentSpec:
    """Copy of the experiment without image payloads, cheap to ship to workers."""
    return ExperimentSpec(
        channels=tuple((name, _TINY_PLANE) for name, _ in spec.channels),
        object_sets=(("placeholder", _TINY_MASK),),
        families=spec.families,
        shape_params=spec.shape_params,
        texture_params=spec.texture_params,
        granularity_params=spec.granularity_params,
        radial_params=spec.radial_params,
        coloc_params=spec.coloc_params,
        batch_size=spec.batch_size,
        workers=1,
    )


def run(spec: ExperimentSpec) -> list[FeatureTable]:
    """Measure every object set; one table per set, rows by ascending label.

    Output is identical (to the byte, after serialization) for any
    (batch_size, workers) combination.
    """
    tables = []
    worker_spec = _bare_spec(spec)
    for set_name, mask in spec.object_sets:
        regions = extract_objects(mask)
        columns = table_columns(spec, set_name)
        labels = np.asarray([r.label for r in regions], dtype=np.int64)
        row_of = {label: i for i, label in enumerate(labels.tolist())}
        values = np.empty((len(regions), len(columns)), dtype=np.float64)
        batches = [
            regions[i : i + spec.batch_size]
            for i in range(0, len(regions), spec.batch_size)
        ]
        if spec.workers == 1:
            for batch in batches:
                payload = (worker_spec, _batch_objects(spec, batch))
                for label, row in _measure_batch(payload):
                    values[row_of[label]] = row
        else:
            _run_parallel(spec, worker_spec, batches, row_of, values)
        tables.append(
            FeatureTable(
                object_set=set_name,
                columns=tuple(columns),
                labels=labels,
                values=values,
            )
        )
    return tables


def _run_parallel(spec, worker_spec, batches, row_of, values) -> None:
    # Keep a bounded number of batches in flight so memory tracks
    # batch_size, not the total object count.
    def drain(done):
        for future in done:
            for label, row in future.result():
                values[row_of[label]] = row

    pending = set()
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        for batch in batches:
            if len(pending) >= spec.workers + 1:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                drain(done)
            payload = (worker_spec, _batch_objects(spec, batch))
            pending.add(pool.submit(_measure_batch, payload))
        drain(pending)


def feature_catalog(spec: ExperimentSpec) -> list[tuple[str, str, str, str]]:
    """(name, family, input kind, params) rows describing every feature
    the enabled families produce, channel placeholders elided."""
    kinds = {**{f: "object" for f in TYPE1_FAMILIES},
             **{f: "object+channel" for f in TYPE2_FAMILIES},
             **{f: "object+channel_pair" for f in TYPE3_FAMILIES}}
    param_text = {
        "shape": f"zernike_max_order={spec.shape_params.zernike_max_order}",
        "intensity": "",
        "texture": (
            f"distance={spec.texture_params.distance};"
            f"gray_levels={spec.texture_params.gray_levels}"
        ),
        "granularity": (
            f"spectrum_length={spec.granularity_params.spectrum_length};"
            f"background_radius={spec.granularity_params.background_radius}"
        ),
        "radial": f"bins={spec.radial_params.bins}",
        "coloc": f"manders_threshold_frac={spec.coloc_params.manders_threshold_frac}",
    }
    rows = []
    for family in spec.families:
        token = FAMILY_TOKENS[family]
        if family == "shape":
            keys = shape.feature_keys(spec.shape_params)
            for key in keys:
                params = param_text["shape"] if key.startswith("Zernike") else ""
                rows.append((f"{token}_{key}", token, kinds[family], params))
        elif family == "intensity":
            rows.extend((f"{token}_{k}", token, kinds[family], "") for k in intensity.FEATURES)
        elif family == "texture":
            rows.extend(
                (f"{token}_{k}", token, kinds[family], param_text[family])
                for k in texture.FEATURES
            )
        elif family == "granularity":
            rows.extend(
                (f"{token}_{i}", token, kinds[family], param_text[family])
                for i in range(1, spec.granularity_params.spectrum_length + 1)
            )
        elif family == "radial":
            rows.extend(
                (f"{token}_{k}", token, kinds[family], param_text[family])
                for k in radial.feature_keys(spec.radial_params)
            )
        elif family == "coloc":
            rows.extend(
                (f"{token}_{k}", token, kinds[family], param_text[family])
                for k in coloc.FEATURES
            )
    return rows
