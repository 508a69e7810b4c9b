"""Command-line front end: extract, tessellate, normalize, compare, list-features.

Exit codes: 0 success, 1 runtime failure (I/O, malformed files), 2 bad
flags or an invalid experiment (for example colocalization with a single
channel).  Diagnostics go to stderr; outputs are deterministic for
identical inputs and flags, regardless of --workers.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import engine, postprocess, raster_io, tessellate
from .coloc import ColocParams
from .core import ImagePlane, LabelMask
from .granularity import GranularityParams
from .radial import RadialParams
from .shape import ShapeParams
from .texture import TextureParams
from .engine import ExperimentSpec, SpecValidationError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morphoprof",
        description="Deterministic per-object feature extraction for image-based profiling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="measure objects and write one CSV per object set")
    ex.add_argument("--image", action="append", default=[], help="channel image (repeatable)")
    ex.add_argument("--channel-names", default="", help="comma-separated channel names")
    ex.add_argument("--mask", action="append", default=[], help="label mask (repeatable)")
    ex.add_argument("--mask-names", default="", help="comma-separated object set names")
    ex.add_argument(
        "--features",
        default=",".join(engine.FAMILIES),
        help="comma-separated families (default: all)",
    )
    ex.add_argument("--texture-distance", type=int, default=1)
    ex.add_argument("--texture-gray-levels", type=int, default=8)
    ex.add_argument("--zernike-order", type=int, default=9)
    ex.add_argument("--radial-bins", type=int, default=4)
    ex.add_argument("--manders-threshold", type=float, default=0.15)
    ex.add_argument("--granularity-length", type=int, default=16)
    ex.add_argument("--granularity-background-radius", type=int, default=10)
    ex.add_argument("--batch-size", type=int, default=256)
    ex.add_argument("--workers", type=int, default=1)
    ex.add_argument("--out", required=True, help="output stem or .csv path")

    tess = sub.add_parser("tessellate", help="write a hexagonal label mask")
    tess.add_argument("--width", type=int, required=True)
    tess.add_argument("--height", type=int, required=True)
    tess.add_argument("--radius", type=float, required=True, help="hexagon circumradius, pixels")
    tess.add_argument("--min-coverage", type=float, default=0.5)
    tess.add_argument("--tissue-mask", help="binary mask; hexagons below coverage are dropped")
    tess.add_argument("--out", required=True)

    norm = sub.add_parser("normalize", help="robust-standardize and filter a feature table")
    norm.add_argument("--in", dest="table_in", required=True)
    norm.add_argument("--out", required=True)
    norm.add_argument("--corr-threshold", type=float, default=0.9)
    norm.add_argument("--drop-missing-frac", type=float, default=0.05)

    cmp_p = sub.add_parser("compare", help="per-feature OLS R^2 between two tables")
    cmp_p.add_argument("--a", required=True)
    cmp_p.add_argument("--b", required=True)
    cmp_p.add_argument("--out", required=True)
    cmp_p.add_argument("--r2-threshold", type=float, default=0.9)

    lf = sub.add_parser("list-features", help="print the feature dictionary as CSV")
    lf.add_argument(
        "--features",
        default=",".join(engine.FAMILIES),
        help="comma-separated families (default: all)",
    )
    lf.add_argument("--texture-distance", type=int, default=1)
    lf.add_argument("--texture-gray-levels", type=int, default=8)
    lf.add_argument("--zernike-order", type=int, default=9)
    lf.add_argument("--radial-bins", type=int, default=4)
    lf.add_argument("--manders-threshold", type=float, default=0.15)
    lf.add_argument("--granularity-length", type=int, default=16)
    lf.add_argument("--granularity-background-radius", type=int, default=10)
    return parser


def _split_names(raw: str) -> list[str]:
    return [token for token in raw.split(",") if token]


def _family_params(args):
    return dict(
        shape_params=ShapeParams(zernike_max_order=args.zernike_order),
        texture_params=TextureParams(
            distance=args.texture_distance, gray_levels=args.texture_gray_levels
        ),
        granularity_params=GranularityParams(
            spectrum_length=args.granularity_length,
            background_radius=args.granularity_background_radius,
        ),
        radial_params=RadialParams(bins=args.radial_bins),
        coloc_params=ColocParams(manders_threshold_frac=args.manders_threshold),
    )


def _cmd_extract(args) -> int:
    channel_names = _split_names(args.channel_names)
    mask_names = _split_names(args.mask_names)
    if len(channel_names) != len(args.image):
        raise SpecValidationError(
            f"{len(args.image)} --image flags but {len(channel_names)} channel names"
        )
    if len(mask_names) != len(args.mask):
        raise SpecValidationError(
            f"{len(args.mask)} --mask flags but {len(mask_names)} mask names"
        )
    if not args.mask:
        raise SpecValidationError("at least one --mask is required")
    channels = tuple(
        (name, raster_io.load_image(path)) for name, path in zip(channel_names, args.image)
    )
    object_sets = tuple(
        (name, raster_io.load_mask(path)) for name, path in zip(mask_names, args.mask)
    )
    spec = ExperimentSpec(
        channels=channels,
        object_sets=object_sets,
        families=tuple(_split_names(args.features)),
        batch_size=args.batch_size,
        workers=args.workers,
        **_family_params(args),
    )
    tables = engine.run(spec)
    stem = args.out[:-4] if args.out.endswith(".csv") else args.out
    for table in tables:
        raster_io.write_table(table, Path(f"{stem}_{table.object_set}.csv"))
    return 0


def _cmd_tessellate(args) -> int:
    params = tessellate.HexGridParams(
        width=args.width,
        height=args.height,
        circumradius=args.radius,
        min_coverage=args.min_coverage,
    )
    mask = tessellate.hex_tessellation(params)
    if args.tissue_mask is not None:
        foreground = raster_io.load_mask(args.tissue_mask)
        mask = tessellate.filter_by_coverage(mask, foreground, params.min_coverage)
    raster_io.save_mask(mask, args.out, fmt="RAWU32")
    return 0


def _cmd_normalize(args) -> int:
    table = raster_io.read_table(args.table_in)
    params = postprocess.NormalizeParams(
        corr_threshold=args.corr_threshold, drop_missing_frac=args.drop_missing_frac
    )
    table = postprocess.robust_standardize(table, params)
    table = postprocess.correlation_filter(table, params.corr_threshold)
    raster_io.write_table(table, args.out)
    return 0


def _cmd_compare(args) -> int:
    table_a = raster_io.read_table(args.a)
    table_b = raster_io.read_table(args.b)
    report = postprocess.compare_tables(table_a, table_b, r2_threshold=args.r2_threshold)
    postprocess.write_report(report, args.out)
    print(report.summary_line)
    return 0


def _cmd_list_features(args) -> int:
    families = tuple(_split_names(args.features))
    placeholder = ImagePlane(np.zeros((1, 1)))
    spec = ExperimentSpec(
        channels=(("Chan1", placeholder), ("Chan2", placeholder)),
        object_sets=(("objects", LabelMask(np.zeros((1, 1), dtype=np.int64))),),
        families=families,
        **_family_params(args),
    )
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["name", "family", "input_kind", "params"])
    for row in engine.feature_catalog(spec):
        writer.writerow(row)
    return 0


_COMMANDS = {
    "extract": _cmd_extract,
    "tessellate": _cmd_tessellate,
    "normalize": _cmd_normalize,
    "compare": _cmd_compare,
    "list-features": _cmd_list_features,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit code 2 for usage errors
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (SpecValidationError, ValueError) as exc:
        if isinstance(exc, raster_io.FormatError):
            print(f"morphoprof: error: {exc}", file=sys.stderr)
            return 1
        print(f"morphoprof: invalid request: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"morphoprof: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
