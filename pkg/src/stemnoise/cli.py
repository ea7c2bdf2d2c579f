"""``stemnoise`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 I/O or format error, 3 degenerate input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

import numpy as np

from . import __version__
from .ar_core import PIPELINE_EPSILON
from .distortions import DistortionSpec
from .errors import (
    DecodeError,
    DegenerateInputError,
    DimensionError,
    ManifestFormatError,
    UndefinedCorrelationError,
)
from .evaluation import compute_features, evaluate_dataset, parse_manifest
from .features import energy_histogram, render_snem, threshold_segment
from .imageio import atomic_write, check_gray_extension, load_image, write_gray
from .pipeline import PipelineConfig, analyze

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DEGENERATE = 3

log = logging.getLogger("stemnoise")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_pipeline_flags(p):
    g = p.add_argument_group("pipeline")
    g.add_argument("--acf-mode", choices=("excluded", "full"), default="excluded",
                   help="lag-1 autocorrelation: drop the secondary-diagonal product (default) or keep it")
    g.add_argument("--epsilon", type=float, default=PIPELINE_EPSILON,
                   help=f"degenerate-block threshold relative to R(0) (default {PIPELINE_EPSILON})")
    g.add_argument("--window-weights", choices=("uniform", "gaussian"), default="uniform")
    g.add_argument("--c", type=float, default=1.0, help="normalisation stabiliser (default 1)")


def build_parser():
    parser = _Parser(prog="stemnoise", description="Stem noise energy features for image quality.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("snem", help="write the stem noise energy map as a grayscale image")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    _add_pipeline_flags(p)

    p = sub.add_parser("features", help="print energy and AR statistics as JSON")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    _add_pipeline_flags(p)

    p = sub.add_parser("hist", help="export the normalised energy histogram as CSV")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--bins", type=_positive_int, default=64)
    p.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"))
    _add_pipeline_flags(p)

    p = sub.add_parser("segment", help="multi-level Otsu segmentation of the energy map")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_pipeline_flags(p)

    p = sub.add_parser("distort", help="synthesise a degraded image")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--kind", choices=("awgn", "blur", "blockify"), required=True)
    p.add_argument("--severity", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="SROCC of every feature against DMOS, per subset")
    p.add_argument("--manifest", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_pipeline_flags(p)

    p = sub.add_parser("footprint", help="export (mean, variance) energy points as CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_pipeline_flags(p)
    return parser


def _config(args) -> PipelineConfig:
    try:
        return PipelineConfig.from_options(args.acf_mode, args.epsilon, args.window_weights, args.c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _validate(args):
    """Check flag values before any file is read or written."""
    if args.command in ("snem", "segment", "distort"):
        try:
            check_gray_extension(args.output)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.command == "segment" and args.k < 2:
        raise UsageError("--k must be at least 2")
    if args.command == "hist" and args.range is not None and not args.range[0] < args.range[1]:
        raise UsageError("--range needs LO < HI")
    if args.command == "distort":
        kind = {"blur": "gaussian_blur"}.get(args.kind, args.kind)
        try:
            return DistortionSpec(kind, args.severity, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if hasattr(args, "acf_mode"):
        return _config(args)
    return None


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _cmd_snem(args, config):
    result = analyze(load_image(args.input), config)
    write_gray(render_snem(result.fit.energy), args.output)


def _cmd_features(args, config):
    result = analyze(load_image(args.input), config)
    text = json.dumps(result.as_dict(), indent=2) + "\n"
    if args.output:
        atomic_write(args.output, text)
    else:
        sys.stdout.write(text)


def _cmd_hist(args, config):
    result = analyze(load_image(args.input), config)
    hist = energy_histogram(result.fit.energy, args.bins, args.range)
    rows = [(repr(lo), repr(hi), repr(h)) for lo, hi, h in hist.rows()]
    atomic_write(args.output, _csv_text(("bin_lo", "bin_hi", "height"), rows))


def _cmd_segment(args, config):
    result = analyze(load_image(args.input), config)
    labels = threshold_segment(result.fit.energy, args.k)
    write_gray(labels.to_gray(), args.output)
    log.info("thresholds: %s", ", ".join(repr(float(t)) for t in labels.thresholds))


def _cmd_distort(args, spec):
    out = spec.apply(load_image(args.input))
    write_gray(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8), args.output)


def _cmd_eval(args, config):
    manifest = parse_manifest(args.manifest)
    report = evaluate_dataset(manifest, config, workers=args.workers)
    atomic_write(args.output, report.to_json())
    sys.stdout.write(report.to_text())


def _cmd_footprint(args, config):
    manifest = parse_manifest(args.manifest)
    feats = compute_features(manifest, config, workers=args.workers)
    rows = [
        (e.label, e.subset, repr(f["mean_energy"]), repr(f["var_energy"]), repr(f["mean_abs_energy"]))
        for e, f in zip(manifest.entries, feats)
    ]
    atomic_write(args.output, _csv_text(("path", "subset", "mean", "variance", "mean_abs"), rows))


COMMANDS = {
    "snem": _cmd_snem,
    "features": _cmd_features,
    "hist": _cmd_hist,
    "segment": _cmd_segment,
    "distort": _cmd_distort,
    "eval": _cmd_eval,
    "footprint": _cmd_footprint,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("stemnoise: a subcommand is required")
        prepared = _validate(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="stemnoise: %(message)s",
    )
    try:
        COMMANDS[args.command](args, prepared)
    except (DimensionError, DegenerateInputError, UndefinedCorrelationError) as exc:
        print(f"stemnoise: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DecodeError, ManifestFormatError, OSError) as exc:
        print(f"stemnoise: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
