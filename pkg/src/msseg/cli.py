"""Command-line front end.

Exit codes: 0 success, 1 usage or parameter error, 2 input/format error,
3 pipeline error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import edge as edge_mod
from .errors import DimensionMismatchError, ImageFormatError, MsSegError
from .fcm import FcmParams, defuzzify, fcm_modified, unflatten
from .image import load_image, normalize_intensities, save_image
from .metrics import all_metrics
from .phantom import Lesion, PhantomSpec, make_phantom, standard_phantom_spec
from .pipeline import PipelineConfig, overlay, segment_lesions
from .preprocess import BrainMaskParams

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_PIPELINE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ config


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _section(cls, values: dict, overrides: dict):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    merged = {**values, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return cls(**merged)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _fcm_overrides(args) -> dict:
    return {
        "c": args.clusters, "m": args.m, "alpha": args.alpha, "beta": args.beta,
        "neighborhood_radius": args.radius, "max_iter": args.max_iter,
        "tol": args.tol, "seed": args.seed, "init": args.init,
        "bias_rule": args.bias_rule,
    }


def _materialize_edge(params: edge_mod.EdgeParams) -> edge_mod.EdgeParams:
    return dataclasses.replace(params, kernel_radius=params.radius)


def build_config(args) -> PipelineConfig:
    """Merge defaults, the optional JSON config file and command-line flags."""
    raw = _read_json(args.config) if args.config else {}
    top = {k: v for k, v in raw.items() if k not in ("brain", "edge", "fcm")}
    brain = _section(BrainMaskParams, raw.get("brain", {}), {"threshold": args.brain_threshold})
    edge = _section(edge_mod.EdgeParams, raw.get("edge", {}),
                    {"sigma": args.sigma, "low": args.low, "high": args.high})
    fcm = _section(FcmParams, raw.get("fcm", {}), _fcm_overrides(args))
    top_over = {"edge_gate": args.edge_gate, "overlap_ratio": args.overlap_ratio,
                "min_lesion_px": args.min_lesion_px, "brain_mask_path": args.mask}
    known = {f.name for f in dataclasses.fields(PipelineConfig)} - {"brain", "edge", "fcm"}
    if set(top) - known:
        raise UsageError(f"unknown config keys: {sorted(set(top) - known)}")
    merged = {**top, **{k: v for k, v in top_over.items() if v is not None}}
    try:
        return PipelineConfig(brain=brain, edge=_materialize_edge(edge), fcm=fcm, **merged)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _load(path: str) -> np.ndarray:
    try:
        return load_image(path)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except ImageFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _dump(obj, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _label_image(labels: np.ndarray, c: int) -> np.ndarray:
    """Background (-1) maps to 0, cluster k to (k+1)/c."""
    return (labels + 1) / c


# ---------------------------------------------------------------- commands


def cmd_segment(args) -> int:
    config = build_config(args)
    image = _load(args.input)
    brain = None
    if args.mask:
        brain = _load(args.mask) > 0.5
    truth = _load(args.truth) > 0.5 if args.truth else None
    if brain is not None and brain.shape != image.shape:
        raise InputError("mask and input dimensions differ")
    if truth is not None and truth.shape != image.shape:
        raise InputError("truth and input dimensions differ")

    t0 = time.perf_counter()
    result = segment_lesions(image, config, brain_mask=brain)
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = {
        "lesion_mask": "lesion_mask.pgm",
        "labels": "labels.pgm",
        "bias": "bias.pgm",
        "edges": "edges.pgm",
        "overlay": "overlay.pgm",
    }
    paths = {k: os.path.join(args.out_dir, v) for k, v in outputs.items()}
    save_image(result.lesion_mask, paths["lesion_mask"])
    save_image(_label_image(result.label_map, config.fcm.c), paths["labels"])
    save_image(normalize_intensities(result.bias_field), paths["bias"])
    save_image(result.edge_map, paths["edges"])
    save_image(overlay(normalize_intensities(image), result.lesion_mask), paths["overlay"])
    paths["report"] = os.path.join(args.out_dir, "report.json")

    report = {
        "input": args.input,
        "config": dataclasses.asdict(config),
        "centroids": [float(v) for v in result.centroids],
        "iterations": result.iterations,
        "final_objective": result.final_objective,
        "outputs": paths,
        "wall_clock_ms": round((time.perf_counter() - t0) * 1000.0, 3),
    }
    if truth is not None:
        report["metrics"] = all_metrics(result.lesion_mask, truth)
    _dump(report, paths["report"])
    return EXIT_OK


def cmd_edges(args) -> int:
    image = _load(args.input)
    try:
        params = _materialize_edge(edge_mod.EdgeParams(
            sigma=args.sigma, low=args.low, high=args.high, zc_threshold=args.zc_threshold))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.method == "canny":
        edges = edge_mod.canny(image, params)
    elif args.method == "marr-hildreth":
        edges = edge_mod.marr_hildreth(image, params)
    else:
        field = edge_mod.sobel(image) if args.method == "sobel" else edge_mod.prewitt(image)
        edges = edge_mod.gradient_threshold(field, params.high)
    parent = os.path.dirname(args.out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    save_image(edges, args.out)
    return EXIT_OK


def cmd_fcm(args) -> int:
    fcm = _section(FcmParams, {}, _fcm_overrides(args))
    image = _load(args.input)
    mask = _load(args.mask) > 0.5 if args.mask else np.ones(image.shape, dtype=bool)
    if mask.shape != image.shape:
        raise InputError("mask and input dimensions differ")
    state = fcm_modified(image, mask, fcm)
    os.makedirs(args.out_dir, exist_ok=True)
    files = []
    for i, row in enumerate(state.U):
        path = os.path.join(args.out_dir, f"membership_{i}.pgm")
        save_image(unflatten(row, mask), path)
        files.append(path)
    labels = unflatten(defuzzify(state.U), mask, fill=-1)
    save_image(_label_image(labels, fcm.c), os.path.join(args.out_dir, "labels.pgm"))
    _dump({
        "params": dataclasses.asdict(fcm),
        "centroids": [float(v) for v in state.V],
        "iterations": state.iterations_run,
        "converged": state.converged,
        "final_objective": state.J_history[-1],
        "membership_maps": files,
    }, os.path.join(args.out_dir, "centroids.json"))
    return EXIT_OK


def phantom_spec_from_json(raw: dict) -> PhantomSpec:
    raw = dict(raw)
    try:
        if "lesions" in raw:
            raw["lesions"] = tuple(Lesion(**les) for les in raw["lesions"])
        if "tissue_levels" in raw:
            raw["tissue_levels"] = tuple(raw["tissue_levels"])
        if "bias_terms" in raw:
            raw["bias_terms"] = tuple(tuple(t) for t in raw["bias_terms"])
        return PhantomSpec(**raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid phantom spec: {exc}") from None


def cmd_phantom(args) -> int:
    if args.spec:
        spec = phantom_spec_from_json(_read_json(args.spec))
    else:
        spec = standard_phantom_spec(seed=args.seed)
    try:
        image, truth, bias = make_phantom(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    os.makedirs(args.out_dir, exist_ok=True)
    save_image(image, os.path.join(args.out_dir, "image.pgm"))
    save_image(truth, os.path.join(args.out_dir, "truth.pgm"))
    save_image(normalize_intensities(bias), os.path.join(args.out_dir, "bias.pgm"))
    _dump({"spec": dataclasses.asdict(spec),
           "bias_min": float(bias.min()), "bias_max": float(bias.max())},
          os.path.join(args.out_dir, "phantom.json"))
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = _load(args.pred) > 0.5
    truth = _load(args.truth) > 0.5
    try:
        metrics = all_metrics(pred, truth)
    except DimensionMismatchError as exc:
        raise InputError(str(exc)) from None
    json.dump(metrics, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_fcm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--clusters", type=int, help="number of clusters c (default 3)")
    p.add_argument("--m", type=float, help="fuzzifier m > 1 (default 2)")
    p.add_argument("--alpha", type=float, help="neighbourhood weight (default 1)")
    p.add_argument("--beta", type=float, help="bias regularization weight (default 1)")
    p.add_argument("--radius", type=int, help="neighbourhood radius (default 1)")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=["quantile", "random-pixels"])
    p.add_argument("--bias-rule", choices=["minimizer", "pointwise", "scaled-mean"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msseg", description="MS lesion segmentation on 2-D slices")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="run the full lesion pipeline")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", help="external brain mask (PGM/PNG)")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--truth", help="ground-truth lesion mask for metrics")
    p.add_argument("--sigma", type=float)
    p.add_argument("--low", type=float)
    p.add_argument("--high", type=float)
    p.add_argument("--brain-threshold", type=float)
    p.add_argument("--edge-gate", choices=["off", "boundary-overlap"])
    p.add_argument("--overlap-ratio", type=float)
    p.add_argument("--min-lesion-px", type=int)
    _add_fcm_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("edges", help="run one edge detector")
    p.add_argument("--input", required=True)
    p.add_argument("--method", required=True,
                   choices=["canny", "sobel", "prewitt", "marr-hildreth"])
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--low", type=float, default=0.1)
    p.add_argument("--high", type=float, default=0.3)
    p.add_argument("--zc-threshold", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("fcm", help="cluster an image with the modified FCM")
    p.add_argument("--input", required=True)
    p.add_argument("--mask")
    p.add_argument("--out-dir", required=True)
    _add_fcm_flags(p)
    p.set_defaults(func=cmd_fcm)

    p = sub.add_parser("phantom", help="render a synthetic phantom")
    p.add_argument("--spec", help="PhantomSpec JSON; the standard phantom if omitted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("eval", help="overlap metrics between two masks")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"msseg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"msseg: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MsSegError as exc:
        print(f"msseg: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
