"""Command-line interface.

Subcommands: ``run`` (full pipeline on a manifest or synthetic dataset),
``metrics`` (score two label files), ``gen-synthetic`` (write a synthetic
dataset to disk), ``bench`` (solver scaling sweep).  Exit codes: 0 on
success, 2 on validation errors, 3 on numerical failures; errors print one
machine-parsable JSON line to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .data import generate_synthetic, load_dataset, save_dataset, _load_labels
from .errors import NumericalError, ValidationError
from .metrics import clustering_scores
from .pipeline import PRESETS, PipelineConfig, run_pipeline, solver_scale_bench


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        _emit_error(exc)
        return 2
    except NumericalError as exc:
        _emit_error(exc)
        return 3


def _emit_error(exc: Exception):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvtc", description="Scalable multi-view clustering pipeline."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the full clustering pipeline")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="path to a dataset manifest JSON")
    src.add_argument(
        "--synthetic",
        help="inline synthetic spec, e.g. n=500,c=5,v=3,dims=20:30:25,noise=0.1,seed=7",
    )
    run_p.add_argument("--anchors", type=int, default=None, help="anchor count M (default min(1000, N))")
    run_p.add_argument("--clusters", type=int, default=None, help="cluster count C")
    run_p.add_argument("--embed-dim", type=int, default=None, help="embedding dimension K (default C)")
    run_p.add_argument("--lambda", dest="lam", type=float, default=None, help="projection ridge weight")
    run_p.add_argument("--beta", type=float, default=None, help="consensus coupling weight")
    run_p.add_argument("--lowfreq", type=int, default=None, help="kept low-frequency slices L")
    run_p.add_argument("--iters", type=int, default=None, help="solver iterations T")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--early-stop-tol", type=float, default=None, help="relative consensus-change stop (0 = off)")
    run_p.add_argument("--restarts", type=int, default=1, help="k-means restarts, best inertia wins")
    run_p.add_argument("--kernel-width", default=None, help="RBF width override: one float or one per view, comma-separated")
    run_p.add_argument("--preset", choices=sorted(PRESETS), default=None, help="published hyperparameter preset")
    run_p.add_argument("--no-isc", action="store_true", help="ablation: drop the consensus coupling (beta=0)")
    run_p.add_argument("--no-igs", action="store_true", help="ablation: skip low-frequency smoothing")
    run_p.add_argument("--threads", type=int, default=None, help="BLAS thread cap (also env MVTC_THREADS)")
    run_p.add_argument("--out", default=None, help="write the JSON report here")
    run_p.set_defaults(handler=_cmd_run)

    met_p = sub.add_parser("metrics", help="score predicted labels against ground truth")
    met_p.add_argument("--pred", required=True, help="file with one predicted label per line")
    met_p.add_argument("--truth", required=True, help="file with one true label per line")
    met_p.add_argument("--out", default=None, help="write the JSON scores here")
    met_p.set_defaults(handler=_cmd_metrics)

    gen_p = sub.add_parser("gen-synthetic", help="write a synthetic multi-view dataset")
    gen_p.add_argument("--samples", type=int, required=True)
    gen_p.add_argument("--clusters", type=int, required=True)
    gen_p.add_argument("--views", type=int, default=3)
    gen_p.add_argument("--dims", default=None, help="per-view feature dims, e.g. 20:30:25 (default 16 each)")
    gen_p.add_argument("--noise", type=float, default=0.1)
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--format", choices=["csv", "bin"], default="csv")
    gen_p.add_argument("--out", required=True, help="output directory")
    gen_p.set_defaults(handler=_cmd_gen)

    bench_p = sub.add_parser("bench", help="solver scaling sweep over sample counts")
    bench_p.add_argument("--scale-sweep", default="10000,20000", help="comma-separated sample counts")
    bench_p.add_argument("--anchors", type=int, default=200)
    bench_p.add_argument("--embed-dim", type=int, default=10)
    bench_p.add_argument("--views", type=int, default=3)
    bench_p.add_argument("--iters", type=int, default=3)
    bench_p.add_argument("--seed", type=int, default=0)
    bench_p.add_argument("--out", default=None, help="write the JSON timings here")
    bench_p.set_defaults(handler=_cmd_bench)
    return parser


def _cmd_run(args) -> int:
    if args.manifest:
        dataset = load_dataset(args.manifest)
    else:
        dataset = _synthetic_from_spec(args.synthetic, default_seed=args.seed)
    preset = PRESETS[args.preset] if args.preset else {}

    def pick(flag_value, key, fallback):
        if flag_value is not None:
            return flag_value
        return preset.get(key, fallback)

    threads = args.threads
    if threads is None and os.environ.get("MVTC_THREADS"):
        try:
            threads = int(os.environ["MVTC_THREADS"])
        except ValueError as exc:
            raise ValidationError(f"MVTC_THREADS must be an integer: {exc}") from exc
    config = PipelineConfig(
        n_clusters=args.clusters,
        embed_dim=args.embed_dim,
        n_anchors=pick(args.anchors, "n_anchors", None),
        lam=pick(args.lam, "lam", 0.1),
        beta=pick(args.beta, "beta", 0.1),
        low_freq=pick(args.lowfreq, "low_freq", 16),
        max_iters=args.iters if args.iters is not None else 7,
        seed=args.seed,
        early_stop_tol=args.early_stop_tol if args.early_stop_tol is not None else 0.0,
        restarts=args.restarts,
        kernel_width=_parse_kernel_width(args.kernel_width),
        no_isc=args.no_isc,
        no_igs=args.no_igs,
        threads=threads,
    )
    report = run_pipeline(dataset, config, out_path=args.out)
    print(report.to_json(), end="")
    return 0


def _cmd_metrics(args) -> int:
    pred = _load_labels(Path(args.pred))
    truth = _load_labels(Path(args.truth))
    scores = clustering_scores(pred, truth)
    text = json.dumps(scores, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def _cmd_gen(args) -> int:
    if args.dims:
        try:
            dims = [int(tok) for tok in args.dims.replace(":", ",").split(",")]
        except ValueError as exc:
            raise ValidationError(f"bad --dims value: {exc}") from exc
    else:
        dims = [16] * args.views
    dataset = generate_synthetic(
        n_samples=args.samples,
        n_clusters=args.clusters,
        n_views=args.views,
        dims=dims,
        noise=args.noise,
        seed=args.seed,
    )
    manifest = save_dataset(dataset, args.out, fmt=args.format)
    print(str(manifest))
    return 0


def _cmd_bench(args) -> int:
    try:
        n_values = [int(tok) for tok in args.scale_sweep.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --scale-sweep value: {exc}") from exc
    if not n_values:
        raise ValidationError("--scale-sweep needs at least one sample count")
    result = solver_scale_bench(
        n_values,
        n_anchors=args.anchors,
        embed_dim=args.embed_dim,
        n_views=args.views,
        iters=args.iters,
        seed=args.seed,
    )
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def _synthetic_from_spec(spec: str, default_seed: int):
    """Parse ``n=500,c=5,v=3,dims=20:30:25,noise=0.1,seed=7`` into a dataset."""
    fields = {}
    for token in spec.split(","):
        if not token.strip():
            continue
        if "=" not in token:
            raise ValidationError(f"bad synthetic spec token '{token}' (want key=value)")
        key, value = token.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        n = int(fields["n"])
        c = int(fields["c"])
        v = int(fields.get("v", 3))
        noise = float(fields.get("noise", 0.1))
        seed = int(fields.get("seed", default_seed))
        dims = (
            [int(tok) for tok in fields["dims"].split(":")]
            if "dims" in fields
            else [16] * v
        )
    except KeyError as exc:
        raise ValidationError(f"synthetic spec is missing {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"bad synthetic spec value: {exc}") from exc
    return generate_synthetic(n, c, v, dims, noise, seed)


def _parse_kernel_width(raw):
    if raw is None:
        return None
    try:
        values = [float(tok) for tok in str(raw).split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --kernel-width value: {exc}") from exc
    if not values:
        raise ValidationError("--kernel-width needs at least one value")
    return values[0] if len(values) == 1 else values


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
