"""Command-line entry point: ``panda <subcommand>``.

Exit codes: 0 success (or a passing verification), 1 internal failure or a
failed verification, 2 usage or precondition errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence

from panda_tta.adaptation import METHODS
from panda_tta.config import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_BETA,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_LOGIT_SCALE,
    DEFAULT_LR,
    DEFAULT_MC_SAMPLES,
    DEFAULT_PATCH_SIZE,
    DEFAULT_STREAM_LEN,
    RuntimeConfig,
    __version__,
    configure_logging,
    default_m,
    substream_seed,
)
from panda_tta.core import DimensionMismatch, PandaError
from panda_tta.experiments import SWEEP_COLUMNS, SWEEP_GRIDS, SimulationConfig, simulate, sweep
from panda_tta.io import (
    MANIFEST_FILE,
    RunManifest,
    jsonable,
    load_world,
    read_image,
    save_world,
    write_csv,
    write_json,
    write_tns,
)
from panda_tta.io.reports import format_cell
from panda_tta.metrics import CHUNK_COLUMNS, HISTOGRAM_COLUMNS
from panda_tta.nda import ABLATIONS, PatchGrid, negative_augment
from panda_tta.theory import CSV_COLUMNS, DEFAULT_R_GRID, DEFAULT_S_GRID, verify_grid
from panda_tta.world import (
    CLEAN,
    PRESET_REGISTRY,
    World,
    make_world,
    preset_spec,
    sample_stream,
    zero_shot_accuracy,
)

logger = logging.getLogger(__name__)

# Arguments that locate outputs or tune logging; they never change results.
UNHASHED = ("out", "log_level", "func", "command")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _run_arguments(args: argparse.Namespace) -> dict[str, Any]:
    return jsonable({k: v for k, v in vars(args).items() if k not in UNHASHED})


def _finish(args: argparse.Namespace, out: Path, outputs: list[Path], start: float, inputs: Sequence[str] = ()) -> Path:
    manifest = RunManifest.build(
        args.command,
        _run_arguments(args),
        args.seed,
        inputs=list(inputs),
        outputs=[str(p) for p in outputs],
        wall_time_s=time.perf_counter() - start,
    )
    return manifest.write(out)


def _world_from_args(args: argparse.Namespace) -> World:
    if args.world_dir:
        return load_world(args.world_dir)
    return make_world(preset_spec(args.preset, args.seed))


# -- subcommands ----------------------------------------------------------


def cmd_nda(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    images = [read_image(path) for path in args.inputs]
    first = images[0]
    for path, image in zip(args.inputs, images):
        if image.shape != first.shape:
            raise DimensionMismatch(f"{path} has shape {image.shape} but {args.inputs[0]} has shape {first.shape}")
    try:
        grid = PatchGrid.for_image(first, args.patch_size, args.patch_width)
    except DimensionMismatch as exc:
        raise DimensionMismatch(f"{args.inputs[0]}: {exc.message}") from exc
    m = default_m(len(images)) if args.m is None else args.m
    args.m = m
    negatives = negative_augment(images, grid, m, substream_seed(args.seed, "nda", 0))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = [write_tns(out / f"negative_{j:04d}.tns", image) for j, image in enumerate(negatives)]
    _finish(args, out, outputs, start, inputs=[str(p) for p in args.inputs])
    print(f"wrote {len(outputs)} negative image(s) to {out}")
    return 0


def cmd_verify_theorem(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    summary = verify_grid(
        args.s_grid,
        args.r_grid,
        args.beta_grid,
        samples=args.samples,
        seed=args.seed,
        dim=args.dim,
        sigmas=args.sigmas,
    )
    rows = [row.csv_row() for row in summary.rows]
    accepted = summary.accepted(relaxed=args.acceptance)
    if args.out:
        out = Path(args.out)
        csv_path = write_csv(out / "verify.csv", CSV_COLUMNS, rows)
        _finish(args, out, [csv_path], start)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows([format_cell(row[c]) for c in CSV_COLUMNS] for row in rows)
    logger.info("verified %d cells: %.1f%% inside %.0f sigma, max |z| %.2f", len(rows), 100 * summary.pass_fraction, args.sigmas, summary.max_abs_z)
    print(
        f"{'PASS' if accepted else 'FAIL'}: {sum(r['pass'] for r in rows)}/{len(rows)} cells within "
        f"{args.sigmas:g} sigma, max |z| = {summary.max_abs_z:.2f}",
        file=sys.stderr,
    )
    return 0 if accepted else 1


def _simulation_config(args: argparse.Namespace) -> SimulationConfig:
    return SimulationConfig(
        method=args.method,
        stream_len=args.stream_len,
        batch_size=args.batch_size,
        chunk_size=args.chunk_size,
        beta=args.beta,
        m=args.m,
        lr=args.lr,
        ablation=args.ablation,
        domain=args.domain,
        seed=args.seed,
        stop_prototype_grad=args.stop_prototype_grad,
        renormalize=args.renormalize,
        logit_scale=args.logit_scale,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    world = _world_from_args(args)
    report = simulate(world, _simulation_config(args))
    out = Path(args.out)
    outputs = [
        write_json(out / "report.json", report.to_dict()),
        write_csv(out / "report.csv", CHUNK_COLUMNS, report.per_chunk),
        write_csv(out / "histogram.csv", HISTOGRAM_COLUMNS, report.histogram),
    ]
    _finish(args, out, outputs, start, inputs=[str(args.world_dir)] if args.world_dir else [])
    final = report.final
    print(
        f"{args.method}: final-chunk accuracy {final['accuracy']:.4f}, L1 bias {final['l1_bias']:.4f}, "
        f"{report.forward_passes} forwards ({report.forward_ratio_vs_tent:.3f}x tent)"
    )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    world = _world_from_args(args)
    rows = sweep(world, _simulation_config(args), args.grid, args.values)
    out = Path(args.out)
    outputs = [
        write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows),
        write_json(out / "sweep.json", {"grid": args.grid, "rows": rows}),
    ]
    _finish(args, out, outputs, start, inputs=[str(args.world_dir)] if args.world_dir else [])
    for row in rows:
        print(f"{args.grid}={row['value']:g}: accuracy {row['accuracy']:.4f}, L1 bias {row['l1_bias']:.4f}")
    return 0


def _spec_overrides(args: argparse.Namespace) -> dict[str, Any]:
    mapping = {
        "classes": "num_classes",
        "dim": "feature_dim",
        "image_size": "image_size",
        "channels": "channels",
        "strength": "corruption_strength",
        "spurious_align": "spurious_align",
        "patch_size": "patch_size",
        "domains": "num_domains",
    }
    return {field: getattr(args, flag) for flag, field in mapping.items() if getattr(args, flag) is not None}


def cmd_world_make(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    spec = preset_spec(args.preset, args.seed).replace(**_spec_overrides(args))
    world = make_world(spec)
    out = save_world(world, args.out)
    _finish(args, out, [out / "spec.json", out / "projection.tns", out / "textbank.tns"], start)
    print(f"wrote world ({spec.num_classes} classes, D={spec.feature_dim}) to {out}")
    return 0


def inspect_world(world: World, samples: int, seed: int) -> dict[str, Any]:
    """Zero-shot accuracy per domain with and without the offset, plus the world spec."""
    summary: dict[str, Any] = {"spec": world.spec.to_dict(), "domains": list(world.domains), "layouts": world.layouts}
    accuracy: dict[str, Any] = {}
    for domain in world.domains:
        stream = sample_stream(world, samples, domain, seed)
        accuracy[domain] = {
            "zero_shot": zero_shot_accuracy(world, stream, 0.0, seed=seed),
            "offset": zero_shot_accuracy(world, stream, DEFAULT_BETA, seed=seed),
        }
    summary["accuracy"] = accuracy
    summary["spurious_cosine"] = float(world.bank.vectors[0] @ world.corruption_axis)
    return summary


def cmd_world_inspect(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    world = load_world(args.world_dir)
    summary = inspect_world(world, args.samples, args.seed)
    if args.out:
        out = Path(args.out)
        path = write_json(out / "inspect.json", summary)
        _finish(args, out, [path], start, inputs=[str(args.world_dir)])
    for domain in world.domains:
        acc = summary["accuracy"][domain]
        label = "clean" if domain == CLEAN else domain
        print(f"{label:>14}: zero-shot {acc['zero_shot']:.4f}  offset(beta={DEFAULT_BETA:g}) {acc['offset']:.4f}")
    return 0


def cmd_rerun(args: argparse.Namespace) -> int:
    manifest = RunManifest.load(args.manifest)
    handler = HANDLERS.get(manifest.subcommand)
    if handler is None:
        raise PandaError(f"Manifest names unknown subcommand {manifest.subcommand!r}")
    source = Path(args.manifest)
    out = args.out or (source if source.is_dir() else source.parent)
    replay = argparse.Namespace(**manifest.arguments, out=str(out), command=manifest.subcommand, log_level=args.log_level)
    logger.info("rerunning %s (hash %s) into %s", manifest.subcommand, manifest.run_hash[:12], out)
    return handler(replay)


HANDLERS: dict[str, Callable[[argparse.Namespace], int]] = {
    "nda": cmd_nda,
    "verify-theorem": cmd_verify_theorem,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "world-make": cmd_world_make,
    "world-inspect": cmd_world_inspect,
}


# -- parser ---------------------------------------------------------------


def _add_world_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--world-dir", type=Path, default=None, help="World directory from world-make.")
    parser.add_argument(
        "--preset",
        choices=sorted(PRESET_REGISTRY),
        default="biased",
        help="World preset built from --seed when --world-dir is omitted.",
    )


def _add_simulation_flags(parser: argparse.ArgumentParser) -> None:
    _add_world_source(parser)
    parser.add_argument("--method", choices=METHODS, default="tent_panda")
    parser.add_argument("--stream-len", type=int, default=DEFAULT_STREAM_LEN)
    parser.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    parser.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
    parser.add_argument("--beta", type=float, default=DEFAULT_BETA, help="Offset ratio.")
    parser.add_argument("--m", type=int, default=None, help="Negatives per batch (default ceil(B/10)).")
    parser.add_argument("--lr", type=float, default=DEFAULT_LR)
    parser.add_argument("--ablation", choices=ABLATIONS, default="full")
    parser.add_argument("--domain", default="corruption_0", help="Stream domain: clean or corruption_<k>.")
    parser.add_argument("--stop-prototype-grad", action="store_true", help="Do not differentiate through the prototype.")
    parser.add_argument("--renormalize", action="store_true", help="Renormalize offset features.")
    parser.add_argument("--logit-scale", type=float, default=DEFAULT_LOGIT_SCALE)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, required=True, help="Output directory.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="panda", description="Negative-augmentation offsetting for test-time adaptation.")
    parser.add_argument("--version", action="version", version=f"panda-tta {__version__}")
    parser.add_argument("--log-level", default=None, help="Logging level (default: $PANDA_LOG_LEVEL or WARNING).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nda", help="Recompose negative images from a batch of TNS1/PPM files.")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--patch-size", type=int, default=DEFAULT_PATCH_SIZE, help="Patch height (and width unless --patch-width).")
    p.add_argument("--patch-width", type=int, default=None)
    p.add_argument("--m", type=int, default=None, help="Number of negatives (default ceil(B/10)).")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_nda)

    p = sub.add_parser("verify-theorem", help="Check the closed-form accuracy against Monte Carlo on a grid.")
    p.add_argument("--s-grid", type=_floats, default=list(DEFAULT_S_GRID))
    p.add_argument("--r-grid", type=_floats, default=list(DEFAULT_R_GRID))
    p.add_argument("--beta-grid", type=_floats, default=None, help="Default: 0, r/2, r, r+0.2, 1 per r.")
    p.add_argument("--samples", type=int, default=DEFAULT_MC_SAMPLES)
    p.add_argument("--dim", type=int, default=1, help="Feature dimension; >1 uses R = r I and a random direction.")
    p.add_argument("--sigmas", type=float, default=3.0)
    p.add_argument(
        "--acceptance",
        action="store_true",
        help="Pass when >= 95%% of cells are inside the band and none is beyond 4 sigma (default: every cell inside).",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="Directory for verify.csv and manifest (default: CSV to stdout).")
    p.set_defaults(func=cmd_verify_theorem)

    p = sub.add_parser("simulate", help="Adapt over a synthetic stream and report per-chunk metrics.")
    _add_simulation_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="Repeat simulate over a grid of beta, M/B, batch size or learning rate.")
    _add_simulation_flags(p)
    p.add_argument("--grid", choices=SWEEP_GRIDS, default="beta")
    p.add_argument("--values", type=_floats, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("world-make", help="Build a synthetic world and save it.")
    p.add_argument("--preset", choices=sorted(PRESET_REGISTRY), default="biased")
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--image-size", type=int, default=None)
    p.add_argument("--channels", type=int, default=None)
    p.add_argument("--patch-size", type=int, default=None)
    p.add_argument("--domains", type=int, default=None)
    p.add_argument("--strength", type=float, default=None)
    p.add_argument("--spurious-align", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_world_make)

    p = sub.add_parser("world-inspect", help="Summarize a saved world.")
    p.add_argument("--world-dir", type=Path, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_world_inspect)

    p = sub.add_parser("rerun", help=f"Re-execute a run from its {MANIFEST_FILE}.")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, default=None, help="Output directory (default: the manifest's directory).")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help / --version
        return int(exc.code or 0)
    configure_logging(args.log_level or RuntimeConfig.from_env().log_level)
    try:
        return int(args.func(args))
    except PandaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        logger.exception("internal failure")
        return 1


if __name__ == "__main__":
    sys.exit(main())
