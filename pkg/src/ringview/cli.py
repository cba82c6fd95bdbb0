"""Command-line pipeline: one subcommand per stage, one root seed each.

Every subcommand is a pure function of its inputs and flags; rerunning
with identical flags reproduces every output file byte for byte. Exit
codes: 0 success, 1 internal error, 2 bad input, 3 training divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import augment as aug
from . import balance as bal
from . import rendergen
from .circular import CircularLabelSpace, KernelConfig, bin_to_degrees, degrees_to_bin
from .config import load_augment_config, load_train_config
from .errors import DivergenceError, InputError
from .glyph import make_glyph_dataset, render_glyph, save_png
from .manifest import Source, read_manifest, write_manifest
from .metrics import (
    EvalReport,
    evaluate,
    label_histogram,
    read_report_bins_csv,
    read_report_text,
    write_report_bins_csv,
    write_report_text,
)
from .report import RunResult, generate_report, write_histogram_figure
from .seeds import derive_seed
from .trainer import (
    TrainConfig,
    load_params,
    materialize_features,
    predict,
    save_params,
    train,
    write_training_log,
)

_TIERS = {
    "simple-ambient": rendergen.QualityTier.SIMPLE_MATERIAL_AMBIENT,
    "complex-ambient": rendergen.QualityTier.COMPLEX_MATERIAL_AMBIENT,
    "complex-directional": rendergen.QualityTier.COMPLEX_MATERIAL_DIRECTIONAL,
}


def _read_model_list(path: str) -> list[str]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"model list not found: {path}")
    models = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                models.append(line)
    if not models:
        raise InputError(f"model list {path} is empty")
    return models


def _cmd_gen_jobs(args) -> None:
    models = _read_model_list(args.models)
    tier = _TIERS[args.tier]
    if args.holdout is not None:
        split = rendergen.make_split(models, args.holdout)
        split_path = args.split_out or str(Path(args.out).with_suffix(".split.json"))
        rendergen.write_split_json(split, split_path)
        print(f"wrote split ({len(split.train_model_ids)} train / "
              f"{len(split.test_model_ids)} test) to {split_path}")
    jobs = rendergen.enumerate_jobs(
        models, tier, args.seed, jobs_per_view=args.jobs_per_view
    )
    n = rendergen.write_jobs_jsonl(jobs, args.out)
    print(f"wrote {n} jobs to {args.out}")


def _glyph_distribution(args, K: int) -> np.ndarray:
    if args.dist == "uniform":
        if args.n % K == 0:
            return np.full(K, args.n // K)
        return np.ones(K)
    if args.dist == "bimodal":
        space = CircularLabelSpace(K)
        weights = np.ones(K)
        for peak in args.peaks.split(","):
            weights[degrees_to_bin(float(peak), space)] = args.peak_weight
        return weights
    weights = [float(line) for line in Path(args.dist).read_text().split()]
    return np.asarray(weights)


def _cmd_glyphs(args) -> None:
    space = CircularLabelSpace(args.k)
    dist = _glyph_distribution(args, args.k)
    manifest = make_glyph_dataset(
        args.n,
        dist,
        seed=args.seed,
        space=space,
        size=args.size,
        source=Source(args.source),
        id_prefix=args.id_prefix,
        jitter=not args.no_jitter,
    )
    write_manifest(manifest, args.out)
    if args.render_dir:
        render_dir = Path(args.render_dir)
        render_dir.mkdir(parents=True, exist_ok=True)
        for row in manifest:
            image = render_glyph(row.theta, size=args.size, seed=row.seed)
            save_png(image, render_dir / f"{row.sample_id}.png")
    print(f"wrote {len(manifest)} samples to {args.out}")


def _cmd_augment(args) -> None:
    cfg = load_augment_config(args.config)
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise InputError(f"input directory not found: {in_dir}")
    images = sorted(
        p for p in in_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    if not images:
        raise InputError(f"input directory {in_dir} contains no images")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(args.audit, "w") as audit_fh:
        for path in images:
            image = aug.read_image_rgb8(path)
            seed = derive_seed(args.seed, f"augment:{path.name}")
            augmented, record = aug.augment_pipeline(image, cfg, seed)
            out_path = out_dir / (path.stem + ".png")
            aug.write_image_png(augmented, out_path)
            record = {"image": path.name, "output": out_path.name, **record}
            audit_fh.write(json.dumps(record) + "\n")
    print(f"augmented {len(images)} images into {out_dir}")


def _cmd_balance(args) -> None:
    manifest = read_manifest(args.manifest)
    pool = read_manifest(args.pool)
    if args.method == "adaptive":
        histogram = bal.bin_histogram(manifest, args.k)
        plan = bal.plan_adaptive(histogram, budget=args.budget)
    else:
        if args.n_additions is None:
            raise InputError("--n-additions is required for random balancing")
        plan = bal.plan_random(args.n_additions, args.k, args.seed)
    combined = bal.apply_plan(manifest, pool, plan, args.seed)
    write_manifest(combined, args.out)
    if args.plan_out:
        bal.write_plan_jsonl(plan, args.plan_out)
    print(f"total_additions={plan.total_additions}")
    print(f"wrote {len(combined)} samples to {args.out}")


def _train_config_from_args(args) -> TrainConfig:
    if args.config:
        base = load_train_config(args.config)
    else:
        base = TrainConfig(K=args.k if args.k is not None else 36)
    overrides: dict = {}
    if args.k is not None:
        overrides["K"] = args.k
    if args.loss is not None:
        if args.loss == "wsm":
            overrides["kernel"] = KernelConfig(sigma=args.sigma)
        else:
            overrides["kernel"] = None
    if args.blend is not None:
        overrides["blend_ratio"] = args.blend
    for flag, name in (
        ("lr", "learning_rate"),
        ("epochs", "epochs"),
        ("batch", "batch_size"),
        ("hidden", "hidden_units"),
        ("train_size", "train_size"),
        ("size", "image_size"),
        ("seed", "seed"),
    ):
        value = getattr(args, flag)
        if value is not None:
            overrides[name] = value
    fields = {
        "K": base.K,
        "kernel": base.kernel,
        "learning_rate": base.learning_rate,
        "epochs": base.epochs,
        "batch_size": base.batch_size,
        "seed": base.seed,
        "hidden_units": base.hidden_units,
        "blend_ratio": base.blend_ratio,
        "train_size": base.train_size,
        "image_size": base.image_size,
    }
    fields.update(overrides)
    return TrainConfig(**fields)


def _cmd_train(args) -> None:
    cfg = _train_config_from_args(args)
    manifest_real = read_manifest(args.manifest) if args.manifest else None
    manifest_synth = read_manifest(args.synth) if args.synth else None
    params, log = train(manifest_real, manifest_synth, cfg)
    save_params(params, args.out)
    if args.log:
        write_training_log(log, args.log)
    final = log[-1]
    print(f"epochs={final.epoch} loss={final.loss:.6f} train_mae={final.train_mae:.3f}")
    print(f"wrote model to {args.out}")


def _read_predictions_csv(path: str) -> dict[str, float]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"prediction file not found: {path}")
    preds: dict[str, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["sample_id", "pred_deg"]:
            raise InputError(f"bad prediction header in {path}: {header}")
        for record in reader:
            preds[record[0]] = float(record[1])
    return preds


def _cmd_eval(args) -> None:
    manifest = read_manifest(args.manifest)
    if len(manifest) == 0:
        raise InputError("evaluation manifest is empty")
    gt = np.array([row.azimuth_deg for row in manifest])

    if args.model:
        params = load_params(args.model)
        size = int(round(params.input_dim ** 0.5))
        X, _ = materialize_features(manifest, size)
        _, bins = predict(params, X)
        space = CircularLabelSpace(params.K)
        pred = np.array([bin_to_degrees(b, space) for b in bins])
    elif args.pred:
        by_id = _read_predictions_csv(args.pred)
        missing = [row.sample_id for row in manifest if row.sample_id not in by_id]
        if missing:
            raise InputError(f"predictions missing for {len(missing)} samples, "
                             f"first: {missing[0]}")
        pred = np.array([by_id[row.sample_id] for row in manifest])
    else:
        raise InputError("eval needs either --model or --pred")

    report = evaluate(pred, gt, n_bins=args.bins, correct_within=args.within)
    write_report_text(report, f"{args.out}.report.txt")
    write_report_bins_csv(report, f"{args.out}.bins.csv")
    print(f"median_angular_error_deg={report.median_angular_error_deg}")
    print(f"accuracy_entropy={report.accuracy_entropy}")


def _load_run(label: str, prefix: str) -> RunResult:
    values = read_report_text(f"{prefix}.report.txt")
    bins = read_report_bins_csv(f"{prefix}.bins.csv")
    report = EvalReport(
        median_angular_error_deg=values["median_angular_error_deg"],
        per_bin_accuracy=bins.accuracy,
        per_bin_counts=bins.counts,
        accuracy_entropy=values["accuracy_entropy"],
        n_evaluated=int(values["n_evaluated"]),
        correct_within_deg=values["correct_within_deg"],
    )
    return RunResult(label=label, report=report)


def _cmd_report(args) -> None:
    runs = []
    for spec in args.run:
        label, _, prefix = spec.partition("=")
        if not prefix:
            raise InputError(f"--run expects label=eval_prefix, got {spec!r}")
        runs.append(_load_run(label, prefix))
    paths = generate_report(runs, args.out_dir, figures=not args.no_figures)
    if args.manifest:
        manifest = read_manifest(args.manifest)
        hist = label_histogram(manifest)
        paths.append(write_histogram_figure(hist, args.out_dir))
    for path in paths:
        print(f"wrote {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringview",
        description="circular viewpoint-estimation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-jobs", help="sample render-job specs for a model list")
    p.add_argument("--models", required=True, help="text file, one model id per line")
    p.add_argument("--tier", choices=sorted(_TIERS), default="complex-directional")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output JSON Lines file")
    p.add_argument("--jobs-per-view", type=int, default=1)
    p.add_argument("--holdout", type=int, default=None, help="model index to hold out")
    p.add_argument("--split-out", default=None)
    p.set_defaults(func=_cmd_gen_jobs)

    p = sub.add_parser("glyphs", help="generate a labeled glyph dataset manifest")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=36)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output manifest CSV")
    p.add_argument("--dist", default="uniform",
                   help="uniform | bimodal | path to a weights file")
    p.add_argument("--peaks", default="0,180", help="peak centers in degrees (bimodal)")
    p.add_argument("--peak-weight", type=float, default=30.0)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--source", choices=[s.value for s in Source], default="glyph")
    p.add_argument("--id-prefix", default="glyph")
    p.add_argument("--render-dir", default=None, help="also write PNGs here")
    p.add_argument("--no-jitter", action="store_true")
    p.set_defaults(func=_cmd_glyphs)

    p = sub.add_parser("augment", help="run the augmentation pipeline over a directory")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--config", required=True, help="key=value AugmentConfig file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--audit", required=True, help="JSON Lines audit output")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("balance", help="balance a manifest with synthetic samples")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--method", choices=["adaptive", "random"], default="adaptive")
    p.add_argument("--k", type=int, default=36)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--n-additions", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--plan-out", default=None)
    p.set_defaults(func=_cmd_balance)

    p = sub.add_parser("train", help="train the linear / one-hidden-layer classifier")
    p.add_argument("--manifest", default=None, help="real-sample manifest")
    p.add_argument("--synth", default=None, help="synthetic-sample manifest")
    p.add_argument("--loss", choices=["sm", "wsm"], default=None)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--blend", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--train-size", type=int, default=None)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="key=value TrainConfig file")
    p.add_argument("--out", required=True, help="model parameter file")
    p.add_argument("--log", default=None, help="training log CSV")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a model or prediction file on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--pred", default=None, help="CSV with sample_id,pred_deg")
    p.add_argument("--bins", type=int, default=36)
    p.add_argument("--within", type=float, default=10.0)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="tabulate evaluation runs and render figures")
    p.add_argument("--run", action="append", required=True,
                   help="label=eval_output_prefix (repeatable)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--manifest", default=None,
                   help="optional manifest for a label-histogram figure")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
