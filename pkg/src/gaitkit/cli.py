"""Command line front end.

Subcommands cover the full pipeline: generate synthetic recordings,
run the walking-data extractor, segment steps, build sample datasets,
train and evaluate the networks, dump ROC tables, and score the
classical baselines. Every command takes --config FILE with key=value
lines supplying defaults for any long option (underscores for dashes);
explicit flags win.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import baselines, metrics, model_io
from .data import (
    build_auth_dataset,
    build_extraction_dataset,
    build_ident_dataset,
    parse_recording,
    random_profile,
    read_sample_container,
    synth_recording,
    write_recording,
    write_sample_container,
)
from .extraction import (
    extract_walking,
    init_extractor,
    predict_walking_mask,
    train_extractor,
)
from .recognition import (
    IDENT_VARIANTS,
    init_auth_model,
    init_ident_model,
    make_transfer_model,
    predict_identity,
    predict_same_prob,
    train_auth,
    train_ident,
)
from .signal import detect_steps


def _parse_schedule(text):
    """'walk:60,idle:10' -> [('walk', 60.0), ('idle', 10.0)]"""
    out = []
    for part in text.split(","):
        kind, _, dur = part.partition(":")
        kind = kind.strip()
        if kind not in ("walk", "idle") or not dur:
            raise SystemExit(f"bad schedule segment {part!r}")
        out.append((kind, float(dur)))
    return out


def _synth_corpus(args, schedule):
    """[(subject, SynthRecording)] for the corpus options."""
    rng = np.random.default_rng(args.seed)
    total = sum(d for _, d in schedule)
    corpus = []
    for i in range(args.subjects):
        profile = random_profile(rng, f"s{i:02d}")
        for k in range(args.recordings):
            rec = synth_recording(
                profile,
                schedule,
                seed=args.seed + 1000 * i + k,
                rate=args.rate,
                t0=k * (total + 30.0),
            )
            corpus.append((profile.subject, rec))
    return corpus


def _add_corpus_options(sub, schedule_default):
    sub.add_argument("--subjects", type=int, default=8)
    sub.add_argument("--recordings", type=int, default=3,
                     help="recordings per subject")
    sub.add_argument("--schedule", default=schedule_default,
                     help="comma list of walk:SECONDS / idle:SECONDS")
    sub.add_argument("--rate", type=float, default=50.0)


def _load_recordings_dir(directory):
    """Subject names come from the file stem up to '__'."""
    paths = sorted(Path(directory).glob("*.csv"))
    if not paths:
        raise SystemExit(f"no .csv recordings under {directory}")
    out = []
    for path in paths:
        subject = path.stem.split("__")[0]
        out.append((subject, parse_recording(path)))
    return out


def cmd_synth(args):
    schedule = _parse_schedule(args.schedule)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    count = 0
    for subject, rec in _synth_corpus(args, schedule):
        k = count % args.recordings
        write_recording(out_dir / f"{subject}__{k}.csv", rec.series)
        count += 1
    print(f"wrote {count} recordings to {out_dir}")


def cmd_segment_steps(args):
    series = parse_recording(args.recording)
    bounds = detect_steps(series)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("index,time\n")
            for idx, t in zip(bounds.indices, bounds.times):
                fh.write(f"{idx},{t:.6f}\n")
    print(f"{len(bounds)} steps")
    if len(bounds) >= 2:
        gaps = np.diff(bounds.times)
        print(f"mean gap {gaps.mean():.3f}s  min {gaps.min():.3f}s  "
              f"max {gaps.max():.3f}s")


def cmd_extract_walk(args):
    series = parse_recording(args.recording)
    weights, _ = model_io.load_extractor(args.model)
    if args.mask_out:
        mask = predict_walking_mask(weights, series, window=args.window)
        np.savetxt(args.mask_out, mask, fmt="%.6f")
    bouts, _ = extract_walking(
        weights,
        series,
        threshold=args.threshold,
        min_run_s=args.min_run,
        window=args.window,
    )
    print(f"{len(bouts)} walking bouts")
    for i, bout in enumerate(bouts):
        t0, t1 = bout.timestamps[0], bout.timestamps[-1]
        print(f"  bout {i}: {t0:.2f}s .. {t1:.2f}s ({len(bout)} samples)")
        if args.out:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            stem = Path(args.recording).stem
            write_recording(out_dir / f"{stem}__bout{i}.csv", bout)


def _write_manifest(out_dir, manifest):
    (out_dir / "manifest.txt").write_text(manifest.to_text())
    print(f"manifest sha256 {manifest.sha256()}")


def cmd_build_dataset(args):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    schedule = _parse_schedule(args.schedule)

    if args.task == "extract":
        if args.recordings_dir:
            raise SystemExit(
                "extraction windows need ground-truth masks; "
                "they only exist for generated recordings"
            )
        corpus = _synth_corpus(args, schedule)
        dataset = build_extraction_dataset(
            [rec for _, rec in corpus], width=args.window, seed=args.seed
        )
        values = np.stack([w[0] for w in dataset.windows])
        masks = np.stack([w[1] for w in dataset.windows]).astype(np.uint8)
        labels = np.zeros(len(values), dtype=np.int32)
        write_sample_container(
            out_dir / "windows.bin", "extract", "extract", "",
            dataset.manifest.subjects, values, labels, masks=masks,
        )
        print(f"{len(values)} windows of {args.window}")
        _write_manifest(out_dir, dataset.manifest)
        return

    if args.recordings_dir:
        recordings = _load_recordings_dir(args.recordings_dir)
    else:
        recordings = [
            (subject, rec.series) for subject, rec in _synth_corpus(args, schedule)
        ]

    if args.task == "ident":
        dataset = build_ident_dataset(
            recordings,
            recipe=args.recipe,
            overlap=args.overlap,
            train_fraction=args.train_fraction,
            width=args.width,
            seed=args.seed,
        )
        class_map = dataset.class_map
        subjects = tuple(sorted(class_map, key=class_map.get))
        for name, split in (("train", dataset.train), ("test", dataset.test)):
            values = np.stack([s.values for s in split])
            labels = np.array([class_map[s.subject] for s in split])
            write_sample_container(
                out_dir / f"{name}.bin", "ident", args.recipe, "",
                subjects, values, labels,
            )
        print(f"{len(dataset.train)} train / {len(dataset.test)} test samples, "
              f"{len(subjects)} subjects")
        _write_manifest(out_dir, dataset.manifest)
        return

    dataset = build_auth_dataset(
        recordings,
        alignment=args.alignment,
        n_train_pairs=args.train_pairs,
        n_test_pairs=args.test_pairs,
        recipe=args.recipe,
        overlap=args.overlap,
        width=args.width,
        seed=args.seed,
    )
    for name, pairs, subjects in (
        ("train", dataset.train_pairs, dataset.train_subjects),
        ("test", dataset.test_pairs, dataset.test_subjects),
    ):
        values = np.stack([p.values for p in pairs])
        labels = np.array([int(p.same_subject) for p in pairs])
        write_sample_container(
            out_dir / f"{name}.bin", "auth", args.recipe, args.alignment,
            subjects, values, labels,
        )
    print(f"{len(dataset.train_pairs)} train / {len(dataset.test_pairs)} test "
          f"pairs, alignment {args.alignment}")
    _write_manifest(out_dir, dataset.manifest)


def _read_split(data_dir, name, kind):
    path = Path(data_dir) / f"{name}.bin"
    if not path.exists():
        raise SystemExit(f"{path} missing; run build-dataset first")
    box = read_sample_container(path)
    if box["kind"] != kind:
        raise SystemExit(f"{path} holds {box['kind']!r} samples, wanted {kind!r}")
    return box


def _maybe_manifest_meta(data_dir):
    path = Path(data_dir) / "manifest.txt"
    if not path.exists():
        return {}
    from .data import DatasetManifest

    return {"data_sha256": DatasetManifest.from_text(path.read_text()).sha256()}


def _train_kwargs(args):
    out = {"seed": args.seed}
    for key in ("epochs", "lr", "batch"):
        if getattr(args, key) is not None:
            out[key] = getattr(args, key)
    if args.time_budget is not None:
        out["time_budget_s"] = args.time_budget
    if args.verbose:
        out["log"] = lambda epoch, loss: print(f"epoch {epoch}  loss {loss:.4f}")
    return out


def cmd_train(args):
    meta = _maybe_manifest_meta(args.data)
    kwargs = _train_kwargs(args)

    if args.task == "extractor":
        box = _read_split(args.data, "windows", "extract")
        weights = init_extractor(seed=args.seed)
        history = train_extractor(
            weights, box["values"], box["masks"].astype(np.float64), **kwargs
        )
        meta["final_loss"] = f"{history[-1]:.6f}"
        model_io.save_extractor(args.out, weights, meta)
    elif args.task == "ident":
        box = _read_split(args.data, "train", "ident")
        n_classes = len(box["subjects"])
        if args.variant in ("cnn_fix_lstm", "cnn_lstm_fix"):
            cnn_source = model_io.load_ident(args.cnn_model) if args.cnn_model else None
            lstm_source = model_io.load_ident(args.lstm_model) if args.lstm_model else None
            model = make_transfer_model(
                args.variant, n_classes, seed=args.seed,
                cnn_source=cnn_source, lstm_source=lstm_source,
                lstm_hidden=args.lstm_hidden,
            )
        else:
            model = init_ident_model(
                args.variant, n_classes, seed=args.seed,
                lstm_hidden=args.lstm_hidden,
            )
        history = train_ident(model, box["values"], box["labels"], **kwargs)
        meta["final_loss"] = f"{history[-1]:.6f}"
        model_io.save_ident(args.out, model, meta)
    else:
        box = _read_split(args.data, "train", "auth")
        if not args.cnn_model:
            raise SystemExit("auth training needs --cnn-model (a trained "
                             "ident model with a convolutional branch)")
        donor = model_io.load_ident(args.cnn_model)
        model = init_auth_model(
            box["alignment"], cnn_source=donor, seed=args.seed,
            hidden=args.lstm_hidden or 64,
        )
        history = train_auth(model, box["values"], box["labels"], **kwargs)
        meta["final_loss"] = f"{history[-1]:.6f}"
        model_io.save_auth(args.out, model, meta)
    print(f"trained {args.task} ({len(history)} epochs, "
          f"final loss {history[-1]:.4f}) -> {args.out}")


def cmd_eval(args):
    if args.task == "extractor":
        box = _read_split(args.data, "windows", "extract")
        weights, _ = model_io.load_extractor(args.model)
        hits = total = 0
        for window, mask in zip(box["values"], box["masks"]):
            from .extraction import extractor_forward

            probs = extractor_forward(weights, window).data
            hits += int(((probs >= 0.5) == (mask >= 0.5)).sum())
            total += len(mask)
        print(f"timestep accuracy {hits / total:.4f} over {total} samples")
        return
    if args.task == "ident":
        box = _read_split(args.data, args.split, "ident")
        model = model_io.load_ident(args.model)
        pred = predict_identity(model, box["values"])
        acc = metrics.accuracy(pred, box["labels"])
        print(f"accuracy {acc:.4f} on {len(pred)} {args.split} samples")
        if args.confusion:
            counts = metrics.confusion_matrix(
                pred, box["labels"], n_classes=model.n_classes
            )
            for row in counts:
                print(" ".join(f"{c:4d}" for c in row))
        return
    box = _read_split(args.data, args.split, "auth")
    model = model_io.load_auth(args.model)
    probs = predict_same_prob(model, box["values"])
    pred = (probs >= 0.5).astype(int)
    acc = metrics.accuracy(pred, box["labels"])
    fpr, tpr, _ = metrics.roc_curve(probs, box["labels"])
    print(f"accuracy {acc:.4f}  auc {metrics.auc(fpr, tpr):.4f}  "
          f"eer {metrics.eer(fpr, tpr):.4f} on {len(pred)} {args.split} pairs")


def cmd_roc(args):
    box = _read_split(args.data, args.split, "auth")
    model = model_io.load_auth(args.model)
    probs = predict_same_prob(model, box["values"])
    fpr, tpr, thresholds = metrics.roc_curve(probs, box["labels"])
    with open(args.out, "w") as fh:
        fh.write("threshold,fpr,tpr\n")
        for t, f, r in zip(thresholds, fpr, tpr):
            fh.write(f"{t:.6f},{f:.6f},{r:.6f}\n")
    print(f"auc {metrics.auc(fpr, tpr):.4f}  eer {metrics.eer(fpr, tpr):.4f}  "
          f"({len(fpr)} curve points -> {args.out})")


def _baseline_features(kind, values, bins, basis=None):
    if kind == "fourier":
        return np.stack([baselines.fourier_features(v, bins=bins) for v in values])
    if kind == "wavelet":
        return np.stack([baselines.wavelet_energy_features(v) for v in values])
    return baselines.eigengait_features(basis, values)


def cmd_baseline(args):
    train = _read_split(args.data, "train", "ident")
    test = _read_split(args.data, "test", "ident")
    basis = None
    if args.features == "eigen":
        k = min(args.k, len(train["values"]))
        basis = baselines.eigengait_fit(train["values"], k=k)
    f_train = _baseline_features(args.features, train["values"], args.bins, basis)
    f_test = _baseline_features(args.features, test["values"], args.bins, basis)
    model = baselines.margin_train(
        f_train, train["labels"],
        epochs=args.epochs or 100, lr=args.lr or 0.05, seed=args.seed,
    )
    train_acc = metrics.accuracy(
        baselines.margin_predict(model, f_train), train["labels"]
    )
    test_acc = metrics.accuracy(
        baselines.margin_predict(model, f_test), test["labels"]
    )
    print(f"{args.features}: train accuracy {train_acc:.4f}  "
          f"test accuracy {test_acc:.4f}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gaitkit",
        description="inertial gait recognition pipeline",
    )
    parser.add_argument("--config", default=None,
                        help="key=value file with option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic recordings")
    _add_corpus_options(p, "walk:60")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("segment-steps", help="detect step peaks in a recording")
    p.add_argument("recording")
    p.add_argument("--out", default=None, help="write index,time csv")
    p.set_defaults(fn=cmd_segment_steps)

    p = sub.add_parser("extract-walk", help="find walking bouts with a "
                       "trained extractor")
    p.add_argument("recording")
    p.add_argument("--model", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--min-run", type=float, default=2.0)
    p.add_argument("--window", type=int, default=1024)
    p.add_argument("--out", default=None, help="directory for bout csv files")
    p.add_argument("--mask-out", default=None, help="write the raw mask")
    p.set_defaults(fn=cmd_extract_walk)

    p = sub.add_parser("build-dataset", help="build sample containers")
    p.add_argument("--task", choices=("ident", "auth", "extract"),
                   required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--recordings-dir", default=None,
                   help="read csv recordings instead of generating")
    _add_corpus_options(p, "walk:60")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--recipe", choices=("interp", "fixed"), default="interp")
    p.add_argument("--overlap", default="1step",
                   help="interp: 0 or 1step; fixed: 0 or 1.28s")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--alignment", choices=("horizontal", "vertical"),
                   default="vertical")
    p.add_argument("--train-pairs", type=int, default=600)
    p.add_argument("--test-pairs", type=int, default=300)
    p.add_argument("--window", type=int, default=1024,
                   help="extraction window width")
    p.set_defaults(fn=cmd_build_dataset)

    p = sub.add_parser("train", help="train a network")
    p.add_argument("--task", choices=("extractor", "ident", "auth"),
                   required=True)
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--variant", choices=IDENT_VARIANTS, default="cnn")
    p.add_argument("--cnn-model", default=None,
                   help="trained ident model donating conv weights")
    p.add_argument("--lstm-model", default=None,
                   help="trained ident model donating the recurrent stack")
    p.add_argument("--lstm-hidden", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None,
                   help="default: the per-task library setting")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-budget", type=float, default=None,
                   help="seconds; stop early when exceeded")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="score a trained model")
    p.add_argument("--task", choices=("extractor", "ident", "auth"),
                   required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--confusion", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("roc", help="write an roc table for an auth model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--out", required=True, help="csv path")
    p.set_defaults(fn=cmd_roc)

    p = sub.add_parser("baseline", help="classical features + margin "
                       "classifier on an ident dataset")
    p.add_argument("--features", choices=("fourier", "wavelet", "eigen"),
                   required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--bins", type=int, default=40,
                   help="fourier bins per channel")
    p.add_argument("--k", type=int, default=40, help="eigen components")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_baseline)

    return parser


def _coerce(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _subcommand_parsers(parser):
    return parser._subparsers._group_actions[0].choices.values()


def _load_config(path, parser):
    """key=value lines; keys are option dests (underscores for dashes)."""
    valid = set()
    for sub in _subcommand_parsers(parser):
        valid.update(a.dest for a in sub._actions)
    overrides = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in valid:
            raise SystemExit(f"{path}:{lineno}: unknown config line {raw!r}")
        overrides[key] = _coerce(value.strip())
    return overrides


def _apply_config(parser, overrides):
    # subcommands parse into a fresh namespace, so defaults set on the
    # top-level parser never reach them; each subparser that actually
    # owns the option gets the override
    for sub in _subcommand_parsers(parser):
        dests = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in overrides.items() if k in dests})


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # peel --config off by hand: it must apply before the real parse
    if "--config" in argv:
        i = argv.index("--config")
        try:
            cfg_path = argv[i + 1]
        except IndexError:
            parser.error("--config needs a file argument")
        del argv[i : i + 2]
        _apply_config(parser, _load_config(cfg_path, parser))
    args = parser.parse_args(argv)
    args.fn(args)


if __name__ == "__main__":
    main()
