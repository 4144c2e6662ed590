"""Command-line front end for dataset generation, training, and sweeps."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import harness
from .codebook import label_layout_hash
from .dataset import read_dataset, write_dataset
from .harness import ConfigError, default_config, load_config
from .mlp import load_model, save_model

DATASET_FILE = "dataset.risd"
MODEL_FILE = "model.rism"
EVAL_CSV = "eval.csv"


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="experiment config file (key = value sections)")
    parser.add_argument("--seed", type=int, metavar="U64", help="override the master seed")
    parser.add_argument("--out", metavar="DIR", default=".", help="output directory (default: cwd)")
    parser.add_argument(
        "--codebook",
        choices=("ideal", "practical"),
        help="override the codebook mode (single-mode subcommands only; sweeps always run both)",
    )


def _load(args) -> harness.ExperimentConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg,
            master_seed=args.seed,
            training=dataclasses.replace(cfg.training, seed=args.seed),
        )
    if args.codebook is not None:
        cfg = dataclasses.replace(cfg, codebook_mode=args.codebook)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_gen_dataset(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    data = harness.generate_training_dataset(cfg)
    path = out / DATASET_FILE
    write_dataset(data, path)
    print(f"wrote {len(data)} samples to {path}")
    return 0


def _cmd_train(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    if args.dataset:
        data = read_dataset(args.dataset)
        have = (data.n_tx, data.n_rx, data.n_h, data.n_v)
        want = (cfg.system.n_tx, cfg.system.n_rx, cfg.system.n_h, cfg.system.n_v)
        if have != want:
            raise ValueError(
                f"{args.dataset}: dataset dims (n_tx,n_rx,n_h,n_v)={have} "
                f"do not match the config system {want}"
            )
        if data.codebook_mode != cfg.codebook_mode:
            print(
                f"note: dataset codebook mode {data.codebook_mode!r} overrides config "
                f"{cfg.codebook_mode!r}",
                file=sys.stderr,
            )
            cfg = dataclasses.replace(cfg, codebook_mode=data.codebook_mode)
    else:
        data = harness.generate_training_dataset(cfg)
    model, log = harness.train_model(cfg, data)
    path = out / MODEL_FILE
    save_model(model, path)
    last = log.epochs[-1]
    print(
        f"wrote {path} after {len(log.epochs)} epochs "
        f"(best epoch {log.best_epoch}, val loss {last.val_loss:.4f}, "
        f"val accuracy {last.val_accuracy:.3f})"
    )
    return 0


def _cmd_eval(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    runtime = harness.runtime_for(cfg)
    model_path = args.model or (out / MODEL_FILE)
    model = load_model(model_path, expected_label_layout_hash=label_layout_hash(runtime.codebook))
    rates = harness.evaluate_schemes(
        runtime, model, cfg.master_seed, cfg.n_test, eval_key=(harness._TAG_EVAL,)
    )
    es, dnn, rnd = rates.means
    ratio = dnn / es if es > 0 else 0.0
    path = out / EVAL_CSV
    path.write_text(
        "es_rate,dnn_rate,random_rate,dnn_over_es\n"
        f"{es:.10g},{dnn:.10g},{rnd:.10g},{ratio:.10g}\n"
    )
    print(
        f"n={cfg.n_test} mode={cfg.codebook_mode}: ES {es:.3f}, DNN {dnn:.3f} "
        f"({100 * ratio:.2f}% of ES), random {rnd:.3f} bps/Hz -> {path}"
    )
    return 0


def _cmd_benchmark(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    rows = harness.run_timing_benchmark(cfg, out)
    for n, es_s, dnn_s, speedup, ratio in rows:
        print(
            f"N={n}: ES {es_s * 1e3:.3f} ms, DNN {dnn_s * 1e3:.3f} ms "
            f"({speedup:.1f}x), rate ratio {ratio:.4f}"
        )
    print(f"wrote {out / harness.BENCHMARK_CSV}")
    return 0


def _cmd_sweep_elements(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    harness.run_rate_vs_elements(cfg, out)
    print(f"wrote {out / harness.SWEEP_ELEMENTS_CSV}")
    return 0


def _cmd_sweep_distance(args) -> int:
    cfg = _load(args)
    out = _out_dir(args)
    harness.run_rate_vs_distance(cfg, out)
    print(f"wrote {out / harness.SWEEP_DISTANCE_CSV}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-beamsel",
        description="RIS codeword selection: synthetic channels, codebooks, "
        "exhaustive-search labels, MLP classifier, sweeps and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("gen-dataset", help="generate a labeled training dataset file")
    _common_flags(p)
    p.set_defaults(handler=_cmd_gen_dataset)

    p = sub.add_parser("train", help="train the classifier and save the model")
    _common_flags(p)
    p.add_argument("--dataset", metavar="PATH", help="existing dataset file (else generated)")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model against ES and random selection")
    _common_flags(p)
    p.add_argument("--model", metavar="PATH", help="model file (default: <out>/model.rism)")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("benchmark", help="per-decision latency of ES vs the classifier")
    _common_flags(p)
    p.set_defaults(handler=_cmd_benchmark)

    p = sub.add_parser("sweep-elements", help="mean rates vs RIS element count")
    _common_flags(p)
    p.set_defaults(handler=_cmd_sweep_elements)

    p = sub.add_parser("sweep-distance", help="mean rates vs receiver distance")
    _common_flags(p)
    p.set_defaults(handler=_cmd_sweep_distance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
