"""Command-line interface: train, eval, expand, synth, grad-check, proto-dump.

Every run prints its resolved configuration before doing work, so any result
can be reproduced from the printed key/value lines plus the input files.
Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import TrainConfig, apply_overrides, load_config
from .errors import ConfigError, ParseError, VersionError, VteError
from .expansion import (
    evaluate,
    expand,
    load_candidates,
    load_predictions,
    save_metrics,
    save_predictions,
    score_pair,
)
from .gradcheck import run_grad_check
from .model import load_checkpoint, save_checkpoint
from .prototypes import dump_clusters
from .synth import SynthConfig, generate, write_dataset
from .taxonomy import load_edges, save_edges
from .training import TrainingPair, train
from . import embeddings

VALIDATION_ERRORS = (ConfigError, ParseError, VersionError, FileNotFoundError, ValueError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # unknown flags are a validation failure, not exit 2
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _print_config(data: dict) -> None:
    print("# resolved config")
    for key in sorted(data):
        print(f"{key} = {data[key]}")


def _env_seed() -> int | None:
    raw = os.environ.get("VTE_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"VTE_SEED must be an integer, got {raw!r}") from exc


def _resolve_train_config(args) -> TrainConfig:
    config = load_config(args.config) if args.config else TrainConfig()
    if args.config is None and _env_seed() is not None:
        config.seed = _env_seed()
    config = apply_overrides(config, args.set or [])
    return config.validate()


def _load_table(text_path, image_path):
    table = embeddings.EmbeddingTable()
    warnings = 0
    if text_path:
        fragment, dups = embeddings.load_embeddings(text_path, "text")
        table.update(fragment)
        warnings += dups
    if image_path:
        fragment, dups = embeddings.load_embeddings(image_path, "image")
        table.update(fragment)
        warnings += dups
    if warnings:
        print(f"warning: {warnings} duplicate embedding keys (last record kept)",
              file=sys.stderr)
    return table


def _load_positives(path) -> list[TrainingPair]:
    pairs = []
    for cand in load_candidates(path):
        if cand.label not in (None, 1):
            raise ConfigError(f"training pair {cand.hyper!r} -> {cand.hypo!r} "
                              "has a non-positive label")
        pairs.append(TrainingPair(hyper=cand.hyper, hypo=cand.hypo,
                                  image_key=cand.image_key, label=1))
    return pairs


# --- subcommands -------------------------------------------------------------


def _cmd_train(args) -> int:
    config = _resolve_train_config(args)
    _print_config(config.to_dict())
    taxonomy = load_edges(args.taxonomy)
    table = _load_table(args.text, args.images)
    positives = _load_positives(args.positives)
    model, log = train(config, taxonomy, table, positives)
    save_checkpoint(model, args.out)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            for entry in log:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
    if log:
        last = log[-1]
        print(f"epoch {last['epoch']}: total {last['total']:.6f} "
              f"(text {last['text']:.6f}, proto {last['proto']:.6f}, "
              f"hpc {last['hpc']:.6f}, bce {last['bce']:.6f})")
    print(f"checkpoint written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    if args.predictions_in:
        _print_config({"predictions_in": args.predictions_in, "out": args.out})
        records = load_predictions(args.predictions_in)
    else:
        for name in ("checkpoint", "candidates", "text"):
            if getattr(args, name) is None:
                raise ConfigError(f"--{name} is required unless --predictions-in is given")
        model = load_checkpoint(args.checkpoint)
        _print_config(model.config)
        table = _load_table(args.text, args.images)
        records = []
        for cand in load_candidates(args.candidates):
            records.append(score_pair(model, cand.hyper, cand.hypo, table,
                                      image_key=cand.image_key, gold=cand.label))
        if args.predictions_out:
            save_predictions(records, args.predictions_out)
    report = evaluate(records)
    save_metrics(report, args.out)
    print(report.to_json())
    return 0


def _cmd_expand(args) -> int:
    model = load_checkpoint(args.checkpoint)
    _print_config(model.config)
    taxonomy = load_edges(args.taxonomy)
    table = _load_table(args.text, args.images)
    candidates = load_candidates(args.candidates)
    result = expand(model, taxonomy, candidates, table)
    save_edges(result.taxonomy, args.out_edges)
    save_predictions(result.records, args.out_predictions)
    print(f"accepted {len(result.accepted)} of {len(result.records)} scored candidates "
          f"({len(result.unprocessed)} never reached, {len(result.skipped)} skipped)")
    return 0


def _cmd_synth(args) -> int:
    seed = args.seed
    if seed is None:
        env = _env_seed()
        seed = env if env is not None else 0
    config = SynthConfig(
        num_hypernyms=args.classes,
        hyponyms_per_hypernym=args.items_per_class,
        text_dim=args.text_dim,
        image_dim=args.image_dim,
        sigma_within=args.sigma_within,
        sigma_between=args.sigma_between,
        confuser_fraction=args.confuser_fraction,
        seed=seed,
    ).validate()
    _print_config(config.to_dict())
    dataset = generate(config)
    write_dataset(dataset, args.out)
    print(f"dataset written to {args.out}: {len(dataset.positives)} training pairs, "
          f"{len(dataset.eval_candidates)} eval candidates, "
          f"{len(dataset.confusers)} confusers")
    return 0


def _cmd_grad_check(args) -> int:
    seed = args.seed
    if seed is None:
        env = _env_seed()
        seed = env if env is not None else 0
    _print_config({"seed": seed, "tolerance": args.tolerance})
    report = run_grad_check(seed=seed)
    worst = 0.0
    for name, err in report.items():
        print(f"{name}: max rel err {err:.3e}")
        worst = max(worst, err)
    print(f"worst tensor: {worst:.3e}")
    if worst >= args.tolerance:
        print(f"FAILED tolerance {args.tolerance}", file=sys.stderr)
        return 1
    return 0


def _cmd_proto_dump(args) -> int:
    model = load_checkpoint(args.checkpoint)
    _print_config(model.config)
    table = _load_table(None, args.images)
    from .heads import encode_image

    instances = ((key, encode_image(model.heads, vec))
                 for key, vec in table.images.items())
    clusters = dump_clusters(model.prototypes, instances)
    with open(args.out, "w", encoding="utf-8") as fh:
        for idx, keys in clusters.items():
            fh.write(json.dumps({"prototype": idx, "instances": keys},
                                ensure_ascii=False) + "\n")
    print(f"{len(clusters)} non-empty clusters written to {args.out}")
    return 0


# --- wiring ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vte", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[], help="train a model and write a checkpoint")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable; wins over --config)")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--text", required=True, help="text embeddings JSONL")
    p.add_argument("--images", help="image embeddings JSONL")
    p.add_argument("--positives", required=True, help="training pairs TSV")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--log", help="per-epoch loss JSONL")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score labeled candidates and write metrics")
    p.add_argument("--checkpoint")
    p.add_argument("--candidates")
    p.add_argument("--text")
    p.add_argument("--images")
    p.add_argument("--predictions-in", help="evaluate an existing predictions JSONL")
    p.add_argument("--predictions-out", help="also write scored predictions JSONL")
    p.add_argument("--out", required=True, help="metrics JSON path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("expand", help="attach accepted candidates level by level")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--images")
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-predictions", required=True)
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--items-per-class", type=int, default=20)
    p.add_argument("--text-dim", type=int, default=32)
    p.add_argument("--image-dim", type=int, default=32)
    p.add_argument("--sigma-within", type=float, default=0.2)
    p.add_argument("--sigma-between", type=float, default=1.0)
    p.add_argument("--confuser-fraction", type=float, default=0.2)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("grad-check", help="verify analytic gradients against the oracle")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=_cmd_grad_check)

    p = sub.add_parser("proto-dump", help="write image-key clusters per prototype")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--images", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_proto_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (VteError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
