"""Command-line front end.

Subcommands: ingest, analyze, build-repo, predict-rule, featurize, train,
evaluate, crossval, embed, synth. Exit codes: 0 success, 1 usage error,
2 data error, 3 training divergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

from .corpus import (
    DATASET_PRESETS,
    build_datasets,
    ingest,
    load_labeled,
    read_jsonl,
    save_labeled,
    stratified_kfold,
    write_jsonl,
)
from .embeddings import SgnsConfig, load_embeddings, save_embeddings, train_sgns
from .errors import DataError, DivergenceError, UsageError
from .eval import confusion, crossvalidate, metrics_report, render_table
from .features import FeatureConfig, feature_matrix, feature_names, unit_vocabulary_from
from .neural import TrainingConfig
from .pipelines import (
    PIPELINE_NAMES,
    NeuralPipeline,
    RulePipeline,
    load_artifact,
    make_pipeline,
    save_artifact,
)
from .synth import generate
from .text import analyze, load_pos_lexicon, load_unit_aliases


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 1 for usage errors
        raise UsageError(message)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    if path.endswith(".toml"):
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _dump_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _out(args, name: str) -> str:
    os.makedirs(args.output_dir, exist_ok=True)
    return os.path.join(args.output_dir, name)


def _feature_config(cfg: dict, dim: int = 0) -> FeatureConfig:
    section = cfg.get("features", {})
    return FeatureConfig(
        sentiment=section.get("sentiment", True),
        emoticon=section.get("emoticon", True),
        punctuation=section.get("punctuation", True),
        number_value=section.get("number_value", True),
        unit_onehot=section.get("unit_onehot", True),
        tweet_embedding=section.get("tweet_embedding", dim > 0),
        embedding_dim=section.get("embedding_dim", dim),
    )


def _training_config(cfg: dict, args) -> TrainingConfig | None:
    section = dict(cfg.get("training", {}))
    if args.epochs is not None:
        section["epochs"] = args.epochs
    if not section and args.epochs is None:
        return None
    section.setdefault("seed", args.seed)
    return TrainingConfig(**section)


def _sgns_config(cfg: dict, args, dim_flag: int | None = None) -> SgnsConfig:
    section = dict(cfg.get("sgns", {}))
    if dim_flag is not None:
        section["dimension"] = dim_flag
    section.setdefault("seed", args.seed)
    return SgnsConfig(**section)


# -- subcommand handlers -----------------------------------------------------

def _cmd_ingest(args, cfg):
    rows = read_jsonl(args.input)
    tweets = ingest(rows)
    out = _out(args, args.output)
    save_labeled(tweets, out)
    print(f"ingested {len(tweets)} of {len(rows)} tweets -> {out}")
    return 0


def _cmd_analyze(args, cfg):
    lexicon = load_pos_lexicon(args.lexicon) if args.lexicon else None
    aliases = load_unit_aliases(args.unit_aliases) if args.unit_aliases else None
    tweets = load_labeled(args.input)
    analyzed = [
        analyze(t.id, t.text, t.label, t.raw_text, lexicon, aliases) for t in tweets
    ]
    out = _out(args, args.output)
    write_jsonl((a.to_dict() for a in analyzed), out)
    print(f"analyzed {len(analyzed)} tweets -> {out}")
    return 0


def _cmd_build_repo(args, cfg):
    tweets = load_labeled(args.input)
    table = load_embeddings(args.embeddings) if args.embeddings else None
    pipeline = RulePipeline(
        strategy=args.strategy,
        z=args.z,
        min_sim=args.min_sim,
        table=table,
        sgns=_sgns_config(cfg, args),
        seed=args.seed,
    )
    pipeline.fit(tweets)
    out = _out(args, args.output)
    save_artifact(pipeline, out)
    n_sarc = len(pipeline.model.sarc.entries)
    n_nonsarc = len(pipeline.model.nonsarc.entries)
    print(f"built repositories ({n_sarc} sarcastic / {n_nonsarc} non-sarcastic) -> {out}")
    return 0


def _cmd_predict_rule(args, cfg):
    pipeline = load_artifact(args.model)
    if not isinstance(pipeline, RulePipeline):
        raise DataError(f"{args.model}: not a rule model artifact")
    tweets = load_labeled(args.input)
    detailed = pipeline.predict_detailed(tweets)
    out = _out(args, args.output)
    write_jsonl(
        (
            {
                "id": t.id,
                "label": p.label,
                "path": p.path.value,
                "score": p.score,
                "interval": list(p.interval) if p.interval else None,
                "extra_mentions": len(p.extra_mentions),
            }
            for t, p in zip(tweets, detailed)
        ),
        out,
    )
    print(f"predicted {len(tweets)} tweets -> {out}")
    golds = [t.label for t in tweets]
    report = metrics_report(confusion([p.label for p in detailed], golds))
    print(render_table(report, title=f"rule-{pipeline.strategy}"))
    if args.report:
        _dump_json({"metrics": report.to_dict()}, _out(args, args.report))
    return 0


def _cmd_featurize(args, cfg):
    tweets = load_labeled(args.input)
    analyzed = [analyze(t.id, t.text, t.label, t.raw_text) for t in tweets]
    table = load_embeddings(args.embeddings) if args.embeddings else None
    config = _feature_config(cfg, dim=table.dimension if table else 0)
    config = dataclasses.replace(config, unit_vocabulary=unit_vocabulary_from(analyzed))
    X = feature_matrix(analyzed, config, table)
    out = _out(args, args.output)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"] + feature_names(config))
        for t, row in zip(tweets, X):
            writer.writerow([t.id, t.label] + [repr(float(v)) for v in row])
    print(f"wrote {X.shape[0]} x {X.shape[1]} feature matrix -> {out}")
    return 0


def _build_pipeline(args, cfg):
    table = load_embeddings(args.embeddings) if args.embeddings else None
    features = _feature_config(cfg, dim=table.dimension if table else 0)
    model_options = dict(cfg.get("model", {}))
    training = _training_config(cfg, args)
    kwargs = {}
    if args.pipeline in ("knn", "svm", "forest"):
        kwargs = dict(cfg.get("classic", {}))
        return make_pipeline(
            args.pipeline, seed=args.seed, table=table, features=features, **kwargs
        )
    if args.pipeline.startswith("rule-"):
        kwargs = dict(cfg.get("rule", {}))
        return make_pipeline(args.pipeline, seed=args.seed, table=table, **kwargs)
    return make_pipeline(
        args.pipeline,
        seed=args.seed,
        table=table,
        model_options=model_options,
        training=training,
    )


def _cmd_train(args, cfg):
    args.pipeline = args.model
    tweets = load_labeled(args.input)
    pipeline = _build_pipeline(args, cfg)
    pipeline.fit(tweets)
    artifact = _out(args, args.artifact)
    save_artifact(pipeline, artifact)
    report_payload: dict = {"pipeline": args.model, "seed": args.seed, "trained_on": len(tweets)}
    if isinstance(pipeline, NeuralPipeline) and pipeline.result is not None:
        curve_path = _out(args, "loss_curve.csv")
        with open(curve_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_loss"])
            for epoch, tr, val in pipeline.result.curve_rows():
                writer.writerow([epoch, repr(tr), "" if val is None else repr(val)])
        report_payload["final_train_loss"] = pipeline.result.train_losses[-1]
        print(f"loss curve -> {curve_path}")
    preds = pipeline.predict(tweets)
    report = metrics_report(confusion(preds, [t.label for t in tweets]))
    report_payload["train_metrics"] = report.to_dict()
    _dump_json(report_payload, _out(args, "train_report.json"))
    print(f"model artifact -> {artifact}")
    print(render_table(report, title=f"{args.model} (training set)"))
    return 0


def _cmd_evaluate(args, cfg):
    pipeline = load_artifact(args.artifact)
    tweets = load_labeled(args.input)
    preds = pipeline.predict(tweets)
    report = metrics_report(confusion(preds, [t.label for t in tweets]))
    payload = {"artifact": os.path.basename(args.artifact), "metrics": report.to_dict()}
    _dump_json(payload, _out(args, args.report))
    print(render_table(report, title="evaluation"))
    return 0


def _cmd_crossval(args, cfg):
    tweets = load_labeled(args.input)
    folds = stratified_kfold(tweets, args.k, args.seed)
    result = crossvalidate(lambda: _build_pipeline(args, cfg), tweets, folds)
    payload = {
        "pipeline": args.pipeline,
        "k": args.k,
        "seed": args.seed,
        **result.to_dict(),
    }
    _dump_json(payload, _out(args, args.report))
    print(render_table(result.mean, title=f"{args.pipeline} {args.k}-fold mean"))
    return 0


def _cmd_embed(args, cfg):
    if args.load:
        table = load_embeddings(args.load, expected_d=args.dim)
        print(f"loaded {len(table)} vectors of dimension {table.dimension}")
        if args.output:
            save_embeddings(table, _out(args, args.output))
        return 0
    tweets = load_labeled(args.input)
    from .text import tokenize

    token_lists = [[tok.surface for tok in tokenize(t.text)] for t in tweets]
    config = _sgns_config(cfg, args, dim_flag=args.dim)
    result = train_sgns(token_lists, config)
    out = _out(args, args.output or "vectors.txt")
    save_embeddings(result.table, out)
    losses = ", ".join(f"{v:.4f}" for v in result.epoch_losses)
    print(f"trained {len(result.table)} vectors (epoch losses: {losses}) -> {out}")
    return 0


def _cmd_synth(args, cfg):
    tweets = generate(n_tweets=args.n, seed=args.seed)
    out = _out(args, args.output)
    save_labeled(tweets, out)
    print(f"generated {len(tweets)} synthetic tweets -> {out}")
    return 0


def _cmd_dataset(args, cfg):
    tweets = load_labeled(args.input)
    spec = DATASET_PRESETS[args.preset]
    sample = build_datasets(tweets, spec, args.seed)
    out = _out(args, args.output)
    save_labeled(sample, out)
    print(f"dataset {spec.name}: {len(sample)} tweets -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="numsarc", description=__doc__)
    parser.add_argument("--config", help="TOML or JSON config file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output-dir", default=".")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="raw JSONL -> labeled, normalized JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="labeled.jsonl")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("analyze", help="labeled JSONL -> analyzed JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="analyzed.jsonl")
    p.add_argument("--lexicon", help="override POS lexicon (word<TAB>TAG)")
    p.add_argument("--unit-aliases", help="override unit alias table")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("build-repo", help="build the rule repositories")
    p.add_argument("--input", required=True)
    p.add_argument("--strategy", choices=("exact", "cosine"), default="exact")
    p.add_argument("--embeddings", help="vector file for the cosine strategy")
    p.add_argument("--z", type=float, default=2.58)
    p.add_argument("--min-sim", type=float, default=0.5)
    p.add_argument("--output", default="rule_model.json")
    p.set_defaults(func=_cmd_build_repo)

    p = sub.add_parser("predict-rule", help="apply a rule model to tweets")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="predictions.jsonl")
    p.add_argument("--report", help="also write a metrics JSON")
    p.set_defaults(func=_cmd_predict_rule)

    p = sub.add_parser("featurize", help="labeled JSONL -> feature CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--output", default="features.csv")
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("train", help="train any pipeline, save an artifact")
    p.add_argument("--model", required=True, choices=PIPELINE_NAMES)
    p.add_argument("--input", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--epochs", type=int)
    p.add_argument("--artifact", default="model.json")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate an artifact on labeled tweets")
    p.add_argument("--artifact", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--report", default="eval_report.json")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("crossval", help="k-fold cross-validation")
    p.add_argument("--pipeline", required=True, choices=PIPELINE_NAMES)
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--embeddings")
    p.add_argument("--epochs", type=int)
    p.add_argument("--report", default="crossval_report.json")
    p.set_defaults(func=_cmd_crossval)

    p = sub.add_parser("embed", help="train SGNS vectors or validate a vector file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--train-sgns", dest="input", help="labeled JSONL to train on")
    group.add_argument("--load", help="existing vector file to validate")
    p.add_argument("--dim", type=int)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("synth", help="generate the synthetic acceptance corpus")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--output", default="synthetic.jsonl")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("dataset", help="sample a preset dataset shape")
    p.add_argument("--input", required=True)
    p.add_argument("--preset", choices=sorted(DATASET_PRESETS), required=True)
    p.add_argument("--output", default="dataset.jsonl")
    p.set_defaults(func=_cmd_dataset)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
