"""End-to-end pipelines: rule cascade, feature classifiers, neural models.

A pipeline owns everything learned from training data (repositories, unit
vocabulary, scaler, token vocabulary, weights) and can be serialized to a
single JSON artifact and back.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json

import numpy as np

from .classic_ml import (
    ForestModel,
    KnnModel,
    Standardizer,
    SvmModel,
    forest_predict,
    forest_train,
    knn_classify,
    svm_decision,
    svm_grid_search,
    svm_train,
)
from .embeddings import EmbeddingTable, SgnsConfig, train_sgns
from .errors import DataError
from .features import FeatureConfig, feature_matrix, unit_vocabulary_from
from .neural import TrainingConfig, build_model, build_vocab, pad_and_index
from .neural.models import (
    CnnFfConfig,
    CnnLstmFfConfig,
    LstmFfConfig,
    load_checkpoint,
    save_checkpoint,
)
from .neural.training import predict_proba, train as train_neural
from .rulebase import RuleModel, build_repository, load_rule_model, save_rule_model
from .text import AnalyzedTweet, analyze, tokenize

__all__ = [
    "PIPELINE_NAMES",
    "RulePipeline",
    "ClassicPipeline",
    "NeuralPipeline",
    "make_pipeline",
    "save_artifact",
    "load_artifact",
    "DEFAULT_SGNS",
]

PIPELINE_NAMES = (
    "rule-exact",
    "rule-cosine",
    "knn",
    "svm",
    "forest",
    "cnn-ff",
    "lstm-ff",
    "cnn-lstm-ff",
)

# Desk-scale stand-in for the external 200-D embedding training run.
DEFAULT_SGNS = SgnsConfig(dimension=50, window=2, negative=5, epochs=3, min_count=1)

_ARCH_CONFIGS = {
    "cnn-ff": CnnFfConfig,
    "lstm-ff": LstmFfConfig,
    "cnn-lstm-ff": CnnLstmFfConfig,
}


def _analyze_all(tweets) -> list[AnalyzedTweet]:
    return [analyze(t.id, t.text, t.label, t.raw_text) for t in tweets]


def _table_to_dict(table: EmbeddingTable) -> dict:
    return {"words": table.words(), "matrix": table.matrix.tolist()}


def _table_from_dict(d: dict) -> EmbeddingTable:
    vocab = {w: i for i, w in enumerate(d["words"])}
    return EmbeddingTable(vocab, np.array(d["matrix"], dtype=np.float64))


def _fingerprint(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


class RulePipeline:
    """Repository builder plus the prediction cascade, exact or cosine flavor."""

    def __init__(
        self,
        strategy: str = "exact",
        z: float = 2.58,
        min_sim: float = 0.5,
        table: EmbeddingTable | None = None,
        sgns: SgnsConfig | None = None,
        seed: int = 0,
    ):
        if strategy not in ("exact", "cosine"):
            raise DataError(f"RulePipeline: unknown strategy {strategy!r}")
        self.strategy = strategy
        self.z = z
        self.min_sim = min_sim
        self.table = table
        self.sgns = sgns or dataclasses.replace(DEFAULT_SGNS, seed=seed)
        self.model: RuleModel | None = None

    def fit(self, train) -> None:
        analyzed = _analyze_all(train)
        table = None
        if self.strategy == "cosine":
            if self.table is None:
                self.table = train_sgns([a.surfaces for a in analyzed], self.sgns).table
            table = self.table
        sarc = build_repository([a for a in analyzed if a.label == 1], 1, table)
        nonsarc = build_repository([a for a in analyzed if a.label == 0], 0, table)
        self.model = RuleModel(
            sarc=sarc,
            nonsarc=nonsarc,
            strategy=self.strategy,
            z=self.z,
            min_sim=self.min_sim,
            dimension=table.dimension if table is not None else None,
            table_fingerprint=table.fingerprint() if table is not None else None,
        )

    def predict_detailed(self, tweets):
        if self.model is None:
            raise DataError("RulePipeline: fit() first")
        return [
            self.model.predict(analyze(t.id, t.text, None, t.raw_text), self.table)
            for t in tweets
        ]

    def predict(self, tweets) -> list[int]:
        return [p.label for p in self.predict_detailed(tweets)]


class ClassicPipeline:
    """Feature extraction, optional standardization, then KNN/SVM/forest."""

    def __init__(
        self,
        kind: str,
        features: FeatureConfig | None = None,
        table: EmbeddingTable | None = None,
        knn_k: int = 3,
        svm_c: float = 1.0,
        svm_gamma: float | None = None,
        grid_search: bool = False,
        n_estimators: int = 10,
        seed: int = 0,
    ):
        if kind not in ("knn", "svm", "forest"):
            raise DataError(f"ClassicPipeline: unknown classifier {kind!r}")
        base = features or FeatureConfig()
        if base.tweet_embedding and table is None:
            raise DataError("ClassicPipeline: tweet_embedding features need a table")
        self.kind = kind
        self.base_features = base
        self.table = table
        self.knn_k = knn_k
        self.svm_c = svm_c
        self.svm_gamma = svm_gamma
        self.grid_search = grid_search
        self.n_estimators = n_estimators
        self.seed = seed
        self.features: FeatureConfig | None = None
        self.scaler: Standardizer | None = None
        self.model: KnnModel | SvmModel | ForestModel | None = None

    def fit(self, train) -> None:
        analyzed = _analyze_all(train)
        unit_vocab = (
            unit_vocabulary_from(analyzed) if self.base_features.unit_onehot else ()
        )
        self.features = dataclasses.replace(self.base_features, unit_vocabulary=unit_vocab)
        X = feature_matrix(analyzed, self.features, self.table)
        y = np.array([t.label for t in train], dtype=np.int64)
        if self.kind in ("knn", "svm"):
            self.scaler = Standardizer.fit(X)
            X = self.scaler.transform(X)
        if self.kind == "knn":
            self.model = KnnModel(self.knn_k, X, y)
        elif self.kind == "svm":
            y_pm = 2.0 * y - 1.0
            c, gamma = self.svm_c, self.svm_gamma
            if self.grid_search:
                c, gamma = svm_grid_search(X, y_pm, seed=self.seed)
            self.model = svm_train(X, y_pm, C=c, gamma=gamma)
        else:
            self.model = forest_train(X, y, n_estimators=self.n_estimators, seed=self.seed)

    def _featurize(self, tweets) -> np.ndarray:
        analyzed = [analyze(t.id, t.text, None, t.raw_text) for t in tweets]
        X = feature_matrix(analyzed, self.features, self.table)
        if self.scaler is not None:
            X = self.scaler.transform(X)
        return X

    def predict(self, tweets) -> list[int]:
        if self.model is None:
            raise DataError("ClassicPipeline: fit() first")
        X = self._featurize(tweets)
        if self.kind == "knn":
            return [knn_classify(self.model, x) for x in X]
        if self.kind == "svm":
            return [int(v > 0.0) for v in svm_decision(self.model, X)]
        return [forest_predict(self.model, x) for x in X]


class NeuralPipeline:
    """Tokenize, index, train one of the three architectures."""

    def __init__(
        self,
        arch: str,
        model_options: dict | None = None,
        training: TrainingConfig | None = None,
        pretrained: EmbeddingTable | None = None,
        seed: int = 0,
    ):
        if arch not in _ARCH_CONFIGS:
            raise DataError(f"NeuralPipeline: unknown architecture {arch!r}")
        self.arch = arch
        self.model_options = dict(model_options or {})
        if training is None:
            # LSTM-FF trains with Adagrad at lr 0.3; the others use plain SGD.
            if arch == "lstm-ff":
                training = TrainingConfig(optimizer="adagrad", learning_rate=0.3, seed=seed)
            else:
                training = TrainingConfig(optimizer="sgd", learning_rate=0.1, seed=seed)
        self.training = training
        self.pretrained = pretrained
        self.seed = seed
        self.vocab: dict[str, int] | None = None
        self.model = None
        self.result = None

    @property
    def seq_len(self) -> int:
        return int(self.model_options.get("seq_len", 36))

    def _index(self, tweets) -> np.ndarray:
        return np.stack(
            [
                pad_and_index(
                    [tok.surface for tok in tokenize(t.text)], self.vocab, self.seq_len
                )
                for t in tweets
            ]
        )

    def fit(self, train) -> None:
        token_lists = [[tok.surface for tok in tokenize(t.text)] for t in train]
        self.vocab = build_vocab(token_lists)
        config = _ARCH_CONFIGS[self.arch](vocab_size=len(self.vocab), **self.model_options)
        self.model = build_model(
            self.arch, config, seed=self.seed, pretrained=self.pretrained, vocab=self.vocab
        )
        X = self._index(train)
        y = np.array([t.label for t in train], dtype=np.float64)
        self.result = train_neural(self.model, X, y, self.training)

    def predict_proba(self, tweets) -> np.ndarray:
        if self.model is None:
            raise DataError("NeuralPipeline: fit() first")
        return predict_proba(self.model, self._index(tweets))

    def predict(self, tweets) -> list[int]:
        return [int(p >= 0.5) for p in self.predict_proba(tweets)]


def make_pipeline(
    name: str,
    seed: int = 0,
    table: EmbeddingTable | None = None,
    features: FeatureConfig | None = None,
    model_options: dict | None = None,
    training: TrainingConfig | None = None,
    **kwargs,
):
    if name not in PIPELINE_NAMES:
        raise DataError(f"unknown pipeline {name!r}; choose from {PIPELINE_NAMES}")
    if name.startswith("rule-"):
        return RulePipeline(strategy=name.split("-", 1)[1], table=table, seed=seed, **kwargs)
    if name in ("knn", "svm", "forest"):
        return ClassicPipeline(name, features=features, table=table, seed=seed, **kwargs)
    return NeuralPipeline(
        name,
        model_options=model_options,
        training=training,
        pretrained=table,
        seed=seed,
        **kwargs,
    )


# ---------------------------------------------------------------------------
# artifacts

def save_artifact(pipeline, path: str) -> None:
    if isinstance(pipeline, RulePipeline):
        if pipeline.model is None:
            raise DataError("save_artifact: pipeline not fitted")
        save_rule_model(pipeline.model, path)
        if pipeline.table is not None:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
            payload["table"] = _table_to_dict(pipeline.table)
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, sort_keys=True)
                fh.write("\n")
        return
    if isinstance(pipeline, ClassicPipeline):
        if pipeline.model is None:
            raise DataError("save_artifact: pipeline not fitted")
        feature_payload = dataclasses.asdict(pipeline.features)
        feature_payload["unit_vocabulary"] = list(pipeline.features.unit_vocabulary)
        payload = {
            "format": "numsarc-classic",
            "version": 1,
            "classifier": pipeline.kind,
            "features": feature_payload,
            "scaler": pipeline.scaler.to_dict() if pipeline.scaler else None,
            "model": pipeline.model.to_dict(),
            "knn_k": pipeline.knn_k,
            "n_estimators": pipeline.n_estimators,
            "seed": pipeline.seed,
            "table": _table_to_dict(pipeline.table) if pipeline.table else None,
        }
        payload["config_fingerprint"] = _fingerprint(
            {"classifier": payload["classifier"], "features": payload["features"]}
        )
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")
        return
    if isinstance(pipeline, NeuralPipeline):
        if pipeline.model is None:
            raise DataError("save_artifact: pipeline not fitted")
        save_checkpoint(pipeline.model, pipeline.vocab, path)
        return
    raise DataError(f"save_artifact: unsupported pipeline type {type(pipeline)!r}")


def load_artifact(path: str):
    """Rebuild a ready-to-predict pipeline from an artifact file."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    fmt = payload.get("format")
    if fmt == "numsarc-rule-model":
        pipeline = RulePipeline(strategy=payload["strategy"])
        pipeline.model = load_rule_model(path)
        pipeline.z = pipeline.model.z
        pipeline.min_sim = pipeline.model.min_sim
        if payload.get("table") is not None:
            pipeline.table = _table_from_dict(payload["table"])
        return pipeline
    if fmt == "numsarc-classic":
        features = dict(payload["features"])
        features["unit_vocabulary"] = tuple(features["unit_vocabulary"])
        config = FeatureConfig(**features)
        table = _table_from_dict(payload["table"]) if payload.get("table") else None
        pipeline = ClassicPipeline(
            payload["classifier"],
            features=config,
            table=table,
            knn_k=payload.get("knn_k", 3),
            n_estimators=payload.get("n_estimators", 10),
            seed=payload.get("seed", 0),
        )
        pipeline.features = config
        if payload.get("scaler") is not None:
            pipeline.scaler = Standardizer.from_dict(payload["scaler"])
        model_dict = payload["model"]
        if payload["classifier"] == "knn":
            pipeline.model = KnnModel.from_dict(model_dict)
        elif payload["classifier"] == "svm":
            pipeline.model = SvmModel.from_dict(model_dict)
        else:
            pipeline.model = ForestModel.from_dict(model_dict)
        return pipeline
    if fmt == "numsarc-neural":
        model, vocab = load_checkpoint(path)
        pipeline = NeuralPipeline(model.arch)
        pipeline.model = model
        pipeline.vocab = vocab
        pipeline.model_options = {"seq_len": model.config.seq_len}
        return pipeline
    raise DataError(f"{path}: unrecognized artifact format {fmt!r}")
