"""The three tweet classifiers: CNN-FF, LSTM-FF and CNN-LSTM-FF.

All take a padded index sequence (default length 36, PAD=0, UNK=1), embed it,
and end in dropout -> affine -> sigmoid. Forward passes build an autodiff
graph; eval mode (train=False) disables dropout and is a pure function.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from ..embeddings import EmbeddingTable
from ..errors import DataError
from .autodiff import Tensor, concat, embedding, sliding_windows

__all__ = [
    "PAD_INDEX",
    "UNK_INDEX",
    "SEQUENCE_LENGTH",
    "PAD_TOKEN",
    "UNK_TOKEN",
    "ConvFilter",
    "CnnFfConfig",
    "LstmFfConfig",
    "CnnLstmFfConfig",
    "CnnFf",
    "LstmFf",
    "CnnLstmFf",
    "LstmCell",
    "build_vocab",
    "pad_and_index",
    "conv_feature_map",
    "max_over_time_pool",
    "bce_loss",
    "build_model",
    "save_checkpoint",
    "load_checkpoint",
]

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_INDEX = 0
UNK_INDEX = 1
SEQUENCE_LENGTH = 36


def build_vocab(token_lists: Sequence[Sequence[str]], min_count: int = 1) -> dict[str, int]:
    """Token -> index map with PAD=0 and UNK=1 reserved."""
    from collections import Counter

    counts = Counter(tok for toks in token_lists for tok in toks)
    vocab = {PAD_TOKEN: PAD_INDEX, UNK_TOKEN: UNK_INDEX}
    for word, _ in sorted(counts.items(), key=lambda wc: (-wc[1], wc[0])):
        if counts[word] >= min_count:
            vocab[word] = len(vocab)
    return vocab


def pad_and_index(
    tokens: Sequence[str], vocab: dict[str, int], length: int = SEQUENCE_LENGTH
) -> np.ndarray:
    """Map tokens to indices (OOV -> UNK), truncate or right-pad to ``length``."""
    idx = [vocab.get(t, UNK_INDEX) for t in tokens[:length]]
    idx.extend([PAD_INDEX] * (length - len(idx)))
    return np.asarray(idx, dtype=np.int64)


def _sigmoid_np(x: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


_NP_ACTIVATIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
    "sigmoid": _sigmoid_np,
    "relu": lambda x: np.maximum(x, 0.0),
}


def _apply_activation(t: Tensor, name: str) -> Tensor:
    if name == "tanh":
        return t.tanh()
    if name == "sigmoid":
        return t.sigmoid()
    if name == "relu":
        return t.relu()
    raise DataError(f"unknown activation {name!r}")


@dataclass(frozen=True)
class ConvFilter:
    """One convolution filter: width x embedding-dim weights plus a bias."""

    weights: np.ndarray  # (width, d)
    bias: float

    @property
    def width(self) -> int:
        return self.weights.shape[0]


def conv_feature_map(
    input_matrix: np.ndarray, filt: ConvFilter, func: str = "tanh"
) -> np.ndarray:
    """Valid 1-D convolution of a (S, d) matrix with one filter.

    Position p gets func(sum(window_p * weights) + bias); the map has length
    S - width + 1.
    """
    s = input_matrix.shape[0]
    k = filt.width
    if k > s:
        raise DataError(f"filter width {k} exceeds sequence length {s}")
    act = _NP_ACTIVATIONS[func]
    raw = np.array(
        [float(np.sum(input_matrix[p : p + k] * filt.weights)) + filt.bias for p in range(s - k + 1)]
    )
    return act(raw)


def max_over_time_pool(feature_map: np.ndarray) -> float:
    if len(feature_map) == 0:
        raise DataError("max_over_time_pool: empty feature map")
    return float(np.max(feature_map))


def bce_loss(yhat: Tensor, targets: np.ndarray) -> Tensor:
    """Mean binary cross-entropy; predictions clamped to [1e-7, 1 - 1e-7]."""
    targets = np.asarray(targets, dtype=np.float64)
    if yhat.shape != targets.shape:
        raise DataError(f"bce_loss: shape mismatch {yhat.shape} vs {targets.shape}")
    p = yhat.clip(1e-7, 1.0 - 1e-7)
    ll = p.log() * targets + (1.0 - p).log() * (1.0 - targets)
    return -ll.mean()


def _glorot(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _init_embedding(
    rng: np.random.Generator,
    vocab_size: int,
    dim: int,
    pretrained: EmbeddingTable | None,
    vocab: dict[str, int] | None,
) -> np.ndarray:
    weights = rng.uniform(-0.05, 0.05, size=(vocab_size, dim))
    if pretrained is not None:
        if vocab is None:
            raise DataError("pretrained initialization needs the token vocabulary")
        if pretrained.dimension != dim:
            raise DataError(
                f"pretrained table dimension {pretrained.dimension} != model dimension {dim}"
            )
        for word, row in vocab.items():
            vec = pretrained.vector(word)
            if vec is not None and 0 <= row < vocab_size:
                weights[row] = vec
    weights[PAD_INDEX] = 0.0  # PAD stays at the zero vector
    return weights


def _dropout(t: Tensor, p: float, train: bool, rng: np.random.Generator | None) -> Tensor:
    if not train or p <= 0.0:
        return t
    if rng is None:
        raise DataError("training-mode forward needs an rng for dropout")
    mask = (rng.random(t.shape) >= p) / (1.0 - p)  # inverted dropout
    return t * mask


class LstmCell:
    """Standard LSTM cell over concatenated [h_{t-1}, x_t] inputs."""

    def __init__(self, input_dim: int, hidden_dim: int, rng: np.random.Generator, prefix: str = "lstm"):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        shape = (hidden_dim + input_dim, hidden_dim)
        self.w_i = Tensor(_glorot(rng, shape), requires_grad=True, name=f"{prefix}.w_i")
        self.w_f = Tensor(_glorot(rng, shape), requires_grad=True, name=f"{prefix}.w_f")
        self.w_c = Tensor(_glorot(rng, shape), requires_grad=True, name=f"{prefix}.w_c")
        self.w_o = Tensor(_glorot(rng, shape), requires_grad=True, name=f"{prefix}.w_o")
        self.b_i = Tensor(np.zeros(hidden_dim), requires_grad=True, name=f"{prefix}.b_i")
        # forget-gate bias starts open for gradient flow early in training
        self.b_f = Tensor(np.ones(hidden_dim), requires_grad=True, name=f"{prefix}.b_f")
        self.b_c = Tensor(np.zeros(hidden_dim), requires_grad=True, name=f"{prefix}.b_c")
        self.b_o = Tensor(np.zeros(hidden_dim), requires_grad=True, name=f"{prefix}.b_o")

    def step(self, x: Tensor, h: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
        """One transition: gates from [h, x], then c' = f*c + i*c~, h' = o*tanh(c')."""
        if x.shape[1] != self.input_dim or h.shape[1] != self.hidden_dim:
            raise DataError(
                f"lstm step: got x {x.shape}, h {h.shape}, want input {self.input_dim}, "
                f"hidden {self.hidden_dim}"
            )
        z = concat([h, x], axis=1)
        i = (z @ self.w_i + self.b_i).sigmoid()
        f = (z @ self.w_f + self.b_f).sigmoid()
        c_tilde = (z @ self.w_c + self.b_c).tanh()
        o = (z @ self.w_o + self.b_o).sigmoid()
        c_new = f * c + i * c_tilde
        h_new = o * c_new.tanh()
        return h_new, c_new

    def parameters(self) -> list[tuple[str, Tensor, np.ndarray | None]]:
        return [
            (t.name, t, None)
            for t in (self.w_i, self.w_f, self.w_c, self.w_o, self.b_i, self.b_f, self.b_c, self.b_o)
        ]


@dataclass(frozen=True)
class CnnFfConfig:
    vocab_size: int
    embed_dim: int = 250
    seq_len: int = SEQUENCE_LENGTH
    filter_widths: tuple[int, ...] = (3, 4, 5)
    filters_per_width: int = 128
    dropout: float = 0.5
    activation: str = "tanh"


@dataclass(frozen=True)
class LstmFfConfig:
    vocab_size: int
    embed_dim: int = 25
    seq_len: int = SEQUENCE_LENGTH
    hidden_dim: int = 20
    dropout: float = 0.25


@dataclass(frozen=True)
class CnnLstmFfConfig:
    vocab_size: int
    embed_dim: int = 200
    seq_len: int = SEQUENCE_LENGTH
    n_filters: int = 64
    filter_width: int = 5
    pool_size: int = 4
    hidden_dim: int = 64
    dropout: float = 0.25
    activation: str = "tanh"


class _ModelBase:
    arch: str = ""

    def parameters(self) -> list[tuple[str, Tensor, np.ndarray | None]]:
        raise NotImplementedError

    def zero_grads(self) -> None:
        for _, tensor, _ in self.parameters():
            tensor.zero_grad()

    def feature_length(self) -> int:
        raise NotImplementedError


class CnnFf(_ModelBase):
    """Parallel conv filters of several widths, max-over-time pooled, then affine."""

    arch = "cnn-ff"

    def __init__(
        self,
        config: CnnFfConfig,
        seed: int = 0,
        pretrained: EmbeddingTable | None = None,
        vocab: dict[str, int] | None = None,
    ):
        self.config = config
        rng = np.random.default_rng(seed)
        self.embedding = Tensor(
            _init_embedding(rng, config.vocab_size, config.embed_dim, pretrained, vocab),
            requires_grad=True,
            name="embedding",
        )
        self._embed_mask = np.ones_like(self.embedding.data)
        self._embed_mask[PAD_INDEX] = 0.0
        self.filters: list[tuple[Tensor, Tensor]] = []
        for k in config.filter_widths:
            w = Tensor(
                _glorot(rng, (k * config.embed_dim, config.filters_per_width)),
                requires_grad=True,
                name=f"conv{k}.w",
            )
            b = Tensor(
                np.zeros(config.filters_per_width), requires_grad=True, name=f"conv{k}.b"
            )
            self.filters.append((w, b))
        total = self.feature_length()
        self.w_out = Tensor(_glorot(rng, (total, 1)), requires_grad=True, name="out.w")
        self.b_out = Tensor(np.zeros(1), requires_grad=True, name="out.b")

    def feature_length(self) -> int:
        return len(self.config.filter_widths) * self.config.filters_per_width

    def parameters(self):
        params = [("embedding", self.embedding, self._embed_mask)]
        for w, b in self.filters:
            params += [(w.name, w, None), (b.name, b, None)]
        params += [("out.w", self.w_out, None), ("out.b", self.b_out, None)]
        return params

    def forward(
        self, idx: np.ndarray, train: bool = False, rng: np.random.Generator | None = None
    ) -> Tensor:
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        b = idx.shape[0]
        emb = embedding(self.embedding, idx)  # (B, S, d)
        pooled = []
        for (w, bias), k in zip(self.filters, self.config.filter_widths):
            win = sliding_windows(emb, k)  # (B, P, k*d)
            p = win.shape[1]
            z = win.reshape(b * p, -1) @ w + bias
            fmap = _apply_activation(z, self.config.activation)
            fmap = fmap.reshape(b, p, self.config.filters_per_width)
            pooled.append(fmap.max(axis=1))  # (B, n)
        feats = concat(pooled, axis=1)
        feats = _dropout(feats, self.config.dropout, train, rng)
        logits = feats @ self.w_out + self.b_out
        return logits.reshape(b).sigmoid()


class LstmFf(_ModelBase):
    """LSTM over the embedded sequence, mean-pooled hidden states, then affine."""

    arch = "lstm-ff"

    def __init__(
        self,
        config: LstmFfConfig,
        seed: int = 0,
        pretrained: EmbeddingTable | None = None,
        vocab: dict[str, int] | None = None,
    ):
        self.config = config
        rng = np.random.default_rng(seed)
        self.embedding = Tensor(
            _init_embedding(rng, config.vocab_size, config.embed_dim, pretrained, vocab),
            requires_grad=True,
            name="embedding",
        )
        self._embed_mask = np.ones_like(self.embedding.data)
        self._embed_mask[PAD_INDEX] = 0.0
        self.cell = LstmCell(config.embed_dim, config.hidden_dim, rng)
        self.w_out = Tensor(_glorot(rng, (config.hidden_dim, 1)), requires_grad=True, name="out.w")
        self.b_out = Tensor(np.zeros(1), requires_grad=True, name="out.b")

    def feature_length(self) -> int:
        return self.config.hidden_dim

    def parameters(self):
        return (
            [("embedding", self.embedding, self._embed_mask)]
            + self.cell.parameters()
            + [("out.w", self.w_out, None), ("out.b", self.b_out, None)]
        )

    def forward(
        self, idx: np.ndarray, train: bool = False, rng: np.random.Generator | None = None
    ) -> Tensor:
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        b, s = idx.shape
        emb = embedding(self.embedding, idx)
        h = Tensor(np.zeros((b, self.config.hidden_dim)))
        c = Tensor(np.zeros((b, self.config.hidden_dim)))
        acc: Tensor | None = None
        for t in range(s):
            h, c = self.cell.step(emb[:, t, :], h, c)
            acc = h if acc is None else acc + h
        pooled = acc * (1.0 / s)
        pooled = _dropout(pooled, self.config.dropout, train, rng)
        logits = pooled @ self.w_out + self.b_out
        return logits.reshape(b).sigmoid()


class CnnLstmFf(_ModelBase):
    """Width-5 conv, non-overlapping max-pool of 4, LSTM over the pooled rows."""

    arch = "cnn-lstm-ff"

    def __init__(
        self,
        config: CnnLstmFfConfig,
        seed: int = 0,
        pretrained: EmbeddingTable | None = None,
        vocab: dict[str, int] | None = None,
    ):
        conv_len = config.seq_len - config.filter_width + 1
        if conv_len % config.pool_size != 0:
            raise DataError(
                f"conv map length {conv_len} not divisible by pool size {config.pool_size}"
            )
        self.config = config
        self.pooled_len = conv_len // config.pool_size
        rng = np.random.default_rng(seed)
        self.embedding = Tensor(
            _init_embedding(rng, config.vocab_size, config.embed_dim, pretrained, vocab),
            requires_grad=True,
            name="embedding",
        )
        self._embed_mask = np.ones_like(self.embedding.data)
        self._embed_mask[PAD_INDEX] = 0.0
        self.conv_w = Tensor(
            _glorot(rng, (config.filter_width * config.embed_dim, config.n_filters)),
            requires_grad=True,
            name="conv.w",
        )
        self.conv_b = Tensor(np.zeros(config.n_filters), requires_grad=True, name="conv.b")
        self.cell = LstmCell(config.n_filters, config.hidden_dim, rng)
        self.w_out = Tensor(_glorot(rng, (config.hidden_dim, 1)), requires_grad=True, name="out.w")
        self.b_out = Tensor(np.zeros(1), requires_grad=True, name="out.b")

    def feature_length(self) -> int:
        return self.config.hidden_dim

    def parameters(self):
        return (
            [
                ("embedding", self.embedding, self._embed_mask),
                ("conv.w", self.conv_w, None),
                ("conv.b", self.conv_b, None),
            ]
            + self.cell.parameters()
            + [("out.w", self.w_out, None), ("out.b", self.b_out, None)]
        )

    def forward(
        self, idx: np.ndarray, train: bool = False, rng: np.random.Generator | None = None
    ) -> Tensor:
        cfg = self.config
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        b = idx.shape[0]
        emb = embedding(self.embedding, idx)
        win = sliding_windows(emb, cfg.filter_width)  # (B, P, k*d)
        p = win.shape[1]
        z = win.reshape(b * p, -1) @ self.conv_w + self.conv_b
        fmap = _apply_activation(z, cfg.activation).reshape(b, p, cfg.n_filters)
        # non-overlapping windowed max-pool along the sequence axis
        pooled = fmap.reshape(b, self.pooled_len, cfg.pool_size, cfg.n_filters).max(axis=2)
        h = Tensor(np.zeros((b, cfg.hidden_dim)))
        c = Tensor(np.zeros((b, cfg.hidden_dim)))
        for j in range(self.pooled_len):
            h, c = self.cell.step(pooled[:, j, :], h, c)
        feats = _dropout(h, cfg.dropout, train, rng)
        logits = feats @ self.w_out + self.b_out
        return logits.reshape(b).sigmoid()


_MODEL_CLASSES = {
    "cnn-ff": (CnnFf, CnnFfConfig),
    "lstm-ff": (LstmFf, LstmFfConfig),
    "cnn-lstm-ff": (CnnLstmFf, CnnLstmFfConfig),
}


def build_model(
    arch: str,
    config,
    seed: int = 0,
    pretrained: EmbeddingTable | None = None,
    vocab: dict[str, int] | None = None,
):
    if arch not in _MODEL_CLASSES:
        raise DataError(f"unknown architecture {arch!r}")
    cls, cfg_cls = _MODEL_CLASSES[arch]
    if isinstance(config, dict):
        config = cfg_cls(**config)
    return cls(config, seed=seed, pretrained=pretrained, vocab=vocab)


def _vocab_hash(vocab: dict[str, int]) -> str:
    h = hashlib.sha256()
    for word, idx in sorted(vocab.items(), key=lambda kv: kv[1]):
        h.update(f"{word}\x00{idx}\x01".encode("utf-8"))
    return h.hexdigest()


def config_fingerprint(config) -> str:
    payload = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def save_checkpoint(model, vocab: dict[str, int], path: str) -> None:
    tensors = {
        name: {"shape": list(t.shape), "data": t.data.ravel().tolist()}
        for name, t, _ in model.parameters()
    }
    payload = {
        "format": "numsarc-neural",
        "version": 1,
        "arch": model.arch,
        "config": asdict(model.config),
        "config_fingerprint": config_fingerprint(model.config),
        "vocab": vocab,
        "vocab_hash": _vocab_hash(vocab),
        "tensors": tensors,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path: str):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "numsarc-neural":
        raise DataError(f"{path}: not a neural checkpoint")
    config = dict(payload["config"])
    for key in ("filter_widths",):
        if key in config:
            config[key] = tuple(config[key])
    model = build_model(payload["arch"], config)
    named = {name: (t, m) for name, t, m in model.parameters()}
    for name, spec in payload["tensors"].items():
        if name not in named:
            raise DataError(f"{path}: unexpected tensor {name!r}")
        tensor, _ = named[name]
        data = np.array(spec["data"], dtype=np.float64).reshape(spec["shape"])
        if data.shape != tensor.shape:
            raise DataError(f"{path}: tensor {name!r} has shape {data.shape}, want {tensor.shape}")
        tensor.data = data
    vocab = {str(k): int(v) for k, v in payload["vocab"].items()}
    if _vocab_hash(vocab) != payload["vocab_hash"]:
        raise DataError(f"{path}: vocabulary hash mismatch")
    return model, vocab
