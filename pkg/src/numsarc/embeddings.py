"""Word vectors: file loading, a desk-scale skip-gram trainer, composition.

The trainer follows the negative-sampling objective of the word2vec family:
for a (center, context) pair with negatives n_1..n_K drawn from the
unigram^(3/4) distribution,

    loss = -log sigma(v.u_ctx) - sum_k log sigma(-v.u_k)

optimized by plain SGD, single-threaded so a fixed seed reproduces bitwise.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "EmbeddingTable",
    "SgnsConfig",
    "SgnsResult",
    "ComposedVector",
    "load_embeddings",
    "save_embeddings",
    "train_sgns",
    "sgns_pair_loss",
    "compose_vector",
    "cosine",
]


class EmbeddingTable:
    """Immutable word -> d-dimensional vector table."""

    def __init__(self, vocab: dict[str, int], matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise DataError("embedding matrix must be 2-D")
        if len(vocab) != matrix.shape[0]:
            raise DataError("vocab size does not match matrix rows")
        if not np.all(np.isfinite(matrix)):
            raise DataError("embedding matrix contains non-finite values")
        self.vocab = dict(vocab)
        self.matrix = matrix
        self.matrix.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def vector(self, word: str) -> np.ndarray | None:
        idx = self.vocab.get(word)
        return None if idx is None else self.matrix[idx]

    def words(self) -> list[str]:
        ordered = sorted(self.vocab.items(), key=lambda kv: kv[1])
        return [w for w, _ in ordered]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for word in self.words():
            h.update(word.encode("utf-8"))
            h.update(b"\x00")
        h.update(np.ascontiguousarray(self.matrix).tobytes())
        return h.hexdigest()


def load_embeddings(path: str, expected_d: int | None = None) -> EmbeddingTable:
    """Parse a text vector file: ``word v1 ... vd`` per row.

    An optional first line ``|V| d`` (two integers) is accepted and skipped.
    Ragged rows, non-numeric fields and duplicate words raise with the line
    number; so does a dimension different from ``expected_d``.
    """
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            word, fields = parts[0], parts[1:]
            if not fields:
                raise DataError(f"{path}:{lineno}: row has no vector components")
            if word in vocab:
                raise DataError(f"{path}:{lineno}: duplicate word {word!r}")
            try:
                vec = np.array([float(x) for x in fields], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise DataError(
                    f"{path}:{lineno}: row has {vec.size} components, expected {dim}"
                )
            vocab[word] = len(rows)
            rows.append(vec)
    if dim is None:
        raise DataError(f"{path}: no vectors found")
    if expected_d is not None and dim != expected_d:
        raise DataError(f"{path}: dimension {dim} does not match expected {expected_d}")
    return EmbeddingTable(vocab, np.vstack(rows))


def save_embeddings(table: EmbeddingTable, path: str, header: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(table)} {table.dimension}\n")
        for word in table.words():
            vec = table.matrix[table.vocab[word]]
            fh.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


@dataclass(frozen=True)
class SgnsConfig:
    dimension: int = 50
    window: int = 2
    negative: int = 5
    epochs: int = 3
    learning_rate: float = 0.05
    min_count: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.dimension, self.window, self.negative, self.epochs, self.min_count) < 1:
            raise DataError("SgnsConfig: all integer fields must be positive")
        if self.learning_rate <= 0:
            raise DataError("SgnsConfig: learning rate must be positive")


class SgnsResult(NamedTuple):
    table: EmbeddingTable
    epoch_losses: list[float]


def _sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-x))


def sgns_pair_loss(
    v_center: np.ndarray, u_context: np.ndarray, u_negatives: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and gradients for one (center, context, negatives) triple.

    Returns (loss, d/d v_center, d/d u_context, d/d u_negatives). Kept as a
    standalone function so the finite-difference check can probe it directly.
    """
    s_pos = _sigmoid(float(v_center @ u_context))
    s_neg = _sigmoid(u_negatives @ v_center)
    eps = 1e-12
    loss = -np.log(s_pos + eps) - float(np.sum(np.log(1.0 - s_neg + eps)))
    g_center = (s_pos - 1.0) * u_context + s_neg @ u_negatives
    g_context = (s_pos - 1.0) * v_center
    g_negatives = np.outer(s_neg, v_center)
    return loss, g_center, g_context, g_negatives


def train_sgns(corpus: Sequence[Sequence[str]], config: SgnsConfig) -> SgnsResult:
    """Train skip-gram-with-negative-sampling embeddings on tokenized texts.

    Returns the input-vector table and the mean per-pair loss of each epoch.
    Deterministic given the seed.
    """
    counts = Counter(w for sent in corpus for w in sent)
    kept = [(w, c) for w, c in counts.items() if c >= config.min_count]
    if not kept:
        raise DataError("train_sgns: vocabulary empty after min-count filtering")
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    vocab = {w: i for i, (w, _) in enumerate(kept)}
    freqs = np.array([c for _, c in kept], dtype=np.float64)

    # Negative sampling from the unigram^(3/4) distribution.
    noise = freqs ** 0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    rng = np.random.default_rng(config.seed)
    d = config.dimension
    w_in = rng.uniform(-0.5 / d, 0.5 / d, size=(len(vocab), d))
    w_out = np.zeros((len(vocab), d))

    indexed = [[vocab[w] for w in sent if w in vocab] for sent in corpus]

    def _pairs(sent: list[int]):
        for pos in range(len(sent)):
            lo = max(0, pos - config.window)
            hi = min(len(sent), pos + config.window + 1)
            for ctx_pos in range(lo, hi):
                if ctx_pos != pos:
                    yield sent[pos], sent[ctx_pos]

    pairs_per_epoch = sum(1 for sent in indexed for _ in _pairs(sent))
    if pairs_per_epoch == 0:
        raise DataError("train_sgns: corpus produced no training pairs")

    # linear learning-rate decay over the whole run, floored at 1e-4 * lr0
    lr0 = config.learning_rate
    total_pairs = pairs_per_epoch * config.epochs
    seen = 0
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        total = 0.0
        for sent in indexed:
            for center, context in _pairs(sent):
                lr = max(lr0 * (1.0 - seen / total_pairs), lr0 * 1e-4)
                seen += 1
                draws = np.searchsorted(noise_cdf, rng.random(config.negative))
                negs = draws[draws != context]
                loss, g_c, g_ctx, g_negs = sgns_pair_loss(
                    w_in[center], w_out[context], w_out[negs]
                )
                w_in[center] -= lr * g_c
                w_out[context] -= lr * g_ctx
                np.subtract.at(w_out, negs, lr * g_negs)  # negs may repeat
                total += loss
        epoch_losses.append(total / pairs_per_epoch)
    return SgnsResult(EmbeddingTable(vocab, w_in), epoch_losses)


class ComposedVector(NamedTuple):
    vector: np.ndarray
    word_count: int  # number of in-vocabulary words that contributed

    @property
    def empty(self) -> bool:
        return self.word_count == 0


def compose_vector(words: Sequence[str], table: EmbeddingTable) -> ComposedVector:
    """Mean of the vectors of in-vocabulary words; OOV words shrink the divisor."""
    acc = np.zeros(table.dimension)
    used = 0
    for w in words:
        vec = table.vector(w)
        if vec is not None:
            acc += vec
            used += 1
    if used:
        acc /= used
    return ComposedVector(acc, used)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; either vector having zero norm gives 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DataError(f"cosine: dimension mismatch {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0))
