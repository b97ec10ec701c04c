"""Corpus handling: normalization, hashtag labeling, dataset shapes and folds.

Tweets arrive as JSON Lines with ``id``, ``text`` and an optional ``label``.
Everything in here is pure given (input, seed), so repeated runs are
byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .text import NUMBER_RE, tokenize

__all__ = [
    "RawTweet",
    "LabeledTweet",
    "DatasetSpec",
    "FoldAssignment",
    "DATASET_PRESETS",
    "SARCASTIC_HASHTAGS",
    "NON_SARCASTIC_HASHTAGS",
    "LABEL_HASHTAGS",
    "normalize_tweet",
    "label_by_hashtag",
    "is_numeric_tweet",
    "numeric_fraction",
    "build_datasets",
    "stratified_kfold",
    "ingest",
    "read_jsonl",
    "write_jsonl",
    "load_labeled",
    "save_labeled",
    "load_raw",
]

SARCASTIC_HASHTAGS = frozenset({"#sarcasm", "#sarcastic", "#beingsarcastic"})
NON_SARCASTIC_HASHTAGS = frozenset({"#nonsarcasm", "#notsarcastic"})
LABEL_HASHTAGS = SARCASTIC_HASHTAGS | NON_SARCASTIC_HASHTAGS

_URL_PREFIXES = ("http://", "https://", "www.", "t.co")
_TRAILING_PUNCT = ".,!?;:"


@dataclass(frozen=True)
class RawTweet:
    id: str
    text: str


@dataclass(frozen=True)
class LabeledTweet:
    id: str
    text: str  # normalized
    label: int  # 1 = sarcastic, 0 = non-sarcastic
    raw_text: str | None = None  # original text, kept for capitalization counts


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    pos_count: int
    neg_count: int
    numeric_only_positive: bool


DATASET_PRESETS: dict[str, DatasetSpec] = {
    "d1": DatasetSpec("D1", 100_000, 250_000, False),
    "d2": DatasetSpec("D2", 8_681, 8_681, True),
    "d3": DatasetSpec("D3", 8_681, 42_107, True),
    "test": DatasetSpec("TEST", 1_843, 8_317, True),
}


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    assignments: dict[str, int]
    seed: int

    def fold_ids(self, fold: int) -> list[str]:
        return [tid for tid, f in self.assignments.items() if f == fold]

    def to_json(self) -> str:
        return json.dumps(
            {"k": self.k, "seed": self.seed, "assignments": self.assignments},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, payload: str) -> "FoldAssignment":
        d = json.loads(payload)
        return cls(d["k"], dict(d["assignments"]), d["seed"])


def normalize_tweet(raw: RawTweet, label_hashtags: frozenset[str] = LABEL_HASHTAGS) -> str:
    """Lowercase and scrub one tweet; empty output means "drop me".

    Removes URLs, @-mentions and non-ASCII bytes, strips label hashtags
    entirely, keeps other hashtags as bare words, and drops a leading ``rt``
    retweet marker. Idempotent by construction.
    """
    text = raw.text.encode("ascii", errors="ignore").decode("ascii").lower()
    kept: list[str] = []
    for tok in text.split():
        if tok.rstrip(_TRAILING_PUNCT) in label_hashtags:
            continue
        tok = tok.lstrip("#")
        if not tok:
            continue
        if tok.startswith(_URL_PREFIXES) or tok.startswith("@"):
            continue
        kept.append(tok)
    while kept and kept[0] == "rt":
        kept.pop(0)
    return " ".join(kept)


def label_by_hashtag(raw: RawTweet) -> int | None:
    """Distant-supervision label from hashtags; conflicting markers yield none."""
    cores = {tok.rstrip(_TRAILING_PUNCT) for tok in raw.text.lower().split()}
    has_sarc = not cores.isdisjoint(SARCASTIC_HASHTAGS)
    has_nonsarc = not cores.isdisjoint(NON_SARCASTIC_HASHTAGS)
    if has_sarc == has_nonsarc:
        return None
    return 1 if has_sarc else 0


def is_numeric_tweet(tokens: Sequence[str]) -> bool:
    """True iff some token is a pure number (``2``, ``34.04``, ``8:30``).

    Tokens with letters or symbols glued to digits ("model34d", "4s", "<3")
    do not count.
    """
    return any(NUMBER_RE.fullmatch(t) for t in tokens)


def numeric_fraction(corpus: Sequence[LabeledTweet]) -> float:
    """Fraction of tweets containing at least one pure numeric token."""
    if not corpus:
        raise DataError("numeric_fraction: empty corpus")
    hits = sum(
        1 for t in corpus if is_numeric_tweet([tok.surface for tok in tokenize(t.text)])
    )
    return hits / len(corpus)


def _numeric_ok(tweet: LabeledTweet) -> bool:
    return is_numeric_tweet([tok.surface for tok in tokenize(tweet.text)])


def build_datasets(
    corpus: Sequence[LabeledTweet], spec: DatasetSpec, seed: int
) -> list[LabeledTweet]:
    """Sample a dataset shape (preset counts) without replacement, seeded."""
    pos = [t for t in corpus if t.label == 1]
    if spec.numeric_only_positive:
        pos = [t for t in pos if _numeric_ok(t)]
    neg = [t for t in corpus if t.label == 0]
    if len(pos) < spec.pos_count:
        raise DataError(
            f"dataset {spec.name}: need {spec.pos_count} positive tweets"
            f"{' (numeric)' if spec.numeric_only_positive else ''}, have {len(pos)}"
        )
    if len(neg) < spec.neg_count:
        raise DataError(
            f"dataset {spec.name}: need {spec.neg_count} negative tweets, have {len(neg)}"
        )
    rng = np.random.default_rng(seed)
    pos_idx = rng.choice(len(pos), size=spec.pos_count, replace=False)
    neg_idx = rng.choice(len(neg), size=spec.neg_count, replace=False)
    sample = [pos[i] for i in sorted(pos_idx)] + [neg[i] for i in sorted(neg_idx)]
    order = rng.permutation(len(sample))
    return [sample[i] for i in order]


def stratified_kfold(dataset: Sequence[LabeledTweet], k: int, seed: int) -> FoldAssignment:
    """Assign each tweet to one of k folds, keeping class ratios within one."""
    if k < 2:
        raise DataError(f"stratified_kfold: k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignments: dict[str, int] = {}
    for label in (1, 0):
        ids = [t.id for t in dataset if t.label == label]
        if len(ids) < k:
            raise DataError(
                f"stratified_kfold: class {label} has {len(ids)} members, fewer than k={k}"
            )
        for j, idx in enumerate(rng.permutation(len(ids))):
            assignments[ids[idx]] = j % k
    return FoldAssignment(k, assignments, seed)


def ingest(rows: Iterable[dict]) -> list[LabeledTweet]:
    """Turn raw JSONL rows into a clean labeled corpus.

    Explicit ``label`` fields win; otherwise the label comes from hashtags.
    Unlabelable, empty-after-normalization and duplicate (by normalized text)
    tweets are dropped.
    """
    out: list[LabeledTweet] = []
    seen_ids: set[str] = set()
    seen_texts: set[str] = set()
    for row in rows:
        raw = RawTweet(str(row["id"]), row["text"])
        if not raw.id:
            raise DataError("ingest: empty tweet id")
        if raw.id in seen_ids:
            raise DataError(f"ingest: duplicate tweet id {raw.id!r}")
        seen_ids.add(raw.id)
        label = row.get("label")
        if label is None:
            label = label_by_hashtag(raw)
        elif label not in (0, 1):
            raise DataError(f"ingest: tweet {raw.id!r} has label {label!r}, want 0 or 1")
        if label is None:
            continue
        text = normalize_tweet(raw)
        if not text or text in seen_texts:
            continue
        seen_texts.add(text)
        out.append(LabeledTweet(raw.id, text, int(label), raw_text=raw.text))
    return out


def read_jsonl(path: str) -> list[dict]:
    rows: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(row, dict) or "id" not in row or "text" not in row:
                raise DataError(f"{path}:{lineno}: expected an object with 'id' and 'text'")
            rows.append(row)
    return rows


def write_jsonl(rows: Iterable[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def load_raw(path: str) -> list[RawTweet]:
    return [RawTweet(str(r["id"]), r["text"]) for r in read_jsonl(path)]


def load_labeled(path: str) -> list[LabeledTweet]:
    tweets = []
    for row in read_jsonl(path):
        if row.get("label") not in (0, 1):
            raise DataError(f"{path}: tweet {row['id']!r} lacks a 0/1 label")
        tweets.append(
            LabeledTweet(str(row["id"]), row["text"], int(row["label"]), row.get("raw_text"))
        )
    return tweets


def save_labeled(tweets: Iterable[LabeledTweet], path: str) -> None:
    write_jsonl(
        (
            {"id": t.id, "text": t.text, "label": t.label, "raw_text": t.raw_text}
            for t in tweets
        ),
        path,
    )
