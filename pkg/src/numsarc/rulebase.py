"""Sarcastic/non-sarcastic repositories and the rule prediction cascade.

A repository entry remembers one training tweet: its noun-phrase word list,
its (canonical) number unit and, for the cosine variant, a composed vector.
Per-unit mean/stddev aggregates live on the repository itself; entries point
at them via their unit key. Prediction consults the sarcastic repository
first, then the non-sarcastic one, deciding with the |x - mu| <= z*sigma
interval test (z = 2.58 by default, the 99% confidence interval).
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingTable, compose_vector
from .errors import DataError
from .text import AnalyzedTweet, NumericMention

__all__ = [
    "UnitStats",
    "RepositoryEntry",
    "Repository",
    "RulePath",
    "RulePrediction",
    "RuleModel",
    "DEFAULT_Z",
    "DEFAULT_MIN_SIMILARITY",
    "build_repository",
    "within_interval",
    "match_exact",
    "match_cosine",
    "predict_rule",
    "save_rule_model",
    "load_rule_model",
]

logger = logging.getLogger(__name__)

DEFAULT_Z = 2.58
DEFAULT_MIN_SIMILARITY = 0.5


@dataclass(frozen=True)
class UnitStats:
    unit: str
    mean: float
    stddev: float  # population standard deviation; 0 for singletons
    count: int


@dataclass
class RepositoryEntry:
    tweet_index: int
    noun_phrase_words: list[str]
    unit: str | None
    value: float
    vector: np.ndarray | None = None


@dataclass
class Repository:
    label: int
    entries: list[RepositoryEntry]
    unit_stats: dict[str, UnitStats]
    dimension: int | None = None

    def stats_for(self, unit: str) -> UnitStats:
        return self.unit_stats[unit]


class RulePath(enum.Enum):
    SARC_MATCH_IN = "SARC_MATCH_IN"
    SARC_MATCH_OUT = "SARC_MATCH_OUT"
    NONSARC_MATCH_IN = "NONSARC_MATCH_IN"
    NONSARC_MATCH_OUT = "NONSARC_MATCH_OUT"
    NO_MATCH = "NO_MATCH"


@dataclass
class RulePrediction:
    label: int
    path: RulePath
    matched_entry: RepositoryEntry | None = None
    interval: tuple[float, float] | None = None
    score: float | None = None  # overlap count or cosine similarity
    extra_mentions: list[NumericMention] = field(default_factory=list)


def build_repository(
    tweets: Sequence[AnalyzedTweet],
    label: int,
    table: EmbeddingTable | None = None,
) -> Repository:
    """One entry per tweet (first numeric mention); per-unit stats aggregated.

    Tweets without a numeric mention are skipped with a diagnostic. With an
    embedding table, each entry also carries the mean vector of its
    noun-phrase words.
    """
    entries: list[RepositoryEntry] = []
    per_unit: dict[str, list[float]] = {}
    for tweet in tweets:
        if tweet.label is not None and tweet.label != label:
            raise DataError(
                f"build_repository: tweet {tweet.id!r} has label {tweet.label}, "
                f"repository wants {label}"
            )
        if not tweet.mentions:
            logger.warning("tweet %r has no numeric mention, skipped", tweet.id)
            continue
        mention = tweet.mentions[0]
        vector = None
        if table is not None:
            vector = compose_vector(tweet.noun_phrase_words, table).vector
        entry = RepositoryEntry(
            tweet_index=len(entries),
            noun_phrase_words=list(tweet.noun_phrase_words),
            unit=mention.unit,
            value=mention.value,
            vector=vector,
        )
        entries.append(entry)
        if mention.unit is not None:
            per_unit.setdefault(mention.unit, []).append(mention.value)
    unit_stats = {
        unit: UnitStats(
            unit=unit,
            mean=float(np.mean(values)),
            stddev=float(np.std(values)),  # population sigma, defined for singletons
            count=len(values),
        )
        for unit, values in per_unit.items()
    }
    dimension = table.dimension if table is not None else None
    return Repository(label=label, entries=entries, unit_stats=unit_stats, dimension=dimension)


def within_interval(value: float, stats: UnitStats, z: float = DEFAULT_Z) -> bool:
    """Interval membership test: |value - mean| <= z * stddev."""
    if z <= 0:
        raise DataError(f"within_interval: z must be positive, got {z}")
    return abs(value - stats.mean) <= z * stats.stddev


def match_exact(
    query_words: Sequence[str], repo: Repository
) -> tuple[RepositoryEntry, int] | None:
    """Entry with the largest noun-phrase word overlap; zero overlap is no match.

    Ties go to the lowest tweet index (entries are scanned in index order and
    only strictly better overlaps replace the incumbent).
    """
    query = set(query_words)
    best: tuple[RepositoryEntry, int] | None = None
    for entry in repo.entries:
        overlap = len(query.intersection(entry.noun_phrase_words))
        if overlap > 0 and (best is None or overlap > best[1]):
            best = (entry, overlap)
    return best


def match_cosine(
    query_vector: np.ndarray,
    repo: Repository,
    min_sim: float = DEFAULT_MIN_SIMILARITY,
) -> tuple[RepositoryEntry, float] | None:
    """Entry with maximum cosine similarity, or none below the threshold."""
    from .embeddings import cosine  # local import keeps module load cheap

    best: tuple[RepositoryEntry, float] | None = None
    for entry in repo.entries:
        if entry.vector is None:
            raise DataError(
                f"match_cosine: entry {entry.tweet_index} carries no vector"
            )
        sim = cosine(query_vector, entry.vector)
        if best is None or sim > best[1]:
            best = (entry, sim)
    if best is None or best[1] < min_sim:
        return None
    return best


def _interval(stats: UnitStats, z: float) -> tuple[float, float]:
    return (stats.mean - z * stats.stddev, stats.mean + z * stats.stddev)


def predict_rule(
    test: AnalyzedTweet,
    sarc: Repository,
    nonsarc: Repository,
    strategy: str = "exact",
    z: float = DEFAULT_Z,
    min_sim: float = DEFAULT_MIN_SIMILARITY,
    table: EmbeddingTable | None = None,
) -> RulePrediction:
    """Run the two-repository cascade on one analyzed tweet.

    Sarcastic repository first: a unit-matching entry decides by interval
    (inside -> sarcastic, outside -> non-sarcastic). A missing match or a unit
    mismatch falls through to the non-sarcastic repository (inside ->
    non-sarcastic, outside -> sarcastic). Anything else is NO_MATCH and
    non-sarcastic. Only the first numeric mention is consulted; the rest ride
    along as metadata.
    """
    if strategy not in ("exact", "cosine"):
        raise DataError(f"predict_rule: unknown strategy {strategy!r}")
    mention = test.mentions[0] if test.mentions else None
    extra = list(test.mentions[1:])
    if mention is None or mention.unit is None:
        return RulePrediction(0, RulePath.NO_MATCH, extra_mentions=extra)

    if strategy == "exact":
        def matcher(repo: Repository):
            return match_exact(test.noun_phrase_words, repo)
    else:
        if table is None:
            raise DataError("predict_rule: cosine strategy needs an embedding table")
        query_vec = compose_vector(test.noun_phrase_words, table).vector

        def matcher(repo: Repository):
            return match_cosine(query_vec, repo, min_sim)

    hit = matcher(sarc)
    if hit is not None and hit[0].unit == mention.unit:
        entry, score = hit
        stats = sarc.stats_for(mention.unit)
        inside = within_interval(mention.value, stats, z)
        return RulePrediction(
            label=1 if inside else 0,
            path=RulePath.SARC_MATCH_IN if inside else RulePath.SARC_MATCH_OUT,
            matched_entry=entry,
            interval=_interval(stats, z),
            score=float(score),
            extra_mentions=extra,
        )

    hit = matcher(nonsarc)
    if hit is not None and hit[0].unit == mention.unit:
        entry, score = hit
        stats = nonsarc.stats_for(mention.unit)
        inside = within_interval(mention.value, stats, z)
        return RulePrediction(
            label=0 if inside else 1,
            path=RulePath.NONSARC_MATCH_IN if inside else RulePath.NONSARC_MATCH_OUT,
            matched_entry=entry,
            interval=_interval(stats, z),
            score=float(score),
            extra_mentions=extra,
        )

    return RulePrediction(0, RulePath.NO_MATCH, extra_mentions=extra)


@dataclass
class RuleModel:
    """Both repositories plus the knobs needed to reproduce predictions."""

    sarc: Repository
    nonsarc: Repository
    strategy: str = "exact"
    z: float = DEFAULT_Z
    min_sim: float = DEFAULT_MIN_SIMILARITY
    dimension: int | None = None
    table_fingerprint: str | None = None

    def predict(self, test: AnalyzedTweet, table: EmbeddingTable | None = None) -> RulePrediction:
        return predict_rule(
            test, self.sarc, self.nonsarc, self.strategy, self.z, self.min_sim, table
        )


def _entry_to_dict(entry: RepositoryEntry) -> dict:
    return {
        "tweet_index": entry.tweet_index,
        "noun_phrase_words": entry.noun_phrase_words,
        "unit": entry.unit,
        "value": entry.value,
        "vector": None if entry.vector is None else [float(x) for x in entry.vector],
    }


def _entry_from_dict(d: dict) -> RepositoryEntry:
    vec = d.get("vector")
    return RepositoryEntry(
        tweet_index=d["tweet_index"],
        noun_phrase_words=list(d["noun_phrase_words"]),
        unit=d["unit"],
        value=d["value"],
        vector=None if vec is None else np.array(vec, dtype=np.float64),
    )


def _repo_to_dict(repo: Repository) -> dict:
    return {
        "label": repo.label,
        "dimension": repo.dimension,
        "entries": [_entry_to_dict(e) for e in repo.entries],
        "unit_stats": {
            u: {"mean": s.mean, "stddev": s.stddev, "count": s.count}
            for u, s in sorted(repo.unit_stats.items())
        },
    }


def _repo_from_dict(d: dict) -> Repository:
    return Repository(
        label=d["label"],
        entries=[_entry_from_dict(e) for e in d["entries"]],
        unit_stats={
            u: UnitStats(u, s["mean"], s["stddev"], s["count"])
            for u, s in d["unit_stats"].items()
        },
        dimension=d.get("dimension"),
    )


def save_rule_model(model: RuleModel, path: str) -> None:
    payload = {
        "format": "numsarc-rule-model",
        "version": 1,
        "strategy": model.strategy,
        "z": model.z,
        "min_sim": model.min_sim,
        "dimension": model.dimension,
        "table_fingerprint": model.table_fingerprint,
        "sarc": _repo_to_dict(model.sarc),
        "nonsarc": _repo_to_dict(model.nonsarc),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_rule_model(path: str) -> RuleModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "numsarc-rule-model":
        raise DataError(f"{path}: not a rule-model file")
    return RuleModel(
        sarc=_repo_from_dict(payload["sarc"]),
        nonsarc=_repo_from_dict(payload["nonsarc"]),
        strategy=payload["strategy"],
        z=payload["z"],
        min_sim=payload["min_sim"],
        dimension=payload.get("dimension"),
        table_fingerprint=payload.get("table_fingerprint"),
    )
