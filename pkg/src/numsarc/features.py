"""Hand-engineered feature families for the classical classifiers.

Families, in the fixed assembly order:

    S    sentiment counts (4): positive, negative, highly-emotional positive,
         highly-emotional negative (emotional = adjective/adverb/verb tag)
    E    emoticon/contrast indicators (4)
    P    punctuation counts (5): ! . ? ALL-CAPS-words '
    NUM  first numeric mention's value (1)
    UNIT one-hot over a unit vocabulary frozen at training time
    EMB  mean word vector over all tweet tokens
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingTable, compose_vector
from .errors import DataError
from .text import AnalyzedTweet

__all__ = [
    "SentimentLexicon",
    "EmoticonLexicon",
    "FeatureConfig",
    "FeatureVector",
    "EMOTIONAL_TAGS",
    "sentiment_features",
    "emoticon_features",
    "punctuation_features",
    "numeric_features",
    "assemble_features",
    "feature_matrix",
    "feature_names",
    "unit_vocabulary_from",
    "default_sentiment_lexicon",
    "default_emoticon_lexicon",
    "load_wordlist",
]

EMOTIONAL_TAGS = frozenset(
    {"JJ", "JJR", "JJS", "RB", "RBR", "RBS", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ"}
)

_CAPS_STRIP = ".,!?;:'\"()"


@dataclass(frozen=True)
class SentimentLexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.positive & self.negative
        if overlap:
            raise DataError(f"sentiment lexicon polarity overlap: {sorted(overlap)[:5]}")


@dataclass(frozen=True)
class EmoticonLexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.positive & self.negative
        if overlap:
            raise DataError(f"emoticon lexicon polarity overlap: {sorted(overlap)[:5]}")


def load_wordlist(path: str) -> frozenset[str]:
    """One token per line; blank lines and '#' comments ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line)
    return frozenset(words)


def _bundled_wordlist(name: str) -> frozenset[str]:
    text = resources.files("numsarc.data").joinpath(name).read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


@lru_cache(maxsize=1)
def default_sentiment_lexicon() -> SentimentLexicon:
    return SentimentLexicon(
        _bundled_wordlist("sentiment_positive.txt"),
        _bundled_wordlist("sentiment_negative.txt"),
    )


@lru_cache(maxsize=1)
def default_emoticon_lexicon() -> EmoticonLexicon:
    return EmoticonLexicon(
        _bundled_wordlist("emoticons_positive.txt"),
        _bundled_wordlist("emoticons_negative.txt"),
    )


@dataclass(frozen=True)
class FeatureConfig:
    sentiment: bool = True
    emoticon: bool = True
    punctuation: bool = True
    number_value: bool = True
    unit_onehot: bool = True
    tweet_embedding: bool = False
    embedding_dim: int = 0
    unit_vocabulary: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not any(
            (
                self.sentiment,
                self.emoticon,
                self.punctuation,
                self.number_value,
                self.unit_onehot,
                self.tweet_embedding,
            )
        ):
            raise DataError("FeatureConfig: at least one feature family must be enabled")
        if self.tweet_embedding and self.embedding_dim < 1:
            raise DataError("FeatureConfig: tweet_embedding requires embedding_dim >= 1")

    def length(self) -> int:
        return sum(length for _, length in self.families())

    def families(self) -> list[tuple[str, int]]:
        fams = []
        if self.sentiment:
            fams.append(("S", 4))
        if self.emoticon:
            fams.append(("E", 4))
        if self.punctuation:
            fams.append(("P", 5))
        if self.number_value:
            fams.append(("NUM", 1))
        if self.unit_onehot:
            fams.append(("UNIT", len(self.unit_vocabulary)))
        if self.tweet_embedding:
            fams.append(("EMB", self.embedding_dim))
        return fams


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    layout: tuple[tuple[str, int, int], ...]  # (family, offset, length)


def sentiment_features(
    analyzed: AnalyzedTweet, lex: SentimentLexicon | None = None
) -> np.ndarray:
    """(pos, neg, highly-emotional pos, highly-emotional neg) counts."""
    lex = lex or default_sentiment_lexicon()
    pos = neg = em_pos = em_neg = 0
    for token, tag in zip(analyzed.tokens, analyzed.tags):
        w = token.surface
        if w in lex.positive:
            pos += 1
            if tag in EMOTIONAL_TAGS:
                em_pos += 1
        elif w in lex.negative:
            neg += 1
            if tag in EMOTIONAL_TAGS:
                em_neg += 1
    return np.array([pos, neg, em_pos, em_neg], dtype=np.float64)


def emoticon_features(
    analyzed: AnalyzedTweet,
    slex: SentimentLexicon | None = None,
    elex: EmoticonLexicon | None = None,
) -> np.ndarray:
    """(pos emoticon, neg emoticon, word contrast, word-emoji contrast) flags."""
    slex = slex or default_sentiment_lexicon()
    elex = elex or default_emoticon_lexicon()
    surfaces = analyzed.surfaces
    has_pos_word = any(w in slex.positive for w in surfaces)
    has_neg_word = any(w in slex.negative for w in surfaces)
    has_pos_emo = any(w in elex.positive for w in surfaces)
    has_neg_emo = any(w in elex.negative for w in surfaces)
    word_contrast = has_pos_word and has_neg_word
    cross_contrast = (has_pos_word and has_neg_emo) or (has_neg_word and has_pos_emo)
    return np.array(
        [has_pos_emo, has_neg_emo, word_contrast, cross_contrast], dtype=np.float64
    )


def punctuation_features(text: str | None) -> np.ndarray:
    """(!, ., ?, ALL-CAPS words, ') counts on the given text.

    Pass the pre-lowercasing text when available, otherwise the capital-word
    count is necessarily 0. Ellipsis characters count as three dots.
    """
    if not text:
        return np.zeros(5)
    text = text.replace("…", "...")
    caps = 0
    for word in text.split():
        core = word.strip(_CAPS_STRIP)
        if len(core) >= 2 and core.isupper() and any(c.isalpha() for c in core):
            caps += 1
    return np.array(
        [text.count("!"), text.count("."), text.count("?"), caps, text.count("'")],
        dtype=np.float64,
    )


def numeric_features(analyzed: AnalyzedTweet, config: FeatureConfig) -> np.ndarray:
    """First mention's value followed by a one-hot over the unit vocabulary."""
    value = 0.0
    onehot = np.zeros(len(config.unit_vocabulary))
    if analyzed.mentions:
        mention = analyzed.mentions[0]
        value = mention.value
        if mention.unit is not None and mention.unit in config.unit_vocabulary:
            onehot[config.unit_vocabulary.index(mention.unit)] = 1.0
    return np.concatenate([[value], onehot])


def assemble_features(
    analyzed: AnalyzedTweet,
    config: FeatureConfig,
    table: EmbeddingTable | None = None,
    slex: SentimentLexicon | None = None,
    elex: EmoticonLexicon | None = None,
) -> FeatureVector:
    """Concatenate the enabled families in the fixed S, E, P, NUM, UNIT, EMB order."""
    if config.tweet_embedding:
        if table is None:
            raise DataError("assemble_features: tweet_embedding requires an embedding table")
        if table.dimension != config.embedding_dim:
            raise DataError(
                f"assemble_features: table dimension {table.dimension} != "
                f"configured {config.embedding_dim}"
            )
    parts: list[np.ndarray] = []
    layout: list[tuple[str, int, int]] = []
    offset = 0
    numeric = numeric_features(analyzed, config) if (config.number_value or config.unit_onehot) else None
    for family, length in config.families():
        if family == "S":
            seg = sentiment_features(analyzed, slex)
        elif family == "E":
            seg = emoticon_features(analyzed, slex, elex)
        elif family == "P":
            seg = punctuation_features(analyzed.raw_text or analyzed.text)
        elif family == "NUM":
            seg = numeric[:1]
        elif family == "UNIT":
            seg = numeric[1:]
        else:  # EMB
            seg = compose_vector(analyzed.surfaces, table).vector
        parts.append(seg)
        layout.append((family, offset, length))
        offset += length
    values = np.concatenate(parts) if parts else np.zeros(0)
    return FeatureVector(values=values, layout=tuple(layout))


def unit_vocabulary_from(analyzed: Sequence[AnalyzedTweet]) -> tuple[str, ...]:
    """Sorted canonical units of first mentions; freeze this at training time."""
    units = {
        t.mentions[0].unit
        for t in analyzed
        if t.mentions and t.mentions[0].unit is not None
    }
    return tuple(sorted(units))


def feature_names(config: FeatureConfig) -> list[str]:
    names: list[str] = []
    for family, length in config.families():
        if family == "S":
            names += ["s_pos", "s_neg", "s_pos_emotional", "s_neg_emotional"]
        elif family == "E":
            names += ["e_pos_emoticon", "e_neg_emoticon", "e_word_contrast", "e_cross_contrast"]
        elif family == "P":
            names += ["p_exclamations", "p_dots", "p_questions", "p_caps_words", "p_quotes"]
        elif family == "NUM":
            names += ["num_value"]
        elif family == "UNIT":
            names += [f"unit_{u}" for u in config.unit_vocabulary]
        else:
            names += [f"emb_{i}" for i in range(length)]
    return names


def feature_matrix(
    analyzed: Sequence[AnalyzedTweet],
    config: FeatureConfig,
    table: EmbeddingTable | None = None,
    slex: SentimentLexicon | None = None,
    elex: EmoticonLexicon | None = None,
) -> np.ndarray:
    if not analyzed:
        return np.zeros((0, config.length()))
    return np.vstack(
        [assemble_features(t, config, table, slex, elex).values for t in analyzed]
    )
