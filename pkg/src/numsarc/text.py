"""Tokenization, POS tagging, noun-phrase chunking and numeric-mention extraction.

Works on tweets already normalized by :mod:`numsarc.corpus` (lowercase,
ASCII-only, whitespace-collapsed). The tagger is a lexicon plus a handful of
suffix rules; only the cardinal/noun/adjective/adverb/verb distinctions matter
downstream, so a trained model would be overkill.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

__all__ = [
    "Token",
    "TaggedToken",
    "NumericMention",
    "AnalyzedTweet",
    "NUMBER_RE",
    "TAG_ALPHABET",
    "tokenize",
    "pos_tag",
    "extract_noun_phrases",
    "extract_numeric_mentions",
    "normalize_unit",
    "parse_number",
    "analyze",
    "load_pos_lexicon",
    "load_unit_aliases",
    "default_pos_lexicon",
    "default_unit_aliases",
]

logger = logging.getLogger(__name__)

# Pure numeric token: digits with at most one decimal point or one clock ':'.
NUMBER_RE = re.compile(r"\d+(?:[.:]\d+)?")

TAG_ALPHABET = frozenset(
    {
        "NN", "NNS", "NNP",
        "JJ", "JJR", "JJS",
        "RB", "RBR", "RBS",
        "VB", "VBD", "VBG", "VBN", "VBP", "VBZ",
        "CD", "IN", "DT", "PRP", "UH", "SYM", "OTHER",
    }
)

_ADJ_TAGS = frozenset({"JJ", "JJR", "JJS"})
_NOUN_TAGS = frozenset({"NN", "NNS", "NNP"})

# Punctuation split off the tail of a token by the tokenizer.
_SPLIT_PUNCT = ".,!?;"
# Tokens that never act as a number unit.
_SENTENCE_PUNCT = frozenset({".", ",", "!", "?", ";"})
# Following-word "units" that are actually function words, mapped to no unit.
_STOPWORD_UNITS = frozenset({"for", "of", "to", "in", "at", "and", "or"})

_HYPHEN_WORD_RE = re.compile(r"[a-z]+(?:-[a-z]+)+")


@dataclass(frozen=True)
class Token:
    surface: str
    position: int


@dataclass(frozen=True)
class TaggedToken:
    token: Token
    tag: str


@dataclass(frozen=True)
class NumericMention:
    """One number found in a tweet, with the word that follows it as its unit."""

    value: float
    unit: str | None
    raw_unit: str | None
    position: int


@dataclass
class AnalyzedTweet:
    """A tweet after the full text pipeline ran over it."""

    id: str
    tokens: list[Token]
    tags: list[str]
    noun_phrase_words: list[str]
    mentions: list[NumericMention]
    label: int | None = None
    text: str = ""
    raw_text: str | None = None  # pre-normalization text, for capitalization counts

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "tokens": self.surfaces,
            "tags": list(self.tags),
            "noun_phrases": list(self.noun_phrase_words),
            "mentions": [
                {
                    "value": m.value,
                    "unit": m.unit,
                    "raw_unit": m.raw_unit,
                    "position": m.position,
                }
                for m in self.mentions
            ],
            "label": self.label,
            "raw_text": self.raw_text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyzedTweet":
        tokens = [Token(s, i) for i, s in enumerate(d["tokens"])]
        mentions = [
            NumericMention(m["value"], m["unit"], m["raw_unit"], m["position"])
            for m in d["mentions"]
        ]
        return cls(
            id=d["id"],
            tokens=tokens,
            tags=list(d["tags"]),
            noun_phrase_words=list(d["noun_phrases"]),
            mentions=mentions,
            label=d.get("label"),
            text=d.get("text", ""),
            raw_text=d.get("raw_text"),
        )


def tokenize(text: str) -> list[Token]:
    """Split normalized text into tokens.

    Whitespace-delimited; trailing sentence punctuation (``.,!?;``) is split
    into its own tokens, numerics like ``8:30`` and ``34.04`` stay intact,
    emoticons such as ``:)`` survive unscathed, a leading currency ``$`` is
    split off a number, and hyphens inside alphabetic words are dropped
    (``back-up`` -> ``backup``).
    """
    surfaces: list[str] = []
    for chunk in text.split():
        tail: list[str] = []
        while chunk and chunk[-1] in _SPLIT_PUNCT:
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tail.reverse()
        if chunk:
            if chunk.startswith("$") and NUMBER_RE.fullmatch(chunk[1:]):
                surfaces.append("$")
                surfaces.append(chunk[1:])
            elif _HYPHEN_WORD_RE.fullmatch(chunk):
                surfaces.append(chunk.replace("-", ""))
            else:
                surfaces.append(chunk)
        surfaces.extend(tail)
    return [Token(s, i) for i, s in enumerate(surfaces)]


def _load_tsv(path_or_text: str, *, from_text: bool = False) -> dict[str, str]:
    mapping: dict[str, str] = {}
    if from_text:
        lines = path_or_text.splitlines()
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'key<TAB>value', got {line!r}")
        if parts[0] in mapping:
            raise ValueError(f"line {lineno}: duplicate entry {parts[0]!r}")
        mapping[parts[0]] = parts[1]
    return mapping


def load_pos_lexicon(path: str) -> dict[str, str]:
    """Load a ``word<TAB>TAG`` lexicon file, validating tags."""
    lex = _load_tsv(path)
    for word, tag in lex.items():
        if tag not in TAG_ALPHABET:
            raise ValueError(f"unknown POS tag {tag!r} for word {word!r}")
    return lex


def load_unit_aliases(path: str) -> dict[str, str]:
    """Load an ``alias<TAB>canonical`` unit table."""
    return _load_tsv(path)


@lru_cache(maxsize=1)
def default_pos_lexicon() -> dict[str, str]:
    text = resources.files("numsarc.data").joinpath("pos_lexicon.tsv").read_text("utf-8")
    return _load_tsv(text, from_text=True)


@lru_cache(maxsize=1)
def default_unit_aliases() -> dict[str, str]:
    text = resources.files("numsarc.data").joinpath("unit_aliases.tsv").read_text("utf-8")
    return _load_tsv(text, from_text=True)


def _suffix_tag(word: str) -> str:
    if not any(c.isalpha() for c in word):
        return "SYM"
    if word.endswith("ly"):
        return "RB"
    if len(word) > 4 and word.endswith("ing"):
        return "VBG"
    if len(word) > 3 and word.endswith("ed"):
        return "VBD"
    if len(word) > 4 and word.endswith("est"):
        return "JJS"
    if len(word) > 3 and word.endswith("s") and not word.endswith("ss"):
        return "NNS"
    return "NN"


def pos_tag(tokens: list[Token], lexicon: dict[str, str] | None = None) -> list[TaggedToken]:
    """Tag tokens: numeric pattern -> CD always, then lexicon, then suffix rules."""
    lex = default_pos_lexicon() if lexicon is None else lexicon
    tagged = []
    for tok in tokens:
        s = tok.surface
        if NUMBER_RE.fullmatch(s):
            tag = "CD"
        elif s in lex:
            tag = lex[s]
        else:
            tag = _suffix_tag(s)
        tagged.append(TaggedToken(tok, tag))
    return tagged


def extract_noun_phrases(tagged: list[TaggedToken]) -> list[str]:
    """Flatten noun chunks into the word list the matchers consume.

    A chunk is a maximal ``(JJ|JJR|JJS)* (NN|NNS|NNP)+`` run. Emitted content
    words are the nouns plus plain JJ adjectives; comparatives/superlatives
    stay out (they behave like degree words, not content). A lone JJ directly
    after a chunk that does not open the next chunk is appended too.
    """
    words: list[str] = []
    i, n = 0, len(tagged)
    while i < n:
        j = i
        while j < n and tagged[j].tag in _ADJ_TAGS:
            j += 1
        k = j
        while k < n and tagged[k].tag in _NOUN_TAGS:
            k += 1
        if k == j:  # no noun head: skip the adjective run (or single token)
            i = j + 1 if j == i else j
            continue
        for tt in tagged[i:k]:
            if tt.tag == "JJ" or tt.tag in _NOUN_TAGS:
                words.append(tt.token.surface)
        if k < n and tagged[k].tag == "JJ":
            m = k
            while m < n and tagged[m].tag in _ADJ_TAGS:
                m += 1
            if m >= n or tagged[m].tag not in _NOUN_TAGS:
                words.append(tagged[k].token.surface)
                k += 1
        i = k
    return words


def parse_number(surface: str) -> float:
    """Parse a CD token surface; clock forms map HH:MM -> HH + MM/60."""
    if ":" in surface:
        hours, minutes = surface.split(":", 1)
        return float(hours) + float(minutes) / 60.0
    return float(surface)


def normalize_unit(raw_unit: str, aliases: dict[str, str] | None = None) -> str | None:
    """Canonicalize a unit surface; function words yield no unit at all."""
    table = default_unit_aliases() if aliases is None else aliases
    unit = raw_unit.lower()
    if unit in _STOPWORD_UNITS:
        return None
    return table.get(unit, unit)


def extract_numeric_mentions(
    tagged: list[TaggedToken],
    aliases: dict[str, str] | None = None,
) -> list[NumericMention]:
    """One mention per CD token; the following word (if any) is its unit.

    Unparseable CD surfaces are skipped with a logged diagnostic, so
    ``len(mentions) + skipped == number of CD tokens`` always holds.
    """
    mentions: list[NumericMention] = []
    for idx, tt in enumerate(tagged):
        if tt.tag != "CD":
            continue
        try:
            value = parse_number(tt.token.surface)
        except ValueError:
            logger.warning(
                "skipping unparseable CD token %r at position %d",
                tt.token.surface,
                tt.token.position,
            )
            continue
        raw_unit: str | None = None
        unit: str | None = None
        if idx + 1 < len(tagged):
            nxt = tagged[idx + 1]
            if nxt.tag != "CD" and nxt.token.surface not in _SENTENCE_PUNCT:
                raw_unit = nxt.token.surface
                unit = normalize_unit(raw_unit, aliases)
        mentions.append(NumericMention(value, unit, raw_unit, tt.token.position))
    return mentions


def analyze(
    tweet_id: str,
    text: str,
    label: int | None = None,
    raw_text: str | None = None,
    lexicon: dict[str, str] | None = None,
    aliases: dict[str, str] | None = None,
) -> AnalyzedTweet:
    """Run the full text pipeline over one normalized tweet."""
    tokens = tokenize(text)
    tagged = pos_tag(tokens, lexicon)
    return AnalyzedTweet(
        id=tweet_id,
        tokens=tokens,
        tags=[tt.tag for tt in tagged],
        noun_phrase_words=extract_noun_phrases(tagged),
        mentions=extract_numeric_mentions(tagged, aliases),
        label=label,
        text=text,
        raw_text=raw_text,
    )
