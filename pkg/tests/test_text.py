import logging

import pytest
from hypothesis import given, strategies as st

from numsarc.text import (
    NUMBER_RE,
    TAG_ALPHABET,
    TaggedToken,
    Token,
    analyze,
    default_pos_lexicon,
    default_unit_aliases,
    extract_noun_phrases,
    extract_numeric_mentions,
    normalize_unit,
    parse_number,
    pos_tag,
    tokenize,
)


def surfaces(text):
    return [t.surface for t in tokenize(text)]


class TestTokenize:
    def test_paper_clock_sentence(self):
        assert surfaces("8:30 am meetings are the best") == [
            "8:30", "am", "meetings", "are", "the", "best",
        ]

    def test_trailing_punctuation_split(self):
        assert surfaces("fun!") == ["fun", "!"]
        assert surfaces("really?!") == ["really", "?", "!"]

    def test_empty(self):
        assert tokenize("") == []

    def test_currency_prefix_split(self):
        assert surfaces("$34.04 for a trip") == ["$", "34.04", "for", "a", "trip"]

    def test_hyphen_removed_inside_words(self):
        assert surfaces("battery back-up") == ["battery", "backup"]

    def test_emoticons_survive(self):
        assert surfaces("great :) or :(") == ["great", ":)", "or", ":("]

    def test_numeric_with_trailing_dot(self):
        assert surfaces("waited 4.") == ["waited", "4", "."]

    def test_positions_strictly_increasing(self):
        toks = tokenize("a b! c")
        assert [t.position for t in toks] == list(range(len(toks)))

    @given(st.lists(st.sampled_from(["love", "2", "8:30", "hours", "!", ":)", "backup"]), max_size=8))
    def test_join_roundtrip(self, tokens):
        # tokenizing the space-join of emitted tokens reproduces them
        assert surfaces(" ".join(tokens)) == tokens


class TestPosTag:
    def test_number_is_cd(self):
        (tt,) = pos_tag(tokenize("2"))
        assert tt.tag == "CD"

    def test_lexicon_entry(self):
        (tt,) = pos_tag(tokenize("hours"))
        assert tt.tag == "NNS"

    def test_ly_suffix_is_adverb(self):
        (tt,) = pos_tag(tokenize("quickly"))
        assert "quickly" not in default_pos_lexicon()
        assert tt.tag == "RB"

    def test_unknown_defaults_to_noun(self):
        (tt,) = pos_tag(tokenize("flibbertigibbet"))
        assert tt.tag == "NN"

    def test_tags_in_alphabet(self):
        tagged = pos_tag(tokenize("the awesome phone costs $99 today :)"))
        assert all(tt.tag in TAG_ALPHABET for tt in tagged)

    @given(
        st.from_regex(r"[0-9]{1,6}", fullmatch=True)
        | st.from_regex(r"[0-9]{1,3}\.[0-9]{1,3}", fullmatch=True)
        | st.from_regex(r"[0-9]{1,2}:[0-9]{2}", fullmatch=True)
    )
    def test_numeric_pattern_always_cd(self, surface):
        (tt,) = pos_tag([Token(surface, 0)])
        assert tt.tag == "CD"


class TestNounPhrases:
    def test_paper_battery_example(self):
        a = analyze("t", "this phone has an awesome battery back-up of 2 hours")
        assert a.noun_phrase_words == ["phone", "awesome", "battery", "backup", "hours"]

    def test_paper_meetings_example(self):
        a = analyze("t", "8:30 am meetings are the best way to start birthday weekend")
        assert a.noun_phrase_words == ["meetings", "way", "birthday", "weekend"]

    def test_no_nouns(self):
        a = analyze("t", "go away now")
        assert a.noun_phrase_words == []

    def test_duplicates_kept_in_order(self):
        a = analyze("t", "phone battery and phone screen")
        assert a.noun_phrase_words == ["phone", "battery", "phone", "screen"]

    def test_trailing_adjective_adjacent_to_chunk(self):
        tagged = pos_tag(tokenize("battery awesome again"))
        assert extract_noun_phrases(tagged) == ["battery", "awesome"]


class TestNumericMentions:
    def test_clock_value(self):
        assert parse_number("8:30") == pytest.approx(8.5)
        assert parse_number("34.04") == pytest.approx(34.04)

    def test_unitless_number_at_end(self):
        a = analyze("t", "i love waking up at 545")
        assert [(m.value, m.unit, m.raw_unit) for m in a.mentions] == [(545.0, None, None)]

    def test_multi_number_tweet(self):
        a = analyze("t", "$34.04 for a 10 mile trip that takes 19 minutes? that makes sense")
        assert [(m.value, m.unit, m.raw_unit) for m in a.mentions] == [
            (34.04, None, "for"),
            (10.0, "miles", "mile"),
            (19.0, "minutes", "minutes"),
        ]

    def test_following_number_is_not_a_unit(self):
        a = analyze("t", "scored 3 2 yesterday")
        assert [(m.value, m.raw_unit) for m in a.mentions] == [
            (3.0, None),  # next token is itself CD
            (2.0, "yesterday"),
        ]

    def test_sentence_punctuation_is_not_a_unit(self):
        a = analyze("t", "waited 45 . then left")
        assert a.mentions[0].raw_unit is None

    def test_every_cd_token_yields_mention_or_diagnostic(self, caplog):
        tagged = pos_tag(tokenize("2 hours 8:30 am 545"))
        cds = sum(1 for tt in tagged if tt.tag == "CD")
        with caplog.at_level(logging.WARNING, logger="numsarc.text"):
            mentions = extract_numeric_mentions(tagged)
        assert len(mentions) + len(caplog.records) == cds

    def test_unparseable_cd_is_skipped_with_diagnostic(self, caplog):
        bogus = [TaggedToken(Token("1:2:3", 0), "CD")]
        with caplog.at_level(logging.WARNING, logger="numsarc.text"):
            mentions = extract_numeric_mentions(bogus)
        assert mentions == []
        assert len(caplog.records) == 1


class TestNormalizeUnit:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("min", "minutes"),
            ("hr", "hours"),
            ("hours", "hours"),
            ("mile", "miles"),
            ("a.m", "am"),
            ("degree", "degrees"),
            ("for", None),
            ("of", None),
            ("banana", "banana"),
        ],
    )
    def test_alias_table(self, raw, expected):
        assert normalize_unit(raw) == expected

    def test_idempotent_on_outputs(self):
        for alias in default_unit_aliases():
            out = normalize_unit(alias)
            assert out is not None
            assert normalize_unit(out) == out


def test_number_regex_rejects_glued_tokens():
    for bad in ("model34d", "4s", "<3", "1:2:3", "1.2.3", ""):
        assert not NUMBER_RE.fullmatch(bad)
    for good in ("2", "545", "34.04", "8:30"):
        assert NUMBER_RE.fullmatch(good)
