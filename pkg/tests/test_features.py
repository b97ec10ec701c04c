import numpy as np
import pytest

from numsarc.embeddings import EmbeddingTable
from numsarc.errors import DataError
from numsarc.features import (
    EMOTIONAL_TAGS,
    EmoticonLexicon,
    FeatureConfig,
    SentimentLexicon,
    assemble_features,
    default_emoticon_lexicon,
    default_sentiment_lexicon,
    emoticon_features,
    feature_matrix,
    feature_names,
    numeric_features,
    punctuation_features,
    sentiment_features,
    unit_vocabulary_from,
)
from numsarc.text import analyze

SLEX = SentimentLexicon(
    positive=frozenset({"awesome", "great", "good", "sunshine", "love"}),
    negative=frozenset({"bad", "terrible", "awful"}),
)
ELEX = EmoticonLexicon(positive=frozenset({":)"}), negative=frozenset({":("}))


class TestSentiment:
    def test_emotional_adjective(self):
        a = analyze("t", "awesome")
        assert a.tags == ["JJ"]
        assert sentiment_features(a, SLEX).tolist() == [1, 0, 1, 0]

    def test_positive_noun_not_emotional(self):
        a = analyze("t", "sunshine")
        assert a.tags == ["NN"]
        assert sentiment_features(a, SLEX).tolist() == [1, 0, 0, 0]

    def test_no_lexicon_words(self):
        a = analyze("t", "the cat sat")
        assert sentiment_features(a, SLEX).tolist() == [0, 0, 0, 0]

    def test_emotional_tag_set(self):
        assert EMOTIONAL_TAGS == {
            "JJ", "JJR", "JJS", "RB", "RBR", "RBS",
            "VB", "VBD", "VBG", "VBN", "VBP", "VBZ",
        }

    def test_counts_mixed(self):
        a = analyze("t", "great great terrible sunshine")
        assert sentiment_features(a, SLEX).tolist() == [3, 1, 2, 1]


class TestEmoticon:
    def test_positive_word_negative_emoticon(self):
        a = analyze("t", "great :(")
        assert emoticon_features(a, SLEX, ELEX).tolist() == [0, 1, 0, 1]

    def test_word_contrast(self):
        a = analyze("t", "good bad day")
        out = emoticon_features(a, SLEX, ELEX)
        assert out[2] == 1 and out[3] == 0

    def test_emoticon_only(self):
        a = analyze("t", ":) :)")
        assert emoticon_features(a, SLEX, ELEX).tolist() == [1, 0, 0, 0]

    def test_default_lexicons_disjoint(self):
        slex = default_sentiment_lexicon()
        elex = default_emoticon_lexicon()
        assert not (slex.positive & slex.negative)
        assert not (elex.positive & elex.negative)

    def test_overlapping_lexicon_rejected(self):
        with pytest.raises(DataError):
            SentimentLexicon(frozenset({"x"}), frozenset({"x"}))


class TestPunctuation:
    def test_counting(self):
        assert punctuation_features("WOW... really?!").tolist() == [1, 3, 1, 1, 0]

    def test_quote_count(self):
        assert punctuation_features("it's 'fine'")[4] == 3

    def test_empty(self):
        assert punctuation_features("").tolist() == [0, 0, 0, 0, 0]
        assert punctuation_features(None).tolist() == [0, 0, 0, 0, 0]

    def test_ellipsis_counts_three_dots(self):
        assert punctuation_features("wait…")[1] == 3

    def test_single_letter_caps_not_counted(self):
        assert punctuation_features("I am OK")[3] == 1  # only "OK"


class TestNumeric:
    def test_value_and_onehot(self):
        cfg = FeatureConfig(unit_vocabulary=("minutes", "hours", "am"))
        a = analyze("t", "battery of 2 hours")
        assert numeric_features(a, cfg).tolist() == [2.0, 0.0, 1.0, 0.0]

    def test_unknown_unit_zero_onehot(self):
        cfg = FeatureConfig(unit_vocabulary=("minutes", "hours"))
        a = analyze("t", "ran 5 zorps")
        assert numeric_features(a, cfg).tolist() == [5.0, 0.0, 0.0]

    def test_unitless_mention(self):
        cfg = FeatureConfig(unit_vocabulary=("minutes",))
        a = analyze("t", "woke at 545")
        assert numeric_features(a, cfg).tolist() == [545.0, 0.0]

    def test_no_mention(self):
        cfg = FeatureConfig(unit_vocabulary=("minutes",))
        a = analyze("t", "no digits")
        assert numeric_features(a, cfg).tolist() == [0.0, 0.0]

    def test_at_most_one_hot(self):
        cfg = FeatureConfig(unit_vocabulary=("minutes", "hours", "am", "days"))
        for text in ("2 hours", "3 am", "5 zorps", "545", "plain"):
            onehot = numeric_features(analyze("t", text), cfg)[1:]
            assert onehot.sum() in (0.0, 1.0)
            assert set(onehot.tolist()) <= {0.0, 1.0}


class TestAssemble:
    def test_s_p_only_length(self):
        cfg = FeatureConfig(
            sentiment=True, emoticon=False, punctuation=True,
            number_value=False, unit_onehot=False,
        )
        fv = assemble_features(analyze("t", "great day"), cfg)
        assert fv.values.shape == (9,)
        assert [f for f, _, _ in fv.layout] == ["S", "P"]

    def test_embedding_only_length(self):
        rng = np.random.default_rng(0)
        table = EmbeddingTable({"a": 0}, rng.normal(size=(1, 300)))
        cfg = FeatureConfig(
            sentiment=False, emoticon=False, punctuation=False,
            number_value=False, unit_onehot=False,
            tweet_embedding=True, embedding_dim=300,
        )
        fv = assemble_features(analyze("t", "a b"), cfg, table)
        assert fv.values.shape == (300,)

    def test_full_layout_arithmetic(self):
        rng = np.random.default_rng(0)
        table = EmbeddingTable({"a": 0}, rng.normal(size=(1, 50)))
        cfg = FeatureConfig(
            unit_vocabulary=("minutes", "hours", "am"),
            tweet_embedding=True, embedding_dim=50,
        )
        fv = assemble_features(analyze("t", "a of 2 hours"), cfg, table)
        assert fv.values.shape == (4 + 4 + 5 + 1 + 3 + 50,)
        offsets = {fam: (off, ln) for fam, off, ln in fv.layout}
        assert offsets["S"] == (0, 4)
        assert offsets["E"] == (4, 4)
        assert offsets["P"] == (8, 5)
        assert offsets["NUM"] == (13, 1)
        assert offsets["UNIT"] == (14, 3)
        assert offsets["EMB"] == (17, 50)

    def test_layout_partition(self):
        cfg = FeatureConfig(unit_vocabulary=("hours",))
        fv = assemble_features(analyze("t", "text 2 hours"), cfg)
        end = 0
        for _, off, ln in fv.layout:
            assert off == end
            end = off + ln
        assert end == fv.values.shape[0]

    def test_embedding_requires_table(self):
        cfg = FeatureConfig(tweet_embedding=True, embedding_dim=10)
        with pytest.raises(DataError):
            assemble_features(analyze("t", "a"), cfg, None)

    def test_dimension_mismatch(self):
        table = EmbeddingTable({"a": 0}, np.zeros((1, 5)))
        cfg = FeatureConfig(tweet_embedding=True, embedding_dim=10)
        with pytest.raises(DataError):
            assemble_features(analyze("t", "a"), cfg, table)

    def test_capital_count_uses_raw_text(self):
        cfg = FeatureConfig(
            sentiment=False, emoticon=False, punctuation=True,
            number_value=False, unit_onehot=False,
        )
        a = analyze("t", "wow great", raw_text="WOW GREAT")
        fv = assemble_features(a, cfg)
        assert fv.values[3] == 2
        b = analyze("t", "wow great")  # no raw text: caps necessarily 0
        assert assemble_features(b, cfg).values[3] == 0

    def test_deterministic(self):
        cfg = FeatureConfig(unit_vocabulary=("hours",))
        a = analyze("t", "great phone battery of 2 hours :)")
        x1 = assemble_features(a, cfg).values
        x2 = assemble_features(a, cfg).values
        assert np.array_equal(x1, x2)

    def test_at_least_one_family_required(self):
        with pytest.raises(DataError):
            FeatureConfig(
                sentiment=False, emoticon=False, punctuation=False,
                number_value=False, unit_onehot=False, tweet_embedding=False,
            )


def test_unit_vocabulary_sorted_and_first_mention_only():
    tweets = [
        analyze("a", "took 5 minutes then 2 hours"),
        analyze("b", "battery of 3 hours"),
        analyze("c", "ran 2 miles"),
        analyze("d", "no mention"),
    ]
    assert unit_vocabulary_from(tweets) == ("hours", "miles", "minutes")


def test_feature_names_align_with_matrix():
    cfg = FeatureConfig(unit_vocabulary=("hours", "minutes"))
    names = feature_names(cfg)
    tweets = [analyze("a", "good 2 hours"), analyze("b", "bad 5 minutes")]
    X = feature_matrix(tweets, cfg)
    assert X.shape == (2, len(names))
    assert names[names.index("unit_hours")] == "unit_hours"
