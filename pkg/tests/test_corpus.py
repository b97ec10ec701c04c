import pytest
from hypothesis import given, strategies as st

from numsarc.corpus import (
    DATASET_PRESETS,
    DatasetSpec,
    FoldAssignment,
    LabeledTweet,
    RawTweet,
    build_datasets,
    ingest,
    is_numeric_tweet,
    label_by_hashtag,
    normalize_tweet,
    numeric_fraction,
    stratified_kfold,
)
from numsarc.errors import DataError
from numsarc.text import tokenize


def lt(i, text, label):
    return LabeledTweet(str(i), text, label)


class TestNormalize:
    def test_label_hashtag_stripped(self):
        raw = RawTweet("1", "Love waking up at 4 am #sarcasm")
        assert normalize_tweet(raw) == "love waking up at 4 am"

    def test_urls_and_mentions_removed(self):
        assert normalize_tweet(RawTweet("1", "see http://t.co/ab @bob hi")) == "see hi"
        assert normalize_tweet(RawTweet("1", "go to t.co/xyz now")) == "go to now"

    def test_non_ascii_removed(self):
        assert normalize_tweet(RawTweet("1", "Καλημέρα hello")) == "hello"

    def test_plain_hashtag_kept_as_word(self):
        assert normalize_tweet(RawTweet("1", "ugh #monday again")) == "ugh monday again"

    def test_retweet_prefix_stripped(self):
        assert normalize_tweet(RawTweet("1", "RT rt cool story")) == "cool story"

    def test_whitespace_collapsed(self):
        assert normalize_tweet(RawTweet("1", "  a   b\tc  ")) == "a b c"

    def test_empty_signal(self):
        assert normalize_tweet(RawTweet("1", "@bob #sarcasm")) == ""

    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = normalize_tweet(RawTweet("x", text))
        assert normalize_tweet(RawTweet("x", once)) == once

    @given(st.text(max_size=80))
    def test_label_hashtags_never_survive(self, text):
        out = normalize_tweet(RawTweet("x", text + " #sarcasm #notsarcastic"))
        assert "#sarcasm" not in out and "#notsarcastic" not in out


class TestHashtagLabel:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("ugh #sarcasm", 1),
            ("so great #Sarcastic!", 1),
            ("what a day #BeingSarcastic", 1),
            ("fine day #notsarcastic", 0),
            ("fine day #nonsarcasm", 0),
            ("fine day", None),
            ("both #sarcasm #nonsarcasm", None),
            ("sarcasm without hash", None),
        ],
    )
    def test_labels(self, text, expected):
        assert label_by_hashtag(RawTweet("1", text)) == expected


class TestNumericFilter:
    def test_pure_numbers_qualify(self):
        assert is_numeric_tweet(["having", "2", "hours"])
        assert is_numeric_tweet(["at", "8:30"])
        assert is_numeric_tweet(["paid", "34.04"])

    def test_glued_characters_do_not(self):
        assert not is_numeric_tweet(["model34d", "is", "great"])
        assert not is_numeric_tweet(["got", "4s"])
        assert not is_numeric_tweet(["<3", "you"])
        assert not is_numeric_tweet(["no", "digits"])

    def test_fraction_counts(self):
        corp = [lt(0, "wait 2 hours", 1), lt(1, "no digits", 0), lt(2, "at 8:30", 0), lt(3, "hello", 1)]
        assert numeric_fraction(corp) == 0.5
        assert numeric_fraction([lt(0, "2", 1)]) == 1.0
        assert numeric_fraction([lt(0, "two", 1)]) == 0.0

    def test_fraction_empty_corpus(self):
        with pytest.raises(DataError):
            numeric_fraction([])

    def test_fraction_matches_bruteforce(self):
        corp = [lt(i, t, i % 2) for i, t in enumerate(
            ["a 1", "b", "c 2.5", "d4d", "e 1:30", "f !", "10", "x 3 y"]
        )]
        brute = sum(
            1 for t in corp if any(
                tok.surface.replace(".", "", 1).replace(":", "", 1).isdigit()
                and tok.surface[0].isdigit() and tok.surface[-1].isdigit()
                for tok in tokenize(t.text)
            )
        ) / len(corp)
        assert numeric_fraction(corp) == brute


class TestIngest:
    def test_pipeline(self):
        rows = [
            {"id": "1", "text": "Love waking up at 4 am #sarcasm"},
            {"id": "2", "text": "nice walk today #nonsarcasm"},
            {"id": "3", "text": "no marker here"},
            {"id": "4", "text": "love waking up at 4 AM #sarcastic"},  # dup after normalize
            {"id": "5", "text": "conflict #sarcasm #nonsarcasm"},
            {"id": "6", "text": "@only http://x.y #sarcasm"},  # empty after normalize
            {"id": "7", "text": "explicit", "label": 1},
        ]
        tweets = ingest(rows)
        assert [t.id for t in tweets] == ["1", "2", "7"]
        assert [t.label for t in tweets] == [1, 0, 1]
        assert tweets[0].raw_text == "Love waking up at 4 am #sarcasm"

    def test_duplicate_id_rejected(self):
        with pytest.raises(DataError):
            ingest([{"id": "1", "text": "a #sarcasm"}, {"id": "1", "text": "b #sarcasm"}])

    def test_bad_label_rejected(self):
        with pytest.raises(DataError):
            ingest([{"id": "1", "text": "a", "label": 2}])


def _corpus(n_pos, n_neg, numeric_pos=True):
    tweets = []
    for i in range(n_pos):
        text = f"sarcastic tweet number {i} hours" if numeric_pos else f"sarcastic tweet {'x' * (i % 5)}"
        tweets.append(lt(f"p{i}", text, 1))
    for i in range(n_neg):
        tweets.append(lt(f"n{i}", f"plain tweet variant {'y' * (i % 7)} idx {i}", 0))
    return tweets


class TestBuildDatasets:
    def test_counts_match_spec(self):
        corp = _corpus(30, 50)
        spec = DatasetSpec("TOY", 20, 40, True)
        ds = build_datasets(corp, spec, seed=7)
        assert sum(t.label == 1 for t in ds) == 20
        assert sum(t.label == 0 for t in ds) == 40

    def test_numeric_only_positive_enforced(self):
        corp = _corpus(10, 10) + [lt("nonnum", "no digits here", 1)]
        ds = build_datasets(corp, DatasetSpec("TOY", 10, 10, True), seed=0)
        ids = {t.id for t in ds if t.label == 1}
        assert "nonnum" not in ids

    def test_deterministic(self):
        corp = _corpus(30, 50)
        spec = DatasetSpec("TOY", 20, 40, True)
        a = build_datasets(corp, spec, seed=1)
        b = build_datasets(corp, spec, seed=1)
        assert [t.id for t in a] == [t.id for t in b]
        c = build_datasets(corp, spec, seed=2)
        assert [t.id for t in a] != [t.id for t in c]

    def test_error_names_deficient_class(self):
        corp = _corpus(3, 50)
        with pytest.raises(DataError, match="positive"):
            build_datasets(corp, DatasetSpec("TOY", 10, 10, True), seed=0)
        with pytest.raises(DataError, match="negative"):
            build_datasets(_corpus(30, 3), DatasetSpec("TOY", 10, 10, True), seed=0)

    def test_presets_match_published_counts(self):
        assert DATASET_PRESETS["d2"].pos_count == 8681
        assert DATASET_PRESETS["d2"].neg_count == 8681
        assert DATASET_PRESETS["d3"].neg_count == 42107
        assert DATASET_PRESETS["test"].pos_count == 1843
        assert DATASET_PRESETS["test"].neg_count == 8317
        assert DATASET_PRESETS["d1"].pos_count == 100_000


class TestStratifiedKfold:
    def test_exact_divisibility(self):
        ds = [lt(f"p{i}", "a", 1) for i in range(5)] + [lt(f"n{i}", "b", 0) for i in range(5)]
        folds = stratified_kfold(ds, 5, seed=0)
        for f in range(5):
            ids = folds.fold_ids(f)
            labels = [next(t.label for t in ds if t.id == i) for i in ids]
            assert sorted(labels) == [0, 1]

    def test_partition(self):
        ds = _corpus(13, 29)
        folds = stratified_kfold(ds, 4, seed=3)
        assert sorted(folds.assignments) == sorted(t.id for t in ds)
        assert set(folds.assignments.values()) == {0, 1, 2, 3}

    def test_balanced_within_one(self):
        ds = _corpus(13, 29)
        folds = stratified_kfold(ds, 4, seed=3)
        for label, total in ((1, 13), (0, 29)):
            per_fold = [0] * 4
            for t in ds:
                if t.label == label:
                    per_fold[folds.assignments[t.id]] += 1
            assert max(per_fold) - min(per_fold) <= 1

    def test_deterministic(self):
        ds = _corpus(10, 10)
        assert stratified_kfold(ds, 5, 42).assignments == stratified_kfold(ds, 5, 42).assignments

    def test_k_too_large(self):
        ds = _corpus(3, 50)
        with pytest.raises(DataError):
            stratified_kfold(ds, 4, seed=0)
        with pytest.raises(DataError):
            stratified_kfold(ds, 1, seed=0)

    def test_roundtrip_json(self):
        ds = _corpus(5, 5)
        folds = stratified_kfold(ds, 5, seed=0)
        again = FoldAssignment.from_json(folds.to_json())
        assert again == folds
