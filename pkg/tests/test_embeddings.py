import numpy as np
import pytest
from hypothesis import given, strategies as st

from numsarc.embeddings import (
    EmbeddingTable,
    SgnsConfig,
    compose_vector,
    cosine,
    load_embeddings,
    save_embeddings,
    sgns_pair_loss,
    train_sgns,
)
from numsarc.errors import DataError


def make_table(words, matrix):
    return EmbeddingTable({w: i for i, w in enumerate(words)}, np.array(matrix, dtype=float))


class TestLoad:
    def test_basic_parse(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("a 1 2 3 4\nb 0 0 0 1\nc -1 0.5 2 3\n")
        table = load_embeddings(str(path))
        assert len(table) == 3 and table.dimension == 4
        assert np.allclose(table.vector("c"), [-1, 0.5, 2, 3])

    def test_header_line_skipped(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("2 3\na 1 2 3\nb 4 5 6\n")
        table = load_embeddings(str(path))
        assert len(table) == 2 and table.dimension == 3

    def test_ragged_rows_error_names_line(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("a 1 2 3 4\nb 1 2 3 4 5\n")
        with pytest.raises(DataError, match=":2"):
            load_embeddings(str(path))

    def test_non_numeric_error(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("a 1 x\n")
        with pytest.raises(DataError, match=":1"):
            load_embeddings(str(path))

    def test_duplicate_word_error(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("a 1 2\na 3 4\n")
        with pytest.raises(DataError, match="duplicate"):
            load_embeddings(str(path))

    def test_expected_dimension_mismatch(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("a " + " ".join(["0.1"] * 100) + "\n")
        with pytest.raises(DataError, match="dimension"):
            load_embeddings(str(path), expected_d=200)

    def test_save_load_roundtrip(self, tmp_path):
        table = make_table(["x", "y"], [[1.5, -2.25], [0.125, 3.0]])
        path = tmp_path / "v.txt"
        save_embeddings(table, str(path))
        again = load_embeddings(str(path), expected_d=2)
        assert again.vocab == table.vocab
        assert np.array_equal(again.matrix, table.matrix)


class TestCompose:
    def test_mean_of_two(self):
        table = make_table(["a", "b"], [[1, 0], [0, 1]])
        out = compose_vector(["a", "b"], table)
        assert np.allclose(out.vector, [0.5, 0.5]) and out.word_count == 2

    def test_divisor_is_in_vocab_count(self):
        table = make_table(["a", "b", "c", "d"], np.eye(4))
        out = compose_vector(["a", "b", "c", "d"], table)
        assert np.allclose(out.vector, np.full(4, 0.25))
        skipped = compose_vector(["a", "b", "oov1", "oov2"], table)
        assert np.allclose(skipped.vector, [0.5, 0.5, 0, 0])  # divided by 2, not 4

    def test_all_oov_flagged_empty(self):
        table = make_table(["a"], [[1.0, 2.0]])
        out = compose_vector(["x", "y"], table)
        assert out.empty and np.allclose(out.vector, 0.0)

    def test_single_word_identity(self):
        table = make_table(["a", "b"], [[3.0, -4.0], [1.0, 1.0]])
        out = compose_vector(["a"], table)
        assert np.array_equal(out.vector, [3.0, -4.0])


class TestCosine:
    def test_identity_orthogonal_antiparallel(self):
        assert cosine(np.array([3.0, 4.0]), np.array([3.0, 4.0])) == pytest.approx(1.0)
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)
        assert cosine(np.array([1.0, 2.0]), np.array([-1.0, -2.0])) == pytest.approx(-1.0)

    def test_zero_norm_is_zero(self):
        assert cosine(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            cosine(np.zeros(3), np.zeros(4))

    @given(
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    )
    def test_symmetry(self, u, v):
        u, v = np.array(u), np.array(v)
        assert cosine(u, v) == pytest.approx(cosine(v, u))

    @given(
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.floats(0.01, 100),
    )
    def test_scale_invariance(self, u, v, alpha):
        u, v = np.array(u), np.array(v)
        assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-9)


class TestSgns:
    def test_pair_gradients_match_finite_differences(self):
        rng = np.random.default_rng(0)
        d, k = 7, 4
        v = rng.normal(size=d)
        u = rng.normal(size=d)
        negs = rng.normal(size=(k, d))
        _, g_v, g_u, g_n = sgns_pair_loss(v, u, negs)
        eps = 1e-5

        def loss_at(vv, uu, nn):
            return sgns_pair_loss(vv, uu, nn)[0]

        worst = 0.0
        for arr, grad in ((v, g_v), (u, g_u), (negs, g_n)):
            flat, gflat = arr.reshape(-1), np.asarray(grad).reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                up = loss_at(v, u, negs)
                flat[i] = orig - eps
                down = loss_at(v, u, negs)
                flat[i] = orig
                fd = (up - down) / (2 * eps)
                worst = max(worst, abs(fd - gflat[i]) / max(abs(fd) + abs(gflat[i]), 1e-8))
        assert worst < 1e-4

    def _synthetic_corpus(self, n_sentences=500, seed=1):
        # 30 topics of 8 words each: enough structure that the first epochs
        # keep finding signal instead of saturating immediately
        rng = np.random.default_rng(seed)
        topics = [[f"t{a}w{b}" for b in range(8)] for a in range(30)]
        corpus = []
        for _ in range(n_sentences):
            topic = topics[rng.integers(len(topics))]
            corpus.append([topic[rng.integers(8)] for _ in range(8)])
        return corpus

    def test_epoch_loss_decreases(self):
        corpus = self._synthetic_corpus()
        result = train_sgns(corpus, SgnsConfig(dimension=16, epochs=3, seed=0))
        losses = result.epoch_losses
        assert losses[0] > losses[1] > losses[2]

    def test_min_count_filter(self):
        corpus = [["common", "common", "rare"], ["common", "words"], ["words", "common"]]
        result = train_sgns(corpus, SgnsConfig(dimension=4, min_count=2, seed=0))
        assert "rare" not in result.table.vocab
        assert "common" in result.table.vocab

    def test_empty_vocabulary_error(self):
        with pytest.raises(DataError):
            train_sgns([["a"], ["b"]], SgnsConfig(dimension=4, min_count=5, seed=0))

    def test_bitwise_reproducible(self):
        corpus = self._synthetic_corpus(60)
        cfg = SgnsConfig(dimension=8, epochs=2, seed=99)
        a = train_sgns(corpus, cfg)
        b = train_sgns(corpus, cfg)
        assert np.array_equal(a.table.matrix, b.table.matrix)
        assert a.epoch_losses == b.epoch_losses
        assert a.table.fingerprint() == b.table.fingerprint()

    def test_config_validation(self):
        with pytest.raises(DataError):
            SgnsConfig(dimension=0)
        with pytest.raises(DataError):
            SgnsConfig(learning_rate=-1.0)
