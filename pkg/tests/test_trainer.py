"""Trainer: schedules, sampling ops, end-to-end behavior, determinism."""

import re

import numpy as np
import pytest

from morphgram import (
    MorphemeLexicon,
    Rng,
    TrainConfig,
    build_vocab,
    draw_negatives,
    dynamic_window,
    lr_at,
    train,
)
from morphgram.evaluate import cosine
from morphgram.rng import worker_seed
from morphgram.trainer import LR_FLOOR_FACTOR, encode_corpus, make_indexer


def write_corpus(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def quick_config(**overrides):
    base = dict(
        dim=10,
        epochs=1,
        window=5,
        negatives=5,
        lr0=0.1,
        min_count=1,
        subsample_t=0.0,
        threads=1,
        seed=7,
        neg_table_size=1000,
        log_progress=False,
    )
    base.update(overrides)
    return TrainConfig(**base)


class TestLrAt:
    def test_start(self):
        assert lr_at(0, 1000, 0.1) == 0.1

    def test_halfway(self):
        assert lr_at(500, 1000, 0.1) == pytest.approx(0.05)

    def test_floor_at_end(self):
        assert lr_at(1000, 1000, 0.1) == pytest.approx(0.1 * LR_FLOOR_FACTOR)

    def test_bounds_checked(self):
        with pytest.raises(ValueError):
            lr_at(1001, 1000, 0.1)


class TestDynamicWindow:
    def test_max_one_always_one(self):
        rng = Rng(3)
        assert all(dynamic_window(1, rng) == 1 for _ in range(1000))

    def test_uniform_over_range(self):
        rng = Rng(99)
        counts = np.zeros(6)
        for _ in range(100_000):
            counts[dynamic_window(5, rng)] += 1
        assert counts[0] == 0
        for b in range(1, 6):
            assert abs(counts[b] / 100_000 - 0.2) < 0.01


class TestDrawNegatives:
    def test_single_word_degenerate(self):
        table = np.zeros(8, dtype=np.int32)  # vocab {a}: every slot word 0
        negs = draw_negatives(table, 3, 0, Rng(1))
        assert list(negs) == [0, 0, 0]

    def test_positive_excluded(self):
        table = np.array([0] * 5 + [1] * 5, dtype=np.int32)
        rng = Rng(5)
        for _ in range(200):
            assert draw_negatives(table, 1, 0, rng)[0] == 1

    def test_marginal_matches_table_frequencies(self):
        weights = (1 / np.arange(1, 21)) ** 0.75
        slots = (weights / weights.sum() * 100_000).astype(int)
        table = np.repeat(np.arange(20, dtype=np.int32), slots)
        rng = Rng(11)
        draws = np.concatenate([draw_negatives(table, 5, 0, rng) for _ in range(20_000)])
        observed = np.bincount(draws, minlength=20) / len(draws)
        # expected: table shares renormalized with the excluded positive removed
        shares = slots / slots.sum()
        expected = shares.copy()
        expected[0] = 0.0
        expected /= expected.sum()
        assert observed[0] == 0.0
        assert np.all(np.abs(observed - expected) < 0.01)


class TestTrainBasics:
    def test_two_token_corpus_aligns_vectors(self, tmp_path):
        corpus = write_corpus(tmp_path / "ab.txt", ["a b"] * 500)
        model = train(corpus, quick_config(epochs=20, window=5))
        a = model.input[model.vocab.index["a"]]
        b_out = model.output[model.vocab.index["b"]]
        assert cosine(a, b_out) > 0.9

    def test_morpheme_empty_lexicon_equals_word_only(self, tmp_path):
        rng = np.random.default_rng(0)
        words = [f"w{i}" for i in range(30)]
        lines = [" ".join(words[j] for j in rng.integers(0, 30, 10)) for _ in range(300)]
        corpus = write_corpus(tmp_path / "c.txt", lines)
        word_model = train(corpus, quick_config(mode="word", epochs=2))
        morph_model = train(corpus, quick_config(mode="morpheme", epochs=2),
                            lexicon=MorphemeLexicon({}))
        assert np.array_equal(word_model.input, morph_model.input)
        assert np.array_equal(word_model.output, morph_model.output)

    def test_progress_interval_does_not_change_results(self, tmp_path):
        # chunks are sentence-aligned, so reporting granularity is invisible
        rng = np.random.default_rng(2)
        words = [f"w{i}" for i in range(15)]
        lines = [" ".join(words[j] for j in rng.integers(0, 15, 9)) for _ in range(150)]
        corpus = write_corpus(tmp_path / "c.txt", lines)
        coarse = train(corpus, quick_config(epochs=2, progress_interval=1_000_000))
        fine = train(corpus, quick_config(epochs=2, progress_interval=50))
        assert np.array_equal(coarse.input, fine.input)
        assert np.array_equal(coarse.output, fine.output)

    def test_single_thread_determinism(self, tmp_path):
        rng = np.random.default_rng(1)
        words = [f"w{i}" for i in range(20)]
        lines = [" ".join(words[j] for j in rng.integers(0, 20, 8)) for _ in range(200)]
        corpus = write_corpus(tmp_path / "c.txt", lines)
        cfg = quick_config(mode="ngram", bucket_count=500, subsample_t=1e-3, epochs=2)
        m1 = train(corpus, cfg)
        m2 = train(corpus, cfg)
        assert np.array_equal(m1.input, m2.input)
        assert np.array_equal(m1.output, m2.output)

    def test_token_accounting_exact(self, tmp_path):
        lines = ["a b c d e"] * 100
        corpus = write_corpus(tmp_path / "c.txt", lines)
        model = train(corpus, quick_config(epochs=3, subsample_t=1e-3))
        assert model.train_stats.tokens == 3 * model.vocab.total_tokens

    def test_throughput_positive(self, tmp_path):
        corpus = write_corpus(tmp_path / "c.txt", ["a b c"] * 50)
        model = train(corpus, quick_config())
        assert model.train_stats.tokens_per_sec > 0
        assert model.train_stats.wall_seconds > 0

    def test_window_truncated_at_sentence_bounds(self, tmp_path):
        # 3-token sentence, window 1: centers contribute 1+2+1 = 4 pairs
        corpus = write_corpus(tmp_path / "c.txt", ["a b c"])
        model = train(corpus, quick_config(window=1, negatives=1))
        assert model.train_stats.pairs == 4

    def test_windows_never_cross_lines(self, tmp_path):
        # same tokens, one line vs two: the split corpus yields fewer pairs
        one = write_corpus(tmp_path / "one.txt", ["a b c d"])
        two = write_corpus(tmp_path / "two.txt", ["a b", "c d"])
        pairs_one = train(one, quick_config(window=3, negatives=1)).train_stats.pairs
        pairs_two = train(two, quick_config(window=3, negatives=1)).train_stats.pairs
        assert pairs_two < pairs_one
        assert pairs_two == 4

    def test_multithreaded_run_trains_every_token(self, tmp_path):
        rng = np.random.default_rng(4)
        words = [f"w{i}" for i in range(40)]
        lines = [" ".join(words[j] for j in rng.integers(0, 40, 10)) for _ in range(400)]
        corpus = write_corpus(tmp_path / "c.txt", lines)
        model = train(corpus, quick_config(threads=4, epochs=2))
        assert model.train_stats.tokens == 2 * model.vocab.total_tokens
        assert np.all(np.isfinite(model.input))
        assert np.all(np.isfinite(model.output))

    def test_progress_line_format(self, tmp_path, capsys):
        corpus = write_corpus(tmp_path / "c.txt", ["a b c d e f"] * 100)
        train(corpus, quick_config(log_progress=True, progress_interval=200))
        err = capsys.readouterr().err
        assert re.search(r"tokens=\d+ lr=[0-9.]+ loss=-?[0-9.]+ tok/s=\d+", err)

    def test_multiple_corpus_files(self, tmp_path):
        part1 = write_corpus(tmp_path / "p1.txt", ["a b c"] * 50)
        part2 = write_corpus(tmp_path / "p2.txt", ["c d e"] * 50)
        model = train([part1, part2], quick_config(epochs=1))
        assert set(model.vocab.words) == {"a", "b", "c", "d", "e"}
        assert model.train_stats.tokens == model.vocab.total_tokens == 300

    def test_empty_corpus_rejected(self, tmp_path):
        corpus = write_corpus(tmp_path / "c.txt", [])
        with pytest.raises(ValueError, match="empty corpus"):
            train(corpus, quick_config())

    def test_unreadable_corpus_rejected(self, tmp_path):
        with pytest.raises(OSError):
            train(tmp_path / "missing.txt", quick_config())

    def test_config_invariants_enforced(self):
        for bad in (
            dict(dim=0),
            dict(epochs=0),
            dict(window=0),
            dict(negatives=0),
            dict(lr0=0.0),
            dict(mode="bogus"),
        ):
            with pytest.raises(ValueError):
                quick_config(**bad).validate()

    def test_compose_both_mode_trains(self, tmp_path):
        corpus = write_corpus(tmp_path / "c.txt", ["a b c d"] * 200)
        default = train(corpus, quick_config(epochs=2))
        both = train(corpus, quick_config(epochs=2, compose_both=True))
        assert np.all(np.isfinite(both.input))
        assert not np.array_equal(default.input, both.input)
        # output matrix is untouched in compose-both mode
        assert np.all(both.output == 0.0)

    def test_sigmoid_table_mode_close_to_exact(self, tmp_path):
        corpus = write_corpus(tmp_path / "c.txt", ["a b c d"] * 200)
        exact = train(corpus, quick_config(epochs=2))
        table = train(corpus, quick_config(epochs=2, sigmoid_table=True))
        assert np.all(np.isfinite(table.input))
        # same corpus, same draws: approximate sigma only perturbs magnitudes
        assert np.allclose(exact.input, table.input, atol=0.05)


class TestKernelMatchesModelOps:
    # negatives=1 on a 2-word vocab keeps every touched row distinct within a
    # pair, so the ops' snapshot gradients equal the kernel's sequential math.
    @pytest.mark.parametrize("compose_both", [False, True])
    def test_replay_tiny_run(self, tmp_path, compose_both):
        """Replay the kernel's documented rng/update order with the model ops."""
        corpus = write_corpus(tmp_path / "c.txt", ["a b"] * 3)
        cfg = quick_config(window=1, negatives=1, epochs=2, dim=6, compose_both=compose_both)
        trained = train(corpus, cfg)
        vocab = trained.vocab

        from morphgram.model import EmbeddingModel

        indexer = make_indexer(cfg, len(vocab), None)
        ref = EmbeddingModel.create(vocab, indexer, cfg.dim, seed=cfg.seed)
        rng = Rng(worker_seed(cfg.seed, 0))
        total_planned = cfg.epochs * vocab.total_tokens
        scanned = 0
        ids = encode_corpus(corpus, vocab)
        for _epoch in range(cfg.epochs):
            sentence = []
            for wid in ids:
                if wid >= 0:
                    scanned += 1
                    sentence.append(int(wid))
                    continue
                lr = lr_at(scanned, total_planned, cfg.lr0)
                for ci, center in enumerate(sentence):
                    b = dynamic_window(cfg.window, rng)
                    lo, hi = max(0, ci - b), min(len(sentence) - 1, ci + b)
                    for cj in range(lo, hi + 1):
                        if cj == ci:
                            continue
                        ctx = sentence[cj]
                        negs = draw_negatives(vocab.neg_table, cfg.negatives, ctx, rng)
                        if compose_both:
                            bag_grad, ctx_grads = ref.sgns_gradients_compose_both(
                                [center], ctx, negs
                            )
                            for cbag, cgrad in ctx_grads:
                                np.add.at(ref.input, cbag, (-lr * cgrad).astype(np.float32))
                            np.add.at(
                                ref.input,
                                np.asarray([center]),
                                (-lr * bag_grad).astype(np.float32),
                            )
                        else:
                            grads = ref.sgns_gradients([center], ctx, negs)
                            ref.sgd_apply(grads, lr)
                sentence = []

        assert np.allclose(ref.input, trained.input, atol=1e-6)
        assert np.allclose(ref.output, trained.output, atol=1e-6)


class TestBagSizeCostOrdering:
    def test_mean_bag_sizes_ordered(self, small_corpus):
        corpus, words, lexicon = small_corpus
        vocab = build_vocab(
            (w for line in open(corpus, encoding="utf-8") for w in line.split()),
            min_count=1,
            neg_table_size=1000,
        )
        ngram_cfg = quick_config(mode="ngram", n_min=3, n_max=6, bucket_count=50_000)
        morph_cfg = quick_config(mode="morpheme")
        ngram_idx = make_indexer(ngram_cfg, len(vocab), None)
        morph_idx = make_indexer(morph_cfg, len(vocab), MorphemeLexicon(lexicon))
        ngram_off, _ = ngram_idx.bag_table(vocab.words)
        morph_off, _ = morph_idx.bag_table(vocab.words)
        mean_ngram = ngram_off[-1] / len(vocab)
        mean_morph = morph_off[-1] / len(vocab)
        assert mean_morph < mean_ngram
        assert mean_morph <= 4.0
