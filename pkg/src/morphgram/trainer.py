"""Epoch-driven skip-gram negative-sampling trainer.

The hot loop is a compiled nogil kernel; workers are plain threads doing
lock-free (hogwild) updates on the shared matrices. Races between workers are
tolerated as approximation noise; single-threaded runs are bit-reproducible.
Each worker owns a sentence-aligned span of the encoded corpus and walks it
once per epoch; the learning rate decays linearly with a shared token counter.
"""

from __future__ import annotations

import logging
import sys
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

from .corpus import (
    DEFAULT_MIN_COUNT,
    DEFAULT_NEG_TABLE_SIZE,
    DEFAULT_SUBSAMPLE_T,
    Vocab,
    build_vocab,
    iter_sentences,
    iter_tokens,
)
from .model import EmbeddingModel
from .rng import LCG_INCREMENT, LCG_MULTIPLIER, Rng, worker_seed
from .subword import (
    DEFAULT_BUCKET_COUNT,
    DEFAULT_N_MAX,
    DEFAULT_N_MIN,
    MorphemeLexicon,
    SubwordIndexer,
)

logger = logging.getLogger(__name__)

LR_FLOOR_FACTOR = 1e-4  # lr never drops below lr0 * this
MAX_SENTENCE_TOKENS = 10_000  # longer lines are split into segments
SIGMA_TABLE_SIZE = 1000
SIGMA_TABLE_RANGE = 6.0

_A = np.uint64(LCG_MULTIPLIER)
_C = np.uint64(LCG_INCREMENT)
_U53 = 1.0 / 9007199254740992.0  # 2**-53


@dataclass
class TrainConfig:
    """Training hyperparameters; defaults follow the word2vec/FastText lineage."""

    dim: int = 100
    epochs: int = 20
    window: int = 5
    negatives: int = 5
    lr0: float = 0.1
    min_count: int = DEFAULT_MIN_COUNT
    subsample_t: float = DEFAULT_SUBSAMPLE_T
    threads: int = 12
    seed: int = 1
    mode: str = "word"  # word | ngram | morpheme
    n_min: int = DEFAULT_N_MIN
    n_max: int = DEFAULT_N_MAX
    bucket_count: int = DEFAULT_BUCKET_COUNT
    boundary_markers: bool = False
    compose_both: bool = False
    sigmoid_table: bool = False
    neg_table_size: int = DEFAULT_NEG_TABLE_SIZE
    progress_interval: int = 100_000  # tokens per worker between reports
    log_progress: bool = True

    def validate(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.lr0 <= 0:
            raise ValueError("lr0 must be > 0")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.mode not in ("word", "ngram", "morpheme"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "ngram" and not (1 <= self.n_min <= self.n_max):
            raise ValueError(f"invalid n-gram range [{self.n_min}, {self.n_max}]")


@dataclass
class TrainStats:
    """Throughput accounting for one training run (training phase only)."""

    tokens: int = 0
    pairs: int = 0
    wall_seconds: float = 0.0
    mean_loss: float = 0.0

    @property
    def tokens_per_sec(self) -> float:
        return self.tokens / self.wall_seconds if self.wall_seconds > 0 else 0.0


def lr_at(
    tokens_processed: int, total_planned: int, lr0: float, floor_factor: float = LR_FLOOR_FACTOR
) -> float:
    """Linear decay from lr0 to the lr0*floor_factor clamp."""
    if not 0 <= tokens_processed <= total_planned:
        raise ValueError("tokens_processed outside [0, total_planned]")
    frac = 1.0 - tokens_processed / total_planned
    return lr0 * max(frac, floor_factor)


def dynamic_window(max_window: int, rng: Rng) -> int:
    """Uniform window width in [1, max_window] for one center position."""
    if max_window < 1:
        raise ValueError("max_window must be >= 1")
    return 1 + rng.below(max_window)


def draw_negatives(neg_table: np.ndarray, k: int, positive_id: int, rng: Rng) -> np.ndarray:
    """k uniform draws from the table; draws equal to the positive are redrawn
    (up to 32 attempts, then kept: degenerate tiny-vocabulary guard)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    size = len(neg_table)
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        cand = positive_id
        for _ in range(32):
            cand = int(neg_table[rng.below(size)])
            if cand != positive_id:
                break
        if cand == positive_id:
            logger.debug("negative sampling degenerate: only word %d drawable", positive_id)
        out[i] = cand
    return out


def build_sigma_table() -> np.ndarray:
    """Precomputed logistic values over [-6, 6]; ends clamp out-of-range scores."""
    x = -SIGMA_TABLE_RANGE + 2.0 * SIGMA_TABLE_RANGE * (
        np.arange(SIGMA_TABLE_SIZE, dtype=np.float64) + 0.5
    ) / SIGMA_TABLE_SIZE
    return 1.0 / (1.0 + np.exp(-x))


@njit(cache=True, nogil=True)
def _train_range(
    inp,
    out,
    corpus,
    start,
    end,
    bag_off,
    bag_slots,
    keep_prob,
    neg_table,
    window,
    k_neg,
    lr0,
    lr_floor,
    total_planned,
    progress_base,
    state,
    compose_both,
    use_sigma_table,
    sigma_table,
):
    """Train on corpus[start:end] (sentence-aligned). Returns
    (tokens scanned, pairs trained, loss sum, rng state)."""
    dim = inp.shape[1]
    tsize = np.uint64(neg_table.shape[0])
    uwindow = np.uint64(window)
    sig_scale = SIGMA_TABLE_SIZE / (2.0 * SIGMA_TABLE_RANGE)

    sent = np.empty(MAX_SENTENCE_TOKENS, np.int32)
    kv = np.zeros(dim, np.float32)  # composed center vector
    err = np.zeros(dim, np.float32)  # accumulated center-bag update (includes lr)
    ckv = np.zeros(dim, np.float32)  # composed context vector (compose_both)

    tokens = np.int64(0)
    pairs = np.int64(0)
    loss_sum = 0.0
    n_sent = 0
    pos = start

    while True:
        flush = pos >= end
        if not flush:
            wid = corpus[pos]
            pos += 1
            if wid < 0:
                flush = True
            else:
                tokens += 1
                keep = True
                kp = keep_prob[wid]
                if kp < 1.0:
                    state = state * _A + _C
                    if np.float64(state >> np.uint64(11)) * _U53 >= kp:
                        keep = False
                if keep:
                    sent[n_sent] = wid
                    n_sent += 1
                    if n_sent == MAX_SENTENCE_TOKENS:
                        flush = True
        if not flush:
            continue

        if n_sent > 1:
            frac = 1.0 - np.float64(progress_base + tokens) / np.float64(total_planned)
            if frac < lr_floor:
                frac = lr_floor
            lr = lr0 * frac
            for ci in range(n_sent):
                center = sent[ci]
                state = state * _A + _C
                b = np.int64((state >> np.uint64(33)) % uwindow) + 1
                lo = ci - b
                if lo < 0:
                    lo = 0
                hi = ci + b
                if hi > n_sent - 1:
                    hi = n_sent - 1
                boff = bag_off[center]
                bend = bag_off[center + 1]
                for cj in range(lo, hi + 1):
                    if cj == ci:
                        continue
                    ctx = sent[cj]
                    pairs += 1

                    for d in range(dim):
                        kv[d] = 0.0
                    for si in range(boff, bend):
                        r = bag_slots[si]
                        for d in range(dim):
                            kv[d] += inp[r, d]
                    for d in range(dim):
                        err[d] = 0.0

                    for neg_i in range(k_neg + 1):
                        if neg_i == 0:
                            target = np.int64(ctx)
                            label = 1.0
                        else:
                            target = np.int64(ctx)
                            for _att in range(32):
                                state = state * _A + _C
                                target = np.int64(
                                    neg_table[np.int64((state >> np.uint64(33)) % tsize)]
                                )
                                if target != ctx:
                                    break
                            label = 0.0

                        toff = np.int64(0)
                        tend = np.int64(0)
                        if compose_both:
                            toff = bag_off[target]
                            tend = bag_off[target + 1]
                            for d in range(dim):
                                ckv[d] = 0.0
                            for si in range(toff, tend):
                                r = bag_slots[si]
                                for d in range(dim):
                                    ckv[d] += inp[r, d]
                            f = 0.0
                            for d in range(dim):
                                f += kv[d] * ckv[d]
                        else:
                            f = 0.0
                            for d in range(dim):
                                f += kv[d] * out[target, d]

                        if use_sigma_table:
                            idx = np.int64((f + SIGMA_TABLE_RANGE) * sig_scale)
                            if idx < 0:
                                idx = 0
                            elif idx > SIGMA_TABLE_SIZE - 1:
                                idx = SIGMA_TABLE_SIZE - 1
                            sg = sigma_table[idx]
                            loss_sum -= np.log(sg) if label > 0.0 else np.log(1.0 - sg)
                        else:
                            if f >= 0.0:
                                sg = 1.0 / (1.0 + np.exp(-f))
                                loss_sum += (
                                    np.log1p(np.exp(-f))
                                    if label > 0.0
                                    else f + np.log1p(np.exp(-f))
                                )
                            else:
                                ef = np.exp(f)
                                sg = ef / (1.0 + ef)
                                loss_sum += (
                                    np.log1p(ef) - f if label > 0.0 else np.log1p(ef)
                                )

                        g = np.float32((sg - label) * lr)
                        if compose_both:
                            for d in range(dim):
                                err[d] += g * ckv[d]
                            for si in range(toff, tend):
                                r = bag_slots[si]
                                for d in range(dim):
                                    inp[r, d] -= g * kv[d]
                        else:
                            for d in range(dim):
                                od = out[target, d]
                                err[d] += g * od
                                out[target, d] = od - g * kv[d]

                    for si in range(boff, bend):
                        r = bag_slots[si]
                        for d in range(dim):
                            inp[r, d] -= err[d]

        n_sent = 0
        if pos >= end:
            break

    return tokens, pairs, loss_sum, state


def make_indexer(config: TrainConfig, vocab_size: int, lexicon: MorphemeLexicon | None) -> SubwordIndexer:
    """Indexer matching the config's composition strategy."""
    if config.mode == "ngram":
        return SubwordIndexer.char_ngram(
            vocab_size,
            n_min=config.n_min,
            n_max=config.n_max,
            bucket_count=config.bucket_count,
            boundary_markers=config.boundary_markers,
        )
    if config.mode == "morpheme":
        return SubwordIndexer.morpheme(vocab_size, lexicon or MorphemeLexicon())
    return SubwordIndexer.word_only(vocab_size)


def encode_corpus(paths, vocab: Vocab) -> np.ndarray:
    """Encode the corpus as int32 word ids with -1 terminating each sentence.

    Out-of-vocabulary tokens are dropped; sentences with no kept token are
    skipped entirely.
    """
    index = vocab.index

    def gen():
        for sentence in iter_sentences(paths):
            emitted = False
            for token in sentence:
                wid = index.get(token)
                if wid is not None:
                    emitted = True
                    yield wid
            if emitted:
                yield -1

    return np.fromiter(gen(), dtype=np.int32)


def _sentence_starts(corpus_ids: np.ndarray) -> np.ndarray:
    """Positions where sentences begin (every -1 terminates one)."""
    breaks = np.flatnonzero(corpus_ids == -1)
    if len(breaks) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(([0], breaks[:-1] + 1)).astype(np.int64)


def _split_ranges(starts: np.ndarray, begin: int, end: int, step: int) -> list[tuple[int, int]]:
    """Sentence-aligned (start, end) spans of roughly ``step`` positions
    covering [begin, end); consecutive bounds are at least ``step`` apart."""
    if begin >= end:
        return []
    bounds = [begin]
    target = begin + step
    while target < end:
        i = int(np.searchsorted(starts, target, side="left"))
        if i >= len(starts):
            break
        nxt = int(starts[i])
        if nxt >= end:
            break
        if nxt > bounds[-1]:
            bounds.append(nxt)
        target = nxt + step
    bounds.append(end)
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]


_kernel_warm = False


def _warm_kernel() -> None:
    """Compile the kernel on a two-token toy so timed runs never pay for it."""
    global _kernel_warm
    if _kernel_warm:
        return
    inp = np.zeros((2, 2), np.float32)
    out = np.zeros((2, 2), np.float32)
    corpus = np.array([0, 1, -1], np.int32)
    bag_off = np.array([0, 1, 2], np.int64)
    bag_slots = np.array([0, 1], np.int32)
    keep = np.ones(2, np.float64)
    table = np.array([0, 1], np.int32)
    for both in (False, True):
        _train_range(
            inp, out, corpus, 0, 3, bag_off, bag_slots, keep, table,
            1, 1, 0.1, LR_FLOOR_FACTOR, 10, 0, np.uint64(1), both, False,
            build_sigma_table(),
        )
    _kernel_warm = True


def train(
    corpus: str | Path | Sequence[str | Path],
    config: TrainConfig,
    lexicon: MorphemeLexicon | None = None,
) -> EmbeddingModel:
    """Train a model on a corpus file (or files) per ``config``.

    Single-threaded runs with a fixed seed are bit-reproducible. The returned
    model carries a :class:`TrainStats` in ``train_stats`` (training phase
    only, setup excluded).
    """
    config.validate()
    vocab = build_vocab(
        iter_tokens(corpus),
        min_count=config.min_count,
        subsample_t=config.subsample_t,
        neg_table_size=config.neg_table_size,
    )
    indexer = make_indexer(config, len(vocab), lexicon)
    model = EmbeddingModel.create(vocab, indexer, config.dim, seed=config.seed)
    corpus_ids = encode_corpus(corpus, vocab)
    bag_off, bag_slots = indexer.bag_table(vocab.words)
    starts = _sentence_starts(corpus_ids)
    total_planned = config.epochs * vocab.total_tokens
    sigma_table = build_sigma_table()

    n_workers = max(1, min(config.threads, len(starts)))
    per_worker = max(1, (len(corpus_ids) + n_workers - 1) // n_workers)
    worker_spans = _split_ranges(starts, 0, len(corpus_ids), per_worker)

    # matrices take lock-free racy writes (the hogwild contract); the token
    # counter driving lr decay is updated under a lock at chunk granularity
    token_counter = np.zeros(1, dtype=np.int64)
    loss_acc = np.zeros(2, dtype=np.float64)  # [loss sum, pair count]
    counter_lock = threading.Lock()
    t0_holder = [0.0]
    worker_errors: list[BaseException] = []

    def run_worker(worker_id: int, span: tuple[int, int]) -> None:
        state = np.uint64(worker_seed(config.seed, worker_id))
        chunks = _split_ranges(starts, span[0], span[1], config.progress_interval)
        since_report = 0
        for _epoch in range(config.epochs):
            for cs, ce in chunks:
                base = int(token_counter[0])
                tokens, pairs, loss_sum, state_out = _train_range(
                    model.input,
                    model.output,
                    corpus_ids,
                    cs,
                    ce,
                    bag_off,
                    bag_slots,
                    vocab.keep_prob,
                    vocab.neg_table,
                    config.window,
                    config.negatives,
                    config.lr0,
                    LR_FLOOR_FACTOR,
                    total_planned,
                    base,
                    state,
                    config.compose_both,
                    config.sigmoid_table,
                    sigma_table,
                )
                state = np.uint64(state_out)  # keep the uint64 overload across calls
                with counter_lock:
                    token_counter[0] += tokens
                    loss_acc[0] += loss_sum
                    loss_acc[1] += pairs
                since_report += int(tokens)
                if config.log_progress and since_report >= config.progress_interval:
                    since_report = 0
                    done = int(token_counter[0])
                    elapsed = time.monotonic() - t0_holder[0]
                    mean_loss = loss_acc[0] / loss_acc[1] if loss_acc[1] else 0.0
                    print(
                        f"tokens={done} lr={lr_at(min(done, total_planned), total_planned, config.lr0):.6f} "
                        f"loss={mean_loss:.4f} tok/s={done / elapsed if elapsed > 0 else 0.0:.0f}",
                        file=sys.stderr,
                    )

    def run_worker_guarded(worker_id: int, span: tuple[int, int]) -> None:
        try:
            run_worker(worker_id, span)
        except BaseException as exc:  # surfaced after join
            worker_errors.append(exc)

    _warm_kernel()
    t0_holder[0] = time.monotonic()
    if len(worker_spans) == 1:
        run_worker(0, worker_spans[0])
    else:
        threads = [
            threading.Thread(target=run_worker_guarded, args=(w, span), daemon=True)
            for w, span in enumerate(worker_spans)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        if worker_errors:
            raise worker_errors[0]
    wall = time.monotonic() - t0_holder[0]

    stats = TrainStats(
        tokens=int(token_counter[0]),
        pairs=int(loss_acc[1]),
        wall_seconds=wall,
        mean_loss=float(loss_acc[0] / loss_acc[1]) if loss_acc[1] else 0.0,
    )
    model.train_stats = stats
    logger.info(
        "trained %d tokens in %.1fs (%.0f tok/s, mean loss %.4f)",
        stats.tokens,
        stats.wall_seconds,
        stats.tokens_per_sec,
        stats.mean_loss,
    )
    return model
