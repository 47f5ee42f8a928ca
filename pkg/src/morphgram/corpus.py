"""Corpus streaming, vocabulary construction, and sampling distributions.

The vocabulary holds everything the trainer needs per word: its integer id
(descending count order, ties lexicographic), its corpus count, the
subsampling keep-probability, and the unigram^0.75 table negatives are drawn
from.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .rng import Rng

logger = logging.getLogger(__name__)

DEFAULT_MIN_COUNT = 5
DEFAULT_SUBSAMPLE_T = 1e-4
DEFAULT_NEG_TABLE_SIZE = 10_000_000
NEG_TABLE_POWER = 0.75


def tokenize(line: str) -> list[str]:
    """Split a line into maximal runs of non-whitespace characters.

    No normalization, no lowercasing; an empty or all-whitespace line yields
    an empty list.
    """
    return line.split()


def iter_sentences(paths: str | Path | Sequence[str | Path]) -> Iterator[list[str]]:
    """Yield one token list per non-empty line of the given corpus file(s)."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    for path in paths:
        with open(path, encoding="utf-8", errors="replace") as handle:
            for line in handle:
                tokens = line.split()
                if tokens:
                    yield tokens


def iter_tokens(paths: str | Path | Sequence[str | Path]) -> Iterator[str]:
    """Flat token stream over the corpus file(s)."""
    for sentence in iter_sentences(paths):
        yield from sentence


@dataclass
class Vocab:
    """Immutable word inventory with per-word training statistics.

    ids are contiguous from 0, ordered by descending count with ties broken
    lexicographically; ``index`` and ``words`` are mutually inverse.
    """

    words: list[str]
    counts: np.ndarray  # int64, counts[i] = corpus frequency of words[i]
    index: dict[str, int]
    total_tokens: int  # occurrences of kept words only
    keep_prob: np.ndarray  # float64 in [0, 1], subsampling keep-probability
    neg_table: np.ndarray  # int32 word ids, len >= |V|

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def get(self, word: str) -> int | None:
        return self.index.get(word)

    def keep_token(self, word_id: int, rng: Rng) -> bool:
        """True with probability keep_prob[word_id], drawn from ``rng``.

        Draws nothing when the keep-probability is 1, so subsampling-free
        configurations consume no randomness here.
        """
        kp = self.keep_prob[word_id]
        if kp >= 1.0:
            return True
        return rng.uniform() < kp


def subsample_keep_prob(counts: np.ndarray, total_tokens: int, t: float) -> np.ndarray:
    """keep_prob(w) = min(1, sqrt(t/f) + t/f) with f = count/total; t <= 0 disables."""
    if t <= 0.0:
        return np.ones(len(counts), dtype=np.float64)
    f = counts.astype(np.float64) / float(total_tokens)
    kp = np.sqrt(t / f) + t / f
    return np.minimum(kp, 1.0)


def build_negative_table(
    vocab: Vocab, table_size: int = DEFAULT_NEG_TABLE_SIZE, power: float = NEG_TABLE_POWER
) -> np.ndarray:
    """Slot table for negative sampling: word w fills a count(w)^power share.

    Cumulative rounding keeps every word within one slot of its exact share
    and the total at exactly ``table_size``.
    """
    if table_size < len(vocab):
        raise ValueError(
            f"table_size {table_size} smaller than vocabulary size {len(vocab)}"
        )
    weights = vocab.counts.astype(np.float64) ** power
    cum = np.cumsum(weights)
    cum /= cum[-1]
    bounds = np.floor(cum * table_size + 0.5).astype(np.int64)
    slots = np.diff(np.concatenate(([0], bounds)))
    return np.repeat(np.arange(len(vocab), dtype=np.int32), slots)


def build_vocab(
    tokens: Iterable[str],
    min_count: int = DEFAULT_MIN_COUNT,
    subsample_t: float = DEFAULT_SUBSAMPLE_T,
    neg_table_size: int = DEFAULT_NEG_TABLE_SIZE,
) -> Vocab:
    """Count a token stream and assemble the full Vocab.

    Words below ``min_count`` are dropped before id assignment;
    ``total_tokens`` counts only the kept words' occurrences.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    raw = Counter(tokens)
    if not raw:
        raise ValueError("empty corpus")
    kept = [(w, c) for w, c in raw.items() if c >= min_count]
    if not kept:
        raise ValueError(f"empty corpus after min_count={min_count} filtering")
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    words = [w for w, _ in kept]
    counts = np.array([c for _, c in kept], dtype=np.int64)
    total = int(counts.sum())
    vocab = Vocab(
        words=words,
        counts=counts,
        index={w: i for i, w in enumerate(words)},
        total_tokens=total,
        keep_prob=subsample_keep_prob(counts, total, subsample_t),
        neg_table=np.empty(0, dtype=np.int32),
    )
    vocab.neg_table = build_negative_table(vocab, max(neg_table_size, len(words)))
    logger.info(
        "vocabulary: %d words, %d kept tokens (min_count=%d)", len(words), total, min_count
    )
    return vocab
