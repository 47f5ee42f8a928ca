"""Subword decomposition: map a word to its bag of embedding-matrix slots.

Three interchangeable strategies:

* word-only: the word's own slot, nothing else (plain skip-gram);
* character n-grams: every length-n substring for n in [n_min, n_max],
  hashed into a fixed bucket space (FastText-style);
* morphemes: the word's segmentation from an external lexicon, one
  slot per distinct morpheme surface form.

Slot ids partition as [0, |V|) for words and [|V|, |V|+S) for subword units.
Bag order is deterministic: the word slot first, then subword slots in
left-to-right extraction order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_N_MIN = 3
DEFAULT_N_MAX = 6
DEFAULT_BUCKET_COUNT = 2_000_000
BOUNDARY_BEGIN = "<"
BOUNDARY_END = ">"

_FNV1A_OFFSET = 0x811C9DC5
_FNV1A_PRIME = 0x01000193


def char_ngrams(
    word: str, n_min: int, n_max: int, boundary_markers: bool = False
) -> list[str]:
    """All contiguous substrings of length n for each n in [n_min, n_max].

    Extraction is left to right, shortest n first. With ``boundary_markers``
    the word is first wrapped in '<' and '>'. The full word itself is not
    included; callers add the word's own slot separately.
    """
    if n_min < 1 or n_min > n_max:
        raise ValueError(f"invalid n-gram range [{n_min}, {n_max}]")
    if boundary_markers:
        word = BOUNDARY_BEGIN + word + BOUNDARY_END
    grams = []
    for n in range(n_min, n_max + 1):
        for i in range(len(word) - n + 1):
            grams.append(word[i : i + n])
    return grams


def fnv1a_32(data: bytes) -> int:
    """FNV-1a 32-bit hash; deterministic across runs and platforms."""
    h = _FNV1A_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV1A_PRIME) & 0xFFFFFFFF
    return h


def hash_ngram(ngram: str, bucket_count: int) -> int:
    """Bucket offset of an n-gram: FNV-1a over UTF-8 bytes, mod bucket_count."""
    if bucket_count < 1:
        raise ValueError("bucket_count must be >= 1")
    return fnv1a_32(ngram.encode("utf-8")) % bucket_count


@dataclass
class MorphemeLexicon:
    """word -> morpheme segmentation mapping consumed from a segmenter's output.

    Morpheme strings are non-empty; their concatenation need not reproduce the
    word (segmenters may normalize).
    """

    entries: dict[str, list[str]] = field(default_factory=dict)

    def morphemes(self, word: str) -> list[str]:
        """Segmentation of ``word``, or [] when absent (the word then composes
        as its own slot only, reducing to plain skip-gram for that word)."""
        return self.entries.get(word, [])

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries


class SubwordIndexer:
    """Composition strategy: which slots make up a word's bag.

    Immutable after construction; safe for unrestricted concurrent reads.
    Build instances through :meth:`word_only`, :meth:`char_ngram`, or
    :meth:`morpheme`.
    """

    WORD = "word"
    NGRAM = "ngram"
    MORPHEME = "morpheme"

    def __init__(
        self,
        strategy: str,
        vocab_size: int,
        *,
        n_min: int = DEFAULT_N_MIN,
        n_max: int = DEFAULT_N_MAX,
        bucket_count: int = DEFAULT_BUCKET_COUNT,
        boundary_markers: bool = False,
        lexicon: MorphemeLexicon | None = None,
        morpheme_list: list[str] | None = None,
    ):
        if strategy not in (self.WORD, self.NGRAM, self.MORPHEME):
            raise ValueError(f"unknown strategy {strategy!r}")
        if vocab_size < 0:
            raise ValueError("vocab_size must be >= 0")
        self.strategy = strategy
        self.vocab_size = vocab_size
        self.n_min = n_min
        self.n_max = n_max
        self.bucket_count = bucket_count
        self.boundary_markers = boundary_markers
        self.lexicon = lexicon if lexicon is not None else MorphemeLexicon()
        if strategy == self.MORPHEME:
            if morpheme_list is None:
                # first-seen order over the lexicon's (file-ordered) entries
                seen: dict[str, int] = {}
                for morphs in self.lexicon.entries.values():
                    for m in morphs:
                        if m not in seen:
                            seen[m] = len(seen)
                self.morpheme_list = list(seen)
                self.morpheme_index = seen
            else:
                self.morpheme_list = list(morpheme_list)
                self.morpheme_index = {m: i for i, m in enumerate(self.morpheme_list)}
        else:
            self.morpheme_list = []
            self.morpheme_index = {}

    @classmethod
    def word_only(cls, vocab_size: int) -> "SubwordIndexer":
        return cls(cls.WORD, vocab_size)

    @classmethod
    def char_ngram(
        cls,
        vocab_size: int,
        n_min: int = DEFAULT_N_MIN,
        n_max: int = DEFAULT_N_MAX,
        bucket_count: int = DEFAULT_BUCKET_COUNT,
        boundary_markers: bool = False,
    ) -> "SubwordIndexer":
        if n_min < 1 or n_min > n_max:
            raise ValueError(f"invalid n-gram range [{n_min}, {n_max}]")
        if bucket_count < 1:
            raise ValueError("bucket_count must be >= 1")
        return cls(
            cls.NGRAM,
            vocab_size,
            n_min=n_min,
            n_max=n_max,
            bucket_count=bucket_count,
            boundary_markers=boundary_markers,
        )

    @classmethod
    def morpheme(cls, vocab_size: int, lexicon: MorphemeLexicon) -> "SubwordIndexer":
        return cls(cls.MORPHEME, vocab_size, lexicon=lexicon)

    @property
    def subword_slots(self) -> int:
        """S: size of the subword slot space appended after the word slots."""
        if self.strategy == self.NGRAM:
            return self.bucket_count
        if self.strategy == self.MORPHEME:
            return len(self.morpheme_list)
        return 0

    @property
    def n_slots(self) -> int:
        return self.vocab_size + self.subword_slots

    def subword_tokens(self, word: str) -> list[str]:
        """The printable subword units of ``word`` under this strategy."""
        if self.strategy == self.NGRAM:
            return char_ngrams(word, self.n_min, self.n_max, self.boundary_markers)
        if self.strategy == self.MORPHEME:
            return self.lexicon.morphemes(word)
        return []

    def _subword_offsets(self, word: str) -> list[int]:
        if self.strategy == self.NGRAM:
            return [
                hash_ngram(g, self.bucket_count)
                for g in char_ngrams(word, self.n_min, self.n_max, self.boundary_markers)
            ]
        if self.strategy == self.MORPHEME:
            out = []
            for m in self.lexicon.morphemes(word):
                off = self.morpheme_index.get(m)
                if off is not None:
                    out.append(off)
            return out
        return []

    def compose_bag(self, word_id: int, word: str) -> list[int]:
        """Slot ids of the word's bag: the word slot first, subword slots after."""
        if not 0 <= word_id < self.vocab_size:
            raise ValueError(f"word_id {word_id} outside vocabulary [0, {self.vocab_size})")
        return [word_id] + [self.vocab_size + off for off in self._subword_offsets(word)]

    def compose_oov(self, word: str) -> list[int]:
        """Subword slots only, for words outside the vocabulary.

        May be empty (word-only strategy, or a morpheme-strategy word absent
        from the lexicon): the word is then unresolvable.
        """
        return [self.vocab_size + off for off in self._subword_offsets(word)]

    def bag_table(self, words: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """CSR bag table over the vocabulary for the trainer kernel.

        Returns (offsets, slots): bag of word id i is
        slots[offsets[i]:offsets[i+1]].
        """
        offsets = np.zeros(len(words) + 1, dtype=np.int64)
        all_slots: list[list[int]] = []
        for i, word in enumerate(words):
            bag = self.compose_bag(i, word)
            all_slots.append(bag)
            offsets[i + 1] = offsets[i] + len(bag)
        flat = np.fromiter(
            (s for bag in all_slots for s in bag), dtype=np.int32, count=int(offsets[-1])
        )
        return offsets, flat
