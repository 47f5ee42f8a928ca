"""Shared fixtures: synthetic corpora, vocabularies, and morpheme lexicons.

All generators are seeded and deterministic; the larger corpora are built once
per session.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

# shared CI boxes stall unpredictably; wall-clock deadlines only add flakes
settings.register_profile("no_deadline", deadline=None)
settings.load_profile("no_deadline")

LETTERS = "abcdefghijklmnopqrstuvwxyz"

SUFFIXES = [
    "s", "es", "ed", "ing", "tion", "ment", "ness", "able", "ly", "er",
    "est", "al", "ous", "ive", "ful", "ic", "ish", "ize", "ism", "ist",
]


def random_word(rng: np.random.Generator, lo: int = 4, hi: int = 8) -> str:
    length = int(rng.integers(lo, hi + 1))
    return "".join(LETTERS[i] for i in rng.integers(0, len(LETTERS), length))


def synth_vocabulary(n_types: int, seed: int = 0):
    """Stem+suffix word inventory with its morpheme segmentation.

    Every word is stem or stem+suffix(+suffix); lexicon entries hold at most
    3 morphemes, so bags (word slot included) have at most 4 members.
    """
    rng = np.random.default_rng(seed)
    stems = []
    seen = set()
    while len(stems) < max(2, n_types // 4):
        stem = random_word(rng, 4, 8)
        if stem not in seen:
            seen.add(stem)
            stems.append(stem)
    words, lexicon = [], {}
    used = set()
    while len(words) < n_types:
        stem = stems[int(rng.integers(0, len(stems)))]
        n_suffix = int(rng.integers(0, 3))
        morphs = [stem] + [SUFFIXES[int(rng.integers(0, len(SUFFIXES)))] for _ in range(n_suffix)]
        word = "".join(morphs)
        if word in used:
            continue
        used.add(word)
        words.append(word)
        lexicon[word] = morphs
    return words, lexicon


def write_zipf_corpus(
    path,
    words,
    n_tokens: int,
    seed: int = 0,
    zipf_s: float = 1.0,
    sent_len: tuple[int, int] = (8, 20),
) -> None:
    """Zipf(zipf_s)-distributed token stream as one-sentence-per-line text."""
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, len(words) + 1, dtype=np.float64)
    prob = ranks**-zipf_s
    prob /= prob.sum()
    ids = rng.choice(len(words), size=n_tokens, p=prob)
    with open(path, "w", encoding="utf-8") as handle:
        pos = 0
        while pos < n_tokens:
            length = int(rng.integers(sent_len[0], sent_len[1] + 1))
            sentence = ids[pos : pos + length]
            pos += length
            handle.write(" ".join(words[i] for i in sentence) + "\n")


def write_lexicon(path, entries: dict[str, list[str]]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for word, morphs in entries.items():
            handle.write(f"{word}\t{' '.join(morphs)}\n")


def write_two_topic_corpus(path, n_sentences: int = 8000, seed: int = 3):
    """Two disjoint 20-word topics; sentences never mix topics.

    Words are stem+suffix forms; returns (topic_a words, topic_b words,
    lexicon entries).
    """
    rng = np.random.default_rng(seed)
    topics, lexicon = [], {}
    for _topic in range(2):
        topic_words = []
        while len(topic_words) < 20:
            stem = random_word(rng, 5, 8)
            suffix = SUFFIXES[int(rng.integers(0, len(SUFFIXES)))]
            word = stem + suffix
            if word in lexicon:
                continue
            lexicon[word] = [stem, suffix]
            topic_words.append(word)
        topics.append(topic_words)
    with open(path, "w", encoding="utf-8") as handle:
        for _ in range(n_sentences):
            topic = topics[int(rng.integers(0, 2))]
            length = int(rng.integers(8, 16))
            picks = rng.integers(0, len(topic), length)
            handle.write(" ".join(topic[i] for i in picks) + "\n")
    return topics[0], topics[1], lexicon


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """~60k tokens over 50 types; quick general-purpose training input."""
    path = tmp_path_factory.mktemp("corpora") / "small.txt"
    words, lexicon = synth_vocabulary(50, seed=11)
    write_zipf_corpus(path, words, 60_000, seed=11)
    return path, words, lexicon


@pytest.fixture(scope="session")
def mb_corpus(tmp_path_factory):
    """~1 MB corpus over 400 types (degeneracy / determinism criteria)."""
    path = tmp_path_factory.mktemp("corpora") / "mb.txt"
    words, lexicon = synth_vocabulary(400, seed=23)
    write_zipf_corpus(path, words, 130_000, seed=23)
    return path, words, lexicon


@pytest.fixture(scope="session")
def bench_corpus(tmp_path_factory):
    """>= 10 MiB Zipf corpus over 30k stem+suffix types, with its lexicon file."""
    root = tmp_path_factory.mktemp("bench")
    path = root / "bench.txt"
    words, lexicon = synth_vocabulary(30_000, seed=41)
    write_zipf_corpus(path, words, 1_400_000, seed=41)
    lex_path = root / "lexicon.tsv"
    write_lexicon(lex_path, lexicon)
    return path, lex_path, lexicon
