"""Serialization: text vector files, binary checkpoints, morpheme lexicons.

All loaders turn malformed input into :class:`FormatError` with enough context
to locate the problem; they never crash on bad bytes.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import struct
from pathlib import Path

import numpy as np

from .corpus import Vocab, build_negative_table, subsample_keep_prob
from .model import EmbeddingModel
from .subword import MorphemeLexicon, SubwordIndexer

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"MGRMCKPT"
CHECKPOINT_VERSION = 1


class FormatError(ValueError):
    """Malformed serialized data (bad header, truncation, parse failure)."""


# -- text vectors ------------------------------------------------------------


def save_vectors_text(model: EmbeddingModel, path: str | Path, composed: bool = True) -> None:
    """Write `<word_count> <dim>` then one `word v1 ... vd` line per vocab word.

    ``composed`` writes the summed bag vectors (the usual downstream form);
    otherwise the raw word-slot rows. Reals carry 6 significant digits.
    """
    words = model.vocab.words
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{len(words)} {model.dim}\n")
        for wid, word in enumerate(words):
            if composed:
                vec = model.compose_vector(model.bag_of(wid))
            else:
                vec = model.input[wid]
            handle.write(word + " " + " ".join(f"{x:.6g}" for x in vec) + "\n")


def load_vectors_text(path: str | Path) -> tuple[dict[str, np.ndarray], int]:
    """Parse a text vector file back into a token -> float32 vector mapping."""
    mapping: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8", errors="replace") as handle:
        header = handle.readline()
        parts = header.split()
        if len(parts) != 2:
            raise FormatError(f"{path}: line 1: expected '<word_count> <dim>' header")
        try:
            word_count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"{path}: line 1: non-integer header fields") from None
        if word_count < 0 or dim < 1:
            raise FormatError(f"{path}: line 1: invalid header values {word_count} {dim}")
        for lineno, line in enumerate(handle, start=2):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != dim + 1:
                raise FormatError(
                    f"{path}: line {lineno}: expected 1 token + {dim} values, got {len(fields)} fields"
                )
            try:
                vec = np.array([float(x) for x in fields[1:]], dtype=np.float32)
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-numeric vector component") from None
            mapping[fields[0]] = vec
    if len(mapping) != word_count:
        raise FormatError(
            f"{path}: header claims {word_count} words but {len(mapping)} records parsed"
        )
    return mapping, dim


# -- morpheme lexicon ---------------------------------------------------------


def load_lexicon(path: str | Path) -> MorphemeLexicon:
    """Parse `word<TAB>morph1 morph2 ...` lines; '#' comments and blanks skip.

    Duplicate words: last entry wins with a warning. A word with no morphemes
    is a parse error.
    """
    entries: dict[str, list[str]] = {}
    with open(path, encoding="utf-8", errors="replace") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "\t" not in line:
                raise FormatError(f"{path}: line {lineno}: missing TAB between word and morphemes")
            word, _, rest = line.rstrip("\n").partition("\t")
            word = word.strip()
            if not word:
                raise FormatError(f"{path}: line {lineno}: empty word field")
            morphs = rest.split()
            if not morphs:
                raise FormatError(f"{path}: line {lineno}: no morphemes for {word!r}")
            if word in entries:
                logger.warning("%s: line %d: duplicate entry for %r, last wins", path, lineno, word)
            entries[word] = morphs
    return MorphemeLexicon(entries)


# -- binary checkpoint --------------------------------------------------------


def _write_block(handle, data: bytes) -> None:
    handle.write(struct.pack("<Q", len(data)))
    handle.write(data)


def _read_exact(handle, n: int) -> bytes:
    data = handle.read(n)
    if len(data) != n:
        raise FormatError("unexpected end of checkpoint")
    return data


def _read_block(handle, limit: int = 1 << 34) -> bytes:
    (n,) = struct.unpack("<Q", _read_exact(handle, 8))
    if n > limit:
        raise FormatError(f"checkpoint block length {n} exceeds sanity limit")
    return _read_exact(handle, n)


def save_checkpoint(model: EmbeddingModel, config, path: str | Path) -> None:
    """Full-fidelity binary dump: config, vocab, indexer, both matrices.

    Little-endian, explicit lengths everywhere; save -> load -> save is
    byte-identical.
    """
    vocab, indexer = model.vocab, model.indexer
    cfg = dataclasses.asdict(config) if dataclasses.is_dataclass(config) else dict(config)
    indexer_state = {
        "strategy": indexer.strategy,
        "n_min": indexer.n_min,
        "n_max": indexer.n_max,
        "bucket_count": indexer.bucket_count,
        "boundary_markers": indexer.boundary_markers,
        "morpheme_list": indexer.morpheme_list,
        "lexicon": indexer.lexicon.entries,
    }
    with open(path, "wb") as handle:
        handle.write(CHECKPOINT_MAGIC)
        handle.write(struct.pack("<I", CHECKPOINT_VERSION))
        _write_block(handle, json.dumps(cfg, sort_keys=True).encode("utf-8"))
        handle.write(struct.pack("<Q", len(vocab.words)))
        _write_block(handle, "\n".join(vocab.words).encode("utf-8"))
        _write_block(handle, vocab.counts.astype("<i8").tobytes())
        _write_block(handle, json.dumps(indexer_state, sort_keys=True).encode("utf-8"))
        for matrix in (model.input, model.output):
            _write_block(handle, str(matrix.dtype).encode("ascii"))
            handle.write(struct.pack("<QQ", matrix.shape[0], matrix.shape[1]))
            _write_block(handle, np.ascontiguousarray(matrix).tobytes())


def load_checkpoint(path: str | Path):
    """Inverse of :func:`save_checkpoint`; returns (model, TrainConfig).

    The negative-sampling table and keep-probabilities are rebuilt
    deterministically from the stored counts and config.
    """
    with open(path, "rb") as handle:
        magic = _read_exact(handle, len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise FormatError(f"{path}: not a morphgram checkpoint")
        (version,) = struct.unpack("<I", _read_exact(handle, 4))
        if version != CHECKPOINT_VERSION:
            raise FormatError(
                f"{path}: checkpoint format version {version}, expected {CHECKPOINT_VERSION}"
            )
        try:
            cfg = json.loads(_read_block(handle).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: corrupt config block: {exc}") from None
        (n_words,) = struct.unpack("<Q", _read_exact(handle, 8))
        words_blob = _read_block(handle).decode("utf-8")
        words = words_blob.split("\n") if words_blob else []
        if len(words) != n_words:
            raise FormatError(f"{path}: expected {n_words} words, found {len(words)}")
        counts = np.frombuffer(_read_block(handle), dtype="<i8")
        if len(counts) != n_words:
            raise FormatError(f"{path}: count block holds {len(counts)} entries, expected {n_words}")
        try:
            idx_state = json.loads(_read_block(handle).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: corrupt indexer block: {exc}") from None

        matrices = []
        for _ in range(2):
            dtype = _read_block(handle).decode("ascii")
            rows, cols = struct.unpack("<QQ", _read_exact(handle, 16))
            blob = _read_block(handle)
            expect = rows * cols * np.dtype(dtype).itemsize
            if len(blob) != expect:
                raise FormatError(f"{path}: matrix block truncated ({len(blob)} != {expect} bytes)")
            matrices.append(np.frombuffer(blob, dtype=dtype).reshape(rows, cols).copy())

    counts = counts.copy()
    total = int(counts.sum())
    vocab = Vocab(
        words=words,
        counts=counts,
        index={w: i for i, w in enumerate(words)},
        total_tokens=total,
        keep_prob=subsample_keep_prob(counts, total, float(cfg.get("subsample_t", 0.0))),
        neg_table=np.empty(0, dtype=np.int32),
    )
    vocab.neg_table = build_negative_table(
        vocab, max(int(cfg.get("neg_table_size", len(words))), len(words))
    )
    indexer = SubwordIndexer(
        idx_state["strategy"],
        len(words),
        n_min=int(idx_state["n_min"]),
        n_max=int(idx_state["n_max"]),
        bucket_count=int(idx_state["bucket_count"]),
        boundary_markers=bool(idx_state["boundary_markers"]),
        lexicon=MorphemeLexicon({w: list(m) for w, m in idx_state["lexicon"].items()}),
        morpheme_list=list(idx_state["morpheme_list"]),
    )
    model = EmbeddingModel(vocab, indexer, matrices[0].shape[1], matrices[0], matrices[1])
    from .trainer import TrainConfig  # local import: trainer pulls in numba

    return model, TrainConfig(**cfg)
