"""Intrinsic evaluation: word similarity (Spearman), analogy (3CosAdd
accuracy), and concept categorization (k-means purity).

Everything here is read-only over the embeddings and deterministic given
(vectors, dataset, seed). Vectors come from either a text vector file
(:class:`KeyedVectors`) or a trained model (:class:`ModelVectors`, which can
compose out-of-vocabulary words from subword slots).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import EmbeddingModel

logger = logging.getLogger(__name__)

DEFAULT_KMEANS_RESTARTS = 10
_KMEANS_MAX_ITER = 100


# -- datasets -----------------------------------------------------------------


@dataclass
class SimilarityDataset:
    """(word1, word2, gold score) pairs with human-judged scores."""

    pairs: list[tuple[str, str, float]]

    def __post_init__(self):
        if len(self.pairs) < 2:
            raise ValueError("similarity dataset needs at least 2 pairs")
        if not all(np.isfinite(s) for _, _, s in self.pairs):
            raise ValueError("non-finite gold score")


@dataclass
class AnalogyDataset:
    """a:b :: c:d word quads, optionally grouped into labelled sections."""

    quads: list[tuple[str, str, str, str]]
    sections: list[str] = field(default_factory=list)  # parallel to quads, may be empty

    def __post_init__(self):
        for quad in self.quads:
            if not all(quad):
                raise ValueError(f"empty entry in analogy quad {quad}")


@dataclass
class CategorizationDataset:
    """(word, gold category) items."""

    items: list[tuple[str, str]]

    def __post_init__(self):
        cats = {c for _, c in self.items}
        if len(cats) < 2:
            raise ValueError("categorization dataset needs >= 2 categories")


def _data_lines(path):
    with open(path, encoding="utf-8", errors="replace") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield lineno, stripped


def load_similarity(path: str | Path) -> SimilarityDataset:
    """`word1<TAB>word2<TAB>score` lines."""
    pairs = []
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValueError(f"{path}: line {lineno}: expected word1<TAB>word2<TAB>score")
        try:
            pairs.append((fields[0], fields[1], float(fields[2])))
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric score {fields[2]!r}") from None
    return SimilarityDataset(pairs)


def load_analogy(path: str | Path) -> AnalogyDataset:
    """`a b c d` lines; `: section-name` lines label the quads that follow."""
    quads, sections = [], []
    current = ""
    for lineno, line in _data_lines(path):
        if line.startswith(":"):
            current = line[1:].strip()
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"{path}: line {lineno}: expected 4 words, got {len(fields)}")
        quads.append(tuple(fields))
        sections.append(current)
    return AnalogyDataset(quads, sections)


def load_categorization(path: str | Path) -> CategorizationDataset:
    """`word<TAB>category` lines."""
    items = []
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"{path}: line {lineno}: expected word<TAB>category")
        items.append((fields[0], fields[1]))
    return CategorizationDataset(items)


# -- vector stores ------------------------------------------------------------


class KeyedVectors:
    """Plain token -> vector lookup (e.g. a loaded text vector file).

    Lookup tries the exact surface form first, then the lowercased form.
    """

    def __init__(self, mapping: dict[str, np.ndarray], dim: int):
        self.words = list(mapping)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.dim = dim
        self.matrix = (
            np.vstack([mapping[w] for w in self.words])
            if self.words
            else np.zeros((0, dim), dtype=np.float32)
        )

    def resolve(self, word: str) -> int | None:
        wid = self.index.get(word)
        if wid is None:
            wid = self.index.get(word.lower())
        return wid

    def get(self, word: str) -> np.ndarray | None:
        wid = self.resolve(word)
        return self.matrix[wid] if wid is not None else None


class ModelVectors:
    """Composed vectors of a trained model, with subword OOV fallback."""

    def __init__(self, model: EmbeddingModel):
        self.model = model
        self.words = model.vocab.words
        self.index = model.vocab.index
        self.dim = model.dim
        self.matrix = np.vstack(
            [model.compose_vector(model.bag_of(wid)) for wid in range(len(self.words))]
        ) if self.words else np.zeros((0, model.dim))

    def resolve(self, word: str) -> int | None:
        wid = self.index.get(word)
        if wid is None:
            wid = self.index.get(word.lower())
        return wid

    def get(self, word: str) -> np.ndarray | None:
        wid = self.resolve(word)
        if wid is not None:
            return self.matrix[wid]
        vec = self.model.vector(word)
        if vec is None:
            lowered = word.lower()
            if lowered != word:
                vec = self.model.vector(lowered)
        return vec


# -- metrics ------------------------------------------------------------------


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|); raises on a zero-length input."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("zero-norm vector")
    return float(np.dot(u, v) / (nu * nv))


def _fractional_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; ties get the average of the ranks they span."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(x, y) -> float:
    """Pearson correlation of fractional ranks (average ranks on ties)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length 1-d sequences")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("undefined correlation (constant sequence)")
    rx = _fractional_ranks(x)
    ry = _fractional_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


# -- similarity ---------------------------------------------------------------


def eval_similarity(vectors, dataset: SimilarityDataset, oov_policy: str = "drop"):
    """Spearman rho between predicted cosines and gold scores.

    Returns (rho, coverage). Pairs with an unresolvable word, including
    zero-norm compositions, are dropped (``oov_policy="drop"``) or raise
    (``"error"``).
    """
    if oov_policy not in ("drop", "error"):
        raise ValueError(f"unknown oov_policy {oov_policy!r}")
    predicted, gold = [], []
    for w1, w2, score in dataset.pairs:
        v1, v2 = vectors.get(w1), vectors.get(w2)
        if v1 is not None and np.linalg.norm(v1) == 0.0:
            v1 = None
        if v2 is not None and np.linalg.norm(v2) == 0.0:
            v2 = None
        if v1 is None or v2 is None:
            if oov_policy == "error":
                missing = w1 if v1 is None else w2
                raise ValueError(f"unresolvable word {missing!r}")
            continue
        predicted.append(cosine(v1, v2))
        gold.append(score)
    if not predicted:
        raise ValueError("no scorable pairs")
    return spearman_rho(predicted, gold), len(predicted) / len(dataset.pairs)


# -- analogy ------------------------------------------------------------------


@dataclass
class AnalogyResult:
    accuracy: float
    n_evaluated: int
    n_total: int

    @property
    def coverage(self) -> float:
        return self.n_evaluated / self.n_total if self.n_total else 0.0


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return matrix / norms


def _resolve_unit(vectors, word: str, unit_matrix: np.ndarray):
    """(vocab id or None, unit vector or None) for one analogy operand."""
    wid = vectors.resolve(word)
    if wid is not None:
        return wid, unit_matrix[wid]
    vec = vectors.get(word)
    if vec is None:
        return None, None
    norm = np.linalg.norm(vec)
    if norm == 0:
        return None, None
    return None, vec / norm


def predict_analogy(vectors, a: str, b: str, c: str, unit_matrix=None):
    """3CosAdd answer: argmax_x cosine(x, b - a + c), x not in {a, b, c}.

    Returns the predicted word, or None when an operand cannot be resolved.
    """
    if unit_matrix is None:
        unit_matrix = _unit_rows(vectors.matrix)
    ids, units = [], []
    for word in (a, b, c):
        wid, unit = _resolve_unit(vectors, word, unit_matrix)
        if unit is None:
            return None
        ids.append(wid)
        units.append(unit)
    target = units[1] - units[0] + units[2]
    scores = unit_matrix @ target
    for wid in ids:
        if wid is not None:
            scores[wid] = -np.inf
    return vectors.words[int(np.argmax(scores))]


def eval_analogy(vectors, dataset: AnalogyDataset) -> AnalogyResult:
    """3CosAdd accuracy over the evaluable quads.

    A quad is evaluable when a, b, c resolve (via subword composition where
    the strategy allows) and d is itself a known word; skipped quads are
    reported through ``coverage``.
    """
    unit_matrix = _unit_rows(vectors.matrix)
    n_correct = 0
    n_eval = 0
    for quad in dataset.quads:
        a, b, c, d = quad
        d_id = vectors.resolve(d)
        if d_id is None:
            continue
        prediction = predict_analogy(vectors, a, b, c, unit_matrix=unit_matrix)
        if prediction is None:
            continue
        n_eval += 1
        if prediction == d or prediction == d.lower():
            n_correct += 1
    if n_eval == 0:
        raise ValueError("no evaluable analogy quads")
    return AnalogyResult(n_correct / n_eval, n_eval, len(dataset.quads))


# -- categorization -----------------------------------------------------------


def _kmeans_once(points: np.ndarray, k: int, rng: np.random.Generator):
    """One k-means++ seeded Lloyd run; returns (labels, inertia).

    Empty clusters are left empty (their center stays put); with degenerate
    inputs this is the honest fixed point.
    """
    n = len(points)
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.integers(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[j] = points[idx]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(_KMEANS_MAX_ITER):
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = points[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
    inertia = float(((points - centers[labels]) ** 2).sum())
    return labels, inertia


def purity(labels: np.ndarray, gold: list[str]) -> float:
    """Fraction of points in the majority gold category of their cluster."""
    n = len(gold)
    total = 0
    for cluster in np.unique(labels):
        members = [gold[i] for i in np.flatnonzero(labels == cluster)]
        counts: dict[str, int] = {}
        for g in members:
            counts[g] = counts.get(g, 0) + 1
        total += max(counts.values())
    return total / n


def eval_categorization(
    vectors,
    dataset: CategorizationDataset,
    restarts: int = DEFAULT_KMEANS_RESTARTS,
    seed: int = 0,
):
    """k-means purity with k = number of gold categories.

    Unit-normalized vectors, seeded k-means++ initialization, best inertia
    over ``restarts`` runs. Returns (purity, coverage).
    """
    resolved, gold = [], []
    for word, category in dataset.items:
        vec = vectors.get(word)
        if vec is not None:
            resolved.append(vec)
            gold.append(category)
    k = len({c for _, c in dataset.items})
    if len(resolved) < k:
        raise ValueError(f"only {len(resolved)} resolvable words for {k} categories")
    points = _unit_rows(np.vstack(resolved).astype(np.float64))
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(max(1, restarts)):
        labels, inertia = _kmeans_once(points, k, rng)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return purity(best_labels, gold), len(resolved) / len(dataset.items)
