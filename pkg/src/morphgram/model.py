"""Embedding matrices and the negative-sampling objective.

The input matrix has one row per slot (word rows first, subword rows after);
the output matrix has one row per vocabulary word (context vectors). A word's
composed vector is the unweighted sum of its bag's input rows; the score of a
(center bag, context word) pair is the dot product of that sum with the
context word's output row.

Loss and gradients here are the exact analytic forms used for testing and for
small-scale work; the trainer kernel re-implements the same math in compiled
form for throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Vocab
from .subword import SubwordIndexer


def sigmoid(x: float) -> float:
    """Logistic function, stable for |x| up to ~1e3."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def log_sigmoid(x: float) -> float:
    """log(sigmoid(x)) without overflow on large |x|."""
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@dataclass
class SgnsGradients:
    """Exact gradients of one SGNS example.

    Every slot in the center bag receives the same ``bag_grad`` (the composed
    vector is an unweighted sum); duplicate slots accumulate once per
    occurrence when applied. ``out_rows`` may repeat (degenerate negative
    draws) and accumulate likewise.
    """

    bag: np.ndarray  # int64 slot ids, duplicates kept
    bag_grad: np.ndarray  # (dim,)
    out_rows: np.ndarray  # int64, positive first then negatives
    out_grads: np.ndarray  # (len(out_rows), dim)


class EmbeddingModel:
    """Input (slot) and output (context) matrices plus their composition rule."""

    def __init__(
        self,
        vocab: Vocab,
        indexer: SubwordIndexer,
        dim: int,
        input_matrix: np.ndarray,
        output_matrix: np.ndarray,
    ):
        if dim <= 0:
            raise ValueError("dim must be positive")
        if input_matrix.shape != (indexer.n_slots, dim):
            raise ValueError(
                f"input matrix shape {input_matrix.shape} != ({indexer.n_slots}, {dim})"
            )
        if output_matrix.shape != (len(vocab), dim):
            raise ValueError(
                f"output matrix shape {output_matrix.shape} != ({len(vocab)}, {dim})"
            )
        self.vocab = vocab
        self.indexer = indexer
        self.dim = dim
        self.input = input_matrix
        self.output = output_matrix
        self.train_stats = None  # set by the trainer

    @classmethod
    def create(
        cls,
        vocab: Vocab,
        indexer: SubwordIndexer,
        dim: int,
        seed: int = 1,
        dtype=np.float32,
    ) -> "EmbeddingModel":
        """Fresh model: input rows uniform in [-0.5/dim, 0.5/dim], output rows zero."""
        if dim <= 0:
            raise ValueError("dim must be positive")
        rng = np.random.default_rng(seed)
        inp = rng.random((indexer.n_slots, dim), dtype=np.float32)
        inp -= np.float32(0.5)
        inp /= np.float32(dim)
        out = np.zeros((len(vocab), dim), dtype=np.float32)
        if dtype != np.float32:
            inp = inp.astype(dtype)
            out = out.astype(dtype)
        return cls(vocab, indexer, dim, inp, out)

    # -- composition and scoring ------------------------------------------

    def _check_bag(self, bag) -> np.ndarray:
        bag = np.asarray(bag, dtype=np.int64)
        if bag.size == 0:
            raise ValueError("invalid slot: empty bag")
        if bag.min() < 0 or bag.max() >= self.input.shape[0]:
            raise ValueError("invalid slot")
        return bag

    def compose_vector(self, bag) -> np.ndarray:
        """Element-wise sum of the input rows of every slot in the bag.

        Accumulates in float64, left to right, so duplicates contribute once
        per occurrence and results match a naive summation exactly.
        """
        bag = self._check_bag(bag)
        v = np.zeros(self.dim, dtype=np.float64)
        for slot in bag:
            v += self.input[slot]
        return v

    def bag_of(self, word_id: int) -> list[int]:
        """The stored bag of a vocabulary word."""
        return self.indexer.compose_bag(word_id, self.vocab.words[word_id])

    def vector(self, word: str) -> np.ndarray | None:
        """Composed vector for any surface form.

        Vocabulary words compose word slot + subword slots; unknown words fall
        back to subword slots alone (possible under n-gram and morpheme
        strategies). Returns None when nothing resolves.
        """
        wid = self.vocab.get(word)
        if wid is not None:
            return self.compose_vector(self.bag_of(wid))
        oov_bag = self.indexer.compose_oov(word)
        if not oov_bag:
            return None
        return self.compose_vector(oov_bag)

    def score(self, center_bag, context_id: int, compose_context: bool = False) -> float:
        """Dot product of the composed center vector with the context vector.

        Default: context vector is the context word's output row. With
        ``compose_context`` the context side is composed from input rows too
        (the literal both-sides-composed reading).
        """
        k = self.compose_vector(center_bag)
        if compose_context:
            kc = self.compose_vector(self.bag_of(context_id))
            return float(np.dot(k, kc))
        if not 0 <= context_id < self.output.shape[0]:
            raise ValueError("invalid slot")
        return float(np.dot(k, self.output[context_id].astype(np.float64)))

    # -- loss and gradients ------------------------------------------------

    def sgns_loss(
        self, center_bag, positive_id: int, negative_ids, compose_context: bool = False
    ) -> float:
        """-[log s(score(bag, pos)) + sum_i log s(-score(bag, neg_i))]."""
        loss = -log_sigmoid(self.score(center_bag, positive_id, compose_context))
        for neg in negative_ids:
            loss -= log_sigmoid(-self.score(center_bag, neg, compose_context))
        return loss

    def sgns_gradients(self, center_bag, positive_id: int, negative_ids) -> SgnsGradients:
        """Exact analytic gradients of :meth:`sgns_loss` (default scoring mode).

        With g_c = sigmoid(score) - label: each output row's gradient is
        g_c * k; the shared bag-slot gradient is sum_c g_c * output[c].
        """
        bag = self._check_bag(center_bag)
        k = self.compose_vector(bag)
        rows = np.concatenate(([positive_id], np.asarray(negative_ids, dtype=np.int64)))
        labels = np.zeros(len(rows))
        labels[0] = 1.0
        out_grads = np.empty((len(rows), self.dim), dtype=np.float64)
        bag_grad = np.zeros(self.dim, dtype=np.float64)
        for i, (row, label) in enumerate(zip(rows, labels)):
            g = sigmoid(float(np.dot(k, self.output[row].astype(np.float64)))) - label
            out_grads[i] = g * k
            bag_grad += g * self.output[row].astype(np.float64)
        return SgnsGradients(bag=bag, bag_grad=bag_grad, out_rows=rows, out_grads=out_grads)

    def sgns_gradients_compose_both(
        self, center_bag, positive_id: int, negative_ids
    ) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray]]]:
        """Gradients for the literal both-sides-composed objective.

        Returns (center bag gradient, [(context bag, its gradient), ...]);
        all gradients are against input rows; the output matrix is untouched
        in this mode.
        """
        bag = self._check_bag(center_bag)
        k = self.compose_vector(bag)
        bag_grad = np.zeros(self.dim, dtype=np.float64)
        context_grads = []
        ids = [positive_id] + list(negative_ids)
        for i, cid in enumerate(ids):
            label = 1.0 if i == 0 else 0.0
            cbag = self._check_bag(self.bag_of(cid))
            kc = self.compose_vector(cbag)
            g = sigmoid(float(np.dot(k, kc))) - label
            bag_grad += g * kc
            context_grads.append((cbag, g * k))
        return bag_grad, context_grads

    def sgd_apply(self, grads: SgnsGradients, learning_rate: float) -> None:
        """row <- row - lr*grad for every touched row; others untouched.

        Duplicate slot/row ids accumulate once per occurrence.
        """
        if learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        step = -learning_rate * grads.bag_grad
        np.add.at(self.input, grads.bag, step.astype(self.input.dtype))
        np.add.at(
            self.output,
            grads.out_rows,
            (-learning_rate * grads.out_grads).astype(self.output.dtype),
        )
