"""Skip-gram negative-sampling word embeddings with interchangeable subword
composition: word-only, character n-gram bags, or morpheme bags."""

__version__ = "0.1.0"

from .corpus import Vocab, build_negative_table, build_vocab, tokenize
from .evaluate import (
    AnalogyDataset,
    CategorizationDataset,
    KeyedVectors,
    ModelVectors,
    SimilarityDataset,
    cosine,
    eval_analogy,
    eval_categorization,
    eval_similarity,
    load_analogy,
    load_categorization,
    load_similarity,
    spearman_rho,
)
from .model import EmbeddingModel, SgnsGradients, log_sigmoid, sigmoid
from .persist import (
    FormatError,
    load_checkpoint,
    load_lexicon,
    load_vectors_text,
    save_checkpoint,
    save_vectors_text,
)
from .rng import Rng
from .subword import MorphemeLexicon, SubwordIndexer, char_ngrams, hash_ngram
from .trainer import (
    TrainConfig,
    TrainStats,
    draw_negatives,
    dynamic_window,
    lr_at,
    train,
)

__all__ = [
    "AnalogyDataset",
    "CategorizationDataset",
    "EmbeddingModel",
    "FormatError",
    "KeyedVectors",
    "ModelVectors",
    "MorphemeLexicon",
    "Rng",
    "SgnsGradients",
    "SimilarityDataset",
    "SubwordIndexer",
    "TrainConfig",
    "TrainStats",
    "Vocab",
    "build_negative_table",
    "build_vocab",
    "char_ngrams",
    "cosine",
    "draw_negatives",
    "dynamic_window",
    "eval_analogy",
    "eval_categorization",
    "eval_similarity",
    "hash_ngram",
    "load_analogy",
    "load_categorization",
    "load_checkpoint",
    "load_lexicon",
    "load_similarity",
    "load_vectors_text",
    "log_sigmoid",
    "lr_at",
    "save_checkpoint",
    "save_vectors_text",
    "sigmoid",
    "spearman_rho",
    "tokenize",
    "train",
]
