"""faqmatch: knowledge-grounded FAQ question answering.

Two-stage retrieval (TF-IDF filter, semantic re-rank) over an FAQ
knowledge base, fixed-budget answer sentence selection, self-supervised
losses for training the lightweight encoder, and ROUGE evaluation.
"""

from .config import EngineConfig
from .dataprep import QuestionPair, filter_and_split, matching_score
from .encoder import EncoderParams, encode, init_params, load_static_embeddings, save_params
from .kb import FaqEntry, KnowledgeBase, ingest, load, save
from .losses import (
    LossBreakdown,
    LossWeights,
    loss_grad,
    loss_mat,
    loss_sel,
    loss_sim,
    total_loss,
    train_encoder,
)
from .pipeline import AnswerSelection, MatchResult, PipelineAnswer, answer, match_question, select_answers
from .rouge import RougeReport, eval_file, rouge_f1
from .similarity import relu_sim, sim, sim_grad
from .textnorm import Sentence, split_sentences, tokenize
from .tfidf import SparseVector, TfidfModel, fit, top_k, transform

__version__ = "0.1.0"

__all__ = [
    "AnswerSelection",
    "EncoderParams",
    "EngineConfig",
    "FaqEntry",
    "KnowledgeBase",
    "LossBreakdown",
    "LossWeights",
    "MatchResult",
    "PipelineAnswer",
    "QuestionPair",
    "RougeReport",
    "Sentence",
    "SparseVector",
    "TfidfModel",
    "answer",
    "encode",
    "eval_file",
    "filter_and_split",
    "fit",
    "ingest",
    "init_params",
    "load",
    "load_static_embeddings",
    "loss_grad",
    "loss_mat",
    "loss_sel",
    "loss_sim",
    "match_question",
    "matching_score",
    "relu_sim",
    "rouge_f1",
    "save",
    "save_params",
    "select_answers",
    "sim",
    "sim_grad",
    "split_sentences",
    "tokenize",
    "top_k",
    "total_loss",
    "train_encoder",
    "transform",
]
