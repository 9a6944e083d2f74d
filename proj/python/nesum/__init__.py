"""Named-entity-aware summarization toolkit.

Python surface over the C++ core: the tokenizer, the ROUGE_RAW / ROUGE_NE
metrics, the extractive summarizers (first, random, TextRank, named-entity
density) and the attentional encoder-decoder with its optional entity
feature channel.
"""

from nesum._core import (
    ArgumentError,
    DataError,
    Gazetteer,
    IoError,
    Model,
    ModelConfig,
    Prf,
    entity_view,
    make_doc_id,
    ned_scores,
    postprocess_summary,
    repair_iob2,
    rouge_ne,
    rouge_raw_l,
    rouge_raw_n,
    select_first,
    select_ned,
    select_random,
    split_sentences,
    textrank_scores,
    textrank_select,
    tokenize,
    train_model,
)

__all__ = [
    "ArgumentError",
    "DataError",
    "Gazetteer",
    "IoError",
    "Model",
    "ModelConfig",
    "Prf",
    "entity_view",
    "make_doc_id",
    "ned_scores",
    "postprocess_summary",
    "repair_iob2",
    "rouge_ne",
    "rouge_raw_l",
    "rouge_raw_n",
    "select_first",
    "select_ned",
    "select_random",
    "split_sentences",
    "textrank_scores",
    "textrank_select",
    "tokenize",
    "train_model",
]

__version__ = "0.1.0"
