"""Python access to the amazul core."""

from amazul._core import (
    Chat,
    Corpus,
    Error,
    InvalidArgument,
    NL2SQL,
    NotFound,
    ParseError,
    Untranslatable,
    bleu_no_bp,
    build_knowledge_graph,
    cosine_dissimilarity,
    exact_match,
    factorize,
    generate_report,
    split_sentences,
    token_f1,
    tokenize,
)

__all__ = [
    "Chat",
    "Corpus",
    "Error",
    "InvalidArgument",
    "NL2SQL",
    "NotFound",
    "ParseError",
    "Untranslatable",
    "bleu_no_bp",
    "build_knowledge_graph",
    "cosine_dissimilarity",
    "exact_match",
    "factorize",
    "generate_report",
    "split_sentences",
    "token_f1",
    "tokenize",
]
