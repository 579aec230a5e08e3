from opcap.metrics.text import bleu, cider, corpus_bleu, rouge_l
from opcap.metrics.content import POS_METRIC_CLASSES, PosLexicon, content_word_prf
from opcap.metrics.evaluate import (
    EvalReport,
    VocabMismatchError,
    evaluate,
    read_report,
    score_captions,
    write_report,
)

__all__ = [
    "bleu",
    "corpus_bleu",
    "rouge_l",
    "cider",
    "PosLexicon",
    "POS_METRIC_CLASSES",
    "content_word_prf",
    "EvalReport",
    "VocabMismatchError",
    "evaluate",
    "score_captions",
    "write_report",
    "read_report",
]
