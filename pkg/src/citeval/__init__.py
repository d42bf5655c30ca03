"""citeval: retrieval evaluation over citation-linked paragraph corpora."""

__version__ = "0.1.0"

from .bm25 import Bm25Index, bm25_score, bm25_score_all, bm25_top_k, build_bm25_index
from .corpus import (
    CitationGraph,
    Corpus,
    CorpusStats,
    Paragraph,
    ParagraphId,
    corpus_stats,
    ingest_citations,
    ingest_paragraphs,
)
from .dense import DenseRanker, EmbeddingStore, cosine, dense_top_k, read_embeddings
from .errors import ValidationError
from .gap import (
    GapReport,
    ScenarioPartition,
    SimilarityProfile,
    TestResult,
    common_ngram_count,
    gap_report,
    highlight_overlap,
    lcs_length,
    partition_scenarios,
    similarity_profile,
    welch_t_test,
    word_edit_distance,
)
from .metrics import (
    MetricsReport,
    average_precision,
    evaluate_run,
    ndcg_at_k,
    recall_at_k,
    reciprocal_rank,
)
from .splits import RetrievalTask, SplitBoundaries, SplitSet, build_task, temporal_split
from .tfidf import NGramVocab, TfidfIndex, build_tfidf_vocab, tfidf_score
from .tokens import TOKENIZER_ID, ngrams, tokenize, tokenize_word_punct
from .trec import RunRanking

__all__ = [
    "Bm25Index",
    "CitationGraph",
    "Corpus",
    "CorpusStats",
    "DenseRanker",
    "EmbeddingStore",
    "GapReport",
    "MetricsReport",
    "NGramVocab",
    "Paragraph",
    "ParagraphId",
    "RetrievalTask",
    "RunRanking",
    "ScenarioPartition",
    "SimilarityProfile",
    "SplitBoundaries",
    "SplitSet",
    "TOKENIZER_ID",
    "TestResult",
    "TfidfIndex",
    "ValidationError",
    "average_precision",
    "bm25_score",
    "bm25_score_all",
    "bm25_top_k",
    "build_bm25_index",
    "build_task",
    "build_tfidf_vocab",
    "common_ngram_count",
    "corpus_stats",
    "cosine",
    "dense_top_k",
    "evaluate_run",
    "gap_report",
    "highlight_overlap",
    "ingest_citations",
    "ingest_paragraphs",
    "lcs_length",
    "ndcg_at_k",
    "ngrams",
    "partition_scenarios",
    "read_embeddings",
    "recall_at_k",
    "reciprocal_rank",
    "similarity_profile",
    "temporal_split",
    "tfidf_score",
    "tokenize",
    "tokenize_word_punct",
    "welch_t_test",
    "word_edit_distance",
]
