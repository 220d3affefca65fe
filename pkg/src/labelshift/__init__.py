"""Label-shift measurement between NER training data and evaluation benchmarks.

The package quantifies how familiar a zero-shot evaluation label set is
to a fine-tuning corpus (support-weighted, rank-weighted similarity of
label embeddings) and carves training splits of controlled transfer
difficulty from that signal.
"""

from .corpus import (
    Corpus,
    EvalLabelSet,
    LabelStats,
    Sentence,
    Span,
    label_stats,
    normalize_label,
    parse_conll,
    parse_jsonl_spans,
)
from .embed import (
    EmbeddingStore,
    cosine_clipped,
    embed_label,
    fetch_remote_embeddings,
    load_vector_file,
    save_labeled_tsv,
)
from .errors import (
    DegenerateInputError,
    EmbeddingError,
    LabelShiftError,
    ParseError,
    RemoteError,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .metric import (
    FamiliarityConfig,
    FamiliarityReport,
    exact_overlap,
    familiarity,
    familiarity_for_label,
    rank_similarities,
)
from .splits import (
    SplitSpec,
    aggregate_entropy,
    aggregate_max,
    filter_corpus,
    make_split,
    select_quantile,
    similarity_matrix,
)
from .analysis import (
    F1Table,
    correlate_report,
    load_f1_table,
    log_linear_fit,
    partition_eval_labels,
    pearson,
)

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "DegenerateInputError",
    "EmbeddingError",
    "EmbeddingStore",
    "EvalLabelSet",
    "F1Table",
    "FamiliarityConfig",
    "FamiliarityReport",
    "KERNEL_BACKEND",
    "LabelShiftError",
    "LabelStats",
    "ParseError",
    "RemoteError",
    "Sentence",
    "Span",
    "SplitSpec",
    "aggregate_entropy",
    "aggregate_max",
    "correlate_report",
    "cosine_clipped",
    "embed_label",
    "exact_overlap",
    "familiarity",
    "familiarity_for_label",
    "fetch_remote_embeddings",
    "filter_corpus",
    "label_stats",
    "load_f1_table",
    "load_vector_file",
    "log_linear_fit",
    "make_split",
    "normalize_label",
    "parse_conll",
    "parse_jsonl_spans",
    "partition_eval_labels",
    "pearson",
    "rank_similarities",
    "save_labeled_tsv",
    "select_quantile",
    "similarity_matrix",
]
