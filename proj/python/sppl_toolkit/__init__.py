"""Strategy selection for instruction-tuning data via self-aligned perplexity."""

from ._core import (
    MockBackend,
    __version__,
    extract_final_label,
    extract_last_number,
    fractional_ranks,
    improvement_ratio,
    normalize_label,
    numbers_match,
    perplexity,
    population_std,
    rank_order,
    sample_exemplar_ids,
    weighted_spearman,
)

__all__ = [
    "MockBackend",
    "__version__",
    "extract_final_label",
    "extract_last_number",
    "fractional_ranks",
    "improvement_ratio",
    "normalize_label",
    "numbers_match",
    "perplexity",
    "population_std",
    "rank_order",
    "sample_exemplar_ids",
    "weighted_spearman",
]
