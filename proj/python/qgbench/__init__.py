"""Question-generation evaluation harness.

Thin Python surface over the C++ core: corpus preprocessing, list/score
parsers, coverage and shortening metrics, statistics, and the staged
pipeline runner.
"""

from ._core import (  # noqa: F401
    ConfigError,
    DependencyError,
    Error,
    ParseError,
    answerability_histogram,
    bucket_frequencies,
    cache_key,
    calibrate_judge,
    clean_text,
    coverage_metrics,
    extract_type_code,
    ingest_dump,
    mean_std,
    parse_ordered_list,
    parse_rating,
    parse_sentence_selection,
    pearson,
    prompt_variant,
    render_context,
    render_ordered_list,
    run_stage,
    segment_sentences,
    shortened_length,
    type_distribution,
)

__version__ = "0.1.0"
