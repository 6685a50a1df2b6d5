"""Corpus preparation, entity-biased extractive selection, and scoring
for podcast-transcript summarization."""

from .corpus import (
    Corpus,
    Episode,
    FlatTranscript,
    Utterance,
    flat_transcript,
    flatten_transcript,
    ingest_corpus,
    tokenize,
    truncate_to_tokens,
    write_corpus,
)
from .errors import ParseError, ValidationError
from .filtering import (
    FilePromoDetector,
    FilterConfig,
    FilterReport,
    RulePromoDetector,
    cosine,
    dedup_similar,
    filter_by_length,
    run_filter_cascade,
    scrub_promotions,
    split_corpus,
    tfidf_vectors,
)
from .categories import (
    CategoryTaxonomy,
    ConditionedInput,
    build_conditioned_input,
    collapse_category,
    default_taxonomy,
    emit_training_file,
    load_taxonomy,
    make_special_tokens,
)
from .extractive import (
    EntitySpan,
    ExtractionConfig,
    ExtractionResult,
    ExtractiveSelection,
    Segment,
    SegmentGraph,
    annotate_entities,
    build_segment_graph,
    coarse_extract,
    overlap_similarity,
    segment_transcript,
    select_segments,
)
from .evaluation import (
    EgfbDistribution,
    JudgmentRecord,
    RougeScore,
    aggregate_rouge,
    attribute_yes_rates,
    egfb_score,
    lcs_length,
    rouge_l,
)

__version__ = "0.1.0"
