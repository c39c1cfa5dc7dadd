"""Gap-aware forced alignment: CTC trellis variants, attention DTW, gap detection."""

from ._core import (
    DEFAULT_MIN_GAP,
    DEFAULT_STAY_CLAMP,
    AttentionMatrix,
    ClassifierMetrics,
    EditCounts,
    EmissionMatrix,
    Gap,
    GapalignError,
    RefWord,
    Segment,
    WordTiming,
    align_attention,
    align_ctc,
    align_words,
    baseline_classify,
    combined_score,
    edit_counts,
    evaluate_manifest,
    extract_gaps,
    label_gap,
    length_score,
    metrics_from_confusion,
    plan_segments,
    position_score,
    read_attention,
    read_emissions,
    read_hyp_transcript,
    read_ref_transcript,
    wer,
    write_attention,
    write_emissions,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
