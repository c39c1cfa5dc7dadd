#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapalign/ctc_align.hpp"
#include "gapalign/data_io.hpp"
#include "gapalign/text_align.hpp"

namespace gapalign {

inline constexpr double kDefaultMinGap = 0.3;
inline constexpr double kDefaultOverlapThreshold = 0.5;

// Absolute slack for comparisons on times that come out of float arithmetic
// (frame index x frame duration, decimal timestamps).
inline constexpr double kTimeEpsilon = 1e-9;

enum class GapLabel { Speech, Empty };

const char* gap_label_name(GapLabel label);
GapLabel parse_gap_label(const std::string& name);

struct Gap {
  double start = 0.0;
  double end = 0.0;
  std::optional<GapLabel> label;
  std::optional<double> score;

  double length() const { return end - start; }
  friend bool operator==(const Gap&, const Gap&) = default;
};

// Candidate intervals: before the first word, between consecutive words, and
// after the last word up to `audio_duration`. Only intervals of at least
// `min_gap` seconds are kept.
std::vector<Gap> extract_gaps(std::span<const WordTiming> timings, double audio_duration,
                              double min_gap = kDefaultMinGap);

// Length of the intersection of [a0, a1] and [b0, b1] (0 if disjoint).
double overlap(double a0, double a1, double b0, double b1);

// Fraction of the word [start, end] lying inside the union of `intervals`.
// Intervals must be disjoint.
double covered_fraction(double start, double end, std::span<const Gap> intervals);

// Speech iff some reference word has strictly more than `overlap_threshold`
// of its own duration inside the gap.
GapLabel label_gap(const Gap& gap, std::span<const RefWord> ref_words,
                   double overlap_threshold = kDefaultOverlapThreshold);

struct CoverageReport {
  std::size_t untranscribed_covered = 0;
  std::size_t untranscribed_uncovered = 0;
  std::size_t transcribed_covered = 0;
  std::size_t transcribed_uncovered = 0;
  // Per reference word; absent for words that are neither class (never the
  // case for a complete alignment).
  std::vector<double> word_fraction;

  std::size_t untranscribed() const { return untranscribed_covered + untranscribed_uncovered; }
  std::size_t transcribed() const { return transcribed_covered + transcribed_uncovered; }
};

// A reference word is covered when more than `overlap_threshold` of its
// duration lies in the union of `gaps`. Deleted words count as untranscribed,
// matched and substituted words as transcribed.
CoverageReport coverage_counts(std::span<const Gap> gaps, std::span<const RefWord> ref_words,
                               std::span<const WordAlignmentPair> pairs,
                               double overlap_threshold = kDefaultOverlapThreshold);

// Per word class, how the classified gap set relates to the word:
// in a gap labelled speech / in gaps that were all labelled empty / in no gap.
struct DetectionCounts {
  std::size_t classified_and_covered = 0;
  std::size_t classified_but_uncovered = 0;
  std::size_t not_classified = 0;

  std::size_t total() const { return classified_and_covered + classified_but_uncovered + not_classified; }
};

struct DetectionReport {
  DetectionCounts transcribed;
  DetectionCounts untranscribed;
};

// `gaps` must all carry a label from a classifier.
DetectionReport detection_counts(std::span<const Gap> gaps, std::span<const RefWord> ref_words,
                                 std::span<const WordAlignmentPair> pairs,
                                 double overlap_threshold = kDefaultOverlapThreshold);

}  // namespace gapalign
