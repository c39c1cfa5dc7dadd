#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gapalign/ctc_align.hpp"
#include "gapalign/data_io.hpp"
#include "gapalign/gaps.hpp"

namespace gapalign {

inline constexpr double kDefaultBaselineThreshold = 0.5;

struct GapDecision {
  GapLabel label = GapLabel::Empty;
  double score = 0.0;

  friend bool operator==(const GapDecision&, const GapDecision&) = default;
};

// Frames [first, last) whose start times fall inside the gap.
std::pair<std::size_t, std::size_t> gap_frame_range(const Gap& gap, const EmissionMatrix& m);

// Score = mean over the gap's frames of 1 - P(blank); speech iff score > threshold.
GapDecision baseline_classify(const Gap& gap, const EmissionMatrix& m,
                              double threshold = kDefaultBaselineThreshold);

// Gap ids are `<utterance_id>#<gap_index>`.
std::string gap_id(const std::string& utterance_id, std::size_t gap_index);

struct Predictions {
  std::map<std::string, GapDecision> by_id;
  std::size_t duplicates = 0;  // repeated ids; the last line wins
};

// Lines of `gap_id label score`. Every id in `expected` must be present and no
// other id may appear.
Predictions parse_predictions(std::string_view text, const std::set<std::string>& expected);
Predictions load_predictions(const std::filesystem::path& path, const std::set<std::string>& expected);
void write_predictions(const std::map<std::string, GapDecision>& predictions,
                       const std::filesystem::path& path);

struct GapDatasetRow {
  std::string utterance_id;
  double start = 0.0;
  double end = 0.0;
  GapLabel label = GapLabel::Empty;

  friend bool operator==(const GapDatasetRow&, const GapDatasetRow&) = default;
};

// One aligned utterance: automatic word timings plus the manual reference.
struct AlignedUtterance {
  std::string id;
  std::vector<WordTiming> timings;
  std::vector<RefWord> ref_words;
  double audio_duration = 0.0;
};

struct GapDataset {
  std::vector<GapDatasetRow> train;
  std::vector<GapDatasetRow> test;
};

// Extracts and labels every gap of every utterance, shuffles the rows with a
// seeded Fisher-Yates pass over std::mt19937_64 and splits them by fraction.
GapDataset build_gap_dataset(std::span<const AlignedUtterance> corpus, double min_gap,
                             double split_fraction, std::uint64_t seed,
                             double overlap_threshold = kDefaultOverlapThreshold);

std::string format_manifest(std::span<const GapDatasetRow> rows);
std::vector<GapDatasetRow> parse_manifest(std::string_view text);

struct ClassifierMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

// Speech is the positive class. Ratios with a zero denominator are absent.
ClassifierMetrics metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t fn,
                                         std::size_t tn);

// Throws SetMismatch unless both maps have exactly the same ids.
ClassifierMetrics eval_classifier(const std::map<std::string, GapLabel>& predictions,
                                  const std::map<std::string, GapLabel>& labels);

}  // namespace gapalign
