#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gapalign/classifier.hpp"
#include "gapalign/ctc_align.hpp"
#include "gapalign/data_io.hpp"
#include "gapalign/gaps.hpp"
#include "gapalign/metrics.hpp"
#include "gapalign/report.hpp"
#include "gapalign/segmenter.hpp"
#include "gapalign/text_align.hpp"

namespace gapalign {

enum class ClassifierKind { Baseline, External };

struct PipelineConfig {
  double c = kDefaultStayClamp;
  double min_gap = kDefaultMinGap;
  double overlap_threshold = kDefaultOverlapThreshold;
  ClassifierKind classifier = ClassifierKind::Baseline;
  double baseline_threshold = kDefaultBaselineThreshold;
  SegmenterConfig segments;
  std::uint64_t seed = 0;
  double split_fraction = 0.8;
  bool matches_only = false;
  std::size_t jobs = 1;

  // Throws Validation when an invariant is violated.
  void validate() const;
};

// Overrides fields present in a JSON object whose keys are the field names
// above (`silence_split`, `max_segment`, `edge_distance` for the segmenter,
// `classifier` as "baseline" | "external").
void apply_config(PipelineConfig& config, const Json& overrides);
Json config_to_json(const PipelineConfig& config);

enum class AlignMethod { Standard, Modified, Attention };

const char* method_name(AlignMethod m);
AlignMethod parse_method(const std::string& name);

// One line per utterance: `id emissions hyp [ref|-] [attention|-]`, paths
// relative to the manifest's directory. '#' starts a comment line.
struct UtteranceEntry {
  std::string id;
  std::filesystem::path emissions;
  std::filesystem::path hyp;
  std::optional<std::filesystem::path> ref;
  std::optional<std::filesystem::path> attention;
};

std::vector<UtteranceEntry> read_corpus_manifest(const std::filesystem::path& path);

struct Utterance {
  std::string id;
  EmissionMatrix emissions;
  HypTranscript hyp;
  std::optional<std::vector<RefWord>> ref;
  std::optional<AttentionMatrix> attention;
};

Utterance load_utterance(const UtteranceEntry& entry);

std::vector<WordTiming> align_utterance(const Utterance& utt, AlignMethod method, double c);

// Runs `fn(i)` for i in [0, count) on up to `jobs` threads. Exceptions are
// rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

struct UtteranceFailure {
  std::string id;
  std::string error;
  std::string message;
};

struct EvaluateOptions {
  std::vector<AlignMethod> methods{AlignMethod::Standard, AlignMethod::Modified,
                                   AlignMethod::Attention};
  // Method whose gaps are classified; must be one of `methods`.
  AlignMethod gap_method = AlignMethod::Modified;
  // External predictions keyed by gap id, used when the classifier is External.
  std::optional<std::filesystem::path> predictions;
  // Stay clamps for the c sweep; empty disables it.
  std::vector<double> sweep_c;
  // Minimum gap sizes for the coverage-vs-gap-size series.
  std::vector<double> coverage_min_gaps{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
};

struct EvaluationResult {
  Json report;
  std::string coverage_csv;  // method,min_gap,untranscribed_covered,...
  std::string sweep_csv;     // c,scope,position,length,combined,...
};

// The whole detection pipeline over a loaded corpus: WER and categorization,
// alignment scores per method, gaps with reference labels and classifier
// decisions, classifier metrics and per-word detection counts.
EvaluationResult evaluate(const std::vector<Utterance>& corpus, const PipelineConfig& config,
                          const EvaluateOptions& options);

}  // namespace gapalign
