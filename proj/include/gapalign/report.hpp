#pragma once

#include <filesystem>
#include <span>

#include <json.hpp>

#include "gapalign/classifier.hpp"
#include "gapalign/ctc_align.hpp"
#include "gapalign/gaps.hpp"
#include "gapalign/metrics.hpp"
#include "gapalign/segmenter.hpp"
#include "gapalign/text_align.hpp"

namespace gapalign {

using Json = nlohmann::ordered_json;

// Seconds rounded to milliseconds for rendering.
double render_seconds(double seconds);

Json alignment_to_json(std::span<const WordTiming> timings, const std::string& method,
                       double clamp, double audio_duration);
// Inverse of alignment_to_json; returns the timings and fills the duration.
std::vector<WordTiming> alignment_from_json(const Json& doc, double* audio_duration = nullptr);

Json gap_to_json(const Gap& gap);
Gap gap_from_json(const Json& record);
Json gaps_to_json(std::span<const Gap> gaps);
std::vector<Gap> gaps_from_json(const Json& doc);

Json categorization_to_json(const CategorizationCounts& c);
Json edit_counts_to_json(const EditCounts& c, std::size_t ref_words);
Json summary_to_json(const ScoreSummary& s);
Json coverage_to_json(const CoverageReport& c);
Json detection_to_json(const DetectionReport& d);
Json classifier_metrics_to_json(const ClassifierMetrics& m);
Json segments_to_json(std::span<const Segment> segments);

void write_report(const Json& report, const std::filesystem::path& path);
Json read_report(const std::filesystem::path& path);

}  // namespace gapalign
