#include "gapalign/gaps.hpp"

#include <algorithm>

#include "gapalign/error.hpp"

namespace gapalign {

const char* gap_label_name(GapLabel label) {
  return label == GapLabel::Speech ? "speech" : "empty";
}

GapLabel parse_gap_label(const std::string& name) {
  if (name == "speech") return GapLabel::Speech;
  if (name == "empty") return GapLabel::Empty;
  throw Error(ErrorCode::Validation, "unknown gap label '" + name + "'");
}

std::vector<Gap> extract_gaps(std::span<const WordTiming> timings, double audio_duration,
                              double min_gap) {
  std::vector<Gap> gaps;
  auto consider = [&](double start, double end) {
    if (end - start > 0.0 && end - start >= min_gap - kTimeEpsilon) gaps.push_back({start, end, {}, {}});
  };
  double cursor = 0.0;
  for (const auto& w : timings) {
    consider(cursor, w.start);
    cursor = std::max(cursor, w.end);
  }
  consider(cursor, audio_duration);
  return gaps;
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

double covered_fraction(double start, double end, std::span<const Gap> intervals) {
  double inside = 0.0;
  for (const auto& g : intervals) inside += overlap(start, end, g.start, g.end);
  return inside / (end - start);
}

GapLabel label_gap(const Gap& gap, std::span<const RefWord> ref_words, double overlap_threshold) {
  for (const auto& w : ref_words) {
    if (w.end <= gap.start || w.start >= gap.end) continue;
    const double fraction = overlap(w.start, w.end, gap.start, gap.end) / (w.end - w.start);
    if (fraction > overlap_threshold + kTimeEpsilon) return GapLabel::Speech;
  }
  return GapLabel::Empty;
}

namespace {

enum class WordClass { None, Transcribed, Untranscribed };

std::vector<WordClass> classify_ref_words(std::size_t ref_count,
                                          std::span<const WordAlignmentPair> pairs) {
  std::vector<WordClass> classes(ref_count, WordClass::None);
  for (const auto& p : pairs) {
    if (!p.ref_index) continue;
    if (*p.ref_index >= ref_count) {
      throw Error(ErrorCode::LengthMismatch, "alignment refers past the reference transcript");
    }
    classes[*p.ref_index] = p.op == EditOp::Delete ? WordClass::Untranscribed : WordClass::Transcribed;
  }
  return classes;
}

}  // namespace

CoverageReport coverage_counts(std::span<const Gap> gaps, std::span<const RefWord> ref_words,
                               std::span<const WordAlignmentPair> pairs,
                               double overlap_threshold) {
  const auto classes = classify_ref_words(ref_words.size(), pairs);
  CoverageReport report;
  report.word_fraction.reserve(ref_words.size());
  for (std::size_t i = 0; i < ref_words.size(); ++i) {
    const double fraction = covered_fraction(ref_words[i].start, ref_words[i].end, gaps);
    report.word_fraction.push_back(fraction);
    const bool covered = fraction > overlap_threshold + kTimeEpsilon;
    if (classes[i] == WordClass::Untranscribed) {
      ++(covered ? report.untranscribed_covered : report.untranscribed_uncovered);
    } else if (classes[i] == WordClass::Transcribed) {
      ++(covered ? report.transcribed_covered : report.transcribed_uncovered);
    }
  }
  return report;
}

DetectionReport detection_counts(std::span<const Gap> gaps, std::span<const RefWord> ref_words,
                                 std::span<const WordAlignmentPair> pairs,
                                 double overlap_threshold) {
  std::vector<Gap> speech;
  for (const auto& g : gaps) {
    if (!g.label) throw Error(ErrorCode::Validation, "detection counts need classified gaps");
    if (*g.label == GapLabel::Speech) speech.push_back(g);
  }
  const auto classes = classify_ref_words(ref_words.size(), pairs);
  DetectionReport report;
  for (std::size_t i = 0; i < ref_words.size(); ++i) {
    if (classes[i] == WordClass::None) continue;
    const auto& w = ref_words[i];
    auto& row = classes[i] == WordClass::Untranscribed ? report.untranscribed : report.transcribed;
    if (covered_fraction(w.start, w.end, speech) > overlap_threshold + kTimeEpsilon) {
      ++row.classified_and_covered;
    } else if (covered_fraction(w.start, w.end, gaps) > overlap_threshold + kTimeEpsilon) {
      ++row.classified_but_uncovered;
    } else {
      ++row.not_classified;
    }
  }
  return report;
}

}  // namespace gapalign
