#include "gapalign/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gapalign/error.hpp"

namespace gapalign {

std::pair<std::size_t, std::size_t> gap_frame_range(const Gap& gap, const EmissionMatrix& m) {
  const double fd = m.frame_duration();
  const auto frames = static_cast<double>(m.num_frames());
  const double first = std::clamp(std::ceil(gap.start / fd - kTimeEpsilon), 0.0, frames);
  const double last = std::clamp(std::ceil(gap.end / fd - kTimeEpsilon), 0.0, frames);
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

GapDecision baseline_classify(const Gap& gap, const EmissionMatrix& m, double threshold) {
  const auto [first, last] = gap_frame_range(gap, m);
  if (first >= last) {
    std::ostringstream msg;
    msg << "gap [" << gap.start << ", " << gap.end << "] covers no emission frame";
    throw Error(ErrorCode::EmptyFrameRange, msg.str());
  }
  double sum = 0.0;
  for (std::size_t t = first; t < last; ++t) {
    sum += 1.0 - std::exp(m.logprob(t, m.blank_index()));
  }
  const double score = sum / static_cast<double>(last - first);
  return {score > threshold ? GapLabel::Speech : GapLabel::Empty, score};
}

std::string gap_id(const std::string& utterance_id, std::size_t gap_index) {
  return utterance_id + "#" + std::to_string(gap_index);
}

Predictions parse_predictions(std::string_view text, const std::set<std::string>& expected) {
  Predictions out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string id, label, score_text, extra;
    if (!(fields >> id >> label >> score_text) || (fields >> extra)) {
      throw Error(ErrorCode::Validation,
                  "line " + std::to_string(line_no) + ": expected `gap_id label score`");
    }
    GapDecision decision;
    try {
      decision.label = parse_gap_label(label);
      decision.score = std::stod(score_text);
    } catch (const Error& e) {
      throw Error(ErrorCode::Validation, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, "line " + std::to_string(line_no) + ": bad score");
    }
    if (!expected.contains(id)) {
      throw Error(ErrorCode::UnknownGapId, "line " + std::to_string(line_no) + ": unknown gap id '" + id + "'");
    }
    if (out.by_id.contains(id)) ++out.duplicates;
    out.by_id[id] = decision;
  }
  for (const auto& id : expected) {
    if (!out.by_id.contains(id)) throw Error(ErrorCode::MissingGapId, "no prediction for gap '" + id + "'");
  }
  return out;
}

Predictions load_predictions(const std::filesystem::path& path, const std::set<std::string>& expected) {
  const std::string text = read_text_file(path);
  try {
    return parse_predictions(text, expected);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_predictions(const std::map<std::string, GapDecision>& predictions,
                       const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [id, d] : predictions) {
    out << id << ' ' << gap_label_name(d.label) << ' ' << d.score << '\n';
  }
  write_text_file(path, out.str());
}

GapDataset build_gap_dataset(std::span<const AlignedUtterance> corpus, double min_gap,
                             double split_fraction, std::uint64_t seed, double overlap_threshold) {
  if (!(split_fraction >= 0.0 && split_fraction <= 1.0)) {
    throw Error(ErrorCode::Validation, "split fraction must lie in [0, 1]");
  }
  std::vector<GapDatasetRow> rows;
  for (const auto& utt : corpus) {
    for (const auto& gap : extract_gaps(utt.timings, utt.audio_duration, min_gap)) {
      rows.push_back({utt.id, gap.start, gap.end, label_gap(gap, utt.ref_words, overlap_threshold)});
    }
  }

  // Fisher-Yates with rejection sampling: mt19937_64 output is fixed by the
  // standard, unlike std::shuffle and the std distributions.
  std::mt19937_64 rng(seed);
  for (std::size_t i = rows.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % bound);
    std::uint64_t draw;
    do {
      draw = rng();
    } while (draw >= limit);
    std::swap(rows[i - 1], rows[draw % bound]);
  }

  const auto train_count = static_cast<std::size_t>(
      std::llround(split_fraction * static_cast<double>(rows.size())));
  GapDataset out;
  out.train.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(train_count));
  out.test.assign(rows.begin() + static_cast<std::ptrdiff_t>(train_count), rows.end());
  return out;
}

std::string format_manifest(std::span<const GapDatasetRow> rows) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& r : rows) {
    out << r.utterance_id << ' ' << r.start << ' ' << r.end << ' ' << gap_label_name(r.label) << '\n';
  }
  return out.str();
}

std::vector<GapDatasetRow> parse_manifest(std::string_view text) {
  std::vector<GapDatasetRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    GapDatasetRow r;
    std::string label;
    if (!(fields >> r.utterance_id >> r.start >> r.end >> label) || !(r.start < r.end)) {
      throw Error(ErrorCode::Validation, "manifest line " + std::to_string(line_no) + " is malformed");
    }
    r.label = parse_gap_label(label);
    rows.push_back(std::move(r));
  }
  return rows;
}

ClassifierMetrics metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t fn,
                                         std::size_t tn) {
  ClassifierMetrics m{tp, fp, fn, tn, {}, {}, {}, {}};
  const std::size_t total = tp + fp + fn + tn;
  if (total > 0) m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

ClassifierMetrics eval_classifier(const std::map<std::string, GapLabel>& predictions,
                                  const std::map<std::string, GapLabel>& labels) {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::SetMismatch, "prediction and label sets differ in size");
  }
  for (const auto& [id, truth] : labels) {
    const auto it = predictions.find(id);
    if (it == predictions.end()) throw Error(ErrorCode::SetMismatch, "no prediction for gap '" + id + "'");
    const bool predicted = it->second == GapLabel::Speech;
    const bool actual = truth == GapLabel::Speech;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return metrics_from_confusion(tp, fp, fn, tn);
}

}  // namespace gapalign
