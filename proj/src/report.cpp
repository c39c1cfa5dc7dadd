#include "gapalign/report.hpp"

#include <cmath>

#include "gapalign/error.hpp"

namespace gapalign {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json detection_row(const DetectionCounts& d) {
  return Json{{"classified_and_covered", d.classified_and_covered},
              {"classified_but_uncovered", d.classified_but_uncovered},
              {"not_classified", d.not_classified},
              {"total", d.total()}};
}

}  // namespace

double render_seconds(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

Json alignment_to_json(std::span<const WordTiming> timings, const std::string& method,
                       double clamp, double audio_duration) {
  Json words = Json::array();
  for (const auto& w : timings) {
    words.push_back({{"word_index", w.word_index},
                     {"text", w.text},
                     {"start", render_seconds(w.start)},
                     {"end", render_seconds(w.end)}});
  }
  Json doc{{"method", method}, {"audio_duration", render_seconds(audio_duration)}};
  if (method == "modified") doc["c"] = clamp;
  doc["words"] = std::move(words);
  return doc;
}

std::vector<WordTiming> alignment_from_json(const Json& doc, double* audio_duration) {
  try {
    std::vector<WordTiming> out;
    for (const auto& r : doc.at("words")) {
      WordTiming w{r.at("word_index").get<std::size_t>(), r.at("text").get<std::string>(),
                   r.at("start").get<double>(), r.at("end").get<double>()};
      if (!(w.start < w.end)) throw Error(ErrorCode::Validation, "word timing with end <= start");
      if (!out.empty() && w.start < out.back().end) {
        throw Error(ErrorCode::Validation, "word timings overlap or are out of order");
      }
      out.push_back(std::move(w));
    }
    if (audio_duration != nullptr) *audio_duration = doc.at("audio_duration").get<double>();
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("alignment document: ") + e.what());
  }
}

Json gap_to_json(const Gap& gap) {
  return Json{{"start", render_seconds(gap.start)},
              {"end", render_seconds(gap.end)},
              {"label", gap.label ? Json(gap_label_name(*gap.label)) : Json(nullptr)},
              {"score", optional_number(gap.score)}};
}

Gap gap_from_json(const Json& record) {
  try {
    Gap g;
    g.start = record.at("start").get<double>();
    g.end = record.at("end").get<double>();
    if (record.contains("label") && !record.at("label").is_null()) {
      g.label = parse_gap_label(record.at("label").get<std::string>());
    }
    if (record.contains("score") && !record.at("score").is_null()) {
      g.score = record.at("score").get<double>();
    }
    if (!(g.start < g.end)) throw Error(ErrorCode::Validation, "gap with end <= start");
    return g;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("gap record: ") + e.what());
  }
}

Json gaps_to_json(std::span<const Gap> gaps) {
  Json list = Json::array();
  for (const auto& g : gaps) list.push_back(gap_to_json(g));
  return list;
}

std::vector<Gap> gaps_from_json(const Json& doc) {
  const Json& list = doc.is_object() && doc.contains("gaps") ? doc.at("gaps") : doc;
  if (!list.is_array()) throw Error(ErrorCode::Validation, "gap document must hold a list of gaps");
  std::vector<Gap> out;
  for (const auto& r : list) out.push_back(gap_from_json(r));
  return out;
}

Json categorization_to_json(const CategorizationCounts& c) {
  auto row = [](const std::array<std::size_t, 3>& r) {
    return Json{{"correctly_transcribed", r[CategorizationCounts::Correct]},
                {"incorrectly_transcribed", r[CategorizationCounts::Incorrect]},
                {"untranscribed", r[CategorizationCounts::Untranscribed]}};
  };
  return Json{{"fluent", row(c.fluent)}, {"disfluent", row(c.disfluent)}};
}

Json edit_counts_to_json(const EditCounts& c, std::size_t ref_words) {
  Json j{{"reference_words", ref_words},
         {"matches", c.matches},
         {"substitutions", c.substitutions},
         {"deletions", c.deletions},
         {"insertions", c.insertions}};
  j["wer"] = ref_words > 0 ? Json(static_cast<double>(c.errors()) / static_cast<double>(ref_words))
                           : Json(nullptr);
  return j;
}

Json summary_to_json(const ScoreSummary& s) {
  return Json{{"scope", scope_name(s.scope)},
              {"position", s.mean_position},
              {"length", s.mean_length},
              {"combined", s.mean_combined},
              {"pairs", s.count}};
}

Json coverage_to_json(const CoverageReport& c) {
  return Json{{"untranscribed", {{"covered", c.untranscribed_covered},
                                 {"uncovered", c.untranscribed_uncovered}}},
              {"transcribed", {{"covered", c.transcribed_covered},
                               {"uncovered", c.transcribed_uncovered}}}};
}

Json detection_to_json(const DetectionReport& d) {
  return Json{{"transcribed", detection_row(d.transcribed)},
              {"untranscribed", detection_row(d.untranscribed)}};
}

Json classifier_metrics_to_json(const ClassifierMetrics& m) {
  return Json{{"accuracy", optional_number(m.accuracy)},
              {"precision", optional_number(m.precision)},
              {"recall", optional_number(m.recall)},
              {"f1", optional_number(m.f1)},
              {"confusion", {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}}}};
}

Json segments_to_json(std::span<const Segment> segments) {
  Json list = Json::array();
  for (const auto& s : segments) {
    list.push_back({{"start", render_seconds(s.start)},
                    {"end", render_seconds(s.end)},
                    {"first_word", s.first_word},
                    {"last_word", s.last_word}});
  }
  return Json{{"segments", std::move(list)}};
}

void write_report(const Json& report, const std::filesystem::path& path) {
  write_text_file(path, report.dump(2) + "\n");
}

Json read_report(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Validation, path.string() + ": not a valid report: " + e.what());
  }
}

}  // namespace gapalign
