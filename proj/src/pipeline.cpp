#include "gapalign/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "gapalign/error.hpp"

namespace gapalign {

namespace {

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
void override_field(const Json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::Validation, std::string("config field '") + key + "' has the wrong type");
  }
}

std::vector<std::string> texts(const std::vector<RefWord>& words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.text);
  return out;
}

struct MethodResult {
  bool ok = false;
  std::string error;
  ScoreAccumulator all_words;
  ScoreAccumulator around;
  std::vector<CoverageReport> coverage;  // one per coverage_min_gaps entry
  CoverageReport coverage_at_min_gap;
};

struct SweepResult {
  bool ok = false;
  ScoreAccumulator all_words;
  ScoreAccumulator around;
  CoverageReport coverage;
};

struct UtteranceResult {
  std::optional<UtteranceFailure> failure;
  std::vector<UtteranceFailure> method_failures;
  EditCounts edits;
  std::size_t ref_words = 0;
  CategorizationCounts categories;
  std::vector<WordAlignmentPair> pairs;
  std::vector<MethodResult> methods;
  std::vector<Gap> gaps;
  std::vector<GapLabel> reference_labels;
  std::vector<SweepResult> sweep;
};

void add_coverage(CoverageReport& into, const CoverageReport& c) {
  into.untranscribed_covered += c.untranscribed_covered;
  into.untranscribed_uncovered += c.untranscribed_uncovered;
  into.transcribed_covered += c.transcribed_covered;
  into.transcribed_uncovered += c.transcribed_uncovered;
}

void add_detection(DetectionCounts& into, const DetectionCounts& d) {
  into.classified_and_covered += d.classified_and_covered;
  into.classified_but_uncovered += d.classified_but_uncovered;
  into.not_classified += d.not_classified;
}

void add_categories(CategorizationCounts& into, const CategorizationCounts& c) {
  for (std::size_t k = 0; k < 3; ++k) {
    into.fluent[k] += c.fluent[k];
    into.disfluent[k] += c.disfluent[k];
  }
}

Json maybe_summary(const ScoreAccumulator& acc, ScoreScope scope) {
  return acc.count > 0 ? summary_to_json(acc.summary(scope)) : Json(nullptr);
}

void score_into(const std::vector<WordAlignmentPair>& pairs, const std::vector<RefWord>& ref,
                const std::vector<WordTiming>& timings, bool matches_only, ScoreAccumulator& all,
                ScoreAccumulator& around) {
  for (const auto& p : scored_pairs(pairs, ref, timings, ScoreScope::AllWords, matches_only)) all.add(p);
  for (const auto& p : scored_pairs(pairs, ref, timings, ScoreScope::AroundUntranscribed, matches_only)) {
    around.add(p);
  }
}

UtteranceResult process_utterance(const Utterance& utt, const PipelineConfig& config,
                                  const EvaluateOptions& options) {
  UtteranceResult r;
  if (!utt.ref) {
    r.failure = UtteranceFailure{utt.id, "validation", "no reference transcript"};
    return r;
  }
  const auto& ref = *utt.ref;
  const double duration = utt.emissions.duration();
  r.ref_words = ref.size();
  r.pairs = levenshtein_align(texts(ref), utt.hyp.words);
  r.edits = count_edits(r.pairs);
  std::vector<bool> flags;
  for (const auto& w : ref) flags.push_back(w.disfluent);
  r.categories = categorize_words(r.pairs, flags);

  for (const auto method : options.methods) {
    MethodResult m;
    try {
      const auto timings = align_utterance(utt, method, config.c);
      score_into(r.pairs, ref, timings, config.matches_only, m.all_words, m.around);
      for (const double mg : options.coverage_min_gaps) {
        m.coverage.push_back(coverage_counts(extract_gaps(timings, duration, mg), ref, r.pairs,
                                             config.overlap_threshold));
      }
      const auto gaps = extract_gaps(timings, duration, config.min_gap);
      m.coverage_at_min_gap = coverage_counts(gaps, ref, r.pairs, config.overlap_threshold);
      if (method == options.gap_method) {
        r.gaps = gaps;
        for (auto& g : r.gaps) {
          r.reference_labels.push_back(label_gap(g, ref, config.overlap_threshold));
          if (config.classifier == ClassifierKind::Baseline) {
            const auto d = baseline_classify(g, utt.emissions, config.baseline_threshold);
            g.label = d.label;
            g.score = d.score;
          }
        }
      }
      m.ok = true;
    } catch (const Error& e) {
      m.error = e.what();
      r.method_failures.push_back({utt.id + ":" + method_name(method), error_name(e.code()), e.what()});
      if (method == options.gap_method) {
        r.failure = UtteranceFailure{utt.id, error_name(e.code()), e.what()};
        return r;
      }
    }
    r.methods.push_back(std::move(m));
  }

  for (const double c : options.sweep_c) {
    SweepResult s;
    try {
      const auto timings = align_ctc(utt.emissions, utt.hyp, TrellisVariant::Modified, c);
      score_into(r.pairs, ref, timings, config.matches_only, s.all_words, s.around);
      s.coverage = coverage_counts(extract_gaps(timings, duration, config.min_gap), ref, r.pairs,
                                   config.overlap_threshold);
      s.ok = true;
    } catch (const Error& e) {
      r.method_failures.push_back({utt.id + ":sweep:" + number(c), error_name(e.code()), e.what()});
    }
    r.sweep.push_back(std::move(s));
  }
  return r;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(c <= 0.0)) throw Error(ErrorCode::Validation, "c must be <= 0");
  if (!(min_gap > 0.0)) throw Error(ErrorCode::Validation, "min_gap must be > 0");
  if (!(overlap_threshold > 0.0 && overlap_threshold < 1.0)) {
    throw Error(ErrorCode::Validation, "overlap_threshold must lie in (0, 1)");
  }
  if (!(split_fraction >= 0.0 && split_fraction <= 1.0)) {
    throw Error(ErrorCode::Validation, "split_fraction must lie in [0, 1]");
  }
  if (!(segments.silence_split > 0.0 && segments.max_segment > 0.0 && segments.edge_distance >= 0.0)) {
    throw Error(ErrorCode::Validation, "segment thresholds must be positive");
  }
  if (jobs == 0) throw Error(ErrorCode::Validation, "jobs must be at least 1");
}

void apply_config(PipelineConfig& config, const Json& overrides) {
  if (!overrides.is_object()) throw Error(ErrorCode::Validation, "config must be an object");
  static const std::set<std::string> known{
      "c", "min_gap", "overlap_threshold", "classifier", "baseline_threshold", "silence_split",
      "max_segment", "edge_distance", "seed", "split_fraction", "matches_only", "jobs"};
  for (const auto& [key, value] : overrides.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::Validation, "unknown config field '" + key + "'");
  }
  override_field(overrides, "c", config.c);
  override_field(overrides, "min_gap", config.min_gap);
  override_field(overrides, "overlap_threshold", config.overlap_threshold);
  override_field(overrides, "baseline_threshold", config.baseline_threshold);
  override_field(overrides, "silence_split", config.segments.silence_split);
  override_field(overrides, "max_segment", config.segments.max_segment);
  override_field(overrides, "edge_distance", config.segments.edge_distance);
  override_field(overrides, "seed", config.seed);
  override_field(overrides, "split_fraction", config.split_fraction);
  override_field(overrides, "matches_only", config.matches_only);
  override_field(overrides, "jobs", config.jobs);
  if (overrides.contains("classifier")) {
    std::string kind;
    override_field(overrides, "classifier", kind);
    if (kind == "baseline") config.classifier = ClassifierKind::Baseline;
    else if (kind == "external") config.classifier = ClassifierKind::External;
    else throw Error(ErrorCode::Validation, "classifier must be 'baseline' or 'external'");
  }
}

Json config_to_json(const PipelineConfig& config) {
  return Json{{"c", config.c},
              {"min_gap", config.min_gap},
              {"overlap_threshold", config.overlap_threshold},
              {"classifier", config.classifier == ClassifierKind::Baseline ? "baseline" : "external"},
              {"baseline_threshold", config.baseline_threshold},
              {"silence_split", config.segments.silence_split},
              {"max_segment", config.segments.max_segment},
              {"edge_distance", config.segments.edge_distance},
              {"seed", config.seed},
              {"split_fraction", config.split_fraction},
              {"matches_only", config.matches_only}};
}

const char* method_name(AlignMethod m) {
  switch (m) {
    case AlignMethod::Standard: return "standard";
    case AlignMethod::Modified: return "modified";
    case AlignMethod::Attention: return "attention";
  }
  return "?";
}

AlignMethod parse_method(const std::string& name) {
  if (name == "standard") return AlignMethod::Standard;
  if (name == "modified") return AlignMethod::Modified;
  if (name == "attention") return AlignMethod::Attention;
  throw Error(ErrorCode::Validation, "unknown alignment method '" + name + "'");
}

std::vector<UtteranceEntry> read_corpus_manifest(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto base = path.parent_path();
  auto resolve = [&base](const std::string& p) -> std::optional<std::filesystem::path> {
    if (p == "-") return std::nullopt;
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::vector<UtteranceEntry> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> cols;
    for (std::string col; fields >> col;) cols.push_back(col);
    if (cols.size() < 3 || cols.size() > 5 || cols[1] == "-" || cols[2] == "-") {
      throw Error(ErrorCode::Validation, path.string() + ": line " + std::to_string(line_no) +
                                             ": expected `id emissions hyp [ref] [attention]`");
    }
    if (!seen.insert(cols[0]).second) {
      throw Error(ErrorCode::Validation, path.string() + ": duplicate utterance id '" + cols[0] + "'");
    }
    UtteranceEntry e{cols[0], *resolve(cols[1]), *resolve(cols[2]), {}, {}};
    if (cols.size() > 3) e.ref = resolve(cols[3]);
    if (cols.size() > 4) e.attention = resolve(cols[4]);
    out.push_back(std::move(e));
  }
  return out;
}

Utterance load_utterance(const UtteranceEntry& entry) {
  Utterance u{entry.id, read_emissions(entry.emissions), read_hyp_transcript(entry.hyp), {}, {}};
  if (entry.ref) u.ref = read_ref_transcript(*entry.ref);
  if (entry.attention) u.attention = read_attention(*entry.attention);
  return u;
}

std::vector<WordTiming> align_utterance(const Utterance& utt, AlignMethod method, double c) {
  switch (method) {
    case AlignMethod::Standard:
      return align_ctc(utt.emissions, utt.hyp, TrellisVariant::Standard, c);
    case AlignMethod::Modified:
      return align_ctc(utt.emissions, utt.hyp, TrellisVariant::Modified, c);
    case AlignMethod::Attention:
      if (!utt.attention) {
        throw Error(ErrorCode::Validation, "utterance '" + utt.id + "' has no attention matrix");
      }
      return align_dtw_attention(*utt.attention, &utt.hyp);
  }
  return {};
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr first_error;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard lock(mu);
          if (next >= count || first_error) return;
          i = next++;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

EvaluationResult evaluate(const std::vector<Utterance>& corpus, const PipelineConfig& config,
                          const EvaluateOptions& options) {
  config.validate();
  if (std::find(options.methods.begin(), options.methods.end(), options.gap_method) ==
      options.methods.end()) {
    throw Error(ErrorCode::Validation, "gap method must be one of the evaluated methods");
  }
  if (config.classifier == ClassifierKind::External && !options.predictions) {
    throw Error(ErrorCode::Validation, "external classifier needs a predictions file");
  }

  std::vector<UtteranceResult> results(corpus.size());
  parallel_for(corpus.size(), config.jobs,
               [&](std::size_t i) { results[i] = process_utterance(corpus[i], config, options); });

  // Gap ids and external decisions.
  std::set<std::string> gap_ids;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (results[i].failure) continue;
    for (std::size_t k = 0; k < results[i].gaps.size(); ++k) gap_ids.insert(gap_id(corpus[i].id, k));
  }
  std::size_t duplicate_predictions = 0;
  if (config.classifier == ClassifierKind::External) {
    const auto predictions = load_predictions(*options.predictions, gap_ids);
    duplicate_predictions = predictions.duplicates;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (results[i].failure) continue;
      for (std::size_t k = 0; k < results[i].gaps.size(); ++k) {
        const auto& d = predictions.by_id.at(gap_id(corpus[i].id, k));
        results[i].gaps[k].label = d.label;
        results[i].gaps[k].score = d.score;
      }
    }
  }

  // Aggregate in corpus order so reports are byte-identical across job counts.
  EditCounts edits;
  std::size_t ref_words = 0;
  CategorizationCounts categories;
  std::vector<ScoreAccumulator> all_words(options.methods.size()), around(options.methods.size());
  std::vector<std::vector<CoverageReport>> coverage(
      options.methods.size(), std::vector<CoverageReport>(options.coverage_min_gaps.size()));
  std::vector<CoverageReport> coverage_at_min_gap(options.methods.size());
  std::vector<SweepResult> sweep(options.sweep_c.size());
  DetectionReport detection;
  std::map<std::string, GapLabel> predicted, truth;
  Json gap_list = Json::array();
  Json failures = Json::array();
  std::size_t evaluated = 0;

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = results[i];
    for (const auto& f : r.method_failures) {
      failures.push_back({{"id", f.id}, {"error", f.error}, {"message", f.message}});
    }
    if (r.failure) {
      if (r.method_failures.empty() || r.method_failures.back().message != r.failure->message) {
        failures.push_back({{"id", r.failure->id}, {"error", r.failure->error}, {"message", r.failure->message}});
      }
      continue;
    }
    ++evaluated;
    edits.matches += r.edits.matches;
    edits.substitutions += r.edits.substitutions;
    edits.deletions += r.edits.deletions;
    edits.insertions += r.edits.insertions;
    ref_words += r.ref_words;
    add_categories(categories, r.categories);
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
      if (!r.methods[m].ok) continue;
      all_words[m].merge(r.methods[m].all_words);
      around[m].merge(r.methods[m].around);
      for (std::size_t g = 0; g < options.coverage_min_gaps.size(); ++g) {
        add_coverage(coverage[m][g], r.methods[m].coverage[g]);
      }
      add_coverage(coverage_at_min_gap[m], r.methods[m].coverage_at_min_gap);
    }
    for (std::size_t s = 0; s < r.sweep.size(); ++s) {
      if (!r.sweep[s].ok) continue;
      sweep[s].ok = true;
      sweep[s].all_words.merge(r.sweep[s].all_words);
      sweep[s].around.merge(r.sweep[s].around);
      add_coverage(sweep[s].coverage, r.sweep[s].coverage);
    }
    const auto d = detection_counts(r.gaps, *corpus[i].ref, r.pairs, config.overlap_threshold);
    add_detection(detection.transcribed, d.transcribed);
    add_detection(detection.untranscribed, d.untranscribed);
    for (std::size_t k = 0; k < r.gaps.size(); ++k) {
      const auto id = gap_id(corpus[i].id, k);
      predicted[id] = *r.gaps[k].label;
      truth[id] = r.reference_labels[k];
      Json g = gap_to_json(r.gaps[k]);
      Json record{{"id", id}, {"utterance", corpus[i].id}};
      record.update(g);
      record["reference_label"] = gap_label_name(r.reference_labels[k]);
      gap_list.push_back(std::move(record));
    }
  }

  EvaluationResult out;
  Json& rep = out.report;
  rep["config"] = config_to_json(config);
  rep["utterances"] = {{"total", corpus.size()}, {"evaluated", evaluated}, {"failures", failures}};
  rep["wer"] = edit_counts_to_json(edits, ref_words);
  rep["categorization"] = categorization_to_json(categories);

  Json scores = Json::array();
  Json cov = Json::array();
  std::ostringstream coverage_csv;
  coverage_csv << "method,min_gap,untranscribed_covered,untranscribed_uncovered,"
                  "transcribed_covered,transcribed_uncovered\n";
  for (std::size_t m = 0; m < options.methods.size(); ++m) {
    const char* name = method_name(options.methods[m]);
    scores.push_back({{"method", name},
                      {"all_words", maybe_summary(all_words[m], ScoreScope::AllWords)},
                      {"around_untranscribed", maybe_summary(around[m], ScoreScope::AroundUntranscribed)}});
    Json row{{"method", name}, {"min_gap", config.min_gap}};
    row.update(coverage_to_json(coverage_at_min_gap[m]));
    cov.push_back(std::move(row));
    for (std::size_t g = 0; g < options.coverage_min_gaps.size(); ++g) {
      const auto& c = coverage[m][g];
      coverage_csv << name << ',' << number(options.coverage_min_gaps[g]) << ','
                   << c.untranscribed_covered << ',' << c.untranscribed_uncovered << ','
                   << c.transcribed_covered << ',' << c.transcribed_uncovered << '\n';
    }
  }
  rep["alignment_scores"] = std::move(scores);
  rep["coverage"] = std::move(cov);

  Json classifier{{"kind", config.classifier == ClassifierKind::Baseline ? "baseline" : "external"},
                  {"gap_method", method_name(options.gap_method)}};
  if (config.classifier == ClassifierKind::External) classifier["duplicate_predictions"] = duplicate_predictions;
  classifier.update(classifier_metrics_to_json(eval_classifier(predicted, truth)));
  rep["classifier"] = std::move(classifier);
  rep["detection"] = detection_to_json(detection);
  rep["gaps"] = std::move(gap_list);

  if (!options.sweep_c.empty()) {
    Json rows = Json::array();
    std::ostringstream sweep_csv;
    sweep_csv << "c,all_words_combined,around_untranscribed_combined,untranscribed_covered,"
                 "transcribed_covered\n";
    for (std::size_t s = 0; s < options.sweep_c.size(); ++s) {
      const auto& r = sweep[s];
      const Json all = maybe_summary(r.all_words, ScoreScope::AllWords);
      const Json near = maybe_summary(r.around, ScoreScope::AroundUntranscribed);
      Json row{{"c", options.sweep_c[s]}, {"all_words", all}, {"around_untranscribed", near}};
      row.update(coverage_to_json(r.coverage));
      rows.push_back(std::move(row));
      auto combined = [](const Json& j) { return j.is_null() ? std::string() : number(j.at("combined").get<double>()); };
      sweep_csv << number(options.sweep_c[s]) << ',' << combined(all) << ',' << combined(near) << ','
                << r.coverage.untranscribed_covered << ',' << r.coverage.transcribed_covered << '\n';
    }
    rep["c_sweep"] = std::move(rows);
    out.sweep_csv = sweep_csv.str();
  }
  out.coverage_csv = coverage_csv.str();
  return out;
}

}  // namespace gapalign
