// gapalign: word timestamps and disfluency gap detection for ASR transcripts.
//
//   gapalign align    --emissions utt.ctcem --hyp utt.hyp --variant modified --out utt.align.json
//   gapalign gaps     --alignment utt.align.json --ref utt.ref --out utt.gaps.json
//   gapalign score    --ref utt.ref --hyp utt.hyp --alignment utt.align.json
//   gapalign wer      --ref utt.ref --hyp utt.hyp
//   gapalign segment  --ref call.ref --duration 312.4
//   gapalign classify --gaps utt.gaps.json --emissions utt.ctcem
//   gapalign dataset  --manifest corpus.txt --train train.txt --test test.txt
//   gapalign evaluate --manifest corpus.txt --out report.json --csv-dir plots/

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <filesystem>
#include <map>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gapalign/error.hpp"
#include "gapalign/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gapalign;

namespace {

// Flags shared by every command; each mirrors a PipelineConfig field.
struct ConfigFlags {
  std::string config_file;
  PipelineConfig values;
  std::string classifier = "baseline";
  std::vector<CLI::Option*> options;
  CLI::Option* classifier_opt = nullptr;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "JSON file with PipelineConfig overrides");
    options = {
        app.add_option("--c", values.c, "Separator stay clamp (log-probability)"),
        app.add_option("--min-gap", values.min_gap, "Minimum gap length in seconds"),
        app.add_option("--overlap-threshold", values.overlap_threshold, "Word/gap overlap fraction"),
        app.add_option("--baseline-threshold", values.baseline_threshold, "Baseline speech score threshold"),
        app.add_option("--silence-split", values.segments.silence_split, "Segmenter stage-1 silence (s)"),
        app.add_option("--max-segment", values.segments.max_segment, "Segmenter maximum length (s)"),
        app.add_option("--edge-distance", values.segments.edge_distance, "Segmenter edge distance (s)"),
        app.add_option("--seed", values.seed, "Shuffle seed"),
        app.add_option("--split-fraction", values.split_fraction, "Training fraction"),
        app.add_flag("--matches-only", values.matches_only, "Score matched words only"),
        app.add_option("--jobs", values.jobs, "Worker threads"),
    };
    classifier_opt = app.add_option("--classifier", classifier, "baseline | external")
                         ->check(CLI::IsMember({"baseline", "external"}));
  }

  // Config file first, then flags given on the command line.
  PipelineConfig resolve() const {
    PipelineConfig config;
    if (!config_file.empty()) {
      apply_config(config, read_report(config_file));
    }
    const PipelineConfig& v = values;
    const std::vector<std::function<void()>> setters{
        [&] { config.c = v.c; },
        [&] { config.min_gap = v.min_gap; },
        [&] { config.overlap_threshold = v.overlap_threshold; },
        [&] { config.baseline_threshold = v.baseline_threshold; },
        [&] { config.segments.silence_split = v.segments.silence_split; },
        [&] { config.segments.max_segment = v.segments.max_segment; },
        [&] { config.segments.edge_distance = v.segments.edge_distance; },
        [&] { config.seed = v.seed; },
        [&] { config.split_fraction = v.split_fraction; },
        [&] { config.matches_only = v.matches_only; },
        [&] { config.jobs = v.jobs; },
    };
    for (std::size_t i = 0; i < options.size(); ++i) {
      if (options[i]->count() > 0) setters[i]();
    }
    if (classifier_opt->count() > 0) {
      config.classifier = classifier == "external" ? ClassifierKind::External : ClassifierKind::Baseline;
    }
    config.validate();
    return config;
  }
};

void emit(const Json& doc, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_report(doc, out);
  }
}

std::vector<std::string> ref_texts(const std::vector<RefWord>& ref) {
  std::vector<std::string> out;
  for (const auto& w : ref) out.push_back(w.text);
  return out;
}

Json pairs_to_json(const std::vector<WordAlignmentPair>& pairs) {
  Json list = Json::array();
  for (const auto& p : pairs) {
    list.push_back({{"op", edit_op_name(p.op)},
                    {"ref_index", p.ref_index ? Json(*p.ref_index) : Json(nullptr)},
                    {"hyp_index", p.hyp_index ? Json(*p.hyp_index) : Json(nullptr)}});
  }
  return list;
}

Json align_one(const Utterance& utt, AlignMethod method, double c) {
  const auto timings = align_utterance(utt, method, c);
  const double duration = utt.attention && method == AlignMethod::Attention
                              ? static_cast<double>(utt.attention->num_frames) * utt.attention->frame_duration
                              : utt.emissions.duration();
  Json doc = alignment_to_json(timings, method_name(method), c, duration);
  if (method != AlignMethod::Attention) {
    doc["dropped_chars"] = tokenize(utt.hyp, utt.emissions).dropped_chars;
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word timestamps and untranscribed-speech gap detection for ASR transcripts"};
  app.require_subcommand(1);
  // Each subcommand owns its flag set; deque keeps the bound addresses stable.
  std::deque<ConfigFlags> flag_sets;
  std::map<const CLI::App*, const ConfigFlags*> flags_of;
  auto attach_flags = [&](CLI::App* cmd) {
    auto& f = flag_sets.emplace_back();
    f.attach(*cmd);
    flags_of[cmd] = &f;
  };

  // align
  auto* align = app.add_subcommand("align", "Align a hypothesis transcript to CTC emissions");
  std::string emissions, hyp, attention, out, variant = "modified", manifest, out_dir;
  align->add_option("--emissions", emissions, "CTCEM1 emission file");
  align->add_option("--hyp", hyp, "Hypothesis transcript");
  align->add_option("--attention", attention, "ATTN1 attention file (variant attention)");
  align->add_option("--variant", variant, "standard | modified | attention")
      ->check(CLI::IsMember({"standard", "modified", "attention"}));
  align->add_option("--out", out, "Output alignment file (default stdout)");
  align->add_option("--manifest", manifest, "Corpus manifest for batch mode");
  align->add_option("--out-dir", out_dir, "Batch output directory");
  attach_flags(align);

  // gaps
  auto* gaps = app.add_subcommand("gaps", "Extract alignment gaps");
  std::string alignment, ref;
  double duration = -1.0;
  gaps->add_option("--alignment", alignment, "Alignment file")->required();
  gaps->add_option("--duration", duration, "Audio duration in seconds");
  gaps->add_option("--emissions", emissions, "Emission file (duration source)");
  gaps->add_option("--ref", ref, "Reference transcript; labels gaps speech/empty");
  gaps->add_option("--out", out, "Output gap list");
  attach_flags(gaps);

  // score
  auto* score = app.add_subcommand("score", "Alignment quality against reference timings");
  score->add_option("--ref", ref, "Reference transcript")->required();
  score->add_option("--hyp", hyp, "Hypothesis transcript")->required();
  score->add_option("--alignment", alignment, "Alignment file")->required();
  score->add_option("--out", out, "Output report");
  attach_flags(score);

  // wer
  auto* wer_cmd = app.add_subcommand("wer", "WER and fluent/disfluent categorization");
  wer_cmd->add_option("--ref", ref, "Reference transcript")->required();
  wer_cmd->add_option("--hyp", hyp, "Hypothesis transcript")->required();
  wer_cmd->add_option("--out", out, "Output report");
  attach_flags(wer_cmd);

  // segment
  auto* segment = app.add_subcommand("segment", "Plan 10-30 s segments for a long recording");
  segment->add_option("--ref", ref, "Reference transcript")->required();
  segment->add_option("--duration", duration, "Recording duration in seconds");
  segment->add_option("--out", out, "Output segment manifest");
  attach_flags(segment);

  // classify
  auto* classify = app.add_subcommand("classify", "Label gaps as speech or empty");
  std::string gaps_file, predictions, utterance_id = "utt";
  classify->add_option("--gaps", gaps_file, "Gap list")->required();
  classify->add_option("--emissions", emissions, "Emission file (baseline classifier)");
  classify->add_option("--predictions", predictions, "External predictions `gap_id label score`");
  classify->add_option("--utterance-id", utterance_id, "Utterance id used in gap ids");
  classify->add_option("--out", out, "Output gap list");
  attach_flags(classify);

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Build the gap classification dataset");
  std::string train_out, test_out;
  dataset->add_option("--manifest", manifest, "Corpus manifest")->required();
  dataset->add_option("--train", train_out, "Training manifest output")->required();
  dataset->add_option("--test", test_out, "Test manifest output")->required();
  dataset->add_option("--out", out, "Dataset statistics report");
  attach_flags(dataset);

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the full detection pipeline over a corpus");
  std::vector<std::string> methods{"standard", "modified", "attention"};
  std::string gap_method = "modified", csv_dir;
  std::vector<double> sweep_c;
  bool sweep = false;
  evaluate_cmd->add_option("--manifest", manifest, "Corpus manifest")->required();
  evaluate_cmd->add_option("--methods", methods, "Alignment methods to compare")->delimiter(',');
  evaluate_cmd->add_option("--gap-method", gap_method, "Method whose gaps are classified");
  evaluate_cmd->add_option("--predictions", predictions, "External predictions file");
  evaluate_cmd->add_option("--sweep-c", sweep_c, "Stay clamps to sweep")->delimiter(',');
  evaluate_cmd->add_flag("--sweep", sweep, "Sweep c over -5,-4,-3,-2,-1,-0.5,-0.1,-0.01");
  evaluate_cmd->add_option("--csv-dir", csv_dir, "Directory for plot-ready CSV series");
  evaluate_cmd->add_option("--out", out, "Output report");
  attach_flags(evaluate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    const PipelineConfig config = flags_of.at(app.get_subcommands().front())->resolve();

    if (align->parsed()) {
      const AlignMethod method = parse_method(variant);
      if (!manifest.empty()) {
        if (out_dir.empty()) throw Error(ErrorCode::Validation, "--manifest needs --out-dir");
        fs::create_directories(out_dir);
        const auto entries = read_corpus_manifest(manifest);
        std::vector<Json> records(entries.size());
        parallel_for(entries.size(), config.jobs, [&](std::size_t i) {
          const auto& e = entries[i];
          try {
            UtteranceEntry entry = e;
            if (method != AlignMethod::Attention) entry.attention.reset();
            const Utterance utt = load_utterance(entry);
            const auto path = fs::path(out_dir) / (e.id + ".alignment.json");
            write_report(align_one(utt, method, config.c), path);
            records[i] = {{"id", e.id}, {"status", "ok"}, {"output", path.string()}};
          } catch (const Error& err) {
            records[i] = {{"id", e.id}, {"status", "failed"}, {"error", error_name(err.code())},
                          {"message", err.what()}};
          }
        });
        Json summary{{"method", variant}, {"utterances", records}};
        write_report(summary, fs::path(out_dir) / "batch_report.json");
        return 0;
      }
      if (emissions.empty() || hyp.empty()) {
        throw Error(ErrorCode::Validation, "align needs --emissions and --hyp (or --manifest)");
      }
      UtteranceEntry entry{"utt", emissions, hyp, {}, {}};
      if (method == AlignMethod::Attention) {
        if (attention.empty()) throw Error(ErrorCode::Validation, "variant attention needs --attention");
        entry.attention = fs::path(attention);
      }
      emit(align_one(load_utterance(entry), method, config.c), out);
      return 0;
    }

    if (gaps->parsed()) {
      double audio_duration = 0.0;
      const auto timings = alignment_from_json(read_report(alignment), &audio_duration);
      if (!emissions.empty()) audio_duration = read_emissions(emissions).duration();
      if (duration >= 0.0) audio_duration = duration;
      auto found = extract_gaps(timings, audio_duration, config.min_gap);
      if (!ref.empty()) {
        const auto ref_words = read_ref_transcript(ref);
        for (auto& g : found) g.label = label_gap(g, ref_words, config.overlap_threshold);
      }
      emit(Json{{"min_gap", config.min_gap}, {"audio_duration", render_seconds(audio_duration)},
                {"gaps", gaps_to_json(found)}},
           out);
      return 0;
    }

    if (score->parsed()) {
      const auto ref_words = read_ref_transcript(ref);
      const auto hyp_words = read_hyp_transcript(hyp);
      const auto timings = alignment_from_json(read_report(alignment));
      const auto pairs = levenshtein_align(ref_texts(ref_words), hyp_words.words);
      const auto all = scored_pairs(pairs, ref_words, timings, ScoreScope::AllWords, config.matches_only);
      const auto near = scored_pairs(pairs, ref_words, timings, ScoreScope::AroundUntranscribed,
                                     config.matches_only);
      Json doc{{"all_words", summary_to_json(summarize(all, ScoreScope::AllWords))}};
      doc["around_untranscribed"] =
          near.empty() ? Json(nullptr) : summary_to_json(summarize(near, ScoreScope::AroundUntranscribed));
      emit(doc, out);
      return 0;
    }

    if (wer_cmd->parsed()) {
      const auto ref_words = read_ref_transcript(ref);
      const auto hyp_words = read_hyp_transcript(hyp);
      const auto texts = ref_texts(ref_words);
      if (texts.empty()) throw Error(ErrorCode::EmptyReference, "reference transcript is empty");
      const auto pairs = levenshtein_align(texts, hyp_words.words);
      std::vector<bool> flags_v;
      for (const auto& w : ref_words) flags_v.push_back(w.disfluent);
      emit(Json{{"wer", edit_counts_to_json(count_edits(pairs), texts.size())},
                {"categorization", categorization_to_json(categorize_words(pairs, flags_v))},
                {"alignment", pairs_to_json(pairs)}},
           out);
      return 0;
    }

    if (segment->parsed()) {
      const auto ref_words = read_ref_transcript(ref);
      const double total = duration >= 0.0 ? duration : (ref_words.empty() ? 0.0 : ref_words.back().end);
      emit(segments_to_json(plan_segments(ref_words, total, config.segments)), out);
      return 0;
    }

    if (classify->parsed()) {
      auto found = gaps_from_json(read_report(gaps_file));
      if (config.classifier == ClassifierKind::External || !predictions.empty()) {
        if (predictions.empty()) throw Error(ErrorCode::Validation, "external classifier needs --predictions");
        std::set<std::string> ids;
        for (std::size_t k = 0; k < found.size(); ++k) ids.insert(gap_id(utterance_id, k));
        const auto loaded = load_predictions(predictions, ids);
        for (std::size_t k = 0; k < found.size(); ++k) {
          const auto& d = loaded.by_id.at(gap_id(utterance_id, k));
          found[k].label = d.label;
          found[k].score = d.score;
        }
        emit(Json{{"classifier", "external"}, {"duplicate_predictions", loaded.duplicates},
                  {"gaps", gaps_to_json(found)}},
             out);
      } else {
        if (emissions.empty()) throw Error(ErrorCode::Validation, "baseline classifier needs --emissions");
        const auto m = read_emissions(emissions);
        for (auto& g : found) {
          const auto d = baseline_classify(g, m, config.baseline_threshold);
          g.label = d.label;
          g.score = d.score;
        }
        emit(Json{{"classifier", "baseline"}, {"threshold", config.baseline_threshold},
                  {"gaps", gaps_to_json(found)}},
             out);
      }
      return 0;
    }

    if (dataset->parsed()) {
      const auto entries = read_corpus_manifest(manifest);
      std::vector<AlignedUtterance> corpus;
      Json failures = Json::array();
      for (const auto& e : entries) {
        try {
          const Utterance utt = load_utterance(UtteranceEntry{e.id, e.emissions, e.hyp, e.ref, {}});
          if (!utt.ref) throw Error(ErrorCode::Validation, "no reference transcript");
          corpus.push_back({utt.id, align_ctc(utt.emissions, utt.hyp, TrellisVariant::Modified, config.c),
                            *utt.ref, utt.emissions.duration()});
        } catch (const Error& err) {
          failures.push_back({{"id", e.id}, {"error", error_name(err.code())}, {"message", err.what()}});
        }
      }
      const auto ds = build_gap_dataset(corpus, config.min_gap, config.split_fraction, config.seed,
                                        config.overlap_threshold);
      write_text_file(train_out, format_manifest(ds.train));
      write_text_file(test_out, format_manifest(ds.test));
      auto stats = [](const std::vector<GapDatasetRow>& rows) {
        std::size_t speech = 0;
        for (const auto& r : rows) speech += r.label == GapLabel::Speech;
        return Json{{"total", rows.size()}, {"speech", speech}, {"empty", rows.size() - speech}};
      };
      emit(Json{{"train", stats(ds.train)}, {"test", stats(ds.test)}, {"failures", failures}}, out);
      return 0;
    }

    if (evaluate_cmd->parsed()) {
      EvaluateOptions options;
      options.methods.clear();
      for (const auto& m : methods) options.methods.push_back(parse_method(m));
      options.gap_method = parse_method(gap_method);
      if (!predictions.empty()) options.predictions = fs::path(predictions);
      options.sweep_c = sweep_c;
      if (sweep && sweep_c.empty()) options.sweep_c = {-5, -4, -3, -2, -1, -0.5, -0.1, -0.01};

      const bool want_attention = std::find(options.methods.begin(), options.methods.end(),
                                            AlignMethod::Attention) != options.methods.end();
      std::vector<Utterance> corpus;
      Json load_failures = Json::array();
      for (auto e : read_corpus_manifest(manifest)) {
        if (!want_attention) e.attention.reset();
        try {
          corpus.push_back(load_utterance(e));
        } catch (const Error& err) {
          load_failures.push_back({{"id", e.id}, {"error", error_name(err.code())}, {"message", err.what()}});
        }
      }
      auto result = evaluate(corpus, config, options);
      auto& failures = result.report["utterances"]["failures"];
      for (auto& f : load_failures) failures.push_back(f);
      result.report["utterances"]["total"] = corpus.size() + load_failures.size();
      if (!csv_dir.empty()) {
        fs::create_directories(csv_dir);
        write_text_file(fs::path(csv_dir) / "coverage_by_min_gap.csv", result.coverage_csv);
        if (!result.sweep_csv.empty()) write_text_file(fs::path(csv_dir) / "c_sweep.csv", result.sweep_csv);
      }
      emit(result.report, out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << Json{{"error", error_name(e.code())}, {"message", e.what()}}.dump() << '\n';
    return exit_status(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << Json{{"error", "io"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
