#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gapalign/classifier.hpp"
#include "gapalign/ctc_align.hpp"
#include "gapalign/data_io.hpp"
#include "gapalign/error.hpp"
#include "gapalign/gaps.hpp"
#include "gapalign/metrics.hpp"
#include "gapalign/pipeline.hpp"
#include "gapalign/report.hpp"
#include "gapalign/segmenter.hpp"
#include "gapalign/text_align.hpp"

namespace py = pybind11;
using namespace gapalign;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

std::vector<float> flatten(const FloatArray& a, std::size_t& rows, std::size_t& cols) {
  if (a.ndim() != 2) throw Error(ErrorCode::Validation, "expected a 2-d array");
  rows = static_cast<std::size_t>(a.shape(0));
  cols = static_cast<std::size_t>(a.shape(1));
  return std::vector<float>(a.data(), a.data() + rows * cols);
}

py::array_t<float> to_array(const std::vector<float>& values, std::size_t rows, std::size_t cols) {
  py::array_t<float> out({rows, cols});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

EmissionMatrix make_emissions(const FloatArray& logprobs, std::vector<std::string> vocab,
                              std::size_t blank, std::size_t separator, double frame_duration) {
  std::size_t t = 0, v = 0;
  auto values = flatten(logprobs, t, v);
  if (v != vocab.size()) throw Error(ErrorCode::SizeMismatch, "array width does not match the vocabulary");
  return EmissionMatrix(std::move(vocab), blank, separator, frame_duration, std::move(values));
}

AttentionMatrix make_attention(const FloatArray& weights, double frame_duration,
                               std::vector<long> token_to_word) {
  AttentionMatrix a;
  a.weights = flatten(weights, a.num_tokens, a.num_frames);
  a.frame_duration = frame_duration;
  if (token_to_word.empty()) {
    // one word per token
    for (std::size_t i = 0; i < a.num_tokens; ++i) token_to_word.push_back(static_cast<long>(i));
  }
  a.token_to_word = std::move(token_to_word);
  a.validate();
  return a;
}

py::object json_to_py(const Json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

Json py_to_json(const py::object& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gap-aware forced alignment";

  static py::exception<Error> error_type(m, "GapalignError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = error_name(e.code());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.attr("DEFAULT_STAY_CLAMP") = kDefaultStayClamp;
  m.attr("DEFAULT_MIN_GAP") = kDefaultMinGap;

  py::class_<EmissionMatrix>(m, "EmissionMatrix")
      .def(py::init(&make_emissions), py::arg("logprobs"), py::arg("vocab"), py::arg("blank_index") = 0,
           py::arg("separator_index") = 1, py::arg("frame_duration") = 0.02)
      .def_property_readonly("num_frames", &EmissionMatrix::num_frames)
      .def_property_readonly("vocab", &EmissionMatrix::vocab)
      .def_property_readonly("blank_index", &EmissionMatrix::blank_index)
      .def_property_readonly("separator_index", &EmissionMatrix::separator_index)
      .def_property_readonly("frame_duration", &EmissionMatrix::frame_duration)
      .def_property_readonly("duration", &EmissionMatrix::duration)
      .def_property_readonly("logprobs", [](const EmissionMatrix& e) {
        return to_array(e.values(), e.num_frames(), e.vocab_size());
      });

  py::class_<AttentionMatrix>(m, "AttentionMatrix")
      .def(py::init(&make_attention), py::arg("weights"), py::arg("frame_duration") = 0.02,
           py::arg("token_to_word") = std::vector<long>{})
      .def_readonly("num_tokens", &AttentionMatrix::num_tokens)
      .def_readonly("num_frames", &AttentionMatrix::num_frames)
      .def_readonly("frame_duration", &AttentionMatrix::frame_duration)
      .def_readonly("token_to_word", &AttentionMatrix::token_to_word)
      .def_property_readonly("weights", [](const AttentionMatrix& a) {
        return to_array(a.weights, a.num_tokens, a.num_frames);
      });

  py::class_<RefWord>(m, "RefWord")
      .def(py::init<std::string, double, double, bool>(), py::arg("text"), py::arg("start"), py::arg("end"),
           py::arg("disfluent") = false)
      .def_readwrite("text", &RefWord::text)
      .def_readwrite("start", &RefWord::start)
      .def_readwrite("end", &RefWord::end)
      .def_readwrite("disfluent", &RefWord::disfluent)
      .def("__repr__", [](const RefWord& w) {
        return "RefWord(" + w.text + ", " + std::to_string(w.start) + ", " + std::to_string(w.end) +
               (w.disfluent ? ", disfluent)" : ")");
      });

  py::class_<WordTiming>(m, "WordTiming")
      .def_readonly("word_index", &WordTiming::word_index)
      .def_readonly("text", &WordTiming::text)
      .def_readonly("start", &WordTiming::start)
      .def_readonly("end", &WordTiming::end)
      .def("__repr__", [](const WordTiming& w) {
        return "WordTiming(" + w.text + ", " + std::to_string(w.start) + ", " + std::to_string(w.end) + ")";
      });

  py::class_<Gap>(m, "Gap")
      .def(py::init([](double start, double end) { return Gap{start, end, {}, {}}; }), py::arg("start"),
           py::arg("end"))
      .def_readonly("start", &Gap::start)
      .def_readonly("end", &Gap::end)
      .def_property_readonly("label", [](const Gap& g) -> std::optional<std::string> {
        if (!g.label) return std::nullopt;
        return gap_label_name(*g.label);
      })
      .def_readonly("score", &Gap::score);

  py::class_<Segment>(m, "Segment")
      .def_readonly("start", &Segment::start)
      .def_readonly("end", &Segment::end)
      .def_readonly("first_word", &Segment::first_word)
      .def_readonly("last_word", &Segment::last_word);

  py::class_<EditCounts>(m, "EditCounts")
      .def_readonly("matches", &EditCounts::matches)
      .def_readonly("substitutions", &EditCounts::substitutions)
      .def_readonly("deletions", &EditCounts::deletions)
      .def_readonly("insertions", &EditCounts::insertions);

  py::class_<ClassifierMetrics>(m, "ClassifierMetrics")
      .def_readonly("tp", &ClassifierMetrics::tp)
      .def_readonly("fp", &ClassifierMetrics::fp)
      .def_readonly("fn", &ClassifierMetrics::fn)
      .def_readonly("tn", &ClassifierMetrics::tn)
      .def_readonly("accuracy", &ClassifierMetrics::accuracy)
      .def_readonly("precision", &ClassifierMetrics::precision)
      .def_readonly("recall", &ClassifierMetrics::recall)
      .def_readonly("f1", &ClassifierMetrics::f1);

  m.def("read_emissions", &read_emissions, py::arg("path"));
  m.def("write_emissions", &write_emissions, py::arg("emissions"), py::arg("path"));
  m.def("read_attention", &read_attention, py::arg("path"));
  m.def("write_attention", &write_attention, py::arg("attention"), py::arg("path"));
  m.def("read_ref_transcript", &read_ref_transcript, py::arg("path"));
  m.def("read_hyp_transcript", [](const std::filesystem::path& p) { return read_hyp_transcript(p).words; },
        py::arg("path"));

  m.def(
      "align_ctc",
      [](const EmissionMatrix& e, const std::vector<std::string>& words, const std::string& variant, double c) {
        return align_ctc(e, HypTranscript{words}, parse_variant(variant), c);
      },
      py::arg("emissions"), py::arg("words"), py::arg("variant") = "modified", py::arg("c") = kDefaultStayClamp);
  m.def(
      "align_attention",
      [](const AttentionMatrix& a, std::optional<std::vector<std::string>> words) {
        if (!words) return align_dtw_attention(a);
        const HypTranscript hyp{*words};
        return align_dtw_attention(a, &hyp);
      },
      py::arg("attention"), py::arg("words") = std::nullopt);

  m.def(
      "align_words",
      [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
        std::vector<std::tuple<std::string, std::optional<std::size_t>, std::optional<std::size_t>>> out;
        for (const auto& p : levenshtein_align(ref, hyp)) out.emplace_back(edit_op_name(p.op), p.ref_index, p.hyp_index);
        return out;
      },
      py::arg("ref"), py::arg("hyp"));
  m.def(
      "edit_counts",
      [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
        return count_edits(levenshtein_align(ref, hyp));
      },
      py::arg("ref"), py::arg("hyp"));
  m.def(
      "wer", [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) { return wer(ref, hyp); },
      py::arg("ref"), py::arg("hyp"));

  m.def(
      "extract_gaps",
      [](const std::vector<WordTiming>& timings, double duration, double min_gap) {
        return extract_gaps(timings, duration, min_gap);
      },
      py::arg("timings"), py::arg("audio_duration"), py::arg("min_gap") = kDefaultMinGap);
  m.def(
      "label_gap",
      [](const Gap& g, const std::vector<RefWord>& ref, double threshold) {
        return std::string(gap_label_name(label_gap(g, ref, threshold)));
      },
      py::arg("gap"), py::arg("ref_words"), py::arg("overlap_threshold") = kDefaultOverlapThreshold);

  auto timing = [](double s, double e) {
    WordTiming w;
    w.start = s;
    w.end = e;
    return w;
  };
  m.def(
      "position_score", [timing](std::pair<double, double> r, std::pair<double, double> a) {
        return position_score(timing(r.first, r.second), timing(a.first, a.second));
      },
      py::arg("reference"), py::arg("aligned"));
  m.def(
      "length_score", [timing](std::pair<double, double> r, std::pair<double, double> a) {
        return length_score(timing(r.first, r.second), timing(a.first, a.second));
      },
      py::arg("reference"), py::arg("aligned"));
  m.def(
      "combined_score", [timing](std::pair<double, double> r, std::pair<double, double> a) {
        return combined_score(timing(r.first, r.second), timing(a.first, a.second));
      },
      py::arg("reference"), py::arg("aligned"));

  m.def(
      "plan_segments",
      [](const std::vector<RefWord>& words, double total, double silence_split, double max_segment,
         double edge_distance) {
        return plan_segments(words, total, SegmenterConfig{silence_split, max_segment, edge_distance});
      },
      py::arg("words"), py::arg("total_duration"), py::arg("silence_split") = 5.0, py::arg("max_segment") = 30.0,
      py::arg("edge_distance") = 10.0);

  m.def(
      "baseline_classify",
      [](const Gap& g, const EmissionMatrix& e, double threshold) {
        const auto d = baseline_classify(g, e, threshold);
        return std::make_pair(std::string(gap_label_name(d.label)), d.score);
      },
      py::arg("gap"), py::arg("emissions"), py::arg("threshold") = kDefaultBaselineThreshold);
  m.def("metrics_from_confusion", &metrics_from_confusion, py::arg("tp"), py::arg("fp"), py::arg("fn"),
        py::arg("tn"));

  m.def(
      "evaluate_manifest",
      [](const std::filesystem::path& manifest, const py::object& config, const std::vector<std::string>& methods,
         const std::string& gap_method, const std::vector<double>& sweep_c) {
        PipelineConfig cfg;
        if (!config.is_none()) apply_config(cfg, py_to_json(config));
        cfg.validate();
        EvaluateOptions options;
        options.methods.clear();
        for (const auto& name : methods) options.methods.push_back(parse_method(name));
        options.gap_method = parse_method(gap_method);
        options.sweep_c = sweep_c;
        std::vector<Utterance> corpus;
        {
          py::gil_scoped_release release;
          for (const auto& entry : read_corpus_manifest(manifest)) corpus.push_back(load_utterance(entry));
        }
        EvaluationResult result;
        {
          py::gil_scoped_release release;
          result = evaluate(corpus, cfg, options);
        }
        return json_to_py(result.report);
      },
      py::arg("manifest"), py::arg("config") = py::none(),
      py::arg("methods") = std::vector<std::string>{"standard", "modified", "attention"},
      py::arg("gap_method") = "modified", py::arg("sweep_c") = std::vector<double>{});
}
