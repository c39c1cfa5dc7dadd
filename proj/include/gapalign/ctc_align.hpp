#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gapalign/data_io.hpp"

namespace gapalign {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Default clamp for the separator stay probability (log domain).
inline constexpr double kDefaultStayClamp = -0.01;

// Transcript rendered as vocabulary indices. tokens[0] is always the
// separator and exactly one separator sits between consecutive words.
struct TokenSequence {
  struct WordSpan {
    std::size_t first_token;
    std::size_t last_token;
    std::size_t word_index;  // index into the hypothesis word list

    friend bool operator==(const WordSpan&, const WordSpan&) = default;
  };

  std::vector<std::size_t> tokens;
  std::vector<bool> is_separator;
  std::vector<WordSpan> word_spans;
  std::vector<std::string> words;  // hypothesis words, indexed by word_index
  std::size_t dropped_chars = 0;   // characters absent from the vocabulary

  std::size_t size() const { return tokens.size(); }
};

// Maps each character of each word onto the emission vocabulary. Characters
// that are not in the vocabulary (or map to blank/separator) are dropped and
// counted; words left empty contribute no tokens.
TokenSequence tokenize(const HypTranscript& hyp, const EmissionMatrix& m);

enum class TrellisVariant { Standard, Modified };

const char* variant_name(TrellisVariant v);
TrellisVariant parse_variant(const std::string& name);

class Trellis {
 public:
  Trellis(std::size_t num_tokens, std::size_t num_frames, TrellisVariant variant, double clamp)
      : num_tokens_(num_tokens),
        num_frames_(num_frames),
        variant_(variant),
        clamp_(clamp),
        values_(num_tokens * num_frames, kNegInf) {}

  std::size_t num_tokens() const { return num_tokens_; }
  std::size_t num_frames() const { return num_frames_; }
  TrellisVariant variant() const { return variant_; }
  double clamp() const { return clamp_; }

  double at(std::size_t token, std::size_t frame) const { return values_[token * num_frames_ + frame]; }
  double& at(std::size_t token, std::size_t frame) { return values_[token * num_frames_ + frame]; }
  double corner() const { return at(num_tokens_ - 1, num_frames_ - 1); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t num_tokens_;
  std::size_t num_frames_;
  TrellisVariant variant_;
  double clamp_;
  std::vector<double> values_;
};

// Log-probability of staying on token `token_pos` at `frame`: the blank
// emission, clamped from below by `clamp` for separator tokens in the
// modified variant.
double stay_logprob(const EmissionMatrix& m, const TokenSequence& s, std::size_t token_pos,
                    std::size_t frame, TrellisVariant variant, double clamp);

// Log-probability of switching into token `token_pos` at `frame`.
inline double switch_logprob(const EmissionMatrix& m, const TokenSequence& s,
                             std::size_t token_pos, std::size_t frame) {
  return m.logprob(frame, s.tokens[token_pos]);
}

Trellis build_trellis_standard(const EmissionMatrix& m, const TokenSequence& s);

// Same recurrence, but separator rows stay with max(logprob[t, blank], clamp).
// `clamp` is a log-probability and must be <= 0.
Trellis build_trellis_modified(const EmissionMatrix& m, const TokenSequence& s, double clamp);

Trellis build_trellis(const EmissionMatrix& m, const TokenSequence& s, TrellisVariant variant,
                      double clamp);

struct FramePath {
  std::vector<std::size_t> token_at_frame;  // length T
  std::vector<std::size_t> enter_frame;     // length U
  std::vector<std::size_t> exit_frame;      // length U, one past the last frame

  friend bool operator==(const FramePath&, const FramePath&) = default;
};

// Builds enter/exit frames from a per-frame token assignment.
FramePath make_frame_path(std::vector<std::size_t> token_at_frame, std::size_t num_tokens);

// Accumulated log score of a path under the given transition system, summed
// frame by frame in the same order the trellis is filled.
double path_score(const FramePath& p, const EmissionMatrix& m, const TokenSequence& s,
                  TrellisVariant variant, double clamp);

// Traces the best path back from the last token at the last frame. When stay
// and switch give the same score the path stays.
FramePath backtrack(const Trellis& tr, const EmissionMatrix& m, const TokenSequence& s);

struct WordTiming {
  std::size_t word_index = 0;
  std::string text;
  double start = 0.0;
  double end = 0.0;

  double position() const { return (start + end) / 2.0; }
  double half_length() const { return (end - start) / 2.0; }

  friend bool operator==(const WordTiming&, const WordTiming&) = default;
};

std::vector<WordTiming> path_to_word_timings(const FramePath& p, const TokenSequence& s,
                                             double frame_duration);

// tokenize -> trellis -> backtrack -> word timings.
std::vector<WordTiming> align_ctc(const EmissionMatrix& m, const HypTranscript& hyp,
                                  TrellisVariant variant, double clamp = kDefaultStayClamp);

// Token boundaries from DTW over the negated attention weights. Words without
// any token are absent from the result. When `hyp` is given its words label
// the timings.
std::vector<WordTiming> align_dtw_attention(const AttentionMatrix& a,
                                            const HypTranscript* hyp = nullptr);

// Per-token [start_frame, end_frame) from the DTW path; exposed for tests.
std::vector<std::pair<std::size_t, std::size_t>> dtw_token_frames(const AttentionMatrix& a);

struct ScoredPath {
  FramePath path;
  double score = kNegInf;
};

// Exhaustive search over all monotone stay/switch sequences. Test oracle only;
// refuses instances with T > 12 or U > 6.
ScoredPath brute_force_best_path(const EmissionMatrix& m, const TokenSequence& s,
                                 TrellisVariant variant, double clamp);

}  // namespace gapalign
