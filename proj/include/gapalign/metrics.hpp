#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gapalign/ctc_align.hpp"
#include "gapalign/data_io.hpp"
#include "gapalign/text_align.hpp"

namespace gapalign {

// Alignment quality of an automatic word timing against the manual one.
// Position p = (s + e) / 2 and half-length l = (e - s) / 2; the reference word
// w1 normalizes both terms, so the scores are not symmetric.
//
//   position  m_p = 1 / (|(p1 - p2) / l1| + 1)
//   length    m_l = 1 / (|(l1 - l2) / l1| + 1)
//   combined  m   = m_p * m_l
//
// All three throw ZeroLengthReference when w1 has no duration.
double position_score(const WordTiming& reference, const WordTiming& aligned);
double length_score(const WordTiming& reference, const WordTiming& aligned);
double combined_score(const WordTiming& reference, const WordTiming& aligned);

struct ScoredPair {
  WordTiming ref;
  WordTiming hyp;
  double position = 0.0;
  double length = 0.0;
  double combined = 0.0;
};

ScoredPair score_pair(const WordTiming& reference, const WordTiming& aligned);

enum class ScoreScope { AllWords, AroundUntranscribed };

const char* scope_name(ScoreScope scope);

struct ScoreSummary {
  double mean_position = 0.0;
  double mean_length = 0.0;
  double mean_combined = 0.0;
  std::size_t count = 0;
  ScoreScope scope = ScoreScope::AllWords;
};

// Running sums; merging accumulators is order-independent up to float
// rounding of the sums.
struct ScoreAccumulator {
  double position = 0.0;
  double length = 0.0;
  double combined = 0.0;
  std::size_t count = 0;

  void add(const ScoredPair& p);
  void merge(const ScoreAccumulator& other);
  // Throws NoPairs when empty.
  ScoreSummary summary(ScoreScope scope) const;
};

WordTiming as_timing(const RefWord& w, std::size_t index);

// Scores every matched (and, unless `matches_only`, substituted) pair that has
// a timing on both sides. With AroundUntranscribed only reference words next
// to a deletion are kept.
std::vector<ScoredPair> scored_pairs(std::span<const WordAlignmentPair> pairs,
                                     std::span<const RefWord> ref_words,
                                     std::span<const WordTiming> hyp_timings, ScoreScope scope,
                                     bool matches_only = false);

ScoreSummary summarize(std::span<const ScoredPair> pairs, ScoreScope scope);

}  // namespace gapalign
