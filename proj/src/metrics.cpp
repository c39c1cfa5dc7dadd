#include "gapalign/metrics.hpp"

#include <cmath>
#include <unordered_map>

#include "gapalign/error.hpp"

namespace gapalign {

namespace {

double reference_half_length(const WordTiming& w) {
  const double l = w.half_length();
  if (!(l > 0.0)) {
    throw Error(ErrorCode::ZeroLengthReference,
                "reference word '" + w.text + "' has no duration");
  }
  return l;
}

}  // namespace

double position_score(const WordTiming& reference, const WordTiming& aligned) {
  const double l1 = reference_half_length(reference);
  return 1.0 / (std::abs((reference.position() - aligned.position()) / l1) + 1.0);
}

double length_score(const WordTiming& reference, const WordTiming& aligned) {
  const double l1 = reference_half_length(reference);
  return 1.0 / (std::abs((l1 - aligned.half_length()) / l1) + 1.0);
}

double combined_score(const WordTiming& reference, const WordTiming& aligned) {
  return position_score(reference, aligned) * length_score(reference, aligned);
}

ScoredPair score_pair(const WordTiming& reference, const WordTiming& aligned) {
  ScoredPair p{reference, aligned, position_score(reference, aligned),
               length_score(reference, aligned), 0.0};
  p.combined = p.position * p.length;
  return p;
}

const char* scope_name(ScoreScope scope) {
  return scope == ScoreScope::AllWords ? "all_words" : "around_untranscribed";
}

void ScoreAccumulator::add(const ScoredPair& p) {
  position += p.position;
  length += p.length;
  combined += p.combined;
  ++count;
}

void ScoreAccumulator::merge(const ScoreAccumulator& other) {
  position += other.position;
  length += other.length;
  combined += other.combined;
  count += other.count;
}

ScoreSummary ScoreAccumulator::summary(ScoreScope scope) const {
  if (count == 0) throw Error(ErrorCode::NoPairs, "no scored word pairs");
  const auto n = static_cast<double>(count);
  return {position / n, length / n, combined / n, count, scope};
}

WordTiming as_timing(const RefWord& w, std::size_t index) {
  return {index, w.text, w.start, w.end};
}

std::vector<ScoredPair> scored_pairs(std::span<const WordAlignmentPair> pairs,
                                     std::span<const RefWord> ref_words,
                                     std::span<const WordTiming> hyp_timings, ScoreScope scope,
                                     bool matches_only) {
  std::unordered_map<std::size_t, const WordTiming*> by_hyp;
  for (const auto& t : hyp_timings) by_hyp[t.word_index] = &t;
  std::set<std::size_t> keep;
  if (scope == ScoreScope::AroundUntranscribed) keep = neighbors_of_untranscribed(pairs);

  std::vector<ScoredPair> out;
  for (const auto& p : pairs) {
    if (p.op != EditOp::Match && (matches_only || p.op != EditOp::Substitute)) continue;
    if (scope == ScoreScope::AroundUntranscribed && !keep.contains(*p.ref_index)) continue;
    const auto it = by_hyp.find(*p.hyp_index);
    if (it == by_hyp.end()) continue;
    if (*p.ref_index >= ref_words.size()) {
      throw Error(ErrorCode::LengthMismatch, "alignment refers past the reference transcript");
    }
    out.push_back(score_pair(as_timing(ref_words[*p.ref_index], *p.ref_index), *it->second));
  }
  return out;
}

ScoreSummary summarize(std::span<const ScoredPair> pairs, ScoreScope scope) {
  ScoreAccumulator acc;
  for (const auto& p : pairs) acc.add(p);
  return acc.summary(scope);
}

}  // namespace gapalign
