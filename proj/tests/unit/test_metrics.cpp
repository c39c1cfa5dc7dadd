#include <doctest.h>

#include <cmath>

#include "gapalign/error.hpp"
#include "gapalign/metrics.hpp"
#include "test_support.hpp"

using namespace gapalign;
using namespace gapalign::testing;

namespace {

WordTiming span(double s, double e) { return {0, "w", s, e}; }

}  // namespace

TEST_CASE("position score") {
  CHECK(position_score(span(1.0, 2.0), span(1.0, 2.0)) == 1.0);
  CHECK(std::abs(position_score(span(1.0, 2.0), span(1.5, 2.5)) - 0.5) <= 1e-12);
  CHECK(std::abs(position_score(span(1.0, 2.0), span(6.0, 7.0)) - 1.0 / 11.0) <= 1e-12);
}

TEST_CASE("length score") {
  CHECK(length_score(span(1.0, 2.0), span(5.0, 6.0)) == 1.0);
  CHECK(std::abs(length_score(span(1.0, 2.0), span(1.0, 3.0)) - 0.5) <= 1e-12);
  CHECK(length_score(span(1.0, 2.0), span(1.5, 1.5 + 1e-12)) == doctest::Approx(0.5));
}

TEST_CASE("combined score is the product") {
  CHECK(combined_score(span(1.0, 2.0), span(1.0, 2.0)) == 1.0);
  CHECK(std::abs(combined_score(span(1.0, 2.0), span(1.5, 2.5)) - 0.5) <= 1e-12);
  const auto p = score_pair(span(0.3, 0.9), span(0.5, 1.4));
  CHECK(std::abs(p.combined - p.position * p.length) <= 1e-12);
}

TEST_CASE("zero-length reference is rejected") {
  CHECK_THROWS_AS(position_score(span(1.0, 1.0), span(1.0, 2.0)), Error);
  CHECK_THROWS_AS(length_score(span(1.0, 1.0), span(1.0, 2.0)), Error);
  CHECK_THROWS_AS(combined_score(span(1.0, 1.0), span(1.0, 2.0)), Error);
}

TEST_CASE("scores are invariant to scaling and translation") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> at(0.0, 10.0), len(0.01, 2.0), k(0.1, 10.0), shift(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double s1 = at(rng), s2 = at(rng);
    const auto w1 = span(s1, s1 + len(rng)), w2 = span(s2, s2 + len(rng));
    const double scale = k(rng), offset = shift(rng);
    const auto a = score_pair(w1, w2);
    const auto scaled = score_pair(span(w1.start * scale, w1.end * scale), span(w2.start * scale, w2.end * scale));
    const auto moved = score_pair(span(w1.start + offset, w1.end + offset), span(w2.start + offset, w2.end + offset));
    CHECK(scaled.position == doctest::Approx(a.position).epsilon(1e-9));
    CHECK(scaled.length == doctest::Approx(a.length).epsilon(1e-9));
    CHECK(moved.position == doctest::Approx(a.position).epsilon(1e-9));
    CHECK(moved.length == doctest::Approx(a.length).epsilon(1e-9));
    CHECK(a.combined > 0.0);
    CHECK(a.combined <= 1.0);
  }
}

TEST_CASE("the metric is not symmetric") {
  const auto a = span(1.0, 2.0), b = span(1.0, 3.0);
  CHECK(length_score(a, b) == doctest::Approx(0.5));
  CHECK(length_score(b, a) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("summaries average the pair scores") {
  const auto one = score_pair(span(1.0, 2.0), span(1.0, 2.0));
  const auto half = score_pair(span(1.0, 2.0), span(1.5, 2.5));
  const std::vector<ScoredPair> pairs{one, half};
  const auto s = summarize(pairs, ScoreScope::AllWords);
  CHECK(s.count == 2);
  CHECK(s.mean_position == doctest::Approx(0.75));
  CHECK(s.mean_length == doctest::Approx(1.0));
  CHECK(s.mean_combined == doctest::Approx(0.75));

  const auto single = summarize(std::vector<ScoredPair>{one}, ScoreScope::AllWords);
  CHECK(single.mean_combined == 1.0);
  CHECK_THROWS_AS(summarize(std::vector<ScoredPair>{}, ScoreScope::AllWords), Error);
}

TEST_CASE("accumulators merge to the same summary") {
  ScoreAccumulator a, b, all;
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> at(0.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double s = at(rng);
    const auto p = score_pair(span(s, s + 0.3), span(s + 0.1, s + 0.5));
    (i % 2 ? a : b).add(p);
    all.add(p);
  }
  a.merge(b);
  CHECK(a.count == all.count);
  CHECK(a.summary(ScoreScope::AllWords).mean_combined == doctest::Approx(all.summary(ScoreScope::AllWords).mean_combined));
  CHECK_THROWS_AS(ScoreAccumulator{}.summary(ScoreScope::AllWords), Error);
}

TEST_CASE("scored pairs follow the alignment and scope") {
  const std::vector<RefWord> ref{{"i", 0.0, 0.2, false}, {"uh", 0.3, 0.5, true},
                                 {"had", 0.6, 0.8, false}, {"that", 1.0, 1.2, false}};
  const std::vector<WordAlignmentPair> pairs{{EditOp::Match, 0, 0},
                                             {EditOp::Delete, 1, std::nullopt},
                                             {EditOp::Substitute, 2, 1},
                                             {EditOp::Match, 3, 2},
                                             {EditOp::Insert, std::nullopt, 3}};
  const std::vector<WordTiming> hyp{{0, "i", 0.0, 0.2}, {1, "hat", 0.6, 0.9}, {2, "that", 1.0, 1.2},
                                    {3, "so", 1.3, 1.5}};

  const auto all = scored_pairs(pairs, ref, hyp, ScoreScope::AllWords);
  CHECK(all.size() == 3);
  const auto matches = scored_pairs(pairs, ref, hyp, ScoreScope::AllWords, true);
  CHECK(matches.size() == 2);
  const auto around = scored_pairs(pairs, ref, hyp, ScoreScope::AroundUntranscribed);
  REQUIRE(around.size() == 2);
  CHECK(around[0].ref.text == "i");
  CHECK(around[1].ref.text == "had");

  // Words without a timing are skipped.
  const std::vector<WordTiming> partial{{0, "i", 0.0, 0.2}, {2, "that", 1.0, 1.2}};
  CHECK(scored_pairs(pairs, ref, partial, ScoreScope::AllWords).size() == 2);
}
