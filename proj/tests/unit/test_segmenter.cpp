#include <doctest.h>

#include "gapalign/segmenter.hpp"
#include "test_support.hpp"

using namespace gapalign;
using namespace gapalign::testing;

namespace {

// n words evenly filling [a, b] with 0.1 s pauses.
void cluster(std::vector<RefWord>& out, double a, double b, std::size_t n) {
  const double len = (b - a - 0.1 * static_cast<double>(n - 1)) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = a + static_cast<double>(i) * (len + 0.1);
    out.push_back({"w", s, i + 1 == n ? b : s + len, false});
  }
}

void check_invariants(const std::vector<RefWord>& words, double total, const std::vector<Segment>& segs,
                      const SegmenterConfig& config = {}) {
  REQUIRE_FALSE(segs.empty());
  CHECK(segs.front().start == 0.0);
  CHECK(segs.front().first_word == 0);
  CHECK(segs.back().end == doctest::Approx(total));
  CHECK(segs.back().last_word == words.size() - 1);
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const auto& s = segs[k];
    CHECK(s.first_word <= s.last_word);
    if (k > 0) {
      CHECK(s.start == segs[k - 1].end);
      CHECK(s.first_word == segs[k - 1].last_word + 1);
      // The cut sits at the midpoint of the silence between the two words.
      const auto& left = words[s.first_word - 1];
      const auto& right = words[s.first_word];
      CHECK(s.start == doctest::Approx((left.end + right.start) / 2.0));
    }
    for (std::size_t w = s.first_word; w <= s.last_word; ++w) {
      CHECK(words[w].start >= s.start);
      CHECK(words[w].end <= s.end);
    }
    if (s.duration() > config.max_segment) {
      for (std::size_t w = s.first_word; w < s.last_word; ++w) {
        const double cut = (words[w].end + words[w + 1].start) / 2.0;
        const bool eligible = cut - s.start >= config.edge_distance && s.end - cut >= config.edge_distance;
        CHECK_FALSE(eligible);
      }
    }
  }
  // Every long silence is cut.
  for (std::size_t w = 0; w + 1 < words.size(); ++w) {
    if (words[w + 1].start - words[w].end > config.silence_split) {
      const bool cut = std::any_of(segs.begin(), segs.end(), [&](const Segment& s) { return s.first_word == w + 1; });
      CHECK(cut);
    }
  }
}

}  // namespace

TEST_CASE("no input words gives no segments") {
  CHECK(plan_segments({}, 10.0).empty());
}

TEST_CASE("a short recording stays whole") {
  std::vector<RefWord> words;
  cluster(words, 0.5, 20.0, 30);
  const auto segs = plan_segments(words, 21.0);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0] == Segment{0.0, 21.0, 0, 29});
}

TEST_CASE("a silence over five seconds splits the recording") {
  std::vector<RefWord> words;
  cluster(words, 0.0, 8.0, 10);
  cluster(words, 14.0, 20.0, 8);
  const auto segs = plan_segments(words, 20.0);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].end == 11.0);
  CHECK(segs[0].last_word == 9);
  CHECK(segs[1].start == 11.0);
  CHECK(segs[1].first_word == 10);

  // Exactly five seconds is not enough.
  std::vector<RefWord> exact;
  cluster(exact, 0.0, 8.0, 10);
  cluster(exact, 13.0, 20.0, 8);
  CHECK(plan_segments(exact, 20.0).size() == 1);
}

TEST_CASE("long segments are cut at the widest eligible silence first") {
  std::vector<RefWord> words;
  cluster(words, 0.5, 24.5, 20);
  cluster(words, 25.5, 44.0, 15);
  cluster(words, 46.0, 69.5, 20);
  const auto segs = plan_segments(words, 70.0);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].end == doctest::Approx(25.0));
  CHECK(segs[1].end == doctest::Approx(45.0));
  CHECK(segs[2].end == 70.0);
  check_invariants(words, 70.0, segs);
}

TEST_CASE("equal widths break toward the earliest silence") {
  std::vector<RefWord> words;
  cluster(words, 0.0, 19.0, 10);
  cluster(words, 21.0, 39.0, 10);
  cluster(words, 41.0, 50.0, 5);
  const auto segs = plan_segments(words, 50.0);
  REQUIRE(segs.size() >= 2);
  CHECK(segs[0].end == doctest::Approx(20.0));
}

TEST_CASE("a long segment without eligible cuts is kept") {
  // One 40 s word run with pauses only near the edges.
  std::vector<RefWord> words{{"a", 0.0, 5.0, false}, {"b", 6.0, 34.0, false}, {"c", 35.0, 40.0, false}};
  const auto segs = plan_segments(words, 40.0);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].duration() == 40.0);
}

TEST_CASE("random streams satisfy the segment invariants") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> len(0.1, 1.0), pause(0.0, 1.5), long_pause(5.0, 12.0);
  for (int k = 0; k < 100; ++k) {
    std::vector<RefWord> words;
    const double limit = 20.0 + static_cast<double>(rng() % 280);
    double t = pause(rng);
    while (true) {
      const double e = t + len(rng);
      if (e > limit) break;
      words.push_back({"w", t, e, false});
      t = e + (rng() % 40 == 0 ? long_pause(rng) : pause(rng));
    }
    if (words.empty()) continue;
    const double total = words.back().end + pause(rng);
    check_invariants(words, total, plan_segments(words, total));
  }
}
