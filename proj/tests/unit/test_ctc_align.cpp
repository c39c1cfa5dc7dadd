#include <doctest.h>

#include <cmath>
#include <functional>

#include "gapalign/ctc_align.hpp"
#include "gapalign/error.hpp"
#include "test_support.hpp"

using namespace gapalign;
using namespace gapalign::testing;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected gapalign::Error");
  return ErrorCode::Io;
}

EmissionMatrix uniform(std::size_t frames, std::size_t letters) {
  const std::size_t v = letters + 2;
  std::vector<float> values(frames * v, static_cast<float>(std::log(1.0 / static_cast<double>(v))));
  return EmissionMatrix(letter_vocab(letters), 0, 1, 0.02, values);
}

void check_path_valid(const FramePath& p, std::size_t u, std::size_t t) {
  REQUIRE(p.token_at_frame.size() == t);
  CHECK(p.token_at_frame.front() == 0);
  CHECK(p.token_at_frame.back() == u - 1);
  for (std::size_t i = 1; i < t; ++i) {
    CHECK(p.token_at_frame[i] >= p.token_at_frame[i - 1]);
    CHECK(p.token_at_frame[i] - p.token_at_frame[i - 1] <= 1);
  }
  for (std::size_t j = 0; j < u; ++j) CHECK(p.enter_frame[j] < p.exit_frame[j]);
}

}  // namespace

TEST_CASE("tokenize inserts a leading separator and one between words") {
  const auto m = uniform(4, 2);  // {<b>, |, a, b}
  auto s = tokenize(HypTranscript{{"a", "b"}}, m);
  CHECK(s.tokens == std::vector<std::size_t>{1, 2, 1, 3});
  CHECK(s.is_separator == std::vector<bool>{true, false, true, false});
  CHECK(s.word_spans == std::vector<TokenSequence::WordSpan>{{1, 1, 0}, {3, 3, 1}});

  s = tokenize(HypTranscript{{"ab"}}, m);
  CHECK(s.tokens == std::vector<std::size_t>{1, 2, 3});
  CHECK(s.word_spans == std::vector<TokenSequence::WordSpan>{{1, 2, 0}});
}

TEST_CASE("tokenize drops characters outside the vocabulary") {
  const auto m = uniform(4, 2);
  const auto s = tokenize(HypTranscript{{"a$b"}}, m);
  CHECK(s.tokens == std::vector<std::size_t>{1, 2, 3});
  CHECK(s.dropped_chars == 1);

  const auto skipped = tokenize(HypTranscript{{"a", "$$", "b"}}, m);
  CHECK(skipped.tokens == std::vector<std::size_t>{1, 2, 1, 3});
  CHECK(skipped.word_spans[1].word_index == 2);
  CHECK(skipped.dropped_chars == 2);

  const auto upper = tokenize(HypTranscript{{"AB"}}, m);
  CHECK(upper.tokens == std::vector<std::size_t>{1, 2, 3});

  CHECK(code_of([&] { tokenize(HypTranscript{{"$", "é"}}, m); }) == ErrorCode::EmptyAfterNormalization);
  CHECK(code_of([&] { tokenize(HypTranscript{}, m); }) == ErrorCode::EmptyAfterNormalization);
}

TEST_CASE("single-cell trellis holds the first emission") {
  const auto m = uniform(1, 2);
  TokenSequence s;
  s.tokens = {1};
  s.is_separator = {true};
  const auto tr = build_trellis_standard(m, s);
  CHECK(tr.at(0, 0) == static_cast<double>(m.logprob(0, 1)));
  CHECK(tr.corner() == tr.at(0, 0));
}

TEST_CASE("fewer frames than tokens is infeasible") {
  const auto m = uniform(2, 2);
  const auto s = tokenize(HypTranscript{{"ab"}}, m);
  CHECK(code_of([&] { build_trellis_standard(m, s); }) == ErrorCode::PathInfeasible);
  CHECK(code_of([&] { build_trellis_modified(m, s, -0.01); }) == ErrorCode::PathInfeasible);
  CHECK(code_of([&] { align_ctc(m, HypTranscript{{"ab"}}, TrellisVariant::Standard); }) ==
        ErrorCode::PathInfeasible);
}

TEST_CASE("modified trellis rejects a positive clamp") {
  const auto m = uniform(4, 2);
  const auto s = tokenize(HypTranscript{{"a"}}, m);
  CHECK(code_of([&] { build_trellis_modified(m, s, 0.1); }) == ErrorCode::Validation);
}

TEST_CASE("trellis recurrence on a small hand instance") {
  std::mt19937_64 rng(3);
  const auto m = random_emissions(rng, 5, 4);
  const auto s = random_token_sequence(rng, m, 3);
  const auto tr = build_trellis_standard(m, s);
  auto lp = [&](std::size_t t, std::size_t v) { return static_cast<double>(m.logprob(t, v)); };
  CHECK(tr.at(0, 0) == lp(0, s.tokens[0]));
  for (std::size_t t = 1; t < 5; ++t) CHECK(tr.at(0, t) == tr.at(0, t - 1) + lp(t, 0));
  for (std::size_t j = 1; j < 3; ++j) CHECK(tr.at(j, 0) == kNegInf);
  for (std::size_t j = 1; j < 3; ++j) {
    for (std::size_t t = 1; t < 5; ++t) {
      CHECK(tr.at(j, t) == std::max(tr.at(j, t - 1) + lp(t, 0), tr.at(j - 1, t - 1) + lp(t, s.tokens[j])));
    }
  }
  for (const double x : tr.values()) CHECK(x <= 0.0);
}

TEST_CASE("trellis corner equals the exhaustive optimum") {
  std::mt19937_64 rng(17);
  const double clamps[] = {0.0, -0.01, -1.0, -1e9};
  for (int i = 0; i < 200; ++i) {
    const std::size_t t = 1 + rng() % 8;
    const std::size_t v = 3 + rng() % 4;
    const std::size_t u = 1 + rng() % std::min<std::size_t>(t, 5);
    const auto m = random_emissions(rng, t, v);
    const auto s = random_token_sequence(rng, m, u);
    for (const auto variant : {TrellisVariant::Standard, TrellisVariant::Modified}) {
      for (const double c : clamps) {
        const auto tr = build_trellis(m, s, variant, c);
        const auto oracle = brute_force_best_path(m, s, variant, c);
        CHECK(std::abs(tr.corner() - oracle.score) <= 1e-9);
        const auto path = backtrack(tr, m, s);
        check_path_valid(path, u, t);
        CHECK(path_score(path, m, s, variant, c) == tr.corner());
      }
    }
  }
}

TEST_CASE("modified trellis dominates the standard one pointwise") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const std::size_t t = 2 + rng() % 30, u = 1 + rng() % std::min<std::size_t>(t, 8);
    const auto m = random_emissions(rng, t, 6);
    const auto s = random_token_sequence(rng, m, u);
    const auto standard = build_trellis_standard(m, s);
    for (const double c : {0.0, -0.01, -2.0}) {
      const auto modified = build_trellis_modified(m, s, c);
      for (std::size_t k = 0; k < standard.values().size(); ++k) {
        CHECK(modified.values()[k] >= standard.values()[k]);
      }
    }
    CHECK(build_trellis_modified(m, s, 0.0).corner() >= standard.corner());
  }
}

TEST_CASE("a clamp below every blank log-probability reproduces the standard alignment") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 100; ++i) {
    const std::size_t t = 2 + rng() % 40, u = 1 + rng() % std::min<std::size_t>(t, 10);
    const auto m = random_emissions(rng, t, 8);
    const auto s = random_token_sequence(rng, m, u);
    double min_blank = 0.0;
    for (std::size_t f = 0; f < t; ++f) min_blank = std::min(min_blank, static_cast<double>(m.logprob(f, 0)));
    for (const double c : {-1e9, min_blank}) {
      const auto standard = build_trellis_standard(m, s);
      const auto modified = build_trellis_modified(m, s, c);
      CHECK(standard.values() == modified.values());
      CHECK(backtrack(standard, m, s) == backtrack(modified, m, s));
    }
  }
}

TEST_CASE("T == U forces a switch on every frame") {
  std::mt19937_64 rng(31);
  const auto m = random_emissions(rng, 5, 5);
  const auto s = random_token_sequence(rng, m, 5);
  const auto path = backtrack(build_trellis_standard(m, s), m, s);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(path.enter_frame[j] == j);
    CHECK(path.exit_frame[j] == j + 1);
  }
  const auto oracle = brute_force_best_path(m, s, TrellisVariant::Standard, 0.0);
  CHECK(oracle.path == path);
}

TEST_CASE("uniform emissions give every path the same score") {
  const auto m = uniform(7, 4);
  std::mt19937_64 rng(37);
  const auto s = random_token_sequence(rng, m, 4);
  const auto oracle = brute_force_best_path(m, s, TrellisVariant::Standard, 0.0);
  CHECK(oracle.score == doctest::Approx(7 * std::log(1.0 / 6.0)).epsilon(1e-6));
}

TEST_CASE("ties between stay and switch resolve to stay") {
  // Identical rows make all paths score the same. Walking back from the
  // corner, staying keeps the last token, so switches land as early as possible.
  const auto m = uniform(6, 2);
  const auto s = tokenize(HypTranscript{{"ab"}}, m);
  const auto tr = build_trellis_standard(m, s);
  const auto path = backtrack(tr, m, s);
  CHECK(path.enter_frame == std::vector<std::size_t>{0, 1, 2});
  for (int run = 0; run < 5; ++run) CHECK(backtrack(build_trellis_standard(m, s), m, s) == path);
  CHECK(path_score(path, m, s, TrellisVariant::Standard, 0.0) == tr.corner());
}

TEST_CASE("backtrack reports a missing path") {
  const auto m = uniform(3, 2);
  const auto s = tokenize(HypTranscript{{"ab"}}, m);
  Trellis tr(s.size(), 3, TrellisVariant::Standard, 0.0);
  CHECK(code_of([&] { backtrack(tr, m, s); }) == ErrorCode::NoPath);
}

TEST_CASE("word timings come from token enter and exit frames") {
  const auto m = uniform(10, 2);
  const auto s = tokenize(HypTranscript{{"a", "b"}}, m);
  // "a" on frames 3..7
  std::vector<std::size_t> tokens{0, 0, 0, 1, 1, 1, 1, 1, 2, 3};
  const auto path = make_frame_path(tokens, s.size());
  const auto timings = path_to_word_timings(path, s, 0.02);
  REQUIRE(timings.size() == 2);
  CHECK(timings[0].start == doctest::Approx(0.06));
  CHECK(timings[0].end == doctest::Approx(0.16));
  CHECK(timings[1].start == doctest::Approx(0.18));
  CHECK(timings[1].end == doctest::Approx(0.20));
  CHECK(timings[0].text == "a");
}

TEST_CASE("a single word on a forced path spans its tokens") {
  const auto m = uniform(4, 3);
  const auto s = tokenize(HypTranscript{{"abc"}}, m);
  const auto timings = path_to_word_timings(backtrack(build_trellis_standard(m, s), m, s), s, 0.02);
  REQUIRE(timings.size() == 1);
  CHECK(timings[0].start == doctest::Approx(0.02));
  CHECK(timings[0].end == doctest::Approx(0.08));
}

TEST_CASE("oracle refuses oversized instances") {
  const auto m = uniform(13, 2);
  const auto s = tokenize(HypTranscript{{"a"}}, m);
  CHECK(code_of([&] { brute_force_best_path(m, s, TrellisVariant::Standard, 0.0); }) ==
        ErrorCode::InstanceTooLarge);
}

TEST_CASE("planted speech falls into a separator under the modified trellis") {
  const auto fixture = planted_disfluency_fixture();
  const auto m = fixture.emissions();
  const auto hyp = fixture.hypothesis();
  const auto [first, last] = fixture.planted_regions().front();
  const double fd = m.frame_duration();

  const auto modified = align_ctc(m, hyp, TrellisVariant::Modified, -0.01);
  REQUIRE(modified.size() == 3);
  CHECK(modified[1].end <= first * fd + kTimeEpsilon);
  CHECK(modified[2].start >= last * fd - kTimeEpsilon);

  const auto standard = align_ctc(m, hyp, TrellisVariant::Standard);
  REQUIRE(standard.size() == 3);
  const bool stretched = standard[1].end > first * fd + kTimeEpsilon ||
                         standard[2].start < last * fd - kTimeEpsilon;
  CHECK(stretched);
}

TEST_CASE("alignment is deterministic") {
  std::mt19937_64 rng(41);
  const auto m = random_emissions(rng, 60, 10);
  const HypTranscript hyp{{"abc", "de", "fgh"}};
  const auto a = align_ctc(m, hyp, TrellisVariant::Modified, -0.5);
  for (int i = 0; i < 3; ++i) CHECK(align_ctc(m, hyp, TrellisVariant::Modified, -0.5) == a);
}

TEST_CASE("variant names round-trip") {
  CHECK(parse_variant(variant_name(TrellisVariant::Standard)) == TrellisVariant::Standard);
  CHECK(parse_variant(variant_name(TrellisVariant::Modified)) == TrellisVariant::Modified);
  CHECK(code_of([] { parse_variant("other"); }) == ErrorCode::Validation);
}
