#include <doctest.h>

#include <cmath>
#include <functional>
#include <fstream>

#include <json.hpp>

#include "gapalign/data_io.hpp"
#include "gapalign/error.hpp"
#include "test_support.hpp"

using namespace gapalign;
using namespace gapalign::testing;

namespace {

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

void spit(const std::filesystem::path& p, const std::string& s) { write_text_file(p, s); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected gapalign::Error");
  return ErrorCode::Io;
}

EmissionMatrix uniform(std::size_t frames, std::size_t v) {
  std::vector<float> values(frames * v, static_cast<float>(std::log(1.0 / static_cast<double>(v))));
  return EmissionMatrix(letter_vocab(v - 2), 0, 1, 0.02, values);
}

}  // namespace

TEST_CASE("uniform emission file reads back as log(1/3)") {
  TempDir dir;
  write_emissions(uniform(2, 3), dir / "u.ctcem");
  const auto m = read_emissions(dir / "u.ctcem");
  CHECK(m.num_frames() == 2);
  CHECK(m.vocab_size() == 3);
  for (const float x : m.values()) CHECK(x == doctest::Approx(-1.0986).epsilon(1e-4));
}

TEST_CASE("emission file layout is magic, JSON header line, little-endian floats") {
  TempDir dir;
  write_emissions(uniform(2, 3), dir / "u.ctcem");
  const std::string bytes = slurp(dir / "u.ctcem");
  REQUIRE(bytes.rfind("CTCEM1\n", 0) == 0);
  const auto nl = bytes.find('\n', 7);
  const auto header = nlohmann::json::parse(bytes.substr(7, nl - 7));
  CHECK(header.at("num_frames") == 2);
  CHECK(header.at("blank_index") == 0);
  CHECK(header.at("separator_index") == 1);
  CHECK(header.at("vocab").size() == 3);
  CHECK(bytes.size() - nl - 1 == 2 * 3 * 4);
  // log(1/3) as float32 is 0xBF8C9F54.
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);
  CHECK(p[0] == 0x54);
  CHECK(p[1] == 0x9F);
  CHECK(p[2] == 0x8C);
  CHECK(p[3] == 0xBF);
}

TEST_CASE("a 1 s clip at 20 ms frames round-trips bit-exactly") {
  std::mt19937_64 rng(7);
  const auto m = random_emissions(rng, 50, 30);
  TempDir dir;
  write_emissions(m, dir / "a.ctcem");
  const auto back = read_emissions(dir / "a.ctcem");
  CHECK(back == m);
  CHECK(back.num_frames() == 50);
  write_emissions(back, dir / "b.ctcem");
  CHECK(slurp(dir / "a.ctcem") == slurp(dir / "b.ctcem"));
}

TEST_CASE("round trip preserves random matrices exactly") {
  std::mt19937_64 rng(11);
  TempDir dir;
  for (int i = 0; i < 20; ++i) {
    const std::size_t t = 1 + rng() % 40, v = 2 + rng() % 12;
    std::uniform_real_distribution<double> fd(0.001, 0.1);
    const auto m = random_emissions(rng, t, v, fd(rng));
    write_emissions(m, dir / "r.ctcem");
    CHECK(read_emissions(dir / "r.ctcem") == m);
  }
}

TEST_CASE("emission reader rejects malformed files") {
  TempDir dir;
  write_emissions(uniform(2, 3), dir / "ok.ctcem");
  const std::string good = slurp(dir / "ok.ctcem");

  SUBCASE("payload one float short") {
    spit(dir / "x", good.substr(0, good.size() - 4));
    CHECK(code_of([&] { read_emissions(dir / "x"); }) == ErrorCode::SizeMismatch);
  }
  SUBCASE("bad magic") {
    spit(dir / "x", "CTCEM2\n" + good.substr(7));
    CHECK(code_of([&] { read_emissions(dir / "x"); }) == ErrorCode::BadMagic);
  }
  SUBCASE("header is not JSON") {
    spit(dir / "x", "CTCEM1\nnot json\n");
    CHECK(code_of([&] { read_emissions(dir / "x"); }) == ErrorCode::MalformedHeader);
  }
  SUBCASE("missing header field") {
    spit(dir / "x", "CTCEM1\n{\"vocab\":[\"a\",\"b\"],\"blank_index\":0,\"separator_index\":1,\"num_frames\":1}\n");
    CHECK(code_of([&] { read_emissions(dir / "x"); }) == ErrorCode::MalformedHeader);
  }
  SUBCASE("rows that are not distributions") {
    const EmissionMatrix m = uniform(2, 3);
    std::vector<float> values(6, -0.1f);
    CHECK(code_of([&] { EmissionMatrix(m.vocab(), 0, 1, 0.02, values); }) == ErrorCode::NonProbabilistic);
  }
  SUBCASE("positive log-probability") {
    std::vector<float> values{0.5f, -10.0f, -10.0f};
    CHECK(code_of([&] { EmissionMatrix(letter_vocab(1), 0, 1, 0.02, values); }) == ErrorCode::NonProbabilistic);
  }
  SUBCASE("blank equals separator") {
    std::vector<float> values(3, static_cast<float>(std::log(1.0 / 3)));
    CHECK(code_of([&] { EmissionMatrix(letter_vocab(1), 1, 1, 0.02, values); }) == ErrorCode::Validation);
  }
  SUBCASE("missing file") {
    CHECK(code_of([&] { read_emissions(dir / "nope"); }) == ErrorCode::Io);
  }
}

TEST_CASE("reference transcript lines map onto RefWord fields") {
  const auto words = parse_ref_transcript("1.230 1.410 uh 1\n1.5 1.9 Had 0\n");
  REQUIRE(words.size() == 2);
  CHECK(words[0] == RefWord{"uh", 1.23, 1.41, true});
  CHECK(words[1] == RefWord{"had", 1.5, 1.9, false});
}

TEST_CASE("reference transcript validation names the line") {
  try {
    parse_ref_transcript("0 1 a 0\n2.0 2.0 b 0\n");
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Validation);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(code_of([] { parse_ref_transcript("0 1 a 2\n"); }) == ErrorCode::Validation);
  CHECK(code_of([] { parse_ref_transcript("0 1 a\n"); }) == ErrorCode::Validation);
  CHECK(code_of([] { parse_ref_transcript("0 1 a 0\n0.5 2 b 0\n"); }) == ErrorCode::Validation);
  CHECK(code_of([] { parse_ref_transcript("x 1 a 0\n"); }) == ErrorCode::Validation);
}

TEST_CASE("empty reference file is an empty list") {
  TempDir dir;
  spit(dir / "empty.ref", "");
  CHECK(read_ref_transcript(dir / "empty.ref").empty());
}

TEST_CASE("reference and hypothesis transcripts round-trip") {
  TempDir dir;
  std::vector<RefWord> ref{{"i", 0.1, 0.3000000000000000444, false}, {"uh", 1.0 / 3.0, 0.9, true}};
  write_ref_transcript(ref, dir / "r.ref");
  CHECK(read_ref_transcript(dir / "r.ref") == ref);

  HypTranscript hyp{{"i", "had", "that"}};
  write_hyp_transcript(hyp, dir / "h.hyp");
  CHECK(read_hyp_transcript(dir / "h.hyp") == hyp);
  CHECK(parse_hyp_transcript("  I  Had\tTHAT \n").words == hyp.words);
}

TEST_CASE("attention files round-trip and validate") {
  TempDir dir;
  AttentionMatrix a{3, 4, 0.02, {0, 0, 1}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1}};
  write_attention(a, dir / "a.attn");
  CHECK(read_attention(dir / "a.attn") == a);
  CHECK(slurp(dir / "a.attn").rfind("ATTN1\n", 0) == 0);

  AttentionMatrix negative = a;
  negative.weights[3] = -1.0f;
  write_attention(negative, dir / "n.attn");
  CHECK(code_of([&] { read_attention(dir / "n.attn"); }) == ErrorCode::Validation);

  AttentionMatrix short_payload = a;
  write_attention(a, dir / "s.attn");
  const std::string bytes = slurp(dir / "s.attn");
  spit(dir / "s.attn", bytes.substr(0, bytes.size() - 4));
  CHECK(code_of([&] { read_attention(dir / "s.attn"); }) == ErrorCode::SizeMismatch);
}
