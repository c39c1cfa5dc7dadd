#include "gapalign/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gapalign/error.hpp"

namespace gapalign {

namespace {

constexpr std::string_view kEmissionMagic = "CTCEM1\n";
constexpr std::string_view kAttentionMagic = "ATTN1\n";
constexpr double kRowSumTolerance = 1e-3;

using nlohmann::json;

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

void append_floats(std::string& out, std::span<const float> values) {
  const std::size_t offset = out.size();
  out.resize(offset + values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(values[i]));
    std::memcpy(out.data() + offset + i * 4, &bits, 4);
  }
}

std::vector<float> decode_floats(std::string_view payload) {
  std::vector<float> values(payload.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, payload.data() + i * 4, 4);
    values[i] = std::bit_cast<float>(to_little_endian(bits));
  }
  return values;
}

struct Framed {
  json header;
  std::string_view payload;
};

// Splits `magic, header line, payload` framing shared by both binary formats.
Framed split_frame(std::string_view data, std::string_view magic, const std::string& where) {
  if (data.substr(0, magic.size()) != magic) {
    fail(ErrorCode::BadMagic, where + ": missing magic '" +
                                  std::string(magic.substr(0, magic.size() - 1)) + "'");
  }
  data.remove_prefix(magic.size());
  const auto newline = data.find('\n');
  if (newline == std::string_view::npos) {
    fail(ErrorCode::MalformedHeader, where + ": header line is not terminated");
  }
  Framed framed;
  try {
    framed.header = json::parse(data.substr(0, newline));
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedHeader, where + ": header is not valid JSON: " + e.what());
  }
  if (!framed.header.is_object()) {
    fail(ErrorCode::MalformedHeader, where + ": header must be an object");
  }
  framed.payload = data.substr(newline + 1);
  return framed;
}

template <typename T>
T header_field(const json& header, const char* name, const std::string& where) {
  if (!header.contains(name)) {
    fail(ErrorCode::MalformedHeader, where + ": header field '" + name + "' is missing");
  }
  try {
    return header.at(name).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::MalformedHeader, where + ": header field '" + name + "' has the wrong type");
  }
}

std::size_t header_count(const json& header, const char* name, const std::string& where) {
  const auto& v = header.contains(name) ? header.at(name) : json();
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail(ErrorCode::MalformedHeader,
         where + ": header field '" + std::string(name) + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

void check_payload_size(std::string_view payload, std::size_t expected_floats,
                        const std::string& where) {
  if (payload.size() != expected_floats * 4) {
    std::ostringstream msg;
    msg << where << ": payload holds " << payload.size() << " bytes, header declares "
        << expected_floats << " floats (" << expected_floats * 4 << " bytes)";
    fail(ErrorCode::SizeMismatch, msg.str());
  }
}

}  // namespace

EmissionMatrix::EmissionMatrix(std::vector<std::string> vocab, std::size_t blank_index,
                               std::size_t separator_index, double frame_duration,
                               std::vector<float> values)
    : vocab_(std::move(vocab)),
      blank_index_(blank_index),
      separator_index_(separator_index),
      frame_duration_(frame_duration),
      values_(std::move(values)) {
  const std::size_t v = vocab_.size();
  if (v < 2) fail(ErrorCode::Validation, "vocab: at least two tokens required");
  if (blank_index_ >= v) fail(ErrorCode::Validation, "blank_index: out of range");
  if (separator_index_ >= v) fail(ErrorCode::Validation, "separator_index: out of range");
  if (blank_index_ == separator_index_) {
    fail(ErrorCode::Validation, "separator_index: must differ from blank_index");
  }
  if (!(frame_duration_ > 0.0) || !std::isfinite(frame_duration_)) {
    fail(ErrorCode::Validation, "frame_duration: must be positive");
  }
  if (values_.empty() || values_.size() % v != 0) {
    fail(ErrorCode::SizeMismatch, "values: expected a non-empty T x V grid");
  }
  const std::size_t t_count = values_.size() / v;
  for (std::size_t t = 0; t < t_count; ++t) {
    double sum = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      const float x = values_[t * v + j];
      if (std::isnan(x) || x > 0.0f) {
        std::ostringstream msg;
        msg << "values: frame " << t << ", token " << j << " is not a log-probability";
        fail(ErrorCode::NonProbabilistic, msg.str());
      }
      sum += std::exp(static_cast<double>(x));
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg << "values: frame " << t << " probabilities sum to " << sum;
      fail(ErrorCode::NonProbabilistic, msg.str());
    }
  }
}

void AttentionMatrix::validate() const {
  if (num_tokens < 1) fail(ErrorCode::Validation, "num_tokens: must be at least 1");
  if (num_frames < 1) fail(ErrorCode::Validation, "num_frames: must be at least 1");
  if (!(frame_duration > 0.0) || !std::isfinite(frame_duration)) {
    fail(ErrorCode::Validation, "frame_duration: must be positive");
  }
  if (token_to_word.size() != num_tokens) {
    fail(ErrorCode::Validation, "token_to_word: length must equal num_tokens");
  }
  if (weights.size() != num_tokens * num_frames) {
    fail(ErrorCode::SizeMismatch, "weights: expected num_tokens x num_frames values");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0f) || !std::isfinite(weights[i])) {
      fail(ErrorCode::Validation, "weights: entry " + std::to_string(i) + " is negative or not finite");
    }
  }
  long last_word = -1;
  for (std::size_t i = 0; i < num_tokens; ++i) {
    const long w = token_to_word[i];
    if (w < -1) fail(ErrorCode::Validation, "token_to_word: entry " + std::to_string(i) + " < -1");
    if (w >= 0) {
      if (w < last_word) {
        fail(ErrorCode::Validation, "token_to_word: word indices must be non-decreasing");
      }
      last_word = w;
    }
  }
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) {
    return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : static_cast<char>(ch);
  });
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, path.string() + ": cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, path.string() + ": read failed");
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::Io, path.string() + ": write failed");
}

EmissionMatrix read_emissions(const std::filesystem::path& path) {
  const std::string where = path.string();
  const std::string data = read_text_file(path);
  const Framed framed = split_frame(data, kEmissionMagic, where);
  const auto& h = framed.header;

  const auto vocab = header_field<std::vector<std::string>>(h, "vocab", where);
  const std::size_t blank = header_count(h, "blank_index", where);
  const std::size_t separator = header_count(h, "separator_index", where);
  const double frame_duration = header_field<double>(h, "frame_duration", where);
  const std::size_t num_frames = header_count(h, "num_frames", where);
  if (num_frames < 1) fail(ErrorCode::MalformedHeader, where + ": num_frames must be at least 1");
  if (vocab.size() < 2) fail(ErrorCode::MalformedHeader, where + ": vocab needs at least two tokens");

  check_payload_size(framed.payload, num_frames * vocab.size(), where);
  try {
    return EmissionMatrix(vocab, blank, separator, frame_duration, decode_floats(framed.payload));
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  }
}

void write_emissions(const EmissionMatrix& m, const std::filesystem::path& path) {
  json header;
  header["vocab"] = m.vocab();
  header["blank_index"] = m.blank_index();
  header["separator_index"] = m.separator_index();
  header["frame_duration"] = m.frame_duration();
  header["num_frames"] = m.num_frames();
  std::string out(kEmissionMagic);
  out += header.dump();
  out += '\n';
  append_floats(out, m.values());
  write_text_file(path, out);
}

AttentionMatrix read_attention(const std::filesystem::path& path) {
  const std::string where = path.string();
  const std::string data = read_text_file(path);
  const Framed framed = split_frame(data, kAttentionMagic, where);
  const auto& h = framed.header;

  AttentionMatrix a;
  a.num_tokens = header_count(h, "num_tokens", where);
  a.num_frames = header_count(h, "num_frames", where);
  a.frame_duration = header_field<double>(h, "frame_duration", where);
  a.token_to_word = header_field<std::vector<long>>(h, "token_to_word", where);
  check_payload_size(framed.payload, a.num_tokens * a.num_frames, where);
  a.weights = decode_floats(framed.payload);
  try {
    a.validate();
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  }
  return a;
}

void write_attention(const AttentionMatrix& a, const std::filesystem::path& path) {
  json header;
  header["num_tokens"] = a.num_tokens;
  header["num_frames"] = a.num_frames;
  header["frame_duration"] = a.frame_duration;
  header["token_to_word"] = a.token_to_word;
  std::string out(kAttentionMagic);
  out += header.dump();
  out += '\n';
  append_floats(out, a.weights);
  write_text_file(path, out);
}

std::vector<RefWord> parse_ref_transcript(std::string_view text) {
  std::vector<RefWord> words;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&line_no](const std::string& what) {
    fail(ErrorCode::Validation, "line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    RefWord w;
    std::string start, end, flag, extra;
    if (!(fields >> start >> end >> w.text >> flag) || (fields >> extra)) {
      bad("expected `start end word disfluent_flag`");
    }
    try {
      std::size_t used = 0;
      w.start = std::stod(start, &used);
      if (used != start.size()) throw std::invalid_argument(start);
      w.end = std::stod(end, &used);
      if (used != end.size()) throw std::invalid_argument(end);
    } catch (const std::exception&) {
      bad("start/end are not numbers");
    }
    if (!std::isfinite(w.start) || !std::isfinite(w.end)) bad("start/end must be finite");
    if (flag != "0" && flag != "1") bad("disfluent flag must be 0 or 1");
    w.disfluent = flag == "1";
    w.text = to_lower(w.text);
    if (!(w.start < w.end)) bad("end must be greater than start");
    if (!words.empty() && w.start < words.back().end) {
      bad("word overlaps or precedes the previous word");
    }
    words.push_back(std::move(w));
  }
  return words;
}

std::vector<RefWord> read_ref_transcript(const std::filesystem::path& path) {
  try {
    return parse_ref_transcript(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_ref_transcript(std::span<const RefWord> words, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& w : words) {
    out << w.start << ' ' << w.end << ' ' << w.text << ' ' << (w.disfluent ? 1 : 0) << '\n';
  }
  write_text_file(path, out.str());
}

HypTranscript parse_hyp_transcript(std::string_view text) {
  HypTranscript h;
  std::istringstream in{to_lower(text)};
  std::string word;
  while (in >> word) h.words.push_back(word);
  return h;
}

HypTranscript read_hyp_transcript(const std::filesystem::path& path) {
  return parse_hyp_transcript(read_text_file(path));
}

void write_hyp_transcript(const HypTranscript& h, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < h.words.size(); ++i) {
    if (i) out += ' ';
    out += h.words[i];
  }
  out += '\n';
  write_text_file(path, out);
}

}  // namespace gapalign
