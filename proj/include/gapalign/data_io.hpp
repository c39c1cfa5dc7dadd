#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gapalign {

// Frame-wise log-probabilities (natural log) from a CTC acoustic model.
// Values are kept as 32-bit floats so files round-trip bit-exactly; all
// arithmetic on them happens in double.
class EmissionMatrix {
 public:
  EmissionMatrix() = default;

  // Validates every invariant; throws Error on violation.
  EmissionMatrix(std::vector<std::string> vocab, std::size_t blank_index,
                 std::size_t separator_index, double frame_duration,
                 std::vector<float> values);

  std::size_t num_frames() const { return vocab_.empty() ? 0 : values_.size() / vocab_.size(); }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }
  std::size_t blank_index() const { return blank_index_; }
  std::size_t separator_index() const { return separator_index_; }
  double frame_duration() const { return frame_duration_; }
  double duration() const { return frame_duration_ * static_cast<double>(num_frames()); }

  double logprob(std::size_t frame, std::size_t token) const {
    return values_[frame * vocab_.size() + token];
  }
  std::span<const float> row(std::size_t frame) const {
    return {values_.data() + frame * vocab_.size(), vocab_.size()};
  }
  const std::vector<float>& values() const { return values_; }

  friend bool operator==(const EmissionMatrix&, const EmissionMatrix&) = default;

 private:
  std::vector<std::string> vocab_;
  std::size_t blank_index_ = 0;
  std::size_t separator_index_ = 1;
  double frame_duration_ = 0.0;
  std::vector<float> values_;
};

// Token-by-frame cross-attention weights exported by an encoder-decoder ASR model.
struct AttentionMatrix {
  std::size_t num_tokens = 0;
  std::size_t num_frames = 0;
  double frame_duration = 0.0;
  // Word index per token; -1 marks tokens that belong to no word.
  std::vector<long> token_to_word;
  // Row-major num_tokens x num_frames.
  std::vector<float> weights;

  double weight(std::size_t token, std::size_t frame) const {
    return weights[token * num_frames + frame];
  }

  // Throws Error(Validation) when an invariant does not hold.
  void validate() const;

  friend bool operator==(const AttentionMatrix&, const AttentionMatrix&) = default;
};

// One word of a manually annotated reference transcript.
struct RefWord {
  std::string text;
  double start = 0.0;
  double end = 0.0;
  bool disfluent = false;

  friend bool operator==(const RefWord&, const RefWord&) = default;
};

struct HypTranscript {
  std::vector<std::string> words;

  friend bool operator==(const HypTranscript&, const HypTranscript&) = default;
};

// Lowercases ASCII letters; other bytes pass through unchanged.
std::string to_lower(std::string_view text);

EmissionMatrix read_emissions(const std::filesystem::path& path);
void write_emissions(const EmissionMatrix& m, const std::filesystem::path& path);

AttentionMatrix read_attention(const std::filesystem::path& path);
void write_attention(const AttentionMatrix& a, const std::filesystem::path& path);

// Lines of `start end word disfluent_flag`. Blank lines and lines starting
// with '#' are skipped.
std::vector<RefWord> read_ref_transcript(const std::filesystem::path& path);
std::vector<RefWord> parse_ref_transcript(std::string_view text);
void write_ref_transcript(std::span<const RefWord> words, const std::filesystem::path& path);

// A single line of space-separated words, lowercased on read.
HypTranscript read_hyp_transcript(const std::filesystem::path& path);
HypTranscript parse_hyp_transcript(std::string_view text);
void write_hyp_transcript(const HypTranscript& h, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace gapalign
