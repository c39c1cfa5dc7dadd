#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace gapalign {

enum class EditOp { Match, Substitute, Delete, Insert };

const char* edit_op_name(EditOp op);

// One step of a word-level Levenshtein alignment. Delete consumes a reference
// word only, Insert a hypothesis word only.
struct WordAlignmentPair {
  EditOp op = EditOp::Match;
  std::optional<std::size_t> ref_index;
  std::optional<std::size_t> hyp_index;

  friend bool operator==(const WordAlignmentPair&, const WordAlignmentPair&) = default;
};

// Minimum edit distance alignment with unit costs. On the backtrace, ties
// prefer match/substitute, then delete, then insert.
std::vector<WordAlignmentPair> levenshtein_align(std::span<const std::string> ref,
                                                 std::span<const std::string> hyp);

struct EditCounts {
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
};

EditCounts count_edits(std::span<const WordAlignmentPair> pairs);

// (S + D + I) / N. Throws EmptyReference when ref is empty.
double wer(std::span<const std::string> ref, std::span<const std::string> hyp);

// Rows: fluent / disfluent. Columns: correct / incorrect / untranscribed.
struct CategorizationCounts {
  enum Status { Correct = 0, Incorrect = 1, Untranscribed = 2 };
  std::array<std::size_t, 3> fluent{};
  std::array<std::size_t, 3> disfluent{};

  std::size_t total() const;
  friend bool operator==(const CategorizationCounts&, const CategorizationCounts&) = default;
};

// Buckets each reference word by its edit operation and disfluency flag.
// Insertions are ignored.
CategorizationCounts categorize_words(std::span<const WordAlignmentPair> pairs,
                                      const std::vector<bool>& ref_disfluent);

// Reference indices of matched or substituted words that sit directly next to
// a deleted reference word.
std::set<std::size_t> neighbors_of_untranscribed(std::span<const WordAlignmentPair> pairs);

}  // namespace gapalign
