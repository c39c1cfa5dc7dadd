#include "gapalign/text_align.hpp"

#include <algorithm>
#include <map>

#include "gapalign/error.hpp"

namespace gapalign {

const char* edit_op_name(EditOp op) {
  switch (op) {
    case EditOp::Match: return "match";
    case EditOp::Substitute: return "substitute";
    case EditOp::Delete: return "delete";
    case EditOp::Insert: return "insert";
  }
  return "?";
}

std::vector<WordAlignmentPair> levenshtein_align(std::span<const std::string> ref,
                                                 std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::size_t> dist((n + 1) * (m + 1));
  auto d = [&](std::size_t i, std::size_t j) -> std::size_t& { return dist[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) d(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) d(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = d(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d(i, j) = std::min({diag, d(i - 1, j) + 1, d(i, j - 1) + 1});
    }
  }

  std::vector<WordAlignmentPair> pairs;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (d(i, j) == d(i - 1, j - 1) + (same ? 0 : 1)) {
        pairs.push_back({same ? EditOp::Match : EditOp::Substitute, i - 1, j - 1});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && d(i, j) == d(i - 1, j) + 1) {
      pairs.push_back({EditOp::Delete, i - 1, std::nullopt});
      --i;
    } else {
      pairs.push_back({EditOp::Insert, std::nullopt, j - 1});
      --j;
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  return pairs;
}

EditCounts count_edits(std::span<const WordAlignmentPair> pairs) {
  EditCounts c;
  for (const auto& p : pairs) {
    switch (p.op) {
      case EditOp::Match: ++c.matches; break;
      case EditOp::Substitute: ++c.substitutions; break;
      case EditOp::Delete: ++c.deletions; break;
      case EditOp::Insert: ++c.insertions; break;
    }
  }
  return c;
}

double wer(std::span<const std::string> ref, std::span<const std::string> hyp) {
  if (ref.empty()) throw Error(ErrorCode::EmptyReference, "WER is undefined for an empty reference");
  const auto counts = count_edits(levenshtein_align(ref, hyp));
  return static_cast<double>(counts.errors()) / static_cast<double>(ref.size());
}

std::size_t CategorizationCounts::total() const {
  std::size_t sum = 0;
  for (std::size_t k = 0; k < 3; ++k) sum += fluent[k] + disfluent[k];
  return sum;
}

CategorizationCounts categorize_words(std::span<const WordAlignmentPair> pairs,
                                      const std::vector<bool>& ref_disfluent) {
  std::size_t ref_count = 0;
  for (const auto& p : pairs) {
    if (p.ref_index) ref_count = std::max(ref_count, *p.ref_index + 1);
  }
  if (ref_count != ref_disfluent.size()) {
    throw Error(ErrorCode::LengthMismatch, "disfluency flags do not match the reference length");
  }
  CategorizationCounts counts;
  for (const auto& p : pairs) {
    if (!p.ref_index) continue;
    auto& row = ref_disfluent[*p.ref_index] ? counts.disfluent : counts.fluent;
    switch (p.op) {
      case EditOp::Match: ++row[CategorizationCounts::Correct]; break;
      case EditOp::Substitute: ++row[CategorizationCounts::Incorrect]; break;
      case EditOp::Delete: ++row[CategorizationCounts::Untranscribed]; break;
      case EditOp::Insert: break;
    }
  }
  return counts;
}

std::set<std::size_t> neighbors_of_untranscribed(std::span<const WordAlignmentPair> pairs) {
  std::map<std::size_t, EditOp> by_ref;
  for (const auto& p : pairs) {
    if (p.ref_index) by_ref[*p.ref_index] = p.op;
  }
  std::set<std::size_t> out;
  for (const auto& [index, op] : by_ref) {
    if (op != EditOp::Delete) continue;
    for (const std::size_t neighbor : {index - 1, index + 1}) {
      if (index == 0 && neighbor == index - 1) continue;
      const auto it = by_ref.find(neighbor);
      if (it != by_ref.end() && (it->second == EditOp::Match || it->second == EditOp::Substitute)) {
        out.insert(neighbor);
      }
    }
  }
  return out;
}

}  // namespace gapalign
