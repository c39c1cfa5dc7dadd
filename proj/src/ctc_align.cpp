#include "gapalign/ctc_align.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "gapalign/error.hpp"

namespace gapalign {

namespace {

// Length of the UTF-8 sequence starting with `lead`; malformed bytes count as one.
std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

TokenSequence tokenize(const HypTranscript& hyp, const EmissionMatrix& m) {
  std::unordered_map<std::string, std::size_t> lookup;
  for (std::size_t i = 0; i < m.vocab_size(); ++i) {
    if (i == m.blank_index() || i == m.separator_index()) continue;
    lookup.emplace(to_lower(m.vocab()[i]), i);
  }

  TokenSequence s;
  s.words = hyp.words;
  s.tokens.push_back(m.separator_index());
  s.is_separator.push_back(true);

  for (std::size_t w = 0; w < hyp.words.size(); ++w) {
    const std::string word = to_lower(hyp.words[w]);
    std::vector<std::size_t> ids;
    for (std::size_t pos = 0; pos < word.size();) {
      const std::size_t len =
          std::min(utf8_length(static_cast<unsigned char>(word[pos])), word.size() - pos);
      const auto it = lookup.find(word.substr(pos, len));
      if (it == lookup.end()) {
        ++s.dropped_chars;
      } else {
        ids.push_back(it->second);
      }
      pos += len;
    }
    if (ids.empty()) continue;
    if (!s.word_spans.empty()) {
      s.tokens.push_back(m.separator_index());
      s.is_separator.push_back(true);
    }
    const std::size_t first = s.tokens.size();
    for (const auto id : ids) {
      s.tokens.push_back(id);
      s.is_separator.push_back(false);
    }
    s.word_spans.push_back({first, s.tokens.size() - 1, w});
  }
  if (s.word_spans.empty()) {
    throw Error(ErrorCode::EmptyAfterNormalization,
                "hypothesis has no characters in the emission vocabulary");
  }
  return s;
}

const char* variant_name(TrellisVariant v) {
  return v == TrellisVariant::Standard ? "standard" : "modified";
}

TrellisVariant parse_variant(const std::string& name) {
  if (name == "standard") return TrellisVariant::Standard;
  if (name == "modified") return TrellisVariant::Modified;
  throw Error(ErrorCode::Validation, "unknown alignment variant '" + name + "'");
}

double stay_logprob(const EmissionMatrix& m, const TokenSequence& s, std::size_t token_pos,
                    std::size_t frame, TrellisVariant variant, double clamp) {
  const double blank = m.logprob(frame, m.blank_index());
  if (variant == TrellisVariant::Modified && s.is_separator[token_pos]) {
    return std::max(blank, clamp);
  }
  return blank;
}

Trellis build_trellis(const EmissionMatrix& m, const TokenSequence& s, TrellisVariant variant,
                      double clamp) {
  const std::size_t num_frames = m.num_frames();
  const std::size_t num_tokens = s.size();
  if (num_tokens == 0) throw Error(ErrorCode::Validation, "empty token sequence");
  if (num_frames < num_tokens) {
    std::ostringstream msg;
    msg << "cannot align " << num_tokens << " tokens to " << num_frames << " frames";
    throw Error(ErrorCode::PathInfeasible, msg.str());
  }
  if (variant == TrellisVariant::Modified && !(clamp <= 0.0)) {
    throw Error(ErrorCode::Validation, "stay clamp c must be a log-probability (<= 0)");
  }

  Trellis tr(num_tokens, num_frames, variant, clamp);
  tr.at(0, 0) = switch_logprob(m, s, 0, 0);
  for (std::size_t t = 1; t < num_frames; ++t) {
    tr.at(0, t) = tr.at(0, t - 1) + stay_logprob(m, s, 0, t, variant, clamp);
    // Row j is unreachable before frame j.
    const std::size_t last = std::min(num_tokens - 1, t);
    for (std::size_t j = 1; j <= last; ++j) {
      const double stay = tr.at(j, t - 1) + stay_logprob(m, s, j, t, variant, clamp);
      const double change = tr.at(j - 1, t - 1) + switch_logprob(m, s, j, t);
      tr.at(j, t) = std::max(stay, change);
    }
  }
  return tr;
}

Trellis build_trellis_standard(const EmissionMatrix& m, const TokenSequence& s) {
  return build_trellis(m, s, TrellisVariant::Standard, 0.0);
}

Trellis build_trellis_modified(const EmissionMatrix& m, const TokenSequence& s, double clamp) {
  return build_trellis(m, s, TrellisVariant::Modified, clamp);
}

FramePath make_frame_path(std::vector<std::size_t> token_at_frame, std::size_t num_tokens) {
  FramePath p;
  p.enter_frame.assign(num_tokens, 0);
  p.exit_frame.assign(num_tokens, 0);
  for (std::size_t t = 0; t < token_at_frame.size(); ++t) {
    const std::size_t j = token_at_frame[t];
    if (t == 0 || token_at_frame[t - 1] != j) p.enter_frame[j] = t;
    p.exit_frame[j] = t + 1;
  }
  p.token_at_frame = std::move(token_at_frame);
  return p;
}

double path_score(const FramePath& p, const EmissionMatrix& m, const TokenSequence& s,
                  TrellisVariant variant, double clamp) {
  double score = switch_logprob(m, s, p.token_at_frame[0], 0);
  for (std::size_t t = 1; t < p.token_at_frame.size(); ++t) {
    const std::size_t j = p.token_at_frame[t];
    score += (j == p.token_at_frame[t - 1]) ? stay_logprob(m, s, j, t, variant, clamp)
                                            : switch_logprob(m, s, j, t);
  }
  return score;
}

FramePath backtrack(const Trellis& tr, const EmissionMatrix& m, const TokenSequence& s) {
  if (!std::isfinite(tr.corner())) {
    throw Error(ErrorCode::NoPath, "no alignment path has finite probability");
  }
  const std::size_t num_frames = tr.num_frames();
  std::vector<std::size_t> token_at_frame(num_frames, 0);
  std::size_t j = tr.num_tokens() - 1;
  for (std::size_t t = num_frames - 1; t > 0; --t) {
    token_at_frame[t] = j;
    if (j == 0) continue;
    const double stay = tr.at(j, t - 1) + stay_logprob(m, s, j, t, tr.variant(), tr.clamp());
    const double change = tr.at(j - 1, t - 1) + switch_logprob(m, s, j, t);
    if (change > stay) --j;
  }
  token_at_frame[0] = j;
  if (j != 0) throw Error(ErrorCode::NoPath, "backtrack did not reach the first token");
  return make_frame_path(std::move(token_at_frame), tr.num_tokens());
}

std::vector<WordTiming> path_to_word_timings(const FramePath& p, const TokenSequence& s,
                                             double frame_duration) {
  std::vector<WordTiming> out;
  out.reserve(s.word_spans.size());
  for (const auto& span : s.word_spans) {
    WordTiming w;
    w.word_index = span.word_index;
    w.text = span.word_index < s.words.size() ? s.words[span.word_index] : std::string();
    w.start = static_cast<double>(p.enter_frame[span.first_token]) * frame_duration;
    w.end = static_cast<double>(p.exit_frame[span.last_token]) * frame_duration;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<WordTiming> align_ctc(const EmissionMatrix& m, const HypTranscript& hyp,
                                  TrellisVariant variant, double clamp) {
  const TokenSequence s = tokenize(hyp, m);
  const Trellis tr = build_trellis(m, s, variant, clamp);
  const FramePath p = backtrack(tr, m, s);
  return path_to_word_timings(p, s, m.frame_duration());
}

std::vector<std::pair<std::size_t, std::size_t>> dtw_token_frames(const AttentionMatrix& a) {
  a.validate();
  const std::size_t n = a.num_tokens;
  const std::size_t f = a.num_frames;
  std::vector<std::pair<std::size_t, std::size_t>> spans(n);

  const bool degenerate =
      std::all_of(a.weights.begin(), a.weights.end(), [](float w) { return w == 0.0f; });
  if (degenerate) {
    for (std::size_t i = 0; i < n; ++i) spans[i] = {i * f / n, (i + 1) * f / n};
    return spans;
  }

  // cost[i][j] = min over predecessors + (-weight); predecessors are the
  // diagonal, the previous frame, and the previous token.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(n * f, inf);
  auto at = [f](std::size_t i, std::size_t j) { return i * f + j; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      double best = (i == 0 && j == 0) ? 0.0 : inf;
      if (i > 0 && j > 0) best = std::min(best, cost[at(i - 1, j - 1)]);
      if (j > 0) best = std::min(best, cost[at(i, j - 1)]);
      if (i > 0) best = std::min(best, cost[at(i - 1, j)]);
      cost[at(i, j)] = best - a.weight(i, j);
    }
  }

  // Trace back; ties prefer the diagonal, then the previous frame.
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::size_t i = n - 1;
  std::size_t j = f - 1;
  cells.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = cost[at(i - 1, j - 1)];
      const double left = cost[at(i, j - 1)];
      const double up = cost[at(i - 1, j)];
      if (diag <= left && diag <= up) {
        --i;
        --j;
      } else if (left <= up) {
        --j;
      } else {
        --i;
      }
    } else if (j > 0) {
      --j;
    } else {
      --i;
    }
    cells.emplace_back(i, j);
  }
  std::reverse(cells.begin(), cells.end());

  std::vector<std::size_t> start(n, 0);
  for (std::size_t k = 1; k < cells.size(); ++k) {
    if (cells[k].first != cells[k - 1].first) start[cells[k].first] = cells[k].second;
  }
  for (std::size_t t = 0; t < n; ++t) {
    spans[t] = {start[t], t + 1 < n ? start[t + 1] : f};
  }
  return spans;
}

std::vector<WordTiming> align_dtw_attention(const AttentionMatrix& a, const HypTranscript* hyp) {
  const auto spans = dtw_token_frames(a);
  std::vector<WordTiming> out;
  for (std::size_t t = 0; t < a.num_tokens; ++t) {
    const long word = a.token_to_word[t];
    if (word < 0) continue;
    const auto index = static_cast<std::size_t>(word);
    const double start = static_cast<double>(spans[t].first) * a.frame_duration;
    const double end = static_cast<double>(spans[t].second) * a.frame_duration;
    if (!out.empty() && out.back().word_index == index) {
      out.back().end = end;
      continue;
    }
    WordTiming w;
    w.word_index = index;
    if (hyp != nullptr && index < hyp->words.size()) w.text = hyp->words[index];
    w.start = start;
    w.end = end;
    out.push_back(std::move(w));
  }
  // Tokens sharing a boundary frame can leave a word with no frames of its
  // own; such words carry no timing.
  std::erase_if(out, [](const WordTiming& w) { return !(w.start < w.end); });
  return out;
}

ScoredPath brute_force_best_path(const EmissionMatrix& m, const TokenSequence& s,
                                 TrellisVariant variant, double clamp) {
  const std::size_t num_frames = m.num_frames();
  const std::size_t num_tokens = s.size();
  if (num_frames > 12 || num_tokens > 6) {
    throw Error(ErrorCode::InstanceTooLarge, "brute force limited to T <= 12 and U <= 6");
  }
  if (num_frames < num_tokens) {
    throw Error(ErrorCode::PathInfeasible, "fewer frames than tokens");
  }

  ScoredPath best;
  // Each of the T-1 transitions is a stay (bit 0) or a switch (bit 1); a
  // valid path has exactly U-1 switches.
  const std::size_t steps = num_frames - 1;
  for (std::size_t mask = 0; mask < (std::size_t{1} << steps); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != num_tokens - 1) continue;
    std::vector<std::size_t> token_at_frame(num_frames, 0);
    double score = m.logprob(0, s.tokens[0]);
    std::size_t j = 0;
    for (std::size_t t = 1; t < num_frames; ++t) {
      if (mask & (std::size_t{1} << (t - 1))) {
        ++j;
        score += m.logprob(t, s.tokens[j]);
      } else {
        double stay = m.logprob(t, m.blank_index());
        if (variant == TrellisVariant::Modified && s.tokens[j] == m.separator_index()) {
          stay = stay > clamp ? stay : clamp;
        }
        score += stay;
      }
      token_at_frame[t] = j;
    }
    if (score > best.score || best.path.token_at_frame.empty()) {
      best.score = score;
      best.path = make_frame_path(std::move(token_at_frame), num_tokens);
    }
  }
  return best;
}

}  // namespace gapalign
