#include "gapalign/segmenter.hpp"

#include <algorithm>
#include <optional>

namespace gapalign {

namespace {

double cut_point(std::span<const RefWord> words, std::size_t after) {
  return (words[after].end + words[after + 1].start) / 2.0;
}

// Stage 2 for one segment: recursively cut at the widest eligible silence.
void split_long(std::span<const RefWord> words, const Segment& seg, const SegmenterConfig& config,
                std::vector<Segment>& out) {
  if (seg.duration() <= config.max_segment) {
    out.push_back(seg);
    return;
  }
  std::optional<std::size_t> best;
  double best_width = -1.0;
  for (std::size_t i = seg.first_word; i < seg.last_word; ++i) {
    const double cut = cut_point(words, i);
    if (cut - seg.start < config.edge_distance || seg.end - cut < config.edge_distance) continue;
    const double width = words[i + 1].start - words[i].end;
    // Strictly wider wins, so ties keep the earliest silence.
    if (width > best_width) {
      best = i;
      best_width = width;
    }
  }
  if (!best) {
    out.push_back(seg);
    return;
  }
  const double cut = cut_point(words, *best);
  split_long(words, {seg.start, cut, seg.first_word, *best}, config, out);
  split_long(words, {cut, seg.end, *best + 1, seg.last_word}, config, out);
}

}  // namespace

std::vector<Segment> plan_segments(std::span<const RefWord> words, double total_duration,
                                   const SegmenterConfig& config) {
  std::vector<Segment> out;
  if (words.empty()) return out;

  const double end = std::max(total_duration, words.back().end);
  Segment current{0.0, end, 0, words.size() - 1};
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    if (words[i + 1].start - words[i].end > config.silence_split) {
      const double cut = cut_point(words, i);
      split_long(words, {current.start, cut, current.first_word, i}, config, out);
      current = {cut, end, i + 1, words.size() - 1};
    }
  }
  split_long(words, current, config, out);
  return out;
}

}  // namespace gapalign
