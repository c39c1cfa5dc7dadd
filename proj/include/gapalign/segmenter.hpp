#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gapalign/data_io.hpp"

namespace gapalign {

struct SegmenterConfig {
  double silence_split = 5.0;   // stage 1: cut at every silence longer than this
  double max_segment = 30.0;    // stage 2: keep cutting segments longer than this
  double edge_distance = 10.0;  // stage 2 cut points stay this far from both edges
};

struct Segment {
  double start = 0.0;
  double end = 0.0;
  std::size_t first_word = 0;
  std::size_t last_word = 0;  // inclusive

  double duration() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Splits a long recording into segments over its reference word timings.
// Every cut sits at the midpoint of an inter-word silence. The outer segments
// extend to 0 and `total_duration`.
std::vector<Segment> plan_segments(std::span<const RefWord> words, double total_duration,
                                   const SegmenterConfig& config = {});

}  // namespace gapalign
