#pragma once

#include <vector>

#include "segcurate/core.hpp"

namespace segcurate {

struct SegmentationConfig {
  double velocity_eps = 0.005;          // m/s; speeds below this count as paused
  double gripper_toggle_threshold = 0.5;  // >= threshold binarizes to open
  int debounce_window = 5;              // low-speed runs shorter than this are ignored
  int min_segment_len = 4;              // velocity keyframes closer than this are dropped
};

void validate_segmentation_config(const SegmentationConfig& cfg);

/// Heuristic keyframe detection. Returns sorted 1-based indices, always
/// including 1 and T. Interior keyframes are gripper binarization toggles
/// (between t and t+1) and midpoints of debounced low-speed runs; velocity
/// keyframes closer than min_segment_len to an already accepted keyframe
/// are dropped (earlier wins, toggles are never dropped).
std::vector<int> find_keyframes(const Demonstration& demo, const SegmentationConfig& cfg);

/// Tiles the demo into contiguous segments [k_1..k_2], [k_2+1..k_3], ...
/// Adjacent keyframes that would produce a segment shorter than 2 steps are
/// merged into their neighbor. Demos shorter than 2 * min_segment_len come
/// back as a single whole-demo segment.
std::vector<Segment> segment_demo(const Demonstration& demo, const SegmentationConfig& cfg);

/// segment_demo over every demo, concatenated in dataset order.
std::vector<Segment> segment_dataset(const Dataset& ds, const SegmentationConfig& cfg);

}  // namespace segcurate
