#include "segcurate/segmentation.hpp"

#include <algorithm>
#include <set>

namespace segcurate {

void validate_segmentation_config(const SegmentationConfig& cfg) {
  if (!(cfg.velocity_eps > 0.0)) throw ConfigError("segmentation.velocity_eps must be > 0");
  if (!(cfg.gripper_toggle_threshold > 0.0 && cfg.gripper_toggle_threshold < 1.0))
    throw ConfigError("segmentation.gripper_toggle_threshold must lie in (0, 1)");
  if (cfg.debounce_window < 1) throw ConfigError("segmentation.debounce_window must be >= 1");
  if (cfg.min_segment_len < 2) throw ConfigError("segmentation.min_segment_len must be >= 2");
}

std::vector<int> find_keyframes(const Demonstration& demo, const SegmentationConfig& cfg) {
  validate_segmentation_config(cfg);
  validate_demo(demo);
  const int T = demo.length();

  auto open = [&](int t) { return demo.steps[t - 1].obs.gripper >= cfg.gripper_toggle_threshold; };
  auto pos = [&](int t) -> const Vec3& { return demo.steps[t - 1].obs.ee_pose.position; };

  std::set<int> toggles;
  for (int t = 1; t <= T - 1; ++t)
    if (open(t) != open(t + 1)) toggles.insert(t);

  // Midpoints of maximal low-speed runs, one per run, short runs ignored.
  std::vector<int> velocity;
  int run_start = 0;
  for (int t = 1; t <= T; ++t) {
    const bool low = t <= T - 1 && (pos(t + 1) - pos(t)).norm() / demo.dt < cfg.velocity_eps;
    if (low && run_start == 0) run_start = t;
    if (!low && run_start != 0) {
      const int run_len = t - run_start;
      if (run_len >= cfg.debounce_window) velocity.push_back(run_start + (run_len - 1) / 2);
      run_start = 0;
    }
  }

  // Merge candidates in ascending order; a toggle wins over a coinciding
  // velocity midpoint and is never dropped for proximity.
  std::set<int> keyframes{1, T};
  std::vector<std::pair<int, bool>> candidates;  // (index, is_toggle)
  for (int t : toggles)
    if (t > 1 && t < T) candidates.emplace_back(t, true);
  for (int t : velocity)
    if (t > 1 && t < T && !toggles.count(t)) candidates.emplace_back(t, false);
  std::sort(candidates.begin(), candidates.end());

  int last_accepted = 1;
  for (auto [t, is_toggle] : candidates) {
    if (!is_toggle && t - last_accepted < cfg.min_segment_len) continue;
    keyframes.insert(t);
    last_accepted = t;
  }
  return {keyframes.begin(), keyframes.end()};
}

std::vector<Segment> segment_demo(const Demonstration& demo, const SegmentationConfig& cfg) {
  validate_segmentation_config(cfg);
  validate_demo(demo);
  const int T = demo.length();

  auto slice = [&](int start, int end) {
    Segment s;
    s.demo_id = demo.id;
    s.start = start;
    s.end = end;
    s.steps.assign(demo.steps.begin() + (start - 1), demo.steps.begin() + end);
    return s;
  };

  if (T < 2 * cfg.min_segment_len) return {slice(1, T)};

  const std::vector<int> keyframes = find_keyframes(demo, cfg);
  std::vector<Segment> out;
  int start = 1;
  for (std::size_t i = 1; i < keyframes.size(); ++i) {
    const int close = keyframes[i];
    const bool last = i + 1 == keyframes.size();
    if (close - start + 1 < 2) {
      // A one-step tile from adjacent keyframes: fold it into the next tile,
      // or for the final boundary extend the previously emitted segment.
      if (!last) continue;
      if (out.empty()) return {slice(1, T)};
      const int prev_start = out.back().start;
      out.back() = slice(prev_start, T);
      return out;
    }
    out.push_back(slice(start, close));
    start = close + 1;
  }
  return out;
}

std::vector<Segment> segment_dataset(const Dataset& ds, const SegmentationConfig& cfg) {
  std::vector<Segment> out;
  for (const auto& demo : ds.demos) {
    auto segs = segment_demo(demo, cfg);
    out.insert(out.end(), std::make_move_iterator(segs.begin()), std::make_move_iterator(segs.end()));
  }
  return out;
}

}  // namespace segcurate
