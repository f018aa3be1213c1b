#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "segcurate/core.hpp"

namespace segcurate::testing {

inline Step make_step(const Vec3& pos, double gripper = 1.0) {
  Step s;
  s.obs.ee_pose.position = pos;
  s.obs.gripper = gripper;
  s.act.target.position = pos;
  s.act.gripper_cmd = gripper;
  return s;
}

/// Demo whose actions target the next observation (last action targets
/// itself), matching the generator's convention.
inline Demonstration make_demo(const std::string& id, const std::vector<Vec3>& positions,
                               const std::vector<double>& grippers, double dt = 0.05) {
  Demonstration d;
  d.id = id;
  d.dt = dt;
  for (std::size_t i = 0; i < positions.size(); ++i)
    d.steps.push_back(make_step(positions[i], grippers.empty() ? 1.0 : grippers[i]));
  for (std::size_t i = 0; i + 1 < d.steps.size(); ++i) d.steps[i].act = d.steps[i + 1].act;
  return d;
}

inline Segment make_segment(const std::vector<Vec3>& positions, const std::string& demo_id = "demo") {
  Segment seg;
  seg.demo_id = demo_id;
  seg.start = 1;
  seg.end = static_cast<int>(positions.size());
  for (const auto& p : positions) seg.steps.push_back(make_step(p));
  return seg;
}

/// Unique scratch directory under the system temp dir, wiped on construction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("segcurate_test_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace segcurate::testing
