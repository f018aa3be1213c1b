#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "segcurate/core.hpp"

namespace segcurate {

/// Per-subtask corruption model for suboptimal demos. Each subtask is
/// corrupted with probability corrupt_prob; a corrupted subtask always
/// receives waypoint jitter and additionally, with the listed
/// probabilities, a smooth detour bump, an inserted pause, or a gripper
/// fumble.
struct NoiseProfile {
  double corrupt_prob = 0.6;
  double jitter_sigma = 0.02;        // m, i.i.d. per coordinate
  double detour_prob = 0.5;
  double detour_amplitude = 0.1;     // m, peak of the bump
  double pause_prob = 0.3;
  int pause_len = 8;                 // inserted repeats of one pose
  double gripper_fumble_prob = 0.25;
  int fumble_len = 3;                // steps of spurious gripper flip
};

struct SynthConfig {
  int n_expert = 3;
  int n_suboptimal = 0;
  int subtasks = 3;                  // straight reach motions per demo
  double hz = 20.0;
  double subtask_duration = 2.0;     // seconds per subtask
  Vec3 workspace_min{-0.3, -0.3, 0.0};
  Vec3 workspace_max{0.3, 0.3, 0.4};
  double waypoint_jitter = 0.01;     // per-demo wobble of task waypoints, m
  NoiseProfile noise;
  std::uint64_t seed = 0;
};

/// Per-demo ground truth for evaluating segmentation and classification.
struct DemoTruth {
  std::string demo_id;
  std::vector<int> boundaries;       // 1-based last step of each subtask; back() == T
  std::vector<bool> corrupted;       // per subtask
  std::vector<int> pause_centers;    // expected low-speed keyframe indices
};

struct GroundTruth {
  std::vector<DemoTruth> demos;

  const DemoTruth* find(const std::string& demo_id) const;
};

struct SynthResult {
  Dataset dataset;    // expert demos first, then suboptimal
  GroundTruth truth;
};

void validate_synth_config(const SynthConfig& cfg);

/// Generates a pick-style task: a fixed chain of workspace waypoints reached
/// by minimum jerk straight line motions with clean gripper toggles at every
/// subtask boundary. Expert demos follow the chain exactly (up to per-demo
/// waypoint wobble); suboptimal demos corrupt subtasks per the noise
/// profile. Actions are Absolute and target the next observation.
/// Deterministic in cfg.seed; demo i draws from its own derived stream.
SynthResult generate(const SynthConfig& cfg);

void save_truth(const GroundTruth& truth, const std::string& path);
GroundTruth load_truth(const std::string& path);

}  // namespace segcurate
