#include "segcurate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "segcurate/rng.hpp"

namespace segcurate {

using nlohmann::json;

namespace {

// Minimum jerk interpolation coefficient: zero velocity and acceleration at
// both ends, c(0) = 0, c(1) = 1.
double min_jerk(double s) {
  const double s3 = s * s * s;
  return 10.0 * s3 - 15.0 * s3 * s + 6.0 * s3 * s * s;
}

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("synth.noise.") + name + " must lie in [0, 1]");
}

}  // namespace

void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.n_expert < 0 || cfg.n_suboptimal < 0 || cfg.n_expert + cfg.n_suboptimal < 1)
    throw ConfigError("synth: need at least one demonstration");
  if (cfg.subtasks < 1) throw ConfigError("synth.subtasks must be >= 1");
  if (!(cfg.hz > 0.0)) throw ConfigError("synth.hz must be > 0");
  if (!(cfg.subtask_duration > 0.0)) throw ConfigError("synth.subtask_duration must be > 0");
  const int steps = static_cast<int>(std::lround(cfg.hz * cfg.subtask_duration));
  if (steps < 8) throw ConfigError("synth: hz * subtask_duration must give at least 8 steps per subtask");
  for (int i = 0; i < 3; ++i)
    if (!(cfg.workspace_min[i] < cfg.workspace_max[i]))
      throw ConfigError("synth: workspace_min must be componentwise below workspace_max");
  if (cfg.waypoint_jitter < 0.0) throw ConfigError("synth.waypoint_jitter must be >= 0");
  check_prob(cfg.noise.corrupt_prob, "corrupt_prob");
  check_prob(cfg.noise.detour_prob, "detour_prob");
  check_prob(cfg.noise.pause_prob, "pause_prob");
  check_prob(cfg.noise.gripper_fumble_prob, "gripper_fumble_prob");
  if (cfg.noise.jitter_sigma < 0.0) throw ConfigError("synth.noise.jitter_sigma must be >= 0");
  if (cfg.noise.detour_amplitude < 0.0) throw ConfigError("synth.noise.detour_amplitude must be >= 0");
  if (cfg.noise.pause_len < 1) throw ConfigError("synth.noise.pause_len must be >= 1");
  if (cfg.noise.fumble_len < 1) throw ConfigError("synth.noise.fumble_len must be >= 1");
}

namespace {

Vec3 clamp_box(const Vec3& p, const SynthConfig& cfg) {
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = std::clamp(p[i], cfg.workspace_min[i], cfg.workspace_max[i]);
  return out;
}

/// Task waypoints shared by every demo, kept well separated so subtask
/// motions stay fast enough to not register as pauses.
std::vector<Vec3> task_waypoints(const SynthConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0));
  const Vec3 extent = cfg.workspace_max - cfg.workspace_min;
  const double min_sep = 0.3 * extent.norm();
  auto draw = [&] {
    return Vec3(rng.uniform(cfg.workspace_min.x(), cfg.workspace_max.x()),
                rng.uniform(cfg.workspace_min.y(), cfg.workspace_max.y()),
                rng.uniform(cfg.workspace_min.z(), cfg.workspace_max.z()));
  };
  std::vector<Vec3> w{draw()};
  for (int k = 1; k <= cfg.subtasks; ++k) {
    Vec3 best = draw();
    double best_d = (best - w.back()).norm();
    for (int tries = 0; tries < 200 && best_d < min_sep; ++tries) {
      const Vec3 c = draw();
      const double d = (c - w.back()).norm();
      if (d > best_d) {
        best = c;
        best_d = d;
      }
    }
    w.push_back(best);
  }
  return w;
}

struct DemoBuild {
  std::vector<Vec3> positions;
  std::vector<double> grippers;
  DemoTruth truth;
};

DemoBuild build_demo(const SynthConfig& cfg, const std::vector<Vec3>& base_waypoints,
                     bool suboptimal, Rng& rng) {
  const int steps = static_cast<int>(std::lround(cfg.hz * cfg.subtask_duration));
  const NoiseProfile& noise = cfg.noise;

  std::vector<Vec3> w(base_waypoints.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    Vec3 wobble(rng.normal(0.0, cfg.waypoint_jitter), rng.normal(0.0, cfg.waypoint_jitter),
                rng.normal(0.0, cfg.waypoint_jitter));
    w[i] = clamp_box(base_waypoints[i] + wobble, cfg);
  }

  DemoBuild b;
  auto grip_state = [](int k) { return k % 2 == 0 ? 1.0 : 0.0; };  // open before subtask 1
  b.positions.push_back(w[0]);
  b.grippers.push_back(grip_state(0));

  for (int k = 1; k <= static_cast<int>(w.size()) - 1; ++k) {
    const Vec3& a = w[k - 1];
    const Vec3& bp = w[k];
    std::vector<Vec3> local(steps);
    for (int j = 1; j <= steps; ++j)
      local[j - 1] = a + (bp - a) * min_jerk(static_cast<double>(j) / steps);

    const bool corrupted = suboptimal && rng.uniform01() < noise.corrupt_prob;
    int pause_at = 0;   // local index whose pose gets repeated
    int fumble_at = 0;  // first local index of a spurious gripper flip
    if (corrupted) {
      for (int j = 1; j <= steps - 1; ++j) {
        const Vec3 jit(rng.normal(0.0, noise.jitter_sigma), rng.normal(0.0, noise.jitter_sigma),
                       rng.normal(0.0, noise.jitter_sigma));
        local[j - 1] += jit;
      }
      if (rng.uniform01() < noise.detour_prob) {
        const int m = steps / 4 + static_cast<int>(rng.uniform_index(std::max(1, steps / 2)));
        const Vec3 dir = rng.unit_vector();
        const double width = std::max(2.0, steps / 8.0);
        for (int j = 1; j <= steps - 1; ++j) {
          const double f = std::exp(-0.5 * (j - m) * (j - m) / (width * width));
          local[j - 1] += dir * (noise.detour_amplitude * f);
        }
      }
      if (rng.uniform01() < noise.pause_prob)
        pause_at = steps / 4 + static_cast<int>(rng.uniform_index(std::max(1, steps / 2)));
      if (rng.uniform01() < noise.gripper_fumble_prob)
        fumble_at = steps / 5 + static_cast<int>(rng.uniform_index(std::max(1, steps / 2)));
    }

    const double g_base = grip_state(k - 1);
    for (int j = 1; j <= steps; ++j) {
      const bool flipped = fumble_at > 0 && j >= fumble_at && j < fumble_at + noise.fumble_len;
      const double g = flipped ? 1.0 - g_base : g_base;
      b.positions.push_back(local[j - 1]);
      b.grippers.push_back(g);
      if (j == pause_at) {
        const int center = static_cast<int>(b.positions.size()) + (noise.pause_len - 1) / 2;
        b.truth.pause_centers.push_back(center);
        for (int r = 0; r < noise.pause_len; ++r) {
          b.positions.push_back(local[j - 1]);
          b.grippers.push_back(g);
        }
      }
    }
    // The gripper toggles cleanly right after each interior boundary.
    b.truth.boundaries.push_back(static_cast<int>(b.positions.size()));
    b.truth.corrupted.push_back(corrupted);
  }
  return b;
}

Demonstration assemble(const SynthConfig& cfg, DemoBuild& b, const std::string& id, bool suboptimal) {
  Demonstration d;
  d.id = id;
  d.dt = 1.0 / cfg.hz;
  d.action_kind = ActionKind::Absolute;
  d.source_quality = suboptimal ? SourceQuality::Suboptimal : SourceQuality::Expert;
  const int T = static_cast<int>(b.positions.size());
  d.steps.resize(T);
  for (int t = 1; t <= T; ++t) {
    Step& s = d.steps[t - 1];
    s.obs.ee_pose.position = b.positions[t - 1];
    s.obs.gripper = b.grippers[t - 1];
    const int nxt = std::min(t + 1, T);
    s.act.target.position = b.positions[nxt - 1];
    s.act.gripper_cmd = b.grippers[nxt - 1];
  }
  return d;
}

std::string pad3(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", i);
  return buf;
}

}  // namespace

const DemoTruth* GroundTruth::find(const std::string& demo_id) const {
  for (const auto& d : demos)
    if (d.demo_id == demo_id) return &d;
  return nullptr;
}

SynthResult generate(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  const std::vector<Vec3> waypoints = task_waypoints(cfg);

  SynthResult out;
  const int total = cfg.n_expert + cfg.n_suboptimal;
  for (int i = 0; i < total; ++i) {
    const bool suboptimal = i >= cfg.n_expert;
    const std::string id = suboptimal ? "subopt_" + pad3(i - cfg.n_expert) : "expert_" + pad3(i);
    Rng rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(i)));
    DemoBuild b = build_demo(cfg, waypoints, suboptimal, rng);
    b.truth.demo_id = id;
    out.dataset.demos.push_back(assemble(cfg, b, id, suboptimal));
    out.truth.demos.push_back(std::move(b.truth));
  }
  return out;
}

void save_truth(const GroundTruth& truth, const std::string& path) {
  json demos = json::array();
  for (const auto& d : truth.demos) {
    json j;
    j["demo_id"] = d.demo_id;
    j["boundaries"] = d.boundaries;
    j["corrupted"] = d.corrupted;
    j["pause_centers"] = d.pause_centers;
    demos.push_back(std::move(j));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open truth file for writing: " + path);
  out << json{{"demos", std::move(demos)}}.dump(2) << "\n";
  if (!out) throw DataError("failed writing truth file: " + path);
}

GroundTruth load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open truth file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  GroundTruth t;
  if (!j.contains("demos") || !j["demos"].is_array())
    throw DataError(path + ": demos: missing or not an array");
  for (const auto& dj : j["demos"]) {
    DemoTruth d;
    if (!dj.contains("demo_id") || !dj["demo_id"].is_string())
      throw DataError(path + ": demo_id: missing field");
    d.demo_id = dj["demo_id"].get<std::string>();
    for (const auto& v : dj.value("boundaries", json::array())) d.boundaries.push_back(v.get<int>());
    for (const auto& v : dj.value("corrupted", json::array())) d.corrupted.push_back(v.get<bool>());
    for (const auto& v : dj.value("pause_centers", json::array())) d.pause_centers.push_back(v.get<int>());
    if (d.boundaries.size() != d.corrupted.size())
      throw DataError(path + ": " + d.demo_id + ": boundaries and corrupted must align");
    t.demos.push_back(std::move(d));
  }
  return t;
}

}  // namespace segcurate
