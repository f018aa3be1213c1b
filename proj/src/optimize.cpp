#include "segcurate/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace segcurate {

void validate_optimize_config(const OptimizeConfig& cfg) {
  if (cfg.delta_theta_deg <= 0.0 || cfg.delta_theta_deg >= 180.0)
    throw ConfigError("optimize.delta_theta_deg must lie in (0, 180)");
  if (cfg.zero_vec_eps <= 0.0) throw ConfigError("optimize.zero_vec_eps must be > 0");
}

namespace {

double angle_deg(const Vec3& u, const Vec3& v) {
  const double c = std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

}  // namespace

std::vector<int> greedy_optimize(const std::vector<Vec3>& positions, const OptimizeConfig& cfg) {
  validate_optimize_config(cfg);
  const int n = static_cast<int>(positions.size());
  if (n == 0) throw DataError("greedy_optimize: empty position list");
  if (n == 1) return {1};

  auto pos = [&](int i) -> const Vec3& { return positions[i - 1]; };

  double delta_s = 0.0;
  for (int i = 1; i < n; ++i) delta_s = std::max(delta_s, (pos(i + 1) - pos(i)).norm());

  std::vector<int> remaining;
  for (int i = 2; i <= n; ++i) remaining.push_back(i);
  std::vector<int> retained{1};
  int j = 1;

  auto take = [&](int k) {
    retained.push_back(k);
    remaining.erase(std::find(remaining.begin(), remaining.end(), k));
    j = k;
  };

  while (std::find(retained.begin(), retained.end(), n) == retained.end()) {
    const Vec3 goal = pos(n) - pos(j);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    if (goal.norm() >= cfg.zero_vec_eps) {
      for (int k : remaining) {
        const Vec3 u = pos(k) - pos(j);
        if (u.norm() < cfg.zero_vec_eps) continue;  // angle undefined
        if (angle_deg(u, goal) > cfg.delta_theta_deg) continue;
        const double d = u.norm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
    }
    if (best < 0) {
      // Fallback: nearest point at least one maximum step length away.
      for (int k : remaining) {
        const double d = (pos(k) - pos(j)).norm();
        if (d < delta_s) continue;
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
    }
    if (best < 0) best = n;  // nothing reachable: close out at the endpoint
    take(best);
  }
  std::sort(retained.begin(), retained.end());
  return retained;
}

std::vector<int> greedy_optimize(const Segment& seg, const OptimizeConfig& cfg) {
  std::vector<Vec3> positions;
  positions.reserve(seg.steps.size());
  for (const auto& s : seg.steps) positions.push_back(s.obs.ee_pose.position);
  return greedy_optimize(positions, cfg);
}

OptimizedSegment relabel(const Segment& seg, std::vector<int> retained) {
  const int n = seg.length();
  if (n < 1) throw DataError("relabel: empty segment");
  std::sort(retained.begin(), retained.end());
  if (retained.empty() || retained.front() != 1 || retained.back() != n ||
      std::adjacent_find(retained.begin(), retained.end()) != retained.end())
    throw DataError("relabel: retained indices must be unique and include 1 and " + std::to_string(n));

  std::vector<bool> kept(n + 1, false);
  for (int k : retained) {
    if (k < 1 || k > n) throw DataError("relabel: retained index out of range");
    kept[k] = true;
  }

  OptimizedSegment out;
  out.original = seg;
  out.retained = std::move(retained);
  out.relabeled = seg.steps;
  // Every step inherits the action of the first step whose successor is a
  // retained waypoint, so each action keeps steering toward the next kept
  // point; the final action already targets the endpoint and stays as is.
  int src = n;
  for (int t = n - 1; t >= 1; --t) {
    if (kept[t + 1]) src = t;
    out.relabeled[t - 1].act = seg.steps[src - 1].act;
  }
  return out;
}

std::vector<OptimizedSegment> optimize_negatives(const std::vector<Segment>& segs,
                                                 const OptimizeConfig& cfg,
                                                 ActionKind kind) {
  std::vector<OptimizedSegment> out;
  out.reserve(segs.size());
  for (const auto& seg : segs) {
    Segment work = seg;
    if (kind == ActionKind::Relative)
      for (auto& s : work.steps) s.act.target = compose(s.obs.ee_pose, s.act.target);
    OptimizedSegment opt = relabel(work, greedy_optimize(work, cfg));
    if (kind == ActionKind::Relative)
      for (auto& s : opt.relabeled) s.act.target = relative_between(s.obs.ee_pose, s.act.target);
    opt.original = seg;
    out.push_back(std::move(opt));
  }
  return out;
}

double path_length(const Segment& seg, const std::vector<int>& indices) {
  std::vector<int> idx = indices;
  if (idx.empty())
    for (int i = 1; i <= seg.length(); ++i) idx.push_back(i);
  double len = 0.0;
  for (std::size_t i = 1; i < idx.size(); ++i)
    len += (seg.steps[idx[i] - 1].obs.ee_pose.position - seg.steps[idx[i - 1] - 1].obs.ee_pose.position).norm();
  return len;
}

}  // namespace segcurate
