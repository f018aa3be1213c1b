#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <list>

#include "segcurate/optimize.hpp"
#include "segcurate/rng.hpp"

#include "helpers.hpp"

using namespace segcurate;
using testing::make_segment;

namespace {

// Literal step-by-step walk of the greedy retention rules, kept structurally
// different from the production version (linked list of survivors, acos-free
// angle gate) so the two cannot share a bug.
std::vector<int> reference_greedy(const std::vector<Vec3>& p, double delta_theta_deg,
                                  double eps) {
  const int n = static_cast<int>(p.size());
  if (n == 1) return {1};
  double delta_s = 0.0;
  for (int i = 0; i + 1 < n; ++i) delta_s = std::max(delta_s, (p[i + 1] - p[i]).norm());
  const double cos_gate = std::cos(delta_theta_deg * M_PI / 180.0);

  std::list<int> left;
  for (int i = 2; i <= n; ++i) left.push_back(i);
  std::vector<int> picked{1};
  int j = 1;
  while (true) {
    if (std::find(picked.begin(), picked.end(), n) != picked.end()) break;
    const Vec3 goal = p[n - 1] - p[j - 1];
    int choice = 0;
    double choice_d = 0.0;
    for (int k : left) {
      const Vec3 u = p[k - 1] - p[j - 1];
      if (goal.norm() < eps || u.norm() < eps) continue;
      const double c = u.dot(goal) / (u.norm() * goal.norm());
      if (std::clamp(c, -1.0, 1.0) < cos_gate) continue;
      if (choice == 0 || u.norm() < choice_d) {
        choice = k;
        choice_d = u.norm();
      }
    }
    if (choice == 0) {
      for (int k : left) {
        const double d = (p[k - 1] - p[j - 1]).norm();
        if (d >= delta_s && (choice == 0 || d < choice_d)) {
          choice = k;
          choice_d = d;
        }
      }
    }
    if (choice == 0) choice = n;
    picked.push_back(choice);
    left.remove(choice);
    j = choice;
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<Vec3> random_positions(Rng& rng) {
  // Integer lattice coordinates make exact duplicates, collinear runs and
  // zero goal vectors common, which is where the edge rules live.
  const int n = 2 + static_cast<int>(rng.uniform_index(29));
  std::vector<Vec3> p;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && rng.uniform01() < 0.15) {
      p.push_back(p.back());  // stationary repeat
      continue;
    }
    p.emplace_back(static_cast<double>(rng.uniform_index(5)), static_cast<double>(rng.uniform_index(5)),
                   static_cast<double>(rng.uniform_index(3)));
  }
  if (rng.uniform01() < 0.2) p.push_back(p.front());  // loop back to the start
  return p;
}

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("collinear monotone points are all retained") {
  const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  CHECK(greedy_optimize(p, {}) == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("detour point outside the angular gate is discarded") {
  const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {1, 2, 0}, {2, 0, 0}, {3, 0, 0}};
  CHECK(greedy_optimize(p, {}) == std::vector<int>{1, 2, 4, 5});
}

TEST_CASE("loop back routes through the step-length fallback") {
  const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {0, 0, 0}};
  CHECK(greedy_optimize(p, {}) == std::vector<int>{1, 2, 3});
}

TEST_CASE("stationary tail terminates by closing out at the endpoint") {
  // From index 2 the goal vector is zero and every survivor sits closer
  // than the maximum step, so the endpoint is appended directly.
  const std::vector<Vec3> p{{0, 0, 0}, {1, 0, 0}, {1, 0, 0}, {1, 0, 0}};
  CHECK(greedy_optimize(p, {}) == std::vector<int>{1, 2, 4});
}

TEST_CASE("2000 randomized polylines match the reference walk") {
  OptimizeConfig cfg;
  Rng rng(20240811);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto p = random_positions(rng);
    CAPTURE(trial);
    CHECK(greedy_optimize(p, cfg) == reference_greedy(p, cfg.delta_theta_deg, cfg.zero_vec_eps));
  }
}

TEST_CASE("retained set always contains both endpoints and is strictly increasing") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_positions(rng);
    const auto r = greedy_optimize(p, {});
    REQUIRE(!r.empty());
    CHECK(r.front() == 1);
    CHECK(r.back() == static_cast<int>(p.size()));
    CHECK(std::is_sorted(r.begin(), r.end()));
    CHECK(std::adjacent_find(r.begin(), r.end()) == r.end());
  }
}

TEST_CASE("relabeling follows the successor-retained rule") {
  auto seg = make_segment({{0, 0, 0}, {1, 0, 0}, {1, 2, 0}, {2, 0, 0}, {3, 0, 0}});
  // Distinguishable actions: target x = step index.
  for (int t = 1; t <= 5; ++t) seg.steps[t - 1].act.target.position = Vec3(t, 0, 0);

  const auto out = relabel(seg, {1, 2, 4, 5});
  REQUIRE(out.relabeled.size() == 5);
  const std::vector<double> want{1, 3, 3, 4, 5};
  for (int t = 1; t <= 5; ++t) {
    CAPTURE(t);
    CHECK(out.relabeled[t - 1].act.target.position.x() == want[t - 1]);
    // Observations never change.
    CHECK(out.relabeled[t - 1].obs.ee_pose.position == seg.steps[t - 1].obs.ee_pose.position);
  }
}

TEST_CASE("relabeling with only the endpoints retained repeats the penultimate action") {
  const int n = 6;
  std::vector<Vec3> p;
  for (int i = 0; i < n; ++i) p.emplace_back(i, 0, 0);
  auto seg = make_segment(p);
  for (int t = 1; t <= n; ++t) seg.steps[t - 1].act.target.position = Vec3(t, 0, 0);

  const auto out = relabel(seg, {1, n});
  for (int t = 1; t < n; ++t) CHECK(out.relabeled[t - 1].act.target.position.x() == n - 1);
  CHECK(out.relabeled[n - 1].act.target.position.x() == n);
}

TEST_CASE("retaining everything relabels to the identity") {
  Rng rng(3);
  std::vector<Vec3> p;
  for (int i = 0; i < 8; ++i) p.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
  auto seg = make_segment(p);
  std::vector<int> all;
  for (int i = 1; i <= 8; ++i) all.push_back(i);
  const auto out = relabel(seg, all);
  for (int t = 0; t < 8; ++t)
    CHECK(out.relabeled[t].act.target.position == seg.steps[t].act.target.position);
}

TEST_CASE("relabel validates the retained index list") {
  auto seg = make_segment({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
  CHECK_THROWS_AS(relabel(seg, {1}), DataError);              // missing endpoint
  CHECK_THROWS_AS(relabel(seg, {2, 3}), DataError);           // missing start
  CHECK_THROWS_AS(relabel(seg, {1, 2, 2, 3}), DataError);     // duplicate
  CHECK_THROWS_AS(relabel(seg, {1, 2, 3, 4}), DataError);     // out of range
}

TEST_CASE("relative actions survive the optimize round trip") {
  Rng rng(11);
  std::vector<Vec3> p{{0, 0, 0}, {0.3, 0, 0}, {0.3, 0.5, 0}, {0.6, 0.1, 0}, {0.9, 0, 0}};
  Segment seg = make_segment(p);
  // Absolute targets: the next observation.
  for (int t = 0; t + 1 < seg.length(); ++t)
    seg.steps[t].act.target.position = seg.steps[t + 1].obs.ee_pose.position;
  std::vector<Pose> abs_targets;
  for (const auto& s : seg.steps) abs_targets.push_back(s.act.target);
  // Convert to deltas in the observation frame, as a Relative demo stores them.
  for (auto& s : seg.steps) s.act.target = relative_between(s.obs.ee_pose, s.act.target);

  const auto out = optimize_negatives({seg}, {}, ActionKind::Relative);
  REQUIRE(out.size() == 1);
  REQUIRE(out[0].relabeled.size() == seg.steps.size());
  CHECK(out[0].original.steps[1].act.target.position == seg.steps[1].act.target.position);

  // t' per the rule, given the retained set of this geometry.
  const auto retained = out[0].retained;
  std::vector<bool> kept(seg.length() + 1, false);
  for (int k : retained) kept[k] = true;
  for (int t = 1; t <= seg.length(); ++t) {
    int src = seg.length();
    for (int c = t; c < seg.length(); ++c)
      if (kept[c + 1]) {
        src = c;
        break;
      }
    // Applying the emitted relative action from observation t must land on
    // the absolute target of the source action.
    const Pose landed = compose(seg.steps[t - 1].obs.ee_pose, out[0].relabeled[t - 1].act.target);
    CHECK(landed.position.isApprox(abs_targets[src - 1].position, 1e-12));
  }
}

TEST_CASE("path length drops when the detour point is discarded") {
  auto seg = make_segment({{0, 0, 0}, {1, 0, 0}, {1, 2, 0}, {2, 0, 0}, {3, 0, 0}});
  const auto retained = greedy_optimize(seg, {});
  CHECK(path_length(seg, retained) < path_length(seg));
  CHECK(path_length(seg) == doctest::Approx(1.0 + 2.0 + std::sqrt(5.0) + 1.0));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(validate_optimize_config({0.0, 1e-9}), ConfigError);
  CHECK_THROWS_AS(validate_optimize_config({180.0, 1e-9}), ConfigError);
  CHECK_THROWS_AS(validate_optimize_config({75.0, 0.0}), ConfigError);
  CHECK_NOTHROW(validate_optimize_config({75.0, 1e-9}));
}

}  // TEST_SUITE
