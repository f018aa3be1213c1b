#include "segcurate/core.hpp"

#include <cmath>

namespace segcurate {

namespace {

constexpr double kQuatTol = 1e-6;

std::string at(const std::string& where, const std::string& field) {
  return where.empty() ? field : where + ": " + field;
}

bool finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

void check_pose(const Pose& p, const std::string& ctx) {
  if (!finite(p.position)) throw DataError(ctx + ".pos: non-finite value");
  const double n = p.orientation.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kQuatTol)
    throw DataError(ctx + ".quat: norm deviates from 1 by more than 1e-6");
}

void check_gripper(double g, const std::string& ctx) {
  if (!std::isfinite(g) || g < 0.0 || g > 1.0)
    throw DataError(ctx + ": gripper value outside [0, 1]");
}

}  // namespace

void validate_demo(const Demonstration& demo, const std::string& where) {
  if (demo.id.empty()) throw DataError(at(where, "id: empty"));
  if (!(demo.dt > 0.0) || !std::isfinite(demo.dt))
    throw DataError(at(where, "dt: must be a positive finite number"));
  if (demo.steps.size() < 2)
    throw DataError(at(where, "steps: demonstration must contain at least 2 steps"));
  for (std::size_t i = 0; i < demo.steps.size(); ++i) {
    const std::string step = at(where, "steps[" + std::to_string(i) + "]");
    const Step& s = demo.steps[i];
    check_pose(s.obs.ee_pose, step + ".obs");
    check_gripper(s.obs.gripper, step + ".obs.gripper");
    for (double v : s.obs.proprio)
      if (!std::isfinite(v)) throw DataError(step + ".obs.proprio: non-finite value");
    check_pose(s.act.target, step + ".act");
    check_gripper(s.act.gripper_cmd, step + ".act.gripper");
  }
}

Pose compose(const Pose& base, const Pose& delta) {
  Pose out;
  out.position = base.position + base.orientation * delta.position;
  out.orientation = (base.orientation * delta.orientation).normalized();
  return out;
}

Pose relative_between(const Pose& base, const Pose& target) {
  Pose out;
  const Quat inv = base.orientation.conjugate();
  out.position = inv * (target.position - base.position);
  out.orientation = (inv * target.orientation).normalized();
  return out;
}

Demonstration relative_to_absolute(const Demonstration& demo) {
  if (demo.action_kind != ActionKind::Relative)
    throw DataError("relative_to_absolute: demo '" + demo.id + "' does not carry relative actions");
  Demonstration out = demo;
  out.action_kind = ActionKind::Absolute;
  for (auto& step : out.steps) step.act.target = compose(step.obs.ee_pose, step.act.target);
  return out;
}

Demonstration absolute_to_relative(const Demonstration& demo) {
  if (demo.action_kind != ActionKind::Absolute)
    throw DataError("absolute_to_relative: demo '" + demo.id + "' does not carry absolute actions");
  Demonstration out = demo;
  out.action_kind = ActionKind::Relative;
  for (auto& step : out.steps) step.act.target = relative_between(step.obs.ee_pose, step.act.target);
  return out;
}

std::string quality_to_string(SourceQuality q) {
  switch (q) {
    case SourceQuality::Expert: return "expert";
    case SourceQuality::Suboptimal: return "suboptimal";
    default: return "unknown";
  }
}

SourceQuality quality_from_string(const std::string& s, const std::string& where) {
  if (s == "expert") return SourceQuality::Expert;
  if (s == "suboptimal") return SourceQuality::Suboptimal;
  if (s == "unknown") return SourceQuality::Unknown;
  throw DataError(at(where, "source_quality: unknown value '" + s + "'"));
}

}  // namespace segcurate
