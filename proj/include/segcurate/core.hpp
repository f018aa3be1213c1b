#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace segcurate {

/// Invalid or inconsistent configuration. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or contract-violating data. CLI maps this to exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// End effector pose: world position plus unit quaternion (w, x, y, z).
struct Pose {
  Vec3 position{0.0, 0.0, 0.0};
  Quat orientation{1.0, 0.0, 0.0, 0.0};
};

enum class ActionKind { Absolute, Relative };
enum class SourceQuality { Expert, Suboptimal, Unknown };
enum class DatasetRole { Mixed, ExpertReference };
enum class QualityLabel : std::uint8_t { Positive, Negative };

struct Observation {
  Pose ee_pose;
  double gripper = 1.0;          // [0, 1], 0 closed, 1 open
  std::vector<double> proprio;   // optional extra state, may be empty
};

struct Action {
  Pose target;                   // world target (Absolute) or delta in the
                                 // current end effector frame (Relative)
  double gripper_cmd = 1.0;      // [0, 1]
};

struct Step {
  Observation obs;
  Action act;
};

struct Demonstration {
  std::string id;
  double dt = 0.05;
  ActionKind action_kind = ActionKind::Absolute;
  SourceQuality source_quality = SourceQuality::Unknown;  // evaluation only
  std::vector<Step> steps;

  int length() const { return static_cast<int>(steps.size()); }
};

struct Dataset {
  std::vector<Demonstration> demos;
  DatasetRole role = DatasetRole::Mixed;

  std::size_t total_steps() const {
    std::size_t n = 0;
    for (const auto& d : demos) n += d.steps.size();
    return n;
  }
};

/// Contiguous slice of one demonstration. Indices are 1-based and inclusive
/// in the source demo; steps holds a copy of the slice.
struct Segment {
  std::string demo_id;
  int start = 1;
  int end = 1;
  std::vector<Step> steps;

  int length() const { return static_cast<int>(steps.size()); }
};

/// Throws DataError when the demonstration violates its invariants
/// (length >= 2, unit quaternions, finite positions, gripper in [0, 1]).
/// `where` prefixes diagnostics, e.g. "file.jsonl:3".
void validate_demo(const Demonstration& demo, const std::string& where = {});

/// Applies a relative pose in the base frame:
///   pos = base.pos + base.quat * delta.pos, quat = base.quat * delta.quat.
Pose compose(const Pose& base, const Pose& delta);

/// Inverse of compose: the delta that carries base onto target.
Pose relative_between(const Pose& base, const Pose& target);

/// Rewrites Relative actions as Absolute world targets (and back). The
/// source demo must have the matching action kind; observations are
/// untouched and gripper commands pass through.
Demonstration relative_to_absolute(const Demonstration& demo);
Demonstration absolute_to_relative(const Demonstration& demo);

/// JSONL round trip. Numbers are written with 17 significant digits so a
/// load/save cycle reproduces byte-identical values. Diagnostics name the
/// file, line and offending field.
Dataset load_dataset(const std::string& path, DatasetRole role = DatasetRole::Mixed);
void save_dataset(const Dataset& ds, const std::string& path);

std::string quality_to_string(SourceQuality q);
SourceQuality quality_from_string(const std::string& s, const std::string& where);

}  // namespace segcurate
