#pragma once

#include <vector>

#include "segcurate/core.hpp"

namespace segcurate {

struct OptimizeConfig {
  double delta_theta_deg = 75.0;  // angular gate toward the segment goal
  double zero_vec_eps = 1e-9;     // vectors below this norm have no defined angle
};

void validate_optimize_config(const OptimizeConfig& cfg);

/// Greedy waypoint retention over a polyline of end effector positions
/// (1-based indices). The first point is always retained; from the latest
/// retained point j, candidates are the not-yet-retained points whose
/// direction from j stays within delta_theta of the direction toward the
/// final point, and the nearest candidate is taken (ties go to the smallest
/// index). When no candidate passes the gate, points at least one maximum
/// consecutive step length away qualify instead; when that also leaves
/// nothing, the final point is appended and the walk ends. Returns the
/// sorted retained indices, always containing 1 and n.
std::vector<int> greedy_optimize(const std::vector<Vec3>& positions, const OptimizeConfig& cfg);

/// Convenience overload over a segment's observation positions.
std::vector<int> greedy_optimize(const Segment& seg, const OptimizeConfig& cfg);

struct OptimizedSegment {
  Segment original;
  std::vector<int> retained;       // segment-local 1-based indices, sorted
  std::vector<Step> relabeled;     // same length as original.steps
};

/// Action relabeling that keeps every timestep: each step's action becomes
/// the action of the first step whose successor is retained, and the final
/// action is unchanged. Observations are untouched. Actions must be
/// Absolute world targets for the copied actions to stay meaningful; the
/// dataset-level wrapper below handles Relative conversion.
OptimizedSegment relabel(const Segment& seg, std::vector<int> retained);

/// Runs greedy retention plus relabeling over each segment; the pipeline
/// feeds the negative-classified segments through here. Relative actions
/// are converted to Absolute targets first and converted back by
/// recomputing each delta from its own observation pose.
std::vector<OptimizedSegment> optimize_negatives(const std::vector<Segment>& segs,
                                                 const OptimizeConfig& cfg,
                                                 ActionKind kind);

/// Sum of consecutive position distances over the given 1-based indices
/// (or over all steps when indices is empty).
double path_length(const Segment& seg, const std::vector<int>& indices = {});

}  // namespace segcurate
