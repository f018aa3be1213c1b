#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "segcurate/optimize.hpp"
#include "segcurate/render.hpp"
#include "segcurate/repr.hpp"
#include "segcurate/segmentation.hpp"
#include "segcurate/select.hpp"
#include "segcurate/synth.hpp"

namespace segcurate {

enum class SelectionLevel { None, Demonstration, Segment };

std::string selection_level_to_string(SelectionLevel level);
SelectionLevel selection_level_from_string(const std::string& s);

/// Which curation stages run. Action relabeling requires trajectory
/// optimization; with selection level None every segment is treated
/// uniformly by the remaining switches.
struct PipelineSwitches {
  SelectionLevel selection_level = SelectionLevel::Segment;
  bool trajectory_optimization = true;
  bool action_relabeling = true;
};

/// Resolved run configuration. Stage seeds are derived from the top level
/// seed unless a config file pins them explicitly.
struct CurationConfig {
  int schema_version = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  SegmentationConfig segmentation;
  AugmentConfig augment;  // also carries the raster dimensions and focal
  TrainConfig train;
  VoteConfig vote;
  OptimizeConfig optimize;
  PipelineSwitches pipeline;
  SynthConfig synth;
};

/// Defaults with stage seeds derived from seed 1.
CurationConfig default_config();

/// Re-derives all stage seeds from the given top level seed.
void apply_seed(CurationConfig& cfg, std::uint64_t seed);

/// Throws ConfigError when any block is invalid or the switch combination
/// is inconsistent.
void validate_config(const CurationConfig& cfg);

/// Strict parser: unknown keys, wrong types and unsupported schema_version
/// are ConfigErrors. Missing keys keep their defaults; a top level "seed"
/// re-derives the stage seeds before explicit stage seeds are applied.
CurationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const CurationConfig& cfg);

CurationConfig load_config_file(const std::string& path);
void save_config_file(const CurationConfig& cfg, const std::string& path);

}  // namespace segcurate
