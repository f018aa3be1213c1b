#include "segcurate/config.hpp"

#include <fstream>
#include <set>

#include "segcurate/rng.hpp"

namespace segcurate {

using nlohmann::json;

std::string selection_level_to_string(SelectionLevel level) {
  switch (level) {
    case SelectionLevel::None: return "none";
    case SelectionLevel::Demonstration: return "demonstration";
    default: return "segment";
  }
}

SelectionLevel selection_level_from_string(const std::string& s) {
  if (s == "none") return SelectionLevel::None;
  if (s == "demonstration") return SelectionLevel::Demonstration;
  if (s == "segment") return SelectionLevel::Segment;
  throw ConfigError("pipeline.selection_level: expected none, demonstration or segment, got '" + s + "'");
}

void apply_seed(CurationConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.augment.seed = derive_seed(seed, 1);
  cfg.train.seed = derive_seed(seed, 2);
  cfg.synth.seed = derive_seed(seed, 3);
}

CurationConfig default_config() {
  CurationConfig cfg;
  apply_seed(cfg, 1);
  return cfg;
}

void validate_config(const CurationConfig& cfg) {
  if (cfg.schema_version != 1)
    throw ConfigError("schema_version: only version 1 is supported");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  validate_segmentation_config(cfg.segmentation);
  validate_augment_config(cfg.augment);
  validate_train_config(cfg.train);
  validate_vote_config(cfg.vote);
  validate_optimize_config(cfg.optimize);
  validate_synth_config(cfg.synth);
  if (cfg.pipeline.action_relabeling && !cfg.pipeline.trajectory_optimization)
    throw ConfigError("pipeline: action_relabeling requires trajectory_optimization");
}

namespace {

void check_keys(const json& j, const std::string& ctx, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(ctx + ": unknown key '" + it.key() + "'");
}

double num(const json& j, const char* key, double fallback, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw ConfigError(ctx + "." + key + ": expected a number");
  return it->get<double>();
}

int integer(const json& j, const char* key, int fallback, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) throw ConfigError(ctx + "." + key + ": expected an integer");
  return it->get<int>();
}

std::uint64_t seed_value(const json& j, const char* key, std::uint64_t fallback, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) throw ConfigError(ctx + "." + key + ": expected an integer seed");
  return it->get<std::uint64_t>();
}

bool boolean(const json& j, const char* key, bool fallback, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) throw ConfigError(ctx + "." + key + ": expected a boolean");
  return it->get<bool>();
}

Vec3 vec3(const json& j, const char* key, const Vec3& fallback, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array() || it->size() != 3)
    throw ConfigError(ctx + "." + key + ": expected an array of 3 numbers");
  for (const auto& v : *it)
    if (!v.is_number()) throw ConfigError(ctx + "." + key + ": expected an array of 3 numbers");
  return Vec3((*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>());
}

void parse_segmentation(const json& j, SegmentationConfig& cfg) {
  check_keys(j, "segmentation",
             {"velocity_eps", "gripper_toggle_threshold", "debounce_window", "min_segment_len"});
  cfg.velocity_eps = num(j, "velocity_eps", cfg.velocity_eps, "segmentation");
  cfg.gripper_toggle_threshold =
      num(j, "gripper_toggle_threshold", cfg.gripper_toggle_threshold, "segmentation");
  cfg.debounce_window = integer(j, "debounce_window", cfg.debounce_window, "segmentation");
  cfg.min_segment_len = integer(j, "min_segment_len", cfg.min_segment_len, "segmentation");
}

void parse_render(const json& j, AugmentConfig& cfg) {
  check_keys(j, "render", {"width", "height", "focal"});
  cfg.width = integer(j, "width", cfg.width, "render");
  cfg.height = integer(j, "height", cfg.height, "render");
  cfg.focal = num(j, "focal", cfg.focal, "render");
}

void parse_augment(const json& j, AugmentConfig& cfg) {
  check_keys(j, "augment",
             {"n_positive", "n_negative", "radius_min", "radius_max", "plane_exclusion_deg",
              "jitter_sigma", "detour_prob", "detour_amplitude", "seed"});
  cfg.n_positive = integer(j, "n_positive", cfg.n_positive, "augment");
  cfg.n_negative = integer(j, "n_negative", cfg.n_negative, "augment");
  cfg.radius_min = num(j, "radius_min", cfg.radius_min, "augment");
  cfg.radius_max = num(j, "radius_max", cfg.radius_max, "augment");
  cfg.plane_exclusion_deg = num(j, "plane_exclusion_deg", cfg.plane_exclusion_deg, "augment");
  cfg.jitter_sigma = num(j, "jitter_sigma", cfg.jitter_sigma, "augment");
  cfg.detour_prob = num(j, "detour_prob", cfg.detour_prob, "augment");
  cfg.detour_amplitude = num(j, "detour_amplitude", cfg.detour_amplitude, "augment");
  cfg.seed = seed_value(j, "seed", cfg.seed, "augment");
}

void parse_train(const json& j, TrainConfig& cfg) {
  check_keys(j, "train",
             {"epochs", "batch_size", "learning_rate", "temperature", "hidden", "embed_dim", "seed"});
  cfg.epochs = integer(j, "epochs", cfg.epochs, "train");
  cfg.batch_size = integer(j, "batch_size", cfg.batch_size, "train");
  cfg.learning_rate = num(j, "learning_rate", cfg.learning_rate, "train");
  cfg.temperature = num(j, "temperature", cfg.temperature, "train");
  if (auto it = j.find("hidden"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("train.hidden: expected an array of integers");
    cfg.hidden.clear();
    for (const auto& v : *it) {
      if (!v.is_number_integer()) throw ConfigError("train.hidden: expected an array of integers");
      cfg.hidden.push_back(v.get<int>());
    }
  }
  cfg.embed_dim = integer(j, "embed_dim", cfg.embed_dim, "train");
  cfg.seed = seed_value(j, "seed", cfg.seed, "train");
}

void parse_vote(const json& j, VoteConfig& cfg) {
  check_keys(j, "vote", {"k", "delta_c"});
  cfg.k = integer(j, "k", cfg.k, "vote");
  cfg.delta_c = num(j, "delta_c", cfg.delta_c, "vote");
}

void parse_optimize(const json& j, OptimizeConfig& cfg) {
  check_keys(j, "optimize", {"delta_theta_deg", "zero_vec_eps"});
  cfg.delta_theta_deg = num(j, "delta_theta_deg", cfg.delta_theta_deg, "optimize");
  cfg.zero_vec_eps = num(j, "zero_vec_eps", cfg.zero_vec_eps, "optimize");
}

void parse_pipeline(const json& j, PipelineSwitches& cfg) {
  check_keys(j, "pipeline", {"selection_level", "trajectory_optimization", "action_relabeling"});
  if (auto it = j.find("selection_level"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("pipeline.selection_level: expected a string");
    cfg.selection_level = selection_level_from_string(it->get<std::string>());
  }
  cfg.trajectory_optimization =
      boolean(j, "trajectory_optimization", cfg.trajectory_optimization, "pipeline");
  cfg.action_relabeling = boolean(j, "action_relabeling", cfg.action_relabeling, "pipeline");
}

void parse_noise(const json& j, NoiseProfile& cfg) {
  check_keys(j, "synth.noise",
             {"corrupt_prob", "jitter_sigma", "detour_prob", "detour_amplitude", "pause_prob",
              "pause_len", "gripper_fumble_prob", "fumble_len"});
  cfg.corrupt_prob = num(j, "corrupt_prob", cfg.corrupt_prob, "synth.noise");
  cfg.jitter_sigma = num(j, "jitter_sigma", cfg.jitter_sigma, "synth.noise");
  cfg.detour_prob = num(j, "detour_prob", cfg.detour_prob, "synth.noise");
  cfg.detour_amplitude = num(j, "detour_amplitude", cfg.detour_amplitude, "synth.noise");
  cfg.pause_prob = num(j, "pause_prob", cfg.pause_prob, "synth.noise");
  cfg.pause_len = integer(j, "pause_len", cfg.pause_len, "synth.noise");
  cfg.gripper_fumble_prob = num(j, "gripper_fumble_prob", cfg.gripper_fumble_prob, "synth.noise");
  cfg.fumble_len = integer(j, "fumble_len", cfg.fumble_len, "synth.noise");
}

void parse_synth(const json& j, SynthConfig& cfg) {
  check_keys(j, "synth",
             {"n_expert", "n_suboptimal", "subtasks", "hz", "subtask_duration", "workspace_min",
              "workspace_max", "waypoint_jitter", "noise", "seed"});
  cfg.n_expert = integer(j, "n_expert", cfg.n_expert, "synth");
  cfg.n_suboptimal = integer(j, "n_suboptimal", cfg.n_suboptimal, "synth");
  cfg.subtasks = integer(j, "subtasks", cfg.subtasks, "synth");
  cfg.hz = num(j, "hz", cfg.hz, "synth");
  cfg.subtask_duration = num(j, "subtask_duration", cfg.subtask_duration, "synth");
  cfg.workspace_min = vec3(j, "workspace_min", cfg.workspace_min, "synth");
  cfg.workspace_max = vec3(j, "workspace_max", cfg.workspace_max, "synth");
  cfg.waypoint_jitter = num(j, "waypoint_jitter", cfg.waypoint_jitter, "synth");
  if (auto it = j.find("noise"); it != j.end()) parse_noise(*it, cfg.noise);
  cfg.seed = seed_value(j, "seed", cfg.seed, "synth");
}

}  // namespace

CurationConfig config_from_json(const json& j) {
  check_keys(j, "config",
             {"schema_version", "seed", "threads", "segmentation", "render", "augment", "train",
              "vote", "optimize", "pipeline", "synth"});
  CurationConfig cfg = default_config();
  cfg.schema_version = integer(j, "schema_version", cfg.schema_version, "config");
  if (cfg.schema_version != 1) throw ConfigError("schema_version: only version 1 is supported");
  apply_seed(cfg, seed_value(j, "seed", cfg.seed, "config"));
  cfg.threads = integer(j, "threads", cfg.threads, "config");
  if (auto it = j.find("segmentation"); it != j.end()) parse_segmentation(*it, cfg.segmentation);
  if (auto it = j.find("render"); it != j.end()) parse_render(*it, cfg.augment);
  if (auto it = j.find("augment"); it != j.end()) parse_augment(*it, cfg.augment);
  if (auto it = j.find("train"); it != j.end()) parse_train(*it, cfg.train);
  if (auto it = j.find("vote"); it != j.end()) parse_vote(*it, cfg.vote);
  if (auto it = j.find("optimize"); it != j.end()) parse_optimize(*it, cfg.optimize);
  if (auto it = j.find("pipeline"); it != j.end()) parse_pipeline(*it, cfg.pipeline);
  if (auto it = j.find("synth"); it != j.end()) parse_synth(*it, cfg.synth);
  cfg.augment.threads = cfg.threads;
  validate_config(cfg);
  return cfg;
}

json config_to_json(const CurationConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["segmentation"] = {{"velocity_eps", cfg.segmentation.velocity_eps},
                       {"gripper_toggle_threshold", cfg.segmentation.gripper_toggle_threshold},
                       {"debounce_window", cfg.segmentation.debounce_window},
                       {"min_segment_len", cfg.segmentation.min_segment_len}};
  j["render"] = {{"width", cfg.augment.width},
                 {"height", cfg.augment.height},
                 {"focal", cfg.augment.focal}};
  j["augment"] = {{"n_positive", cfg.augment.n_positive},
                  {"n_negative", cfg.augment.n_negative},
                  {"radius_min", cfg.augment.radius_min},
                  {"radius_max", cfg.augment.radius_max},
                  {"plane_exclusion_deg", cfg.augment.plane_exclusion_deg},
                  {"jitter_sigma", cfg.augment.jitter_sigma},
                  {"detour_prob", cfg.augment.detour_prob},
                  {"detour_amplitude", cfg.augment.detour_amplitude},
                  {"seed", cfg.augment.seed}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"temperature", cfg.train.temperature},
                {"hidden", cfg.train.hidden},
                {"embed_dim", cfg.train.embed_dim},
                {"seed", cfg.train.seed}};
  j["vote"] = {{"k", cfg.vote.k}, {"delta_c", cfg.vote.delta_c}};
  j["optimize"] = {{"delta_theta_deg", cfg.optimize.delta_theta_deg},
                   {"zero_vec_eps", cfg.optimize.zero_vec_eps}};
  j["pipeline"] = {{"selection_level", selection_level_to_string(cfg.pipeline.selection_level)},
                   {"trajectory_optimization", cfg.pipeline.trajectory_optimization},
                   {"action_relabeling", cfg.pipeline.action_relabeling}};
  j["synth"] = {{"n_expert", cfg.synth.n_expert},
                {"n_suboptimal", cfg.synth.n_suboptimal},
                {"subtasks", cfg.synth.subtasks},
                {"hz", cfg.synth.hz},
                {"subtask_duration", cfg.synth.subtask_duration},
                {"workspace_min", {cfg.synth.workspace_min.x(), cfg.synth.workspace_min.y(),
                                   cfg.synth.workspace_min.z()}},
                {"workspace_max", {cfg.synth.workspace_max.x(), cfg.synth.workspace_max.y(),
                                   cfg.synth.workspace_max.z()}},
                {"waypoint_jitter", cfg.synth.waypoint_jitter},
                {"noise",
                 {{"corrupt_prob", cfg.synth.noise.corrupt_prob},
                  {"jitter_sigma", cfg.synth.noise.jitter_sigma},
                  {"detour_prob", cfg.synth.noise.detour_prob},
                  {"detour_amplitude", cfg.synth.noise.detour_amplitude},
                  {"pause_prob", cfg.synth.noise.pause_prob},
                  {"pause_len", cfg.synth.noise.pause_len},
                  {"gripper_fumble_prob", cfg.synth.noise.gripper_fumble_prob},
                  {"fumble_len", cfg.synth.noise.fumble_len}}},
                {"seed", cfg.synth.seed}};
  return j;
}

CurationConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_config_file(const CurationConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open config file for writing: " + path);
  out << config_to_json(cfg).dump(2) << "\n";
  if (!out) throw DataError("failed writing config file: " + path);
}

}  // namespace segcurate
