#include <fstream>
#include <sstream>

#include <json.hpp>

#include "json_out.hpp"
#include "segcurate/core.hpp"

namespace segcurate {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw DataError(ctx + "." + key + ": missing field");
  return *it;
}

double get_num(const json& j, const char* key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_number()) throw DataError(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

std::string get_str(const json& j, const char* key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_string()) throw DataError(ctx + "." + key + ": expected a string");
  return v.get<std::string>();
}

Vec3 get_vec3(const json& j, const char* key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
    throw DataError(ctx + "." + key + ": expected an array of 3 numbers");
  return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

Quat get_quat(const json& j, const char* key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_array() || v.size() != 4)
    throw DataError(ctx + "." + key + ": expected an array of 4 numbers [w,x,y,z]");
  for (int i = 0; i < 4; ++i)
    if (!v[i].is_number()) throw DataError(ctx + "." + key + ": expected an array of 4 numbers [w,x,y,z]");
  return Quat(v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>());
}

ActionKind kind_from_string(const std::string& s, const std::string& ctx) {
  if (s == "absolute") return ActionKind::Absolute;
  if (s == "relative") return ActionKind::Relative;
  throw DataError(ctx + ": action kind must be \"absolute\" or \"relative\", got \"" + s + "\"");
}

Step parse_step(const json& j, ActionKind demo_kind, const std::string& ctx) {
  Step s;
  const json& obs = require(j, "obs", ctx);
  const std::string obs_ctx = ctx + ".obs";
  s.obs.ee_pose.position = get_vec3(obs, "pos", obs_ctx);
  s.obs.ee_pose.orientation = get_quat(obs, "quat", obs_ctx);
  s.obs.gripper = get_num(obs, "gripper", obs_ctx);
  if (auto it = obs.find("proprio"); it != obs.end()) {
    if (!it->is_array()) throw DataError(obs_ctx + ".proprio: expected an array of numbers");
    for (const auto& v : *it) {
      if (!v.is_number()) throw DataError(obs_ctx + ".proprio: expected an array of numbers");
      s.obs.proprio.push_back(v.get<double>());
    }
  }
  const json& act = require(j, "act", ctx);
  const std::string act_ctx = ctx + ".act";
  s.act.target.position = get_vec3(act, "pos", act_ctx);
  s.act.target.orientation = get_quat(act, "quat", act_ctx);
  s.act.gripper_cmd = get_num(act, "gripper", act_ctx);
  if (auto it = act.find("kind"); it != act.end()) {
    // Per-step kind is optional and, when present, must agree with the
    // demo-level action_kind; a file cannot mix absolute and relative acts.
    if (!it->is_string()) throw DataError(act_ctx + ".kind: expected a string");
    if (kind_from_string(it->get<std::string>(), act_ctx + ".kind") != demo_kind)
      throw DataError(act_ctx + ".kind: mixed action kinds within one demonstration");
  }
  return s;
}

Demonstration parse_demo(const json& j, const std::string& where) {
  Demonstration d;
  d.id = get_str(j, "id", where);
  d.dt = get_num(j, "dt", where);
  d.action_kind = kind_from_string(get_str(j, "action_kind", where), where + ".action_kind");
  if (j.contains("source_quality"))
    d.source_quality = quality_from_string(get_str(j, "source_quality", where), where);
  const json& steps = require(j, "steps", where);
  if (!steps.is_array()) throw DataError(where + ".steps: expected an array");
  for (std::size_t i = 0; i < steps.size(); ++i)
    d.steps.push_back(parse_step(steps[i], d.action_kind, where + ".steps[" + std::to_string(i) + "]"));
  validate_demo(d, where);
  return d;
}

bool blank_line(const std::string& s) {
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r') return false;
  return true;
}

}  // namespace

Dataset load_dataset(const std::string& path, DatasetRole role) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  Dataset ds;
  ds.role = role;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_line(line)) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": invalid JSON: " + e.what());
    }
    ds.demos.push_back(parse_demo(j, where));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open dataset file for writing: " + path);
  std::string buf;
  for (const auto& d : ds.demos) {
    validate_demo(d, "save " + d.id);
    buf.clear();
    buf += "{\"id\":";
    jsonout::append_escaped(buf, d.id);
    buf += ",\"dt\":";
    jsonout::append_double(buf, d.dt);
    buf += ",\"action_kind\":\"";
    buf += d.action_kind == ActionKind::Absolute ? "absolute" : "relative";
    buf += "\",\"source_quality\":\"";
    buf += quality_to_string(d.source_quality);
    buf += "\",\"steps\":[";
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
      if (i) buf += ',';
      jsonout::append_step(buf, d.steps[i]);
    }
    buf += "]}\n";
    out << buf;
  }
  if (!out) throw DataError("failed writing dataset file: " + path);
}

}  // namespace segcurate
