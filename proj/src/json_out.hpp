#pragma once

// Minimal append-only JSON emission helpers. Doubles are written with 17
// significant digits so strtod round trips them bit exactly.

#include <cstdio>
#include <string>

#include "segcurate/core.hpp"

namespace segcurate::jsonout {

inline void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

inline void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

inline void append_vec3(std::string& out, const Vec3& v) {
  out += '[';
  append_double(out, v.x());
  out += ',';
  append_double(out, v.y());
  out += ',';
  append_double(out, v.z());
  out += ']';
}

inline void append_quat(std::string& out, const Quat& q) {
  out += '[';
  append_double(out, q.w());
  out += ',';
  append_double(out, q.x());
  out += ',';
  append_double(out, q.y());
  out += ',';
  append_double(out, q.z());
  out += ']';
}

inline void append_step(std::string& out, const Step& s) {
  out += "{\"obs\":{\"pos\":";
  append_vec3(out, s.obs.ee_pose.position);
  out += ",\"quat\":";
  append_quat(out, s.obs.ee_pose.orientation);
  out += ",\"gripper\":";
  append_double(out, s.obs.gripper);
  if (!s.obs.proprio.empty()) {
    out += ",\"proprio\":[";
    for (std::size_t i = 0; i < s.obs.proprio.size(); ++i) {
      if (i) out += ',';
      append_double(out, s.obs.proprio[i]);
    }
    out += ']';
  }
  out += "},\"act\":{\"pos\":";
  append_vec3(out, s.act.target.position);
  out += ",\"quat\":";
  append_quat(out, s.act.target.orientation);
  out += ",\"gripper\":";
  append_double(out, s.act.gripper_cmd);
  out += "}}";
}

}  // namespace segcurate::jsonout
