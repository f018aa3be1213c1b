#include "segcurate/render.hpp"

#include <algorithm>
#include <cmath>

#include "segcurate/rng.hpp"

namespace segcurate {

namespace {

constexpr double kTiny = 1e-12;

struct CameraBasis {
  Vec3 x, y, z;
};

CameraBasis basis_of(const Camera& cam) {
  CameraBasis b;
  b.z = (cam.position - cam.look_at).normalized();
  b.x = cam.up.cross(b.z).normalized();
  b.y = b.z.cross(b.x);
  return b;
}

std::optional<Eigen::Vector2d> project_with(const Vec3& p, const Camera& cam, const CameraBasis& b) {
  const Vec3 d = p - cam.position;
  const double depth = -d.dot(b.z);
  if (depth <= 0.0) return std::nullopt;
  return Eigen::Vector2d(cam.width / 2.0 + cam.focal * d.dot(b.x) / depth,
                         cam.height / 2.0 + cam.focal * d.dot(b.y) / depth);
}

void stroke(TrajRaster& r, const Eigen::Vector2d& a, const Eigen::Vector2d& b, double ia, double ib) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - 1.0)));
  const int x1 = std::min(r.width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + 1.0)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - 1.0)));
  const int y1 = std::min(r.height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + 1.0)));
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      const Eigen::Vector2d p(ix, iy);
      const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      const double dist = (p - (a + t * ab)).norm();
      const double cov = std::clamp(1.0 - dist, 0.0, 1.0);
      if (cov <= 0.0) continue;
      const double val = cov * (ia + (ib - ia) * t);
      float& px = r.pixels[static_cast<std::size_t>(iy) * r.width + ix];
      px = std::max(px, static_cast<float>(val));
    }
  }
}

}  // namespace

void validate_camera(const Camera& cam) {
  if (cam.width < 1 || cam.height < 1) throw ConfigError("camera: raster dimensions must be positive");
  if (!(cam.focal > 0.0)) throw ConfigError("camera: focal length must be > 0");
  const Vec3 view = cam.position - cam.look_at;
  if (view.norm() < kTiny) throw ConfigError("camera: position and look_at coincide");
  if (cam.up.cross(view.normalized()).norm() < kTiny)
    throw ConfigError("camera: up vector is parallel to the view direction");
}

std::optional<Eigen::Vector2d> project(const Vec3& p, const Camera& cam) {
  validate_camera(cam);
  return project_with(p, cam, basis_of(cam));
}

TrajRaster blank_raster(int width, int height) {
  TrajRaster r;
  r.width = width;
  r.height = height;
  r.pixels.assign(static_cast<std::size_t>(width) * height, 0.0f);
  return r;
}

TrajRaster render_polyline(const std::vector<Vec3>& points, const Camera& cam) {
  validate_camera(cam);
  TrajRaster r = blank_raster(cam.width, cam.height);
  const std::size_t n = points.size();
  if (n == 0) return r;

  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) cum[i] = cum[i - 1] + (points[i] - points[i - 1]).norm();
  const double total = cum[n - 1];
  auto intensity = [&](std::size_t i) { return total <= 0.0 ? 1.0 : 0.2 + 0.8 * cum[i] / total; };

  const CameraBasis b = basis_of(cam);
  std::vector<std::optional<Eigen::Vector2d>> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = project_with(points[i], cam, b);

  if (n == 1) {
    if (q[0]) stroke(r, *q[0], *q[0], 1.0, 1.0);
    return r;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!q[i] || !q[i + 1]) continue;
    stroke(r, *q[i], *q[i + 1], intensity(i), intensity(i + 1));
  }
  return r;
}

TrajRaster render_segment(const Segment& seg, const Camera& cam) {
  std::vector<Vec3> pts;
  pts.reserve(seg.steps.size());
  for (const auto& s : seg.steps) pts.push_back(s.obs.ee_pose.position);
  return render_polyline(pts, cam);
}

void validate_augment_config(const AugmentConfig& cfg) {
  if (cfg.n_positive < 0 || cfg.n_negative < 0)
    throw ConfigError("augment: sample counts must be >= 0");
  if (!(cfg.radius_min > 0.0) || cfg.radius_max < cfg.radius_min)
    throw ConfigError("augment: need 0 < radius_min <= radius_max");
  if (cfg.plane_exclusion_deg < 0.0 || cfg.plane_exclusion_deg >= 90.0)
    throw ConfigError("augment: plane_exclusion_deg must lie in [0, 90)");
  if (cfg.jitter_sigma < 0.0) throw ConfigError("augment: jitter_sigma must be >= 0");
  if (!(cfg.detour_prob >= 0.0 && cfg.detour_prob <= 1.0))
    throw ConfigError("augment: detour_prob must lie in [0, 1]");
  if (cfg.detour_amplitude < 0.0) throw ConfigError("augment: detour_amplitude must be >= 0");
  if (cfg.width < 1 || cfg.height < 1) throw ConfigError("augment: raster dimensions must be positive");
  if (!(cfg.focal > 0.0)) throw ConfigError("augment: focal length must be > 0");
}

namespace {

struct SegmentGeometry {
  std::vector<Vec3> points;
  Vec3 centroid{0.0, 0.0, 0.0};
  Vec3 plane_normal{0.0, 0.0, 1.0};
};

SegmentGeometry geometry_of(const std::vector<Vec3>& pts) {
  SegmentGeometry g;
  g.points = pts;
  if (pts.empty()) throw DataError("augment: segment without steps");
  for (const auto& p : pts) g.centroid += p;
  g.centroid /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - g.centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  // Smallest-variance direction: the normal of the best fit plane.
  Vec3 n = es.eigenvectors().col(0);
  if (n.norm() > kTiny) g.plane_normal = n.normalized();
  return g;
}

Camera sample_camera(Rng& rng, const Vec3& centroid, const Vec3& normal, const AugmentConfig& cfg) {
  const double sin_excl = std::sin(cfg.plane_exclusion_deg * M_PI / 180.0);
  Vec3 dir = rng.unit_vector();
  for (int tries = 0; tries < 64 && std::abs(dir.dot(normal)) < sin_excl; ++tries)
    dir = rng.unit_vector();
  Camera cam;
  cam.position = centroid + rng.uniform(cfg.radius_min, cfg.radius_max) * dir;
  cam.look_at = centroid;
  cam.up = std::abs(dir.z()) > 0.99 ? Vec3(0.0, 1.0, 0.0) : Vec3(0.0, 0.0, 1.0);
  cam.focal = cfg.focal;
  cam.width = cfg.width;
  cam.height = cfg.height;
  return cam;
}

std::vector<Vec3> corrupt_positions(Rng& rng, const std::vector<Vec3>& pts, const AugmentConfig& cfg) {
  std::vector<Vec3> out = pts;
  for (auto& p : out)
    p += Vec3(rng.normal(0.0, cfg.jitter_sigma), rng.normal(0.0, cfg.jitter_sigma),
              rng.normal(0.0, cfg.jitter_sigma));
  const std::size_t n = out.size();
  if (n >= 3 && rng.uniform01() < cfg.detour_prob) {
    const double m = 1.0 + static_cast<double>(rng.uniform_index(n - 2));
    const Vec3 dir = rng.unit_vector();
    const double width = std::max(2.0, static_cast<double>(n) / 6.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = std::exp(-0.5 * (i - m) * (i - m) / (width * width));
      out[i] += dir * (cfg.detour_amplitude * f);
    }
  }
  return out;
}

}  // namespace

AugmentResult augment_expert_with_ends(const std::vector<Segment>& segs,
                                       const std::vector<TrajRaster>& ends,
                                       const AugmentConfig& cfg) {
  validate_augment_config(cfg);
  AugmentResult out;
  if (segs.empty()) return out;
  if (ends.size() != segs.size())
    throw DataError("augment: one ending raster per segment required");

  std::vector<SegmentGeometry> geo;
  geo.reserve(segs.size());
  std::vector<Vec3> pooled;
  for (const auto& seg : segs) {
    std::vector<Vec3> pts;
    pts.reserve(seg.steps.size());
    for (const auto& s : seg.steps) pts.push_back(s.obs.ee_pose.position);
    pooled.insert(pooled.end(), pts.begin(), pts.end());
    geo.push_back(geometry_of(pts));
  }
  // Cameras orbit the pooled geometry of the whole segment set, not each
  // segment's own centroid, so training views match the fixed viewpoint used
  // at classification time.
  const SegmentGeometry scene = geometry_of(pooled);

  bool mismatch_possible = segs.size() >= 2;
  if (mismatch_possible) {
    bool any_content = false;
    for (const auto& e : ends) any_content = any_content || !e.is_blank();
    mismatch_possible = any_content;
  }

  out.positives.resize(segs.size() * static_cast<std::size_t>(cfg.n_positive));
  out.negatives.resize(segs.size() * static_cast<std::size_t>(cfg.n_negative));

  // One stream per (segment, sample index); the camera is drawn first, so
  // positive i and negative i of a segment share a viewpoint and degenerate
  // noise settings make them equal.
  const std::size_t per_seg = static_cast<std::size_t>(std::max(cfg.n_positive, cfg.n_negative));
  parallel_for(segs.size() * per_seg, cfg.threads, [&](std::size_t task) {
    const std::size_t s = task / per_seg;
    const std::size_t i = task % per_seg;
    Rng rng(derive_seed(cfg.seed, task));
    const SegmentGeometry& g = geo[s];
    const Camera cam = sample_camera(rng, scene.centroid, scene.plane_normal, cfg);
    if (i < static_cast<std::size_t>(cfg.n_positive))
      out.positives[s * cfg.n_positive + i] = {render_polyline(g.points, cam), ends[s]};
    if (i >= static_cast<std::size_t>(cfg.n_negative)) return;
    if (mismatch_possible && rng.uniform01() < 0.5) {
      std::size_t other = rng.uniform_index(segs.size() - 1);
      if (other >= s) ++other;
      out.negatives[s * cfg.n_negative + i] = {render_polyline(g.points, cam), ends[other]};
    } else {
      out.negatives[s * cfg.n_negative + i] = {render_polyline(corrupt_positions(rng, g.points, cfg), cam),
                                               ends[s]};
    }
  });
  return out;
}

AugmentResult augment_expert(const std::vector<Segment>& segs, const AugmentConfig& cfg) {
  validate_augment_config(cfg);
  std::vector<TrajRaster> ends(segs.size(), blank_raster(cfg.width, cfg.height));
  return augment_expert_with_ends(segs, ends, cfg);
}

Camera canonical_camera(const std::vector<Segment>& segs, const AugmentConfig& cfg) {
  validate_augment_config(cfg);
  std::vector<Vec3> pooled;
  for (const auto& seg : segs)
    for (const auto& s : seg.steps) pooled.push_back(s.obs.ee_pose.position);
  if (pooled.empty()) throw DataError("canonical_camera: no segment positions available");
  const SegmentGeometry g = geometry_of(pooled);
  Rng rng(derive_seed(cfg.seed, 0));
  return sample_camera(rng, g.centroid, g.plane_normal, cfg);
}

}  // namespace segcurate
