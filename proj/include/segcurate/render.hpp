#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "segcurate/core.hpp"

namespace segcurate {

/// Pinhole camera. The image plane grid puts pixel (ix, iy) at continuous
/// coordinates (ix, iy), with the optical axis hitting (width/2, height/2).
struct Camera {
  Vec3 position{0.0, 0.0, 2.0};
  Vec3 look_at{0.0, 0.0, 0.0};
  Vec3 up{0.0, 0.0, 1.0};
  double focal = 80.0;  // pixels
  int width = 64;
  int height = 64;
};

/// Throws ConfigError when position == look_at, up is parallel to the view
/// direction, focal <= 0, or the raster dimensions are not positive.
void validate_camera(const Camera& cam);

/// Projects a world point to pixel coordinates. Returns nullopt for points
/// at or behind the camera plane; points projecting outside the canvas
/// still return coordinates.
std::optional<Eigen::Vector2d> project(const Vec3& p, const Camera& cam);

/// Grayscale trajectory sketch, row major, values in [0, 1].
struct TrajRaster {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool is_blank() const {
    for (float v : pixels)
      if (v != 0.0f) return false;
    return true;
  }
};

TrajRaster blank_raster(int width, int height);

/// Draws the polyline with anti-aliased 1 px strokes and max compositing.
/// Stroke intensity ramps from 0.2 to 1.0 with cumulative 3D arc length, so
/// the drawing encodes direction of motion; a stationary trajectory draws
/// at full intensity. Strokes with an endpoint behind the camera are
/// dropped.
TrajRaster render_polyline(const std::vector<Vec3>& points, const Camera& cam);

/// render_polyline over the segment's end effector positions.
TrajRaster render_segment(const Segment& seg, const Camera& cam);

struct RasterPair {
  TrajRaster start_view;  // trajectory sketch
  TrajRaster end_view;    // ending context, blank in the state-only setup
};

struct AugmentConfig {
  int n_positive = 500;            // pairs per expert segment
  int n_negative = 500;
  double radius_min = 0.8;         // camera sphere around the trajectory centroid, m
  double radius_max = 1.2;
  double plane_exclusion_deg = 5.0;  // keep cameras off the trajectory's best fit plane
  double jitter_sigma = 0.02;      // negative branch: positional noise, m
  double detour_prob = 0.5;        // negative branch: chance of a smooth detour bump
  double detour_amplitude = 0.1;   // m
  int width = 64;
  int height = 64;
  double focal = 80.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

void validate_augment_config(const AugmentConfig& cfg);

struct AugmentResult {
  std::vector<RasterPair> positives;  // clean renders from random viewpoints
  std::vector<RasterPair> negatives;  // corrupted renders or mismatched endings
};

/// Contrastive sample generation over expert segments. Positives render the
/// unmodified segment from cameras sampled on a sphere around the pooled
/// centroid of all segments (radius in [radius_min, radius_max], directions
/// rejected within plane_exclusion_deg of the pooled best fit plane), the
/// same distribution the fixed classification viewpoint is drawn from so
/// training and inference see segments from consistent views. Negatives either
/// corrupt the geometry (jitter plus optional detour) or pair a clean
/// render with a mismatched ending raster; with all-blank endings the
/// mismatch branch is never selected. Sample i draws from a stream seeded
/// by hash(seed, i), so results are byte-identical for any thread count.
AugmentResult augment_expert(const std::vector<Segment>& segs, const AugmentConfig& cfg);

/// Same generator with caller-supplied per-segment ending rasters, which
/// makes the mismatch branch reachable.
AugmentResult augment_expert_with_ends(const std::vector<Segment>& segs,
                                       const std::vector<TrajRaster>& ends,
                                       const AugmentConfig& cfg);

/// First camera of the deterministic sphere sequence, computed over the
/// pooled geometry of all given segments. Used as the fixed viewpoint when
/// classifying unseen segments.
Camera canonical_camera(const std::vector<Segment>& segs, const AugmentConfig& cfg);

}  // namespace segcurate
