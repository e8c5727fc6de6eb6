#pragma once

#include <array>
#include <string>
#include <vector>

#include "camo/geometry.hpp"
#include "camo/image.hpp"
#include "camo/scene.hpp"

namespace camo {

// Back RGB-D unit (depth + color with a small baseline) plus the front
// camera that watches the observer side.
struct SensorRig {
  CameraModel depth;
  CameraModel color;
  CameraModel front;
};

// Depth 512x424 FOV 70x60, color 1920x1080 FOV 84.1x53.8, 52 mm horizontal
// baseline between them; back unit at the origin looking +z, front camera
// above the display looking -z.
SensorRig default_rig();

struct CloudPoint {
  int depth_u = 0;
  int depth_v = 0;
  int color_u = -1;  // -1,-1 when no color pixel corresponds
  int color_v = -1;
  Vec3 position = Vec3::Zero();
  Rgb color;  // black when undefined
  bool defined = false;
  // Indexed by Corner; valid once annotate_corner_angles ran.
  std::array<SphericalAngles, 4> corner_angles{};
};

// Dense buffer of width*height points. Within each row the points are stored
// right-to-left relative to the depth image, so depth pixel (u, v) lives at
// v*width + (width-1-u).
struct PointCloud {
  int width = 0;
  int height = 0;
  bool has_angles = false;
  std::vector<CloudPoint> points;

  std::size_t index_of(int depth_u, int depth_v) const {
    return static_cast<std::size_t>(depth_v) * width + (width - 1 - depth_u);
  }
  const CloudPoint& at_depth_pixel(int depth_u, int depth_v) const {
    return points[index_of(depth_u, depth_v)];
  }
  CloudPoint& at_depth_pixel(int depth_u, int depth_v) {
    return points[index_of(depth_u, depth_v)];
  }
};

// Per-pixel z-depth (camera-frame z of the nearest hit), 0 where the ray
// leaves the scene.
DepthMap render_depth(const CameraModel& cam, const Scene& scene,
                      int threads = 1);

// Per-pixel albedo of the nearest hit, black where the ray leaves the scene.
ColorImage render_color(const CameraModel& cam, const Scene& scene,
                        int threads = 1);

// Back-projects every depth pixel, projects it into the color camera and
// samples the color there. Invalid depth or a projection outside the color
// raster yields an undefined black point. The cloud always holds
// width*height entries in reversed-row order.
PointCloud register_and_build(const DepthMap& depth, const ColorImage& color,
                              const SensorRig& rig, int threads = 1);

// render_depth + render_color + register_and_build for the back unit.
PointCloud capture_cloud(const SensorRig& rig, const Scene& scene,
                         int threads = 1);

// Fills corner_angles of every defined point with its spherical angles in
// each corner frame; undefined points are skipped.
void annotate_corner_angles(PointCloud& cloud,
                            const std::array<CornerFrame, 4>& frames,
                            int threads = 1);

double undefined_fraction(const PointCloud& cloud);

// CSV: header line, then one point per line in cloud buffer order:
// depth_u,depth_v,defined,x,y,z,r,g,b,color_u,color_v
void save_cloud_csv(const PointCloud& cloud, const std::string& path);
PointCloud load_cloud_csv(const std::string& path);

}  // namespace camo
