#include "camo/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "camo/errors.hpp"
#include "camo/parallel.hpp"

namespace camo {

SensorRig default_rig() {
  SensorRig rig;
  rig.depth = make_camera(512, 424, 70.0, 60.0, Vec3::Zero(), Mat3::Identity());
  rig.color = make_camera(1920, 1080, 84.1, 53.8, Vec3(0.052, 0.0, 0.0),
                          Mat3::Identity());
  Mat3 about_face;
  about_face << -1, 0, 0, 0, 1, 0, 0, 0, -1;
  rig.front =
      make_camera(1920, 1080, 84.1, 53.8, Vec3(0.0, 0.30, -0.30), about_face);
  return rig;
}

DepthMap render_depth(const CameraModel& cam, const Scene& scene, int threads) {
  validate_scene(scene);
  DepthMap out(cam.width, cam.height, 0.0);
  parallel_for(0, cam.height, threads, [&](int v) {
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 dir = pixel_to_ray(cam, u, v);
      if (const auto hit = ray_cast(cam.position, dir, scene)) {
        const Vec3 q = cam.rotation.transpose() * (hit->point - cam.position);
        out.at(u, v) = q.z();
      }
    }
  });
  return out;
}

ColorImage render_color(const CameraModel& cam, const Scene& scene,
                        int threads) {
  validate_scene(scene);
  ColorImage out(cam.width, cam.height, Rgb{0, 0, 0});
  parallel_for(0, cam.height, threads, [&](int v) {
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 dir = pixel_to_ray(cam, u, v);
      if (const auto hit = ray_cast(cam.position, dir, scene)) {
        out.at(u, v) =
            sample_albedo(scene.surfaces[hit->surface_index].albedo, hit->point);
      }
    }
  });
  return out;
}

PointCloud register_and_build(const DepthMap& depth, const ColorImage& color,
                              const SensorRig& rig, int threads) {
  if (depth.width != rig.depth.width || depth.height != rig.depth.height) {
    throw std::invalid_argument("register_and_build: depth size mismatch");
  }
  if (color.width != rig.color.width || color.height != rig.color.height) {
    throw std::invalid_argument("register_and_build: color size mismatch");
  }
  PointCloud cloud;
  cloud.width = depth.width;
  cloud.height = depth.height;
  cloud.points.resize(static_cast<std::size_t>(depth.width) * depth.height);
  parallel_for(0, depth.height, threads, [&](int dv) {
    for (int du = 0; du < depth.width; ++du) {
      CloudPoint& pt = cloud.points[cloud.index_of(du, dv)];
      pt.depth_u = du;
      pt.depth_v = dv;
      const double d = depth.at(du, dv);
      if (!std::isfinite(d) || d <= 0.0) continue;
      const Vec3 p_cam((du - rig.depth.cx) / rig.depth.fx * d,
                       -(dv - rig.depth.cy) / rig.depth.fy * d, d);
      pt.position = rig.depth.rotation * p_cam + rig.depth.position;
      const PixelProjection proj = point_to_pixel(rig.color, pt.position);
      if (proj.status != PixelProjection::Status::in_view) continue;
      pt.color_u = std::clamp(static_cast<int>(std::lround(proj.u)), 0,
                              color.width - 1);
      pt.color_v = std::clamp(static_cast<int>(std::lround(proj.v)), 0,
                              color.height - 1);
      pt.color = color.at(pt.color_u, pt.color_v);
      pt.defined = true;
    }
  });
  return cloud;
}

PointCloud capture_cloud(const SensorRig& rig, const Scene& scene, int threads) {
  const DepthMap depth = render_depth(rig.depth, scene, threads);
  const ColorImage color = render_color(rig.color, scene, threads);
  return register_and_build(depth, color, rig, threads);
}

void annotate_corner_angles(PointCloud& cloud,
                            const std::array<CornerFrame, 4>& frames,
                            int threads) {
  parallel_for(0, cloud.height, threads, [&](int row) {
    const std::size_t base = static_cast<std::size_t>(row) * cloud.width;
    for (int col = 0; col < cloud.width; ++col) {
      CloudPoint& pt = cloud.points[base + col];
      if (!pt.defined) continue;
      for (int c = 0; c < 4; ++c) {
        pt.corner_angles[static_cast<std::size_t>(c)] =
            cartesian_to_spherical(to_corner_frame(frames[c], pt.position));
      }
    }
  });
  cloud.has_angles = true;
}

double undefined_fraction(const PointCloud& cloud) {
  if (cloud.points.empty()) return 0.0;
  std::size_t undefined = 0;
  for (const CloudPoint& pt : cloud.points) {
    if (!pt.defined) ++undefined;
  }
  return static_cast<double>(undefined) / static_cast<double>(cloud.points.size());
}

void save_cloud_csv(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("save_cloud_csv: cannot open " + path);
  out << "depth_u,depth_v,defined,x,y,z,r,g,b,color_u,color_v\n";
  out << std::setprecision(17);
  for (const CloudPoint& pt : cloud.points) {
    out << pt.depth_u << ',' << pt.depth_v << ',' << (pt.defined ? 1 : 0) << ','
        << pt.position.x() << ',' << pt.position.y() << ',' << pt.position.z()
        << ',' << static_cast<int>(pt.color.r) << ','
        << static_cast<int>(pt.color.g) << ',' << static_cast<int>(pt.color.b)
        << ',' << pt.color_u << ',' << pt.color_v << '\n';
  }
  if (!out) throw FileError("save_cloud_csv: write failed for " + path);
}

PointCloud load_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("load_cloud_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "depth_u,depth_v,defined,x,y,z,r,g,b,color_u,color_v") {
    throw FileError("load_cloud_csv: bad header in " + path);
  }
  std::vector<CloudPoint> parsed;
  int max_u = -1;
  int max_v = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    auto field = [&]() -> std::string {
      std::string f;
      if (!std::getline(row, f, ',')) {
        throw FileError("load_cloud_csv: line " + std::to_string(line_no) +
                        ": missing fields");
      }
      return f;
    };
    try {
      CloudPoint pt;
      pt.depth_u = std::stoi(field());
      pt.depth_v = std::stoi(field());
      pt.defined = std::stoi(field()) != 0;
      pt.position.x() = std::stod(field());
      pt.position.y() = std::stod(field());
      pt.position.z() = std::stod(field());
      pt.color.r = static_cast<std::uint8_t>(std::stoi(field()));
      pt.color.g = static_cast<std::uint8_t>(std::stoi(field()));
      pt.color.b = static_cast<std::uint8_t>(std::stoi(field()));
      pt.color_u = std::stoi(field());
      pt.color_v = std::stoi(field());
      max_u = std::max(max_u, pt.depth_u);
      max_v = std::max(max_v, pt.depth_v);
      parsed.push_back(pt);
    } catch (const FileError&) {
      throw;
    } catch (const std::exception&) {
      throw FileError("load_cloud_csv: line " + std::to_string(line_no) +
                      ": bad number");
    }
  }
  PointCloud cloud;
  cloud.width = max_u + 1;
  cloud.height = max_v + 1;
  const std::size_t expect =
      static_cast<std::size_t>(cloud.width) * static_cast<std::size_t>(cloud.height);
  if (parsed.empty() || parsed.size() != expect) {
    throw FileError("load_cloud_csv: expected a dense cloud, got " +
                    std::to_string(parsed.size()) + " points");
  }
  cloud.points.resize(expect);
  for (const CloudPoint& pt : parsed) {
    cloud.points[cloud.index_of(pt.depth_u, pt.depth_v)] = pt;
  }
  return cloud;
}

}  // namespace camo
