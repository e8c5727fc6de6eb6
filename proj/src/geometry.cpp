#include "camo/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace camo {

SphericalAngles cartesian_to_spherical(const Vec3& p) {
  const double r = p.norm();
  if (r == 0.0) {
    throw std::invalid_argument("cartesian_to_spherical: zero vector");
  }
  SphericalAngles a;
  a.theta_deg = rad2deg(std::atan2(p.x(), p.z()));
  a.phi_deg = rad2deg(std::atan2(p.y(), p.z()));
  a.r = r;
  return a;
}

Vec3 spherical_to_cartesian(const SphericalAngles& a) {
  if (!(a.r > 0.0)) {
    throw std::invalid_argument("spherical_to_cartesian: r must be positive");
  }
  if (!(std::abs(a.theta_deg) < 90.0) || !(std::abs(a.phi_deg) < 90.0)) {
    throw std::invalid_argument(
        "spherical_to_cartesian: angles must lie in (-90, 90) degrees");
  }
  Vec3 d(std::tan(deg2rad(a.theta_deg)), std::tan(deg2rad(a.phi_deg)), 1.0);
  return a.r * d.normalized();
}

bool validate_rotation(const Mat3& rotation, double tol) {
  const Mat3 should_be_identity = rotation.transpose() * rotation;
  if ((should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

CameraModel make_camera(int width, int height, double fov_h_deg,
                        double fov_v_deg, const Vec3& position,
                        const Mat3& rotation) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("make_camera: raster must be at least 1x1");
  }
  if (!(fov_h_deg > 0.0 && fov_h_deg < 180.0) ||
      !(fov_v_deg > 0.0 && fov_v_deg < 180.0)) {
    throw std::invalid_argument("make_camera: FOV must lie in (0, 180)");
  }
  if (!validate_rotation(rotation)) {
    throw std::invalid_argument("make_camera: rotation is not orthonormal");
  }
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.fov_h_deg = fov_h_deg;
  cam.fov_v_deg = fov_v_deg;
  cam.cx = (width - 1) / 2.0;
  cam.cy = (height - 1) / 2.0;
  // Degenerate 1-pixel axes keep a positive focal length so projection math
  // stays finite; the FOV then spans zero pixel centers.
  cam.fx = width > 1 ? cam.cx / std::tan(deg2rad(fov_h_deg) / 2.0) : 1.0;
  cam.fy = height > 1 ? cam.cy / std::tan(deg2rad(fov_v_deg) / 2.0) : 1.0;
  cam.position = position;
  cam.rotation = rotation;
  return cam;
}

Vec3 pixel_to_ray(const CameraModel& cam, int u, int v) {
  if (u < 0 || u >= cam.width || v < 0 || v >= cam.height) {
    std::ostringstream msg;
    msg << "pixel_to_ray: pixel (" << u << ", " << v << ") outside "
        << cam.width << "x" << cam.height;
    throw std::out_of_range(msg.str());
  }
  const Vec3 dir_cam((u - cam.cx) / cam.fx, -(v - cam.cy) / cam.fy, 1.0);
  return (cam.rotation * dir_cam.normalized()).normalized();
}

PixelProjection point_to_pixel(const CameraModel& cam, const Vec3& p) {
  PixelProjection out;
  const Vec3 q = cam.rotation.transpose() * (p - cam.position);
  if (q.z() <= 0.0) {
    out.status = PixelProjection::Status::behind_camera;
    return out;
  }
  out.u = cam.cx + cam.fx * q.x() / q.z();
  out.v = cam.cy - cam.fy * q.y() / q.z();
  const bool inside = out.u >= -0.5 && out.u < cam.width - 0.5 &&
                      out.v >= -0.5 && out.v < cam.height - 0.5;
  out.status = inside ? PixelProjection::Status::in_view
                      : PixelProjection::Status::out_of_view;
  return out;
}

const char* corner_name(Corner c) {
  switch (c) {
    case Corner::TL:
      return "TL";
    case Corner::TR:
      return "TR";
    case Corner::BL:
      return "BL";
    case Corner::BR:
      return "BR";
  }
  throw std::invalid_argument("corner_name: bad corner");
}

std::optional<Corner> corner_from_name(std::string_view name) {
  if (name == "TL") return Corner::TL;
  if (name == "TR") return Corner::TR;
  if (name == "BL") return Corner::BL;
  if (name == "BR") return Corner::BR;
  return std::nullopt;
}

Vec3 to_corner_frame(const CornerFrame& frame, const Vec3& p) {
  return frame.rotation.transpose() * (p - frame.origin);
}

SphericalAngles observer_angles(const CornerFrame& frame,
                                const Vec3& observer_position) {
  Vec3 q = to_corner_frame(frame, observer_position);
  q.z() = -q.z();
  return cartesian_to_spherical(q);
}

}  // namespace camo
