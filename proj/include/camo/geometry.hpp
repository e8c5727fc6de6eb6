#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>

namespace camo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Angles are measured against the +z axis of whatever frame the point lives
// in: theta from the x component, phi from the y component. Both in degrees.
struct SphericalAngles {
  double theta_deg = 0.0;
  double phi_deg = 0.0;
  double r = 0.0;
};

// theta = atan2(x, z), phi = atan2(y, z), r = |p|. Throws on the zero vector.
SphericalAngles cartesian_to_spherical(const Vec3& p);

// Inverse on the z > 0 branch. r must be positive and both angles strictly
// inside (-90, 90) degrees.
Vec3 spherical_to_cartesian(const SphericalAngles& a);

// Pinhole camera. `rotation` maps camera coordinates to world coordinates;
// `position` is the optical center in world coordinates. Camera axes:
// +x right, +y up, +z forward (viewing direction). Pixel v grows downward.
struct CameraModel {
  int width = 0;
  int height = 0;
  double fov_h_deg = 0.0;
  double fov_v_deg = 0.0;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

// True when R^T R = I within tol and det(R) = +1 within tol.
bool validate_rotation(const Mat3& rotation, double tol = 1e-9);

// Computes intrinsics from the field of view. The horizontal FOV spans the
// outermost pixel centers, so fx = ((width-1)/2) / tan(fov_h/2), and the
// principal point sits at the raster center ((width-1)/2, (height-1)/2).
// Throws std::invalid_argument on bad dimensions, FOV outside (0, 180), or
// an invalid rotation.
CameraModel make_camera(int width, int height, double fov_h_deg,
                        double fov_v_deg, const Vec3& position,
                        const Mat3& rotation);

// Unit direction in world coordinates through pixel center (u, v).
// Throws std::out_of_range when the pixel is outside the raster.
Vec3 pixel_to_ray(const CameraModel& cam, int u, int v);

struct PixelProjection {
  enum class Status { in_view, out_of_view, behind_camera };
  Status status = Status::behind_camera;
  double u = 0.0;
  double v = 0.0;
};

// Projects a world point. `behind_camera` when the camera-frame z is <= 0
// (u, v left at zero); otherwise u, v are always filled and `in_view`
// requires u in [-0.5, width-0.5) and v in [-0.5, height-0.5).
PixelProjection point_to_pixel(const CameraModel& cam, const Vec3& p);

enum class Corner { TL = 0, TR = 1, BL = 2, BR = 3 };

const char* corner_name(Corner c);
std::optional<Corner> corner_from_name(std::string_view name);

// Local frame anchored at a display corner. `rotation` maps frame
// coordinates to world coordinates and its +z column faces the background.
struct CornerFrame {
  Corner corner = Corner::TL;
  Vec3 origin = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

// World point expressed in the corner frame: R^T (p - origin).
Vec3 to_corner_frame(const CornerFrame& frame, const Vec3& p);

// Direction angles of an observer as seen from the corner. The observer
// stands on the -z side of the frame, so the measurement flips z first;
// this makes the shadow of the corner on the background sit at exactly
// the negated angles of the observer.
SphericalAngles observer_angles(const CornerFrame& frame,
                                const Vec3& observer_position);

}  // namespace camo
