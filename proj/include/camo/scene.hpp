#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "camo/geometry.hpp"
#include "camo/image.hpp"

namespace camo {

struct SolidAlbedo {
  Rgb color;
};

// World-space checker: parity of floor(p/period) summed over all three axes.
struct CheckerAlbedo {
  Rgb color_a;
  Rgb color_b;
  double period = 1.0;
};

// Linear blend from color_a to color_b with t = clamp(axis . p + offset, 0, 1).
struct GradientAlbedo {
  Rgb color_a;
  Rgb color_b;
  Vec3 axis = Vec3::UnitX();
  double offset = 0.5;
};

using Albedo = std::variant<SolidAlbedo, CheckerAlbedo, GradientAlbedo>;

Rgb sample_albedo(const Albedo& albedo, const Vec3& p);

// Bounded rectangle on a plane: `point` is the rectangle center, extents
// width x height along two in-plane axes chosen deterministically from the
// normal. Intersection is two-sided.
struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double width = 1.0;
  double height = 1.0;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
};

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

using Shape = std::variant<Plane, Box, Sphere>;

struct Surface {
  Shape shape;
  Albedo albedo = SolidAlbedo{Rgb{128, 128, 128}};
};

struct SurfaceHit {
  double t = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

constexpr double kRayEpsilon = 1e-9;

// In-plane axes spanning the rectangle, derived from the normal only.
std::array<Vec3, 2> plane_axes(const Vec3& normal);

std::optional<SurfaceHit> intersect_plane(const Plane& plane, const Vec3& origin,
                                          const Vec3& dir,
                                          double eps = kRayEpsilon);
std::optional<SurfaceHit> intersect_box(const Box& box, const Vec3& origin,
                                        const Vec3& dir,
                                        double eps = kRayEpsilon);
std::optional<SurfaceHit> intersect_sphere(const Sphere& sphere,
                                           const Vec3& origin, const Vec3& dir,
                                           double eps = kRayEpsilon);
std::optional<SurfaceHit> intersect_shape(const Shape& shape, const Vec3& origin,
                                          const Vec3& dir,
                                          double eps = kRayEpsilon);

// The last surface must be a plane: it is the background that catches every
// ray inside the sensor field of view.
struct Scene {
  std::vector<Surface> surfaces;
};

void validate_scene(const Scene& scene);

struct RayHit {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  int surface_index = -1;
  double t = 0.0;
};

// Nearest intersection with t > eps; equal t resolves to the lowest surface
// index. `dir` must be unit length.
std::optional<RayHit> ray_cast(const Vec3& origin, const Vec3& dir,
                               const Scene& scene, double eps = kRayEpsilon);

// First scene intersection strictly beyond the corner on the ray from the
// observation point through the corner. Throws std::invalid_argument when
// op == corner, std::runtime_error when the ray leaves the scene.
Vec3 shadow_of_corner(const Vec3& op, const Vec3& corner, const Scene& scene);

struct DisplayQuad {
  Vec3 tl = Vec3::Zero();
  Vec3 tr = Vec3::Zero();
  Vec3 bl = Vec3::Zero();
  Vec3 br = Vec3::Zero();
};

// Coplanar within 1e-6 m and positive area.
void validate_display(const DisplayQuad& display);

// Unit normal pointing at the observer side.
Vec3 display_front_normal(const DisplayQuad& display);

bool is_front(const DisplayQuad& display, const Vec3& p);

// Bilinear point on the quad; s runs TL->TR, t runs TL->BL, both in [0, 1].
Vec3 display_point(const DisplayQuad& display, double s, double t);

Vec3 display_corner(const DisplayQuad& display, Corner c);

// One frame per corner, all sharing a rotation whose z-axis is the display
// normal facing the background and whose x-axis runs TL->TR.
std::array<CornerFrame, 4> corner_frames(const DisplayQuad& display);

struct RenderResult {
  ColorImage image;
  int miss_count = 0;
};

// What the observer at `op` would see through the display rectangle were the
// display absent: per pixel, the ray from op through the matching display
// point is cast into the scene and the hit albedo sampled. Rays that leave
// the scene produce magenta pixels and bump miss_count.
RenderResult occluded_region_render(const Vec3& op, const DisplayQuad& display,
                                    const Scene& scene, int width, int height,
                                    int threads = 1);

// A scene file bundles the surfaces with an optional display quad.
struct SceneDescription {
  Scene scene;
  std::optional<DisplayQuad> display;
};

// Line-oriented text format, one element per line ('#' starts a comment):
//   plane px py pz nx ny nz width height <albedo>
//   box minx miny minz maxx maxy maxz <albedo>
//   sphere cx cy cz radius <albedo>
//   display tlx tly tlz trx try trz blx bly blz brx bry brz
// with <albedo> one of:
//   solid r g b
//   checker r g b r g b period
//   gradient r g b r g b ax ay az offset
// Numbers print with 17 significant digits so print -> parse is exact.
SceneDescription parse_scene(const std::string& text);
std::string print_scene(const SceneDescription& desc);
SceneDescription load_scene(const std::string& path);
void save_scene(const SceneDescription& desc, const std::string& path);

// FNV-1a of the printed description; identifies a scene in manifests.
std::uint64_t scene_fingerprint(const SceneDescription& desc);

// Built-in scenes: "default" (checkered background wall), "layered" (box and
// sphere at intermediate depths), "gradient" (smooth background). The seed
// perturbs object placement in "layered".
SceneDescription make_scene_variant(const std::string& variant,
                                    std::uint64_t seed);
std::vector<std::string> scene_variants();

}  // namespace camo
