#include "camo/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "camo/errors.hpp"
#include "camo/parallel.hpp"
#include "camo/rng.hpp"

namespace camo {

Rgb sample_albedo(const Albedo& albedo, const Vec3& p) {
  struct Visitor {
    const Vec3& p;
    Rgb operator()(const SolidAlbedo& a) const { return a.color; }
    Rgb operator()(const CheckerAlbedo& a) const {
      auto cell = [&](double x) {
        return static_cast<long long>(std::floor(x / a.period));
      };
      const long long s = cell(p.x()) + cell(p.y()) + cell(p.z());
      return ((s % 2) + 2) % 2 == 0 ? a.color_a : a.color_b;
    }
    Rgb operator()(const GradientAlbedo& a) const {
      const double t = std::clamp(a.axis.dot(p) + a.offset, 0.0, 1.0);
      auto mix = [&](std::uint8_t lo, std::uint8_t hi) {
        return static_cast<std::uint8_t>(std::lround(lo + t * (hi - lo)));
      };
      return Rgb{mix(a.color_a.r, a.color_b.r), mix(a.color_a.g, a.color_b.g),
                 mix(a.color_a.b, a.color_b.b)};
    }
  };
  return std::visit(Visitor{p}, albedo);
}

std::array<Vec3, 2> plane_axes(const Vec3& normal) {
  const Vec3 ref =
      std::abs(normal.dot(Vec3::UnitY())) > 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = normal.cross(ref).normalized();
  const Vec3 v = normal.cross(u);
  return {u, v};
}

std::optional<SurfaceHit> intersect_plane(const Plane& plane, const Vec3& origin,
                                          const Vec3& dir, double eps) {
  const double denom = plane.normal.dot(dir);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = plane.normal.dot(plane.point - origin) / denom;
  if (t <= eps) return std::nullopt;
  const Vec3 p = origin + t * dir;
  const auto axes = plane_axes(plane.normal);
  const Vec3 d = p - plane.point;
  if (std::abs(axes[0].dot(d)) > plane.width / 2.0 ||
      std::abs(axes[1].dot(d)) > plane.height / 2.0) {
    return std::nullopt;
  }
  return SurfaceHit{t, p, plane.normal};
}

std::optional<SurfaceHit> intersect_box(const Box& box, const Vec3& origin,
                                        const Vec3& dir, double eps) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  int enter_axis = -1;
  int exit_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double t1 = (box.min[a] - origin[a]) / dir[a];
    double t2 = (box.max[a] - origin[a]) / dir[a];
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_enter) {
      t_enter = t1;
      enter_axis = a;
    }
    if (t2 < t_exit) {
      t_exit = t2;
      exit_axis = a;
    }
  }
  if (t_enter > t_exit) return std::nullopt;
  double t;
  int axis;
  if (t_enter > eps) {
    t = t_enter;
    axis = enter_axis;
  } else if (t_exit > eps) {
    t = t_exit;
    axis = exit_axis;
  } else {
    return std::nullopt;
  }
  if (axis < 0) return std::nullopt;  // ray parallel to every bounded slab
  Vec3 normal = Vec3::Zero();
  const Vec3 p = origin + t * dir;
  const double mid = (box.min[axis] + box.max[axis]) / 2.0;
  normal[axis] = p[axis] < mid ? -1.0 : 1.0;
  return SurfaceHit{t, p, normal};
}

std::optional<SurfaceHit> intersect_sphere(const Sphere& sphere,
                                           const Vec3& origin, const Vec3& dir,
                                           double eps) {
  const Vec3 oc = origin - sphere.center;
  const double b = oc.dot(dir);
  const double c = oc.squaredNorm() - sphere.radius * sphere.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double t = -b - sq;
  if (t <= eps) t = -b + sq;
  if (t <= eps) return std::nullopt;
  const Vec3 p = origin + t * dir;
  return SurfaceHit{t, p, (p - sphere.center) / sphere.radius};
}

std::optional<SurfaceHit> intersect_shape(const Shape& shape, const Vec3& origin,
                                          const Vec3& dir, double eps) {
  return std::visit(
      [&](const auto& s) -> std::optional<SurfaceHit> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return intersect_plane(s, origin, dir, eps);
        } else if constexpr (std::is_same_v<T, Box>) {
          return intersect_box(s, origin, dir, eps);
        } else {
          return intersect_sphere(s, origin, dir, eps);
        }
      },
      shape);
}

void validate_scene(const Scene& scene) {
  if (scene.surfaces.empty()) {
    throw std::invalid_argument("scene: no surfaces");
  }
  if (!std::holds_alternative<Plane>(scene.surfaces.back().shape)) {
    throw std::invalid_argument("scene: last surface must be the background plane");
  }
  for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
    const Surface& s = scene.surfaces[i];
    const std::string where = "scene surface " + std::to_string(i);
    if (const auto* p = std::get_if<Plane>(&s.shape)) {
      if (std::abs(p->normal.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument(where + ": plane normal not unit length");
      }
      if (!(p->width > 0.0 && p->height > 0.0)) {
        throw std::invalid_argument(where + ": plane extents must be positive");
      }
    } else if (const auto* b = std::get_if<Box>(&s.shape)) {
      if (!(b->min.x() < b->max.x() && b->min.y() < b->max.y() &&
            b->min.z() < b->max.z())) {
        throw std::invalid_argument(where + ": box min must be below max");
      }
    } else if (const auto* sp = std::get_if<Sphere>(&s.shape)) {
      if (!(sp->radius > 0.0)) {
        throw std::invalid_argument(where + ": sphere radius must be positive");
      }
    }
    if (const auto* c = std::get_if<CheckerAlbedo>(&s.albedo)) {
      if (!(c->period > 0.0)) {
        throw std::invalid_argument(where + ": checker period must be positive");
      }
    }
  }
}

std::optional<RayHit> ray_cast(const Vec3& origin, const Vec3& dir,
                               const Scene& scene, double eps) {
  if (std::abs(dir.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("ray_cast: direction must be unit length");
  }
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
    const auto hit = intersect_shape(scene.surfaces[i].shape, origin, dir, eps);
    if (hit && (!best || hit->t < best->t)) {
      best = RayHit{hit->point, hit->normal, static_cast<int>(i), hit->t};
    }
  }
  return best;
}

Vec3 shadow_of_corner(const Vec3& op, const Vec3& corner, const Scene& scene) {
  const Vec3 delta = corner - op;
  if (delta.norm() == 0.0) {
    throw std::invalid_argument("shadow_of_corner: op equals corner");
  }
  const auto hit = ray_cast(corner, delta.normalized(), scene);
  if (!hit) {
    throw std::runtime_error(
        "shadow_of_corner: ray leaves the scene without intersecting");
  }
  return hit->point;
}

void validate_display(const DisplayQuad& display) {
  const Vec3 e1 = display.tr - display.tl;
  const Vec3 e2 = display.bl - display.tl;
  const Vec3 n = e1.cross(e2);
  if (n.norm() < 1e-12) {
    throw std::invalid_argument("display: degenerate quad");
  }
  const Vec3 unit = n.normalized();
  if (std::abs(unit.dot(display.br - display.tl)) > 1e-6) {
    throw std::invalid_argument("display: corners not coplanar");
  }
  const double area2 =
      (display.tr - display.br).cross(display.bl - display.br).norm();
  if (area2 < 1e-12) {
    throw std::invalid_argument("display: degenerate quad");
  }
}

Vec3 display_front_normal(const DisplayQuad& display) {
  return (display.tr - display.tl).cross(display.bl - display.tl).normalized();
}

bool is_front(const DisplayQuad& display, const Vec3& p) {
  const Vec3 center = (display.tl + display.tr + display.bl + display.br) / 4.0;
  return display_front_normal(display).dot(p - center) > 0.0;
}

Vec3 display_point(const DisplayQuad& display, double s, double t) {
  const Vec3 top = display.tl + s * (display.tr - display.tl);
  const Vec3 bottom = display.bl + s * (display.br - display.bl);
  return top + t * (bottom - top);
}

Vec3 display_corner(const DisplayQuad& display, Corner c) {
  switch (c) {
    case Corner::TL:
      return display.tl;
    case Corner::TR:
      return display.tr;
    case Corner::BL:
      return display.bl;
    case Corner::BR:
      return display.br;
  }
  throw std::invalid_argument("display_corner: bad corner");
}

std::array<CornerFrame, 4> corner_frames(const DisplayQuad& display) {
  validate_display(display);
  const Vec3 z = -display_front_normal(display);
  Vec3 x = (display.tr - display.tl).normalized();
  x = (x - x.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 rot;
  rot.col(0) = x;
  rot.col(1) = y;
  rot.col(2) = z;
  std::array<CornerFrame, 4> frames;
  const Corner ids[4] = {Corner::TL, Corner::TR, Corner::BL, Corner::BR};
  for (int i = 0; i < 4; ++i) {
    frames[i].corner = ids[i];
    frames[i].origin = display_corner(display, ids[i]);
    frames[i].rotation = rot;
  }
  return frames;
}

RenderResult occluded_region_render(const Vec3& op, const DisplayQuad& display,
                                    const Scene& scene, int width, int height,
                                    int threads) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("occluded_region_render: bad raster size");
  }
  validate_display(display);
  if (!is_front(display, op)) {
    throw std::invalid_argument(
        "occluded_region_render: observer must face the display front");
  }
  RenderResult out;
  out.image = ColorImage(width, height);
  std::vector<int> row_misses(static_cast<std::size_t>(height), 0);
  parallel_for(0, height, threads, [&](int v) {
    const double t = height > 1 ? v / static_cast<double>(height - 1) : 0.0;
    for (int u = 0; u < width; ++u) {
      const double s = width > 1 ? u / static_cast<double>(width - 1) : 0.0;
      const Vec3 target = display_point(display, s, t);
      const auto hit = ray_cast(op, (target - op).normalized(), scene);
      if (hit) {
        out.image.at(u, v) =
            sample_albedo(scene.surfaces[hit->surface_index].albedo, hit->point);
      } else {
        out.image.at(u, v) = Rgb{255, 0, 255};
        ++row_misses[static_cast<std::size_t>(v)];
      }
    }
  });
  for (int m : row_misses) out.miss_count += m;
  return out;
}

namespace {

void print_color(std::ostream& os, const Rgb& c) {
  os << static_cast<int>(c.r) << ' ' << static_cast<int>(c.g) << ' '
     << static_cast<int>(c.b);
}

void print_albedo(std::ostream& os, const Albedo& albedo) {
  if (const auto* s = std::get_if<SolidAlbedo>(&albedo)) {
    os << "solid ";
    print_color(os, s->color);
  } else if (const auto* c = std::get_if<CheckerAlbedo>(&albedo)) {
    os << "checker ";
    print_color(os, c->color_a);
    os << ' ';
    print_color(os, c->color_b);
    os << ' ' << c->period;
  } else if (const auto* g = std::get_if<GradientAlbedo>(&albedo)) {
    os << "gradient ";
    print_color(os, g->color_a);
    os << ' ';
    print_color(os, g->color_b);
    os << ' ' << g->axis.x() << ' ' << g->axis.y() << ' ' << g->axis.z() << ' '
       << g->offset;
  }
}

struct LineParser {
  std::istringstream in;
  int line_no;

  LineParser(const std::string& line, int no) : in(line), line_no(no) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw FileError("scene line " + std::to_string(line_no) + ": " + what);
  }

  std::string word() {
    std::string w;
    if (!(in >> w)) fail("unexpected end of line");
    return w;
  }

  double number() {
    double x = 0.0;
    if (!(in >> x)) fail("expected a number");
    return x;
  }

  std::uint8_t channel() {
    int x = 0;
    if (!(in >> x) || x < 0 || x > 255) fail("expected a color channel 0..255");
    return static_cast<std::uint8_t>(x);
  }

  Rgb color() {
    Rgb c;
    c.r = channel();
    c.g = channel();
    c.b = channel();
    return c;
  }

  Vec3 vec() {
    const double x = number();
    const double y = number();
    const double z = number();
    return Vec3(x, y, z);
  }

  Albedo albedo() {
    const std::string kind = word();
    if (kind == "solid") return SolidAlbedo{color()};
    if (kind == "checker") {
      CheckerAlbedo a;
      a.color_a = color();
      a.color_b = color();
      a.period = number();
      return a;
    }
    if (kind == "gradient") {
      GradientAlbedo a;
      a.color_a = color();
      a.color_b = color();
      a.axis = vec();
      a.offset = number();
      return a;
    }
    fail("unknown albedo '" + kind + "'");
  }

  void done() {
    std::string extra;
    if (in >> extra) fail("trailing tokens starting at '" + extra + "'");
  }
};

}  // namespace

SceneDescription parse_scene(const std::string& text) {
  SceneDescription desc;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (const auto pos = line.find('#'); pos != std::string::npos) {
      line.erase(pos);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    LineParser p(line, line_no);
    const std::string kind = p.word();
    if (kind == "plane") {
      Plane pl;
      pl.point = p.vec();
      pl.normal = p.vec();
      pl.width = p.number();
      pl.height = p.number();
      Surface s{pl, p.albedo()};
      p.done();
      desc.scene.surfaces.push_back(std::move(s));
    } else if (kind == "box") {
      Box b;
      b.min = p.vec();
      b.max = p.vec();
      Surface s{b, p.albedo()};
      p.done();
      desc.scene.surfaces.push_back(std::move(s));
    } else if (kind == "sphere") {
      Sphere sp;
      sp.center = p.vec();
      sp.radius = p.number();
      Surface s{sp, p.albedo()};
      p.done();
      desc.scene.surfaces.push_back(std::move(s));
    } else if (kind == "display") {
      if (desc.display) p.fail("duplicate display");
      DisplayQuad d;
      d.tl = p.vec();
      d.tr = p.vec();
      d.bl = p.vec();
      d.br = p.vec();
      p.done();
      desc.display = d;
    } else {
      p.fail("unknown element '" + kind + "'");
    }
  }
  try {
    validate_scene(desc.scene);
    if (desc.display) validate_display(*desc.display);
  } catch (const std::invalid_argument& e) {
    throw FileError(std::string("scene: ") + e.what());
  }
  return desc;
}

std::string print_scene(const SceneDescription& desc) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const Surface& s : desc.scene.surfaces) {
    if (const auto* pl = std::get_if<Plane>(&s.shape)) {
      os << "plane " << pl->point.x() << ' ' << pl->point.y() << ' '
         << pl->point.z() << ' ' << pl->normal.x() << ' ' << pl->normal.y()
         << ' ' << pl->normal.z() << ' ' << pl->width << ' ' << pl->height
         << ' ';
    } else if (const auto* b = std::get_if<Box>(&s.shape)) {
      os << "box " << b->min.x() << ' ' << b->min.y() << ' ' << b->min.z()
         << ' ' << b->max.x() << ' ' << b->max.y() << ' ' << b->max.z() << ' ';
    } else if (const auto* sp = std::get_if<Sphere>(&s.shape)) {
      os << "sphere " << sp->center.x() << ' ' << sp->center.y() << ' '
         << sp->center.z() << ' ' << sp->radius << ' ';
    }
    print_albedo(os, s.albedo);
    os << '\n';
  }
  if (desc.display) {
    const DisplayQuad& d = *desc.display;
    os << "display";
    for (const Vec3* c : {&d.tl, &d.tr, &d.bl, &d.br}) {
      os << ' ' << c->x() << ' ' << c->y() << ' ' << c->z();
    }
    os << '\n';
  }
  return os.str();
}

SceneDescription load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("load_scene: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

void save_scene(const SceneDescription& desc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("save_scene: cannot open " + path);
  out << print_scene(desc);
  if (!out) throw FileError("save_scene: write failed for " + path);
}

std::uint64_t scene_fingerprint(const SceneDescription& desc) {
  return fnv1a64(print_scene(desc));
}

namespace {

SceneDescription base_scene(const Albedo& background) {
  SceneDescription desc;
  Plane bg;
  bg.point = Vec3(0.0, 0.0, 3.0);
  bg.normal = Vec3(0.0, 0.0, -1.0);
  bg.width = 14.0;
  bg.height = 9.0;
  desc.scene.surfaces.push_back(Surface{bg, background});
  DisplayQuad d;
  d.tl = Vec3(-0.40, 0.25, -0.30);
  d.tr = Vec3(0.40, 0.25, -0.30);
  d.bl = Vec3(-0.40, -0.25, -0.30);
  d.br = Vec3(0.40, -0.25, -0.30);
  desc.display = d;
  return desc;
}

Albedo default_checker() {
  return CheckerAlbedo{Rgb{70, 70, 70}, Rgb{185, 185, 185}, 0.4};
}

}  // namespace

SceneDescription make_scene_variant(const std::string& variant,
                                    std::uint64_t seed) {
  if (variant == "default") {
    return base_scene(default_checker());
  }
  if (variant == "gradient") {
    GradientAlbedo g;
    g.color_a = Rgb{20, 40, 160};
    g.color_b = Rgb{220, 200, 40};
    g.axis = Vec3(1.0 / 14.0, 0.0, 0.0);
    g.offset = 0.5;
    return base_scene(g);
  }
  if (variant == "layered") {
    SceneDescription desc = base_scene(default_checker());
    auto gen = substream(seed, "scene/layered");
    auto jitter = [&](double lo, double hi) { return uniform_real(gen, lo, hi); };
    Box box;
    const Vec3 bc(-0.7 + jitter(-0.15, 0.15), -0.1 + jitter(-0.15, 0.15),
                  2.2 + jitter(-0.15, 0.15));
    const Vec3 half(0.35, 0.30, 0.25);
    box.min = bc - half;
    box.max = bc + half;
    Sphere sphere;
    sphere.center = Vec3(0.8 + jitter(-0.15, 0.15), 0.4 + jitter(-0.15, 0.15),
                         1.8 + jitter(-0.15, 0.15));
    sphere.radius = 0.35;
    // Objects go before the background so index order matches depth order
    // for on-axis rays; the background stays last.
    Surface bg = desc.scene.surfaces.back();
    desc.scene.surfaces.clear();
    desc.scene.surfaces.push_back(Surface{box, SolidAlbedo{Rgb{170, 90, 50}}});
    desc.scene.surfaces.push_back(
        Surface{sphere, SolidAlbedo{Rgb{60, 130, 190}}});
    desc.scene.surfaces.push_back(bg);
    return desc;
  }
  throw std::invalid_argument("make_scene_variant: unknown variant '" +
                              variant + "'");
}

std::vector<std::string> scene_variants() {
  return {"default", "gradient", "layered"};
}

}  // namespace camo
