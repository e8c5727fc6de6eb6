#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <variant>

#include "camo/errors.hpp"
#include "camo/rng.hpp"
#include "camo/scene.hpp"

using namespace camo;

namespace {

Scene default_scene() { return make_scene_variant("default", 1).scene; }

DisplayQuad default_display() {
  return *make_scene_variant("default", 1).display;
}

}  // namespace

TEST_CASE("sample_albedo") {
  const Albedo solid = SolidAlbedo{Rgb{9, 8, 7}};
  CHECK(sample_albedo(solid, Vec3(100, -3, 0.5)) == Rgb{9, 8, 7});

  const Albedo checker = CheckerAlbedo{Rgb{1, 1, 1}, Rgb{2, 2, 2}, 1.0};
  CHECK(sample_albedo(checker, Vec3(0.1, 0.1, 0.1)) == Rgb{1, 1, 1});
  CHECK(sample_albedo(checker, Vec3(1.1, 0.1, 0.1)) == Rgb{2, 2, 2});
  CHECK(sample_albedo(checker, Vec3(1.1, 1.1, 0.1)) == Rgb{1, 1, 1});
  // floor(-0.1) = -1 flips parity
  CHECK(sample_albedo(checker, Vec3(-0.1, 0.1, 0.1)) == Rgb{2, 2, 2});

  // precomputed: t = clamp(3.5/14 + 0.5) = 0.75 -> (170, 160, 70)
  GradientAlbedo g;
  g.color_a = Rgb{20, 40, 160};
  g.color_b = Rgb{220, 200, 40};
  g.axis = Vec3(1.0 / 14.0, 0, 0);
  g.offset = 0.5;
  CHECK(sample_albedo(g, Vec3(3.5, 0, 3)) == Rgb{170, 160, 70});
  CHECK(sample_albedo(g, Vec3(-100, 0, 3)) == Rgb{20, 40, 160});
  CHECK(sample_albedo(g, Vec3(100, 0, 3)) == Rgb{220, 200, 40});
}

TEST_CASE("plane_axes spans the plane") {
  for (const Vec3& n : {Vec3(0, 0, -1), Vec3(0, 1, 0), Vec3(1, 2, 3).normalized()}) {
    const auto [u, v] = plane_axes(n);
    CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(u.dot(v)) < 1e-12);
    CHECK(std::abs(u.dot(n)) < 1e-12);
    CHECK(std::abs(v.dot(n)) < 1e-12);
  }
}

TEST_CASE("intersect_plane") {
  Plane p;
  p.point = Vec3(0, 0, 3);
  p.normal = Vec3(0, 0, -1);
  p.width = 14;
  p.height = 9;

  auto hit = intersect_plane(p, Vec3::Zero(), Vec3(0, 0, 1));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(hit->point.isApprox(Vec3(0, 0, 3), 1e-12));

  // two-sided: approaching from behind also hits
  hit = intersect_plane(p, Vec3(0, 0, 5), Vec3(0, 0, -1));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(2.0).epsilon(1e-14));

  // inside the bound: 6.9 < half width 7
  const Vec3 toward = (Vec3(6.9, 0, 3) - Vec3::Zero()).normalized();
  CHECK(intersect_plane(p, Vec3::Zero(), toward));
  // outside the bound: 7.1 > 7
  const Vec3 outside = (Vec3(7.1, 0, 3) - Vec3::Zero()).normalized();
  CHECK_FALSE(intersect_plane(p, Vec3::Zero(), outside));
  // height bound: half height 4.5
  const Vec3 above = (Vec3(0, 4.6, 3) - Vec3::Zero()).normalized();
  CHECK_FALSE(intersect_plane(p, Vec3::Zero(), above));

  // parallel ray misses
  CHECK_FALSE(intersect_plane(p, Vec3::Zero(), Vec3(1, 0, 0)));
  // behind the origin misses
  CHECK_FALSE(intersect_plane(p, Vec3::Zero(), Vec3(0, 0, -1)));
}

TEST_CASE("intersect_box") {
  Box b;
  b.min = Vec3(0, 0, 0);
  b.max = Vec3(1, 1, 1);

  auto hit = intersect_box(b, Vec3(-1, 0.5, 0.5), Vec3(1, 0, 0));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hit->point.isApprox(Vec3(0, 0.5, 0.5), 1e-12));
  CHECK(hit->normal.isApprox(Vec3(-1, 0, 0), 1e-12));

  // from inside: the exit face, outward normal
  hit = intersect_box(b, Vec3(0.5, 0.5, 0.5), Vec3(1, 0, 0));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(hit->normal.isApprox(Vec3(1, 0, 0), 1e-12));

  // parallel to a slab but outside it
  CHECK_FALSE(intersect_box(b, Vec3(-1, 2, 0.5), Vec3(1, 0, 0)));
  // pointing away
  CHECK_FALSE(intersect_box(b, Vec3(-1, 0.5, 0.5), Vec3(-1, 0, 0)));
  // diagonal corner-ish hit
  hit = intersect_box(b, Vec3(-1, -1, 0.5), Vec3(1, 1, 0).normalized());
  REQUIRE(hit);
  CHECK(hit->point.isApprox(Vec3(0, 0, 0.5), 1e-12));
}

TEST_CASE("intersect_sphere") {
  Sphere s;
  s.center = Vec3::Zero();
  s.radius = 1.0;

  auto hit = intersect_sphere(s, Vec3(0, 0, -5), Vec3(0, 0, 1));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(hit->point.isApprox(Vec3(0, 0, -1), 1e-12));
  CHECK(hit->normal.isApprox(Vec3(0, 0, -1), 1e-12));

  // from the center: exits at radius with outward normal
  hit = intersect_sphere(s, Vec3::Zero(), Vec3(1, 0, 0));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hit->normal.isApprox(Vec3(1, 0, 0), 1e-12));

  CHECK_FALSE(intersect_sphere(s, Vec3(0, 0, -5), Vec3(0, 0, -1)));
  CHECK_FALSE(intersect_sphere(s, Vec3(0, 2, -5), Vec3(0, 0, 1)));
}

TEST_CASE("ray_cast picks the nearest hit, ties to the lowest index") {
  Scene scene;
  Plane far_plane{Vec3(0, 0, 5), Vec3(0, 0, -1), 10, 10};
  Plane near_plane{Vec3(0, 0, 2), Vec3(0, 0, -1), 10, 10};
  scene.surfaces.push_back(Surface{far_plane, SolidAlbedo{Rgb{1, 0, 0}}});
  scene.surfaces.push_back(Surface{near_plane, SolidAlbedo{Rgb{2, 0, 0}}});

  auto hit = ray_cast(Vec3::Zero(), Vec3(0, 0, 1), scene);
  REQUIRE(hit);
  CHECK(hit->surface_index == 1);
  CHECK(hit->t == doctest::Approx(2.0));

  // two coincident planes: the lower index wins
  Scene tie;
  tie.surfaces.push_back(Surface{near_plane, SolidAlbedo{Rgb{1, 0, 0}}});
  tie.surfaces.push_back(Surface{near_plane, SolidAlbedo{Rgb{2, 0, 0}}});
  hit = ray_cast(Vec3::Zero(), Vec3(0, 0, 1), tie);
  REQUIRE(hit);
  CHECK(hit->surface_index == 0);

  // origin sitting on a surface does not self-intersect
  hit = ray_cast(Vec3(0, 0, 2), Vec3(0, 0, 1), scene);
  REQUIRE(hit);
  CHECK(hit->surface_index == 0);
  CHECK(hit->t == doctest::Approx(3.0));

  CHECK_THROWS_AS(ray_cast(Vec3::Zero(), Vec3(0, 0, 2), scene),
                  std::invalid_argument);
  CHECK_FALSE(ray_cast(Vec3::Zero(), Vec3(0, 0, -1), scene));
}

TEST_CASE("ray_cast agrees with a per-surface linear scan") {
  const Scene scene = make_scene_variant("layered", 3).scene;
  auto gen = substream(99, "rays");
  for (int i = 0; i < 500; ++i) {
    const Vec3 origin(uniform_real(gen, -1, 1), uniform_real(gen, -1, 1),
                      uniform_real(gen, -1, 0));
    Vec3 dir(uniform_real(gen, -0.6, 0.6), uniform_real(gen, -0.6, 0.6), 1.0);
    dir.normalize();
    const auto fast = ray_cast(origin, dir, scene);

    // independent selection: scan every surface, keep min t then min index
    std::optional<RayHit> slow;
    for (std::size_t s = 0; s < scene.surfaces.size(); ++s) {
      const auto h = intersect_shape(scene.surfaces[s].shape, origin, dir);
      if (h && (!slow || h->t < slow->t)) {
        slow = RayHit{h->point, h->normal, static_cast<int>(s), h->t};
      }
    }
    REQUIRE(fast.has_value() == slow.has_value());
    if (fast) {
      CHECK(fast->surface_index == slow->surface_index);
      CHECK(fast->t == doctest::Approx(slow->t).epsilon(1e-14));
    }
  }
}

TEST_CASE("shadow_of_corner hand value") {
  const Scene scene = default_scene();
  // precomputed intersection of the op->TR ray with the z = 3 wall
  const Vec3 shadow =
      shadow_of_corner(Vec3(0, 0, -2), Vec3(0.40, 0.25, -0.30), scene);
  CHECK(shadow.x() == doctest::Approx(1.1764705882352942).epsilon(1e-14));
  CHECK(shadow.y() == doctest::Approx(0.7352941176470589).epsilon(1e-14));
  CHECK(shadow.z() == doctest::Approx(3.0).epsilon(1e-14));

  CHECK_THROWS_AS(shadow_of_corner(Vec3(1, 1, 1), Vec3(1, 1, 1), scene),
                  std::invalid_argument);
  // a ray fired away from the wall leaves the scene
  CHECK_THROWS_AS(shadow_of_corner(Vec3(0, 0, 1), Vec3(0, 0, 0.5), scene),
                  std::runtime_error);
}

TEST_CASE("shadow angles mirror the observer angles on a planar wall") {
  const Scene scene = default_scene();
  const auto frames = corner_frames(default_display());
  // precomputed for op (0,0,-2) in the TR frame
  const auto obs = observer_angles(frames[1], Vec3(0, 0, -2));
  CHECK(obs.theta_deg == doctest::Approx(-13.240519915187207).epsilon(1e-13));
  CHECK(obs.phi_deg == doctest::Approx(-8.36588612403259).epsilon(1e-13));

  for (const auto& frame : frames) {
    for (const Vec3& op : {Vec3(0, 0, -2), Vec3(-0.3, 0.2, -2.8),
                           Vec3(0.35, -0.28, -2.1)}) {
      const auto in = observer_angles(frame, op);
      const Vec3 shadow = shadow_of_corner(op, frame.origin, scene);
      const auto out = cartesian_to_spherical(to_corner_frame(frame, shadow));
      CHECK(out.theta_deg == doctest::Approx(-in.theta_deg).epsilon(1e-11));
      CHECK(out.phi_deg == doctest::Approx(-in.phi_deg).epsilon(1e-11));
    }
  }
}

TEST_CASE("validate_scene") {
  Scene empty;
  CHECK_THROWS_AS(validate_scene(empty), std::invalid_argument);

  Scene no_bg;
  no_bg.surfaces.push_back(Surface{Sphere{Vec3::Zero(), 1.0}, SolidAlbedo{}});
  CHECK_THROWS_AS(validate_scene(no_bg), std::invalid_argument);

  Scene bad_normal;
  bad_normal.surfaces.push_back(
      Surface{Plane{Vec3::Zero(), Vec3(0, 0, -2), 1, 1}, SolidAlbedo{}});
  CHECK_THROWS_AS(validate_scene(bad_normal), std::invalid_argument);

  CHECK_NOTHROW(validate_scene(default_scene()));
  CHECK_NOTHROW(validate_scene(make_scene_variant("layered", 5).scene));
}

TEST_CASE("display helpers") {
  const DisplayQuad d = default_display();
  CHECK_NOTHROW(validate_display(d));
  CHECK(display_front_normal(d).isApprox(Vec3(0, 0, -1), 1e-12));
  CHECK(is_front(d, Vec3(0, 0, -2)));
  CHECK_FALSE(is_front(d, Vec3(0, 0, 3)));

  CHECK(display_point(d, 0, 0).isApprox(d.tl, 1e-15));
  CHECK(display_point(d, 1, 1).isApprox(d.br, 1e-15));
  CHECK(display_point(d, 0.5, 0.5).isApprox(Vec3(0, 0, -0.3), 1e-12));
  CHECK(display_corner(d, Corner::BL).isApprox(d.bl, 1e-15));

  DisplayQuad bent = d;
  bent.br.z() += 0.01;
  CHECK_THROWS_AS(validate_display(bent), std::invalid_argument);

  DisplayQuad degenerate;
  CHECK_THROWS_AS(validate_display(degenerate), std::invalid_argument);
}

TEST_CASE("corner_frames of the default display are identity") {
  const auto frames = corner_frames(default_display());
  for (int i = 0; i < 4; ++i) {
    CHECK(frames[i].rotation.isApprox(Mat3::Identity(), 1e-12));
    CHECK(static_cast<int>(frames[i].corner) == i);
  }
  CHECK(frames[0].origin.isApprox(Vec3(-0.40, 0.25, -0.30), 1e-15));
  CHECK(frames[3].origin.isApprox(Vec3(0.40, -0.25, -0.30), 1e-15));
}

TEST_CASE("corner_frames of a rotated display stay orthonormal") {
  const double c = std::cos(deg2rad(30)), s = std::sin(deg2rad(30));
  Mat3 rot;
  rot << c, 0, s, 0, 1, 0, -s, 0, c;  // 30 degrees about y
  DisplayQuad d = default_display();
  for (Vec3* p : {&d.tl, &d.tr, &d.bl, &d.br}) *p = rot * *p;

  const auto frames = corner_frames(d);
  CHECK(validate_rotation(frames[0].rotation, 1e-9));
  // +z column faces away from the observer side
  const Vec3 z = frames[0].rotation.col(2);
  CHECK(z.isApprox(-display_front_normal(d), 1e-12));
  // x column along TL->TR
  const Vec3 x = frames[0].rotation.col(0);
  CHECK(x.isApprox((d.tr - d.tl).normalized(), 1e-12));
  for (int i = 1; i < 4; ++i) {
    CHECK(frames[i].rotation.isApprox(frames[0].rotation, 1e-15));
  }
}

TEST_CASE("occluded_region_render") {
  const Scene scene = default_scene();
  const DisplayQuad d = default_display();
  const Vec3 op(0.1, -0.05, -2.4);

  const RenderResult r = occluded_region_render(op, d, scene, 8, 5);
  CHECK(r.image.width == 8);
  CHECK(r.image.height == 5);
  CHECK(r.miss_count == 0);

  // pixel (0,0) sees the shadow of TL, pixel (7,4) the shadow of BR
  const Rgb tl_expect = sample_albedo(scene.surfaces[0].albedo,
                                      shadow_of_corner(op, d.tl, scene));
  const Rgb br_expect = sample_albedo(scene.surfaces[0].albedo,
                                      shadow_of_corner(op, d.br, scene));
  CHECK(r.image.at(0, 0) == tl_expect);
  CHECK(r.image.at(7, 4) == br_expect);

  // same result when rendered with more threads
  const RenderResult r2 = occluded_region_render(op, d, scene, 8, 5, 4);
  CHECK(r2.image.pixels == r.image.pixels);
  CHECK(r2.miss_count == 0);

  // an observer hugging the display sprays rays off the 14 x 9 wall
  const RenderResult wide =
      occluded_region_render(Vec3(0, 0, -0.4), d, scene, 9, 7);
  CHECK(wide.miss_count > 0);
  int magenta = 0;
  for (const Rgb& px : wide.image.pixels) {
    if (px == Rgb{255, 0, 255}) ++magenta;
  }
  CHECK(magenta == wide.miss_count);

  CHECK_THROWS_AS(occluded_region_render(Vec3(0, 0, 3), d, scene, 4, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(occluded_region_render(op, d, scene, 0, 4),
                  std::invalid_argument);
}

TEST_CASE("scene text round trip") {
  SceneDescription desc;
  desc.scene.surfaces.push_back(
      Surface{Box{Vec3(-1, -1, 1), Vec3(1, 1, 2)},
              GradientAlbedo{Rgb{1, 2, 3}, Rgb{4, 5, 6}, Vec3(0, 1, 0), 0.25}});
  desc.scene.surfaces.push_back(
      Surface{Sphere{Vec3(0.1, 0.2, 2.5), 0.333333333333333},
              SolidAlbedo{Rgb{200, 100, 0}}});
  desc.scene.surfaces.push_back(
      Surface{Plane{Vec3(0, 0, 4), Vec3(0, 0, -1), 10, 8},
              CheckerAlbedo{Rgb{0, 0, 0}, Rgb{255, 255, 255}, 0.7}});
  DisplayQuad d;
  d.tl = Vec3(-0.3, 0.2, -0.1);
  d.tr = Vec3(0.3, 0.2, -0.1);
  d.bl = Vec3(-0.3, -0.2, -0.1);
  d.br = Vec3(0.3, -0.2, -0.1);
  desc.display = d;

  const std::string text = print_scene(desc);
  const SceneDescription back = parse_scene(text);
  CHECK(print_scene(back) == text);
  CHECK(scene_fingerprint(back) == scene_fingerprint(desc));
  REQUIRE(back.display.has_value());
  CHECK(back.display->tr.isApprox(d.tr, 0.0));

  // comments and blank lines are fine
  const SceneDescription commented =
      parse_scene("# header\n\n" + text + "\n# trailer\n");
  CHECK(print_scene(commented) == text);
}

TEST_CASE("parse_scene rejects bad input") {
  CHECK_THROWS_AS(parse_scene("plane 0 0 3 0 0 -1 14 9"), FileError);  // no albedo
  CHECK_THROWS_AS(parse_scene("wedge 0 0 0"), FileError);
  CHECK_THROWS_AS(parse_scene("plane 0 0 3 0 0 -1 14 9 solid 300 0 0"),
                  FileError);
  CHECK_THROWS_AS(parse_scene(""), FileError);  // empty scene fails validation
  // non-unit normal fails validation wrapped as a file error
  CHECK_THROWS_AS(parse_scene("plane 0 0 3 0 0 -2 14 9 solid 1 2 3"),
                  FileError);
  const std::string one = "plane 0 0 3 0 0 -1 14 9 solid 1 2 3\n";
  const std::string disp =
      "display -0.4 0.25 -0.3 0.4 0.25 -0.3 -0.4 -0.25 -0.3 0.4 -0.25 -0.3\n";
  CHECK_THROWS_AS(parse_scene(one + disp + disp), FileError);
  CHECK_THROWS_AS(parse_scene(one + "sphere 0 0 0 1 solid 1 2 3 9\n"),
                  FileError);  // trailing token
}

TEST_CASE("scene variants") {
  const auto names = scene_variants();
  REQUIRE(names.size() == 3);

  const SceneDescription def = make_scene_variant("default", 1);
  CHECK(def.scene.surfaces.size() == 1);
  CHECK(def.display.has_value());
  CHECK(std::holds_alternative<CheckerAlbedo>(def.scene.surfaces[0].albedo));

  const SceneDescription grad = make_scene_variant("gradient", 1);
  CHECK(std::holds_alternative<GradientAlbedo>(grad.scene.surfaces[0].albedo));
  CHECK(scene_fingerprint(grad) != scene_fingerprint(def));

  const SceneDescription lay = make_scene_variant("layered", 7);
  REQUIRE(lay.scene.surfaces.size() == 3);
  CHECK(std::holds_alternative<Box>(lay.scene.surfaces[0].shape));
  CHECK(std::holds_alternative<Sphere>(lay.scene.surfaces[1].shape));
  CHECK(std::holds_alternative<Plane>(lay.scene.surfaces[2].shape));

  // the seed moves the objects
  CHECK(scene_fingerprint(make_scene_variant("layered", 1)) !=
        scene_fingerprint(make_scene_variant("layered", 2)));
  CHECK(scene_fingerprint(make_scene_variant("layered", 1)) ==
        scene_fingerprint(make_scene_variant("layered", 1)));

  CHECK_THROWS_AS(make_scene_variant("nope", 1), std::invalid_argument);
}
