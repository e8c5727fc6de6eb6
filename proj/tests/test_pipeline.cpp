#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "camo/errors.hpp"
#include "camo/pipeline.hpp"
#include "camo/rng.hpp"

using namespace camo;

namespace {

const SceneDescription& world() {
  static const SceneDescription desc = make_scene_variant("default", 1);
  return desc;
}

const SceneCapture& capture() {
  static const SceneCapture cap = build_capture(world());
  return cap;
}

TrainOutcome train_small(std::uint64_t seed, bool flip_targets = false) {
  const std::vector<Vec3> observers = sample_observers(35, seed);
  DatasetOptions options;
  options.seed = seed;
  CornerDataset tr = generate_dataset(world().scene, *world().display,
                                      Corner::TR, observers, options);
  CornerDataset bl = generate_dataset(world().scene, *world().display,
                                      Corner::BL, observers, options);
  if (flip_targets) {
    for (CornerDataset* d : {&tr, &bl}) {
      for (CamouflageDataset* ch : {&d->theta, &d->phi}) {
        for (Sample& s : ch->instances) s.angle_target = -s.angle_target;
      }
    }
  }
  TrainConfig config;
  config.seed = seed;
  config.restarts = 2;
  config.max_epochs = 400;
  return train_model(world(), tr, bl, {2, 3}, config);
}

const TrainOutcome& trained() {
  static const TrainOutcome out = train_small(42);
  return out;
}

}  // namespace

TEST_CASE("network_name") {
  CHECK(network_name(Corner::TR, Channel::theta) == "TRX");
  CHECK(network_name(Corner::TR, Channel::phi) == "TRY");
  CHECK(network_name(Corner::BL, Channel::theta) == "BLX");
  CHECK(network_name(Corner::TL, Channel::phi) == "TLY");
}

TEST_CASE("sample_observers") {
  const ObserverBox box;
  const auto ops = sample_observers(35, 7);
  REQUIRE(ops.size() == 35);
  for (const Vec3& op : ops) {
    CHECK(op.x() >= box.x_min);
    CHECK(op.x() <= box.x_max);
    CHECK(op.y() >= box.y_min);
    CHECK(op.y() <= box.y_max);
    CHECK(op.z() >= box.z_min);
    CHECK(op.z() <= box.z_max);
  }
  const auto again = sample_observers(35, 7);
  CHECK(again == ops);
  const auto other = sample_observers(35, 8);
  CHECK(other != ops);

  CHECK_THROWS_AS(sample_observers(0, 7), std::invalid_argument);
  ObserverBox bad;
  bad.x_max = bad.x_min;
  CHECK_THROWS_AS(sample_observers(5, 7, bad), std::invalid_argument);
}

TEST_CASE("generate_dataset with oracle targets mirrors the inputs") {
  const auto observers = sample_observers(35, 3);
  DatasetOptions options;
  options.seed = 11;
  const CornerDataset data = generate_dataset(
      world().scene, *world().display, Corner::TR, observers, options);

  CHECK(data.corner == Corner::TR);
  REQUIRE(data.theta.instances.size() == 35);
  REQUIRE(data.phi.instances.size() == 35);
  for (std::size_t i = 0; i < 35; ++i) {
    CHECK(data.theta.instances[i].angle_target ==
          doctest::Approx(-data.theta.instances[i].angle_in).epsilon(1e-10));
    CHECK(data.phi.instances[i].angle_target ==
          doctest::Approx(-data.phi.instances[i].angle_in).epsilon(1e-10));
  }
  CHECK(data.theta.split.train.size() == 19);
  CHECK(data.theta.split.validation.size() == 8);
  CHECK(data.theta.split.test.size() == 8);
  // per-channel seeds differ, so the shuffles (almost surely) differ
  CHECK(data.theta.split.train != data.phi.split.train);

  CHECK_THROWS_AS(generate_dataset(world().scene, *world().display, Corner::TR,
                                   {Vec3(0, 0, -2), Vec3(0, 0, -2.5)}, options),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      generate_dataset(world().scene, *world().display, Corner::TR,
                       {Vec3(0, 0, 2), Vec3(0, 0, -2), Vec3(0, 0, -2.5),
                        Vec3(0.1, 0, -2.2)},
                       options),
      std::invalid_argument);
}

TEST_CASE("generate_dataset with cloud targets tracks the oracle") {
  const auto observers = sample_observers(12, 19);
  DatasetOptions oracle;
  oracle.seed = 11;
  DatasetOptions looked;
  looked.seed = 11;
  looked.mode = TargetMode::cloud_lookup;
  looked.cloud = &capture().cloud;
  looked.depth_camera = &capture().rig.depth;

  const CornerDataset exact = generate_dataset(
      world().scene, *world().display, Corner::BL, observers, oracle);
  const CornerDataset quantized = generate_dataset(
      world().scene, *world().display, Corner::BL, observers, looked);

  for (std::size_t i = 0; i < observers.size(); ++i) {
    CHECK(quantized.theta.instances[i].angle_in ==
          exact.theta.instances[i].angle_in);
    // targets agree up to the depth-pixel quantization of the cloud
    CHECK(std::abs(quantized.theta.instances[i].angle_target -
                   exact.theta.instances[i].angle_target) < 0.5);
    CHECK(std::abs(quantized.phi.instances[i].angle_target -
                   exact.phi.instances[i].angle_target) < 0.5);
  }

  DatasetOptions broken;
  broken.mode = TargetMode::cloud_lookup;
  CHECK_THROWS_AS(generate_dataset(world().scene, *world().display, Corner::BL,
                                   observers, broken),
                  std::invalid_argument);
}

TEST_CASE("dataset csv round trip") {
  const auto observers = sample_observers(8, 23);
  DatasetOptions options;
  options.seed = 5;
  std::vector<CornerDataset> data;
  data.push_back(generate_dataset(world().scene, *world().display, Corner::TR,
                                  observers, options));
  data.push_back(generate_dataset(world().scene, *world().display, Corner::BL,
                                  observers, options));

  const auto path =
      std::filesystem::temp_directory_path() / "camo_dataset_rt.csv";
  save_dataset_csv(data, path.string());

  {
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    CHECK(header == "corner,channel,angle_in,angle_target,split");
  }

  const auto back = load_dataset_csv(path.string());
  REQUIRE(back.size() == 2);
  CHECK(back[0].corner == Corner::TR);
  CHECK(back[1].corner == Corner::BL);
  for (std::size_t d = 0; d < 2; ++d) {
    const CamouflageDataset& a = d == 0 ? data[0].theta : data[1].theta;
    const CamouflageDataset& b = d == 0 ? back[0].theta : back[1].theta;
    REQUIRE(a.instances.size() == b.instances.size());
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
      CHECK(a.instances[i].angle_in == b.instances[i].angle_in);
      CHECK(a.instances[i].angle_target == b.instances[i].angle_target);
    }
    CHECK(a.split.train == b.split.train);
    CHECK(a.split.validation == b.split.validation);
    CHECK(a.split.test == b.split.test);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_dataset_csv("/nonexistent/data.csv"), FileError);
}

TEST_CASE("train_model produces the four named selections") {
  const TrainOutcome& out = trained();
  REQUIRE(out.selections.size() == 4);
  CHECK(out.selections[0].name == "TRX");
  CHECK(out.selections[1].name == "TRY");
  CHECK(out.selections[2].name == "BLX");
  CHECK(out.selections[3].name == "BLY");
  for (const NetworkSelection& s : out.selections) {
    CHECK(s.selection.entries.size() == 2);
    CHECK(s.selection.chosen_hidden ==
          s.selection.entries[s.selection.chosen_index].hidden);
  }
  CHECK(out.model.scene_fingerprint == scene_fingerprint(world()));
  CHECK(out.model.display.tr.isApprox(world().display->tr, 0.0));
  // the winning nets fit the mirror map tightly
  for (const NetworkSelection& s : out.selections) {
    CHECK(s.selection.entries[s.selection.chosen_index]
              .result.min_validation_error < 1e-4);
  }
}

TEST_CASE("predict_shadow_angles approximates the mirror map") {
  const CamouflageModel& model = trained().model;
  for (const Vec3& op :
       {Vec3(0, 0, -2.5), Vec3(-0.2, 0.1, -2.2), Vec3(0.3, -0.25, -3.0)}) {
    const auto preds = predict_shadow_angles(model, op);
    for (const AnglePrediction& p : preds) {
      CHECK_FALSE(p.extrapolated);
      CHECK(std::abs(p.theta_out + p.theta_in) < 0.2);
      CHECK(std::abs(p.phi_out + p.phi_in) < 0.2);
    }
  }

  // the corners of the rectangle share networks pairwise, and on the default
  // display the shared inputs match bitwise
  const auto preds = predict_shadow_angles(model, Vec3(0.11, -0.07, -2.4));
  const auto& tl = preds[0];
  const auto& tr = preds[1];
  const auto& bl = preds[2];
  const auto& br = preds[3];
  CHECK(tl.theta_in == bl.theta_in);
  CHECK(tl.theta_out == bl.theta_out);
  CHECK(tl.phi_in == tr.phi_in);
  CHECK(tl.phi_out == tr.phi_out);
  CHECK(br.theta_in == tr.theta_in);
  CHECK(br.theta_out == tr.theta_out);
  CHECK(br.phi_in == bl.phi_in);
  CHECK(br.phi_out == bl.phi_out);

  // a far-off-axis observer exceeds the training window
  const auto wild = predict_shadow_angles(model, Vec3(3.5, 0, -1.0));
  CHECK(wild[0].extrapolated);
}

TEST_CASE("angle_points and corner trees") {
  PointCloud bare = capture().cloud;
  bare.has_angles = false;
  CHECK_THROWS_AS(angle_points(bare, Corner::TR), std::logic_error);

  const auto pts = angle_points(capture().cloud, Corner::TR);
  std::size_t defined = 0;
  for (const CloudPoint& p : capture().cloud.points) defined += p.defined;
  CHECK(pts.size() == defined);
  // payloads point back into the cloud buffer
  const auto& sample = pts[pts.size() / 2];
  const CloudPoint& cp = capture().cloud.points[sample.payload];
  CHECK(cp.defined);
  CHECK(cp.corner_angles[1].theta_deg == sample.theta);
  CHECK(cp.corner_angles[1].phi_deg == sample.phi);

  for (int c = 0; c < 4; ++c) {
    CHECK(capture().trees.trees[static_cast<std::size_t>(c)].size() == defined);
  }
}

TEST_CASE("resolve_corners returns the exact point for exact angles") {
  const PointCloud& cloud = capture().cloud;
  const std::size_t index = cloud.index_of(256, 120);
  const CloudPoint& pt = cloud.points[index];
  REQUIRE(pt.defined);

  std::array<AnglePrediction, 4> preds{};
  const Corner ids[4] = {Corner::TL, Corner::TR, Corner::BL, Corner::BR};
  for (int i = 0; i < 4; ++i) {
    preds[static_cast<std::size_t>(i)].corner = ids[i];
    preds[static_cast<std::size_t>(i)].theta_out =
        pt.corner_angles[static_cast<std::size_t>(i)].theta_deg;
    preds[static_cast<std::size_t>(i)].phi_out =
        pt.corner_angles[static_cast<std::size_t>(i)].phi_deg;
  }
  const auto res = resolve_corners(preds, cloud, capture().trees);
  for (const CornerResolution& r : res) {
    CHECK(r.cloud_index == index);
    CHECK(r.nn_distance == 0.0);
    CHECK_FALSE(r.low_confidence);
    CHECK(r.color_u == pt.color_u);
    CHECK(r.color_v == pt.color_v);
    CHECK(r.visited >= 1);
  }
}

TEST_CASE("solve_homography") {
  const std::array<Eigen::Vector2d, 4> unit = {
      Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
      Eigen::Vector2d(1, 1)};

  // identity
  Eigen::Matrix3d h = solve_homography(unit, unit);
  CHECK(h.isApprox(Eigen::Matrix3d::Identity(), 1e-10));

  // affine: scale by 2 and shift (3, 4)
  std::array<Eigen::Vector2d, 4> dst;
  for (int i = 0; i < 4; ++i) {
    dst[static_cast<std::size_t>(i)] =
        2.0 * unit[static_cast<std::size_t>(i)] + Eigen::Vector2d(3, 4);
  }
  h = solve_homography(unit, dst);
  Eigen::Matrix3d expect;
  expect << 2, 0, 3, 0, 2, 4, 0, 0, 1;
  CHECK(h.isApprox(expect, 1e-10));

  // general projective quad: verify the mapping point by point
  const std::array<Eigen::Vector2d, 4> quad = {
      Eigen::Vector2d(10, 20), Eigen::Vector2d(200, 35),
      Eigen::Vector2d(25, 190), Eigen::Vector2d(180, 170)};
  h = solve_homography(unit, quad);
  CHECK(h(2, 2) == 1.0);
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d p =
        h * Eigen::Vector3d(unit[static_cast<std::size_t>(i)].x(),
                            unit[static_cast<std::size_t>(i)].y(), 1.0);
    CHECK(p.x() / p.z() ==
          doctest::Approx(quad[static_cast<std::size_t>(i)].x()).epsilon(1e-9));
    CHECK(p.y() / p.z() ==
          doctest::Approx(quad[static_cast<std::size_t>(i)].y()).epsilon(1e-9));
  }

  // collinear sources are degenerate
  const std::array<Eigen::Vector2d, 4> line = {
      Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2),
      Eigen::Vector2d(3, 3)};
  CHECK_THROWS_AS(solve_homography(line, quad), std::invalid_argument);
}

TEST_CASE("extract_camouflage_image with the full frame is the identity") {
  ColorImage img(8, 6);
  for (int v = 0; v < 6; ++v) {
    for (int u = 0; u < 8; ++u) {
      img.at(u, v) = Rgb{static_cast<std::uint8_t>(u * 30),
                         static_cast<std::uint8_t>(v * 40),
                         static_cast<std::uint8_t>((u + v) * 10)};
    }
  }
  CornerPixels quad;
  quad.tl = {0, 0};
  quad.tr = {7, 0};
  quad.bl = {0, 5};
  quad.br = {7, 5};
  const ColorImage out = extract_camouflage_image(img, quad, 8, 6);
  CHECK(out.pixels == img.pixels);

  // cropping the left half picks those columns
  CornerPixels half;
  half.tl = {0, 0};
  half.tr = {3, 0};
  half.bl = {0, 5};
  half.br = {3, 5};
  const ColorImage left = extract_camouflage_image(img, half, 4, 6);
  for (int v = 0; v < 6; ++v) {
    for (int u = 0; u < 4; ++u) CHECK(left.at(u, v) == img.at(u, v));
  }

  CHECK_THROWS_AS(extract_camouflage_image(img, quad, 1, 6),
                  std::invalid_argument);
}

TEST_CASE("run_frame conceals against the reference render") {
  const CamouflageModel& model = trained().model;
  const Vec3 op(0.05, -0.02, -2.9);
  const FrameOutput frame = run_frame(model, capture(), op, 64, 36);
  CHECK(frame.image.width == 64);
  CHECK(frame.image.height == 36);
  CHECK_FALSE(frame.low_confidence);
  for (const AnglePrediction& p : frame.predictions) CHECK_FALSE(p.extrapolated);

  const RenderResult truth =
      occluded_region_render(op, model.display, world().scene, 64, 36);
  REQUIRE(truth.miss_count == 0);
  CHECK(mean_absolute_error(frame.image, truth.image) <= 5.0);

  CHECK_THROWS_AS(run_frame(model, capture(), Vec3(0, 0, 1.0)),
                  std::invalid_argument);

  SceneCapture other = capture();
  other.scene_fingerprint ^= 1;
  CHECK_THROWS_AS(run_frame(model, other, op), std::invalid_argument);
}

TEST_CASE("model bundle round trip") {
  const CamouflageModel& model = trained().model;
  const auto dir =
      std::filesystem::temp_directory_path() / "camo_bundle_rt";
  std::filesystem::remove_all(dir);
  save_model_bundle(model, dir.string());
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "TRX.model"));
  CHECK(std::filesystem::exists(dir / "BLY.model"));

  const CamouflageModel back = load_model_bundle(dir.string());
  CHECK(back.scene_fingerprint == model.scene_fingerprint);
  CHECK(back.display.tl.isApprox(model.display.tl, 0.0));
  CHECK(back.display.br.isApprox(model.display.br, 0.0));
  for (int i = 0; i < 4; ++i) {
    CHECK(back.frames[static_cast<std::size_t>(i)].rotation.isApprox(
        model.frames[static_cast<std::size_t>(i)].rotation, 1e-15));
  }
  CHECK((back.tr.theta.params.zeta.array() ==
         model.tr.theta.params.zeta.array()).all());
  CHECK((back.bl.phi.params.zeta.array() ==
         model.bl.phi.params.zeta.array()).all());
  CHECK(back.tr.theta.params.target.std == model.tr.theta.params.target.std);
  CHECK_FALSE(back.tr.theta_correction.has_value());

  // identical predictions after the round trip
  const auto a = predict_shadow_angles(model, Vec3(0.1, 0.1, -2.5));
  const auto b = predict_shadow_angles(back, Vec3(0.1, 0.1, -2.5));
  for (int i = 0; i < 4; ++i) {
    CHECK(a[static_cast<std::size_t>(i)].theta_out ==
          b[static_cast<std::size_t>(i)].theta_out);
    CHECK(a[static_cast<std::size_t>(i)].phi_out ==
          b[static_cast<std::size_t>(i)].phi_out);
  }
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(load_model_bundle("/nonexistent/bundle"), FileError);
}

TEST_CASE("train_correction undoes a horizontal flip") {
  // stage 1 deliberately trained on negated targets: it now predicts the
  // flipped shadow angles
  TrainOutcome flipped = train_small(77, true);
  CamouflageModel& model = flipped.model;

  const auto ops = sample_observers(16, 123);
  CorrectionSet set;
  for (const Vec3& op : ops) {
    const auto preds = predict_shadow_angles(model, op);
    const auto& frames = model.frames;
    for (const Corner c : {Corner::TR, Corner::BL}) {
      const auto i = static_cast<std::size_t>(c);
      const SphericalAngles in = observer_angles(frames[i], op);
      const Vec3 shadow = shadow_of_corner(op, frames[i].origin, world().scene);
      const auto truth = cartesian_to_spherical(to_corner_frame(frames[i], shadow));
      std::vector<Sample>& sx = c == Corner::TR ? set.trx : set.blx;
      std::vector<Sample>& sy = c == Corner::TR ? set.try_ : set.bly;
      sx.push_back({preds[i].theta_out, truth.theta_deg});
      sy.push_back({preds[i].phi_out, truth.phi_deg});
      // sanity: stage 1 is indeed flipped, roughly +angle_in
      CHECK(std::abs(preds[i].theta_out - in.theta_deg) < 0.5);
    }
  }

  TrainConfig config;
  config.seed = 9;
  config.restarts = 3;
  config.max_epochs = 400;
  train_correction(model, set, {2}, config);
  REQUIRE(model.tr.theta_correction.has_value());
  REQUIRE(model.bl.phi_correction.has_value());

  for (const Vec3& op : ops) {
    const auto preds = predict_shadow_angles(model, op);
    for (const Corner c : {Corner::TR, Corner::BL}) {
      const auto i = static_cast<std::size_t>(c);
      const SphericalAngles in = observer_angles(model.frames[i], op);
      CHECK(std::abs(preds[i].theta_out + in.theta_deg) < 0.5);
      CHECK(std::abs(preds[i].phi_out + in.phi_deg) < 0.5);
    }
  }

  // corrected bundles survive the disk round trip too
  const auto dir =
      std::filesystem::temp_directory_path() / "camo_bundle_corrected";
  std::filesystem::remove_all(dir);
  save_model_bundle(model, dir.string());
  CHECK(std::filesystem::exists(dir / "TRX.correction.model"));
  const CamouflageModel back = load_model_bundle(dir.string());
  REQUIRE(back.tr.theta_correction.has_value());
  CHECK((back.tr.theta_correction->params.zeta.array() ==
         model.tr.theta_correction->params.zeta.array()).all());
  const auto a = predict_shadow_angles(model, ops[0]);
  const auto b = predict_shadow_angles(back, ops[0]);
  CHECK(a[1].theta_out == b[1].theta_out);
  CHECK(a[2].phi_out == b[2].phi_out);
  std::filesystem::remove_all(dir);

  CorrectionSet thin = set;
  thin.trx.resize(7);
  CHECK_THROWS_AS(train_correction(model, thin, {2}, config),
                  std::invalid_argument);
}
