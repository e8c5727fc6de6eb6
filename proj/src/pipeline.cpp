#include "camo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "camo/errors.hpp"
#include "camo/rng.hpp"

namespace camo {

std::string network_name(Corner corner, Channel channel) {
  return std::string(corner_name(corner)) +
         (channel == Channel::theta ? "X" : "Y");
}

std::vector<Vec3> sample_observers(std::size_t count, std::uint64_t seed,
                                   const ObserverBox& box) {
  if (count == 0) {
    throw std::invalid_argument("sample_observers: count must be positive");
  }
  if (!(box.x_min < box.x_max && box.y_min < box.y_max &&
        box.z_min < box.z_max)) {
    throw std::invalid_argument("sample_observers: empty box");
  }
  const std::size_t nx = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(count))));
  const std::size_t ny = (count + nx - 1) / nx;
  auto gen = substream(seed, "observers");
  std::vector<Vec3> out;
  out.reserve(count);
  const double dx = (box.x_max - box.x_min) / static_cast<double>(nx);
  const double dy = (box.y_max - box.y_min) / static_cast<double>(ny);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t cx = i % nx;
    const std::size_t cy = i / nx;
    const double x = box.x_min + (static_cast<double>(cx) + uniform_unit(gen)) * dx;
    const double y = box.y_min + (static_cast<double>(cy) + uniform_unit(gen)) * dy;
    const double z = uniform_real(gen, box.z_min, box.z_max);
    out.emplace_back(x, y, z);
  }
  return out;
}

CornerDataset generate_dataset(const Scene& scene, const DisplayQuad& display,
                               Corner corner,
                               const std::vector<Vec3>& observers,
                               const DatasetOptions& options) {
  validate_scene(scene);
  validate_display(display);
  if (observers.size() < 3) {
    throw std::invalid_argument(
        "generate_dataset: need at least 3 observer positions");
  }
  if (options.mode == TargetMode::cloud_lookup &&
      (options.cloud == nullptr || options.depth_camera == nullptr)) {
    throw std::invalid_argument(
        "generate_dataset: cloud_lookup needs a cloud and a depth camera");
  }
  const auto frames = corner_frames(display);
  const CornerFrame& frame = frames[static_cast<std::size_t>(corner)];

  CornerDataset out;
  out.corner = corner;
  for (const Vec3& op : observers) {
    if (!is_front(display, op)) {
      throw std::invalid_argument(
          "generate_dataset: observer behind the display");
    }
    const SphericalAngles in = observer_angles(frame, op);
    const Vec3 shadow = shadow_of_corner(op, frame.origin, scene);
    SphericalAngles target;
    if (options.mode == TargetMode::oracle_exact) {
      target = cartesian_to_spherical(to_corner_frame(frame, shadow));
    } else {
      const PixelProjection proj = point_to_pixel(*options.depth_camera, shadow);
      if (proj.status != PixelProjection::Status::in_view) {
        throw std::runtime_error(
            "generate_dataset: shadow falls outside the depth view");
      }
      const int du = std::clamp(static_cast<int>(std::lround(proj.u)), 0,
                                options.cloud->width - 1);
      const int dv = std::clamp(static_cast<int>(std::lround(proj.v)), 0,
                                options.cloud->height - 1);
      const CloudPoint& pt = options.cloud->at_depth_pixel(du, dv);
      if (!pt.defined) {
        throw std::runtime_error(
            "generate_dataset: shadow lands on an undefined cloud point");
      }
      target = cartesian_to_spherical(to_corner_frame(frame, pt.position));
    }
    out.theta.instances.push_back(Sample{in.theta_deg, target.theta_deg});
    out.phi.instances.push_back(Sample{in.phi_deg, target.phi_deg});
  }
  out.theta.split = split_dataset(
      observers.size(), options.proportions,
      substream_seed(options.seed,
                     "split/" + network_name(corner, Channel::theta)));
  out.phi.split = split_dataset(
      observers.size(), options.proportions,
      substream_seed(options.seed,
                     "split/" + network_name(corner, Channel::phi)));
  return out;
}

namespace {

std::vector<std::string> split_tags(const CamouflageDataset& ds) {
  std::vector<std::string> tags(ds.instances.size(), "train");
  for (std::size_t i : ds.split.validation) tags.at(i) = "validation";
  for (std::size_t i : ds.split.test) tags.at(i) = "test";
  return tags;
}

void write_channel(std::ostream& os, const CornerDataset& data,
                   Channel channel) {
  const CamouflageDataset& ds =
      channel == Channel::theta ? data.theta : data.phi;
  const auto tags = split_tags(ds);
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    os << corner_name(data.corner) << ','
       << (channel == Channel::theta ? "theta" : "phi") << ','
       << ds.instances[i].angle_in << ',' << ds.instances[i].angle_target
       << ',' << tags[i] << '\n';
  }
}

}  // namespace

void save_dataset_csv(const std::vector<CornerDataset>& data,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("save_dataset_csv: cannot open " + path);
  out << "corner,channel,angle_in,angle_target,split\n" << std::setprecision(17);
  for (const CornerDataset& d : data) {
    write_channel(out, d, Channel::theta);
    write_channel(out, d, Channel::phi);
  }
  if (!out) throw FileError("save_dataset_csv: write failed for " + path);
}

std::vector<CornerDataset> load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("load_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "corner,channel,angle_in,angle_target,split") {
    throw FileError("load_dataset_csv: bad header in " + path);
  }
  std::vector<CornerDataset> data;
  auto find_corner = [&](Corner c) -> CornerDataset& {
    for (CornerDataset& d : data) {
      if (d.corner == c) return d;
    }
    data.push_back(CornerDataset{});
    data.back().corner = c;
    return data.back();
  };
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string corner_tag, channel_tag, in_tag, target_tag, split_tag;
    if (!std::getline(row, corner_tag, ',') ||
        !std::getline(row, channel_tag, ',') ||
        !std::getline(row, in_tag, ',') ||
        !std::getline(row, target_tag, ',') ||
        !std::getline(row, split_tag)) {
      throw FileError("load_dataset_csv: line " + std::to_string(line_no) +
                      ": missing fields");
    }
    const auto corner = corner_from_name(corner_tag);
    if (!corner) {
      throw FileError("load_dataset_csv: line " + std::to_string(line_no) +
                      ": bad corner '" + corner_tag + "'");
    }
    if (channel_tag != "theta" && channel_tag != "phi") {
      throw FileError("load_dataset_csv: line " + std::to_string(line_no) +
                      ": bad channel '" + channel_tag + "'");
    }
    Sample s;
    try {
      s.angle_in = std::stod(in_tag);
      s.angle_target = std::stod(target_tag);
    } catch (const std::exception&) {
      throw FileError("load_dataset_csv: line " + std::to_string(line_no) +
                      ": bad number");
    }
    CornerDataset& d = find_corner(*corner);
    CamouflageDataset& ds = channel_tag == "theta" ? d.theta : d.phi;
    ds.instances.push_back(s);
    const std::size_t index = ds.instances.size() - 1;
    if (split_tag == "train") {
      ds.split.train.push_back(index);
    } else if (split_tag == "validation") {
      ds.split.validation.push_back(index);
    } else if (split_tag == "test") {
      ds.split.test.push_back(index);
    } else {
      throw FileError("load_dataset_csv: line " + std::to_string(line_no) +
                      ": bad split tag '" + split_tag + "'");
    }
  }
  if (data.empty()) {
    throw FileError("load_dataset_csv: no instances in " + path);
  }
  return data;
}

namespace {

NetworkModel from_selection(const SelectionResult& sel) {
  NetworkModel nm;
  nm.arch.hidden = sel.chosen_hidden;
  nm.params = sel.entries[sel.chosen_index].result.params;
  return nm;
}

}  // namespace

TrainOutcome train_model(const SceneDescription& desc,
                         const CornerDataset& tr_data,
                         const CornerDataset& bl_data,
                         const std::vector<int>& hidden_sizes,
                         const TrainConfig& config) {
  if (!desc.display) {
    throw std::invalid_argument("train_model: scene description lacks a display");
  }
  if (tr_data.corner != Corner::TR || bl_data.corner != Corner::BL) {
    throw std::invalid_argument("train_model: expected TR and BL datasets");
  }
  TrainOutcome out;
  out.model.display = *desc.display;
  out.model.frames = corner_frames(*desc.display);
  out.model.scene_fingerprint = scene_fingerprint(desc);

  auto run = [&](const CamouflageDataset& ds, Corner c,
                 Channel ch) -> NetworkModel {
    TrainConfig cfg = config;
    cfg.seed = substream_seed(config.seed, "train/" + network_name(c, ch));
    NetworkSelection ns;
    ns.name = network_name(c, ch);
    ns.corner = c;
    ns.channel = ch;
    ns.selection = model_selection(ds, hidden_sizes, cfg);
    const NetworkModel nm = from_selection(ns.selection);
    out.selections.push_back(std::move(ns));
    return nm;
  };
  out.model.tr.theta = run(tr_data.theta, Corner::TR, Channel::theta);
  out.model.tr.phi = run(tr_data.phi, Corner::TR, Channel::phi);
  out.model.bl.theta = run(bl_data.theta, Corner::BL, Channel::theta);
  out.model.bl.phi = run(bl_data.phi, Corner::BL, Channel::phi);
  return out;
}

void train_correction(CamouflageModel& model, const CorrectionSet& set,
                      const std::vector<int>& hidden_sizes,
                      const TrainConfig& config) {
  auto fit = [&](const std::vector<Sample>& pairs,
                 const std::string& name) -> NetworkModel {
    if (pairs.size() < 8) {
      throw std::invalid_argument("train_correction: need at least 8 pairs for " +
                                  name);
    }
    CamouflageDataset ds;
    ds.instances = pairs;
    ds.split =
        split_dataset(pairs.size(), SplitProportions{},
                      substream_seed(config.seed, "correction-split/" + name));
    TrainConfig cfg = config;
    cfg.seed = substream_seed(config.seed, "correction/" + name);
    return from_selection(model_selection(ds, hidden_sizes, cfg));
  };
  model.tr.theta_correction = fit(set.trx, "TRX");
  model.tr.phi_correction = fit(set.try_, "TRY");
  model.bl.theta_correction = fit(set.blx, "BLX");
  model.bl.phi_correction = fit(set.bly, "BLY");
}

namespace {

double apply_network(const NetworkModel& net,
                     const std::optional<NetworkModel>& correction, double x) {
  double y = forward(net.arch, net.params, x);
  if (correction) {
    y = forward(correction->arch, correction->params, y);
  }
  return y;
}

}  // namespace

std::array<AnglePrediction, 4> predict_shadow_angles(
    const CamouflageModel& model, const Vec3& op) {
  std::array<AnglePrediction, 4> out;
  const Corner ids[4] = {Corner::TL, Corner::TR, Corner::BL, Corner::BR};
  for (int i = 0; i < 4; ++i) {
    const Corner c = ids[i];
    AnglePrediction& pred = out[static_cast<std::size_t>(i)];
    pred.corner = c;
    const SphericalAngles in =
        observer_angles(model.frames[static_cast<std::size_t>(i)], op);
    pred.theta_in = in.theta_deg;
    pred.phi_in = in.phi_deg;
    pred.extrapolated = std::abs(pred.theta_in) > kThetaRangeDeg ||
                        std::abs(pred.phi_in) > kPhiRangeDeg;
    // TL shares its column with BL and its row with TR (and BR the other way
    // round), so the untrained corners borrow the matching trained nets.
    const CornerNetworks& theta_src =
        (c == Corner::TR || c == Corner::BR) ? model.tr : model.bl;
    const CornerNetworks& phi_src =
        (c == Corner::TR || c == Corner::TL) ? model.tr : model.bl;
    pred.theta_out =
        apply_network(theta_src.theta, theta_src.theta_correction, pred.theta_in);
    pred.phi_out = apply_network(phi_src.phi, phi_src.phi_correction, pred.phi_in);
  }
  return out;
}

std::vector<AnglePoint> angle_points(const PointCloud& cloud, Corner corner) {
  if (!cloud.has_angles) {
    throw std::logic_error("angle_points: cloud lacks corner angles");
  }
  std::vector<AnglePoint> pts;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const CloudPoint& pt = cloud.points[i];
    if (!pt.defined) continue;
    const SphericalAngles& a = pt.corner_angles[static_cast<std::size_t>(corner)];
    pts.push_back(AnglePoint{a.theta_deg, a.phi_deg, i});
  }
  return pts;
}

CornerTrees build_corner_trees(const PointCloud& cloud) {
  CornerTrees trees;
  const Corner ids[4] = {Corner::TL, Corner::TR, Corner::BL, Corner::BR};
  for (int i = 0; i < 4; ++i) {
    trees.trees[static_cast<std::size_t>(i)] =
        KdTree2::build(angle_points(cloud, ids[i]));
  }
  return trees;
}

std::array<CornerResolution, 4> resolve_corners(
    const std::array<AnglePrediction, 4>& predictions, const PointCloud& cloud,
    const CornerTrees& trees) {
  std::array<CornerResolution, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const AnglePrediction& pred = predictions[i];
    const SearchStats stats =
        trees.trees[i].nn_search(pred.theta_out, pred.phi_out);
    const CloudPoint& pt = cloud.points[stats.payload];
    CornerResolution& res = out[i];
    res.corner = pred.corner;
    res.cloud_index = stats.payload;
    res.color_u = pt.color_u;
    res.color_v = pt.color_v;
    res.nn_distance = stats.distance;
    res.visited = stats.visited;
    res.low_confidence = stats.distance > kLowConfidenceDistanceDeg;
  }
  return out;
}

Eigen::Matrix3d solve_homography(const std::array<Eigen::Vector2d, 4>& src,
                                 const std::array<Eigen::Vector2d, 4>& dst) {
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double u = src[static_cast<std::size_t>(i)].x();
    const double v = src[static_cast<std::size_t>(i)].y();
    const double x = dst[static_cast<std::size_t>(i)].x();
    const double y = dst[static_cast<std::size_t>(i)].y();
    a.row(2 * i) << u, v, 1, 0, 0, 0, -x * u, -x * v;
    a.row(2 * i + 1) << 0, 0, 0, u, v, 1, -y * u, -y * v;
    b(2 * i) = x;
    b(2 * i + 1) = y;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("solve_homography: degenerate correspondences");
  }
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  Eigen::Matrix3d out;
  out << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return out;
}

ColorImage extract_camouflage_image(const ColorImage& color,
                                    const CornerPixels& quad, int width,
                                    int height) {
  if (width < 2 || height < 2) {
    throw std::invalid_argument(
        "extract_camouflage_image: raster must be at least 2x2");
  }
  const std::array<Eigen::Vector2d, 4> src = {
      Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(width - 1, 0.0),
      Eigen::Vector2d(0.0, height - 1), Eigen::Vector2d(width - 1, height - 1)};
  const std::array<Eigen::Vector2d, 4> dst = {quad.tl, quad.tr, quad.bl,
                                              quad.br};
  const Eigen::Matrix3d h = solve_homography(src, dst);
  ColorImage out(width, height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const Eigen::Vector3d p = h * Eigen::Vector3d(u, v, 1.0);
      const double w = p.z();
      const double x = p.x() / w;
      const double y = p.y() / w;
      out.at(u, v) = std::isfinite(x) && std::isfinite(y)
                         ? bilinear_sample(color, x, y)
                         : Rgb{255, 0, 255};
    }
  }
  return out;
}

SceneCapture build_capture(const SceneDescription& desc, int threads) {
  if (!desc.display) {
    throw std::invalid_argument("build_capture: scene description lacks a display");
  }
  SceneCapture cap;
  cap.rig = default_rig();
  const DepthMap depth = render_depth(cap.rig.depth, desc.scene, threads);
  cap.color = render_color(cap.rig.color, desc.scene, threads);
  cap.cloud = register_and_build(depth, cap.color, cap.rig, threads);
  annotate_corner_angles(cap.cloud, corner_frames(*desc.display), threads);
  cap.trees = build_corner_trees(cap.cloud);
  cap.scene_fingerprint = scene_fingerprint(desc);
  return cap;
}

FrameOutput run_frame(const CamouflageModel& model, const SceneCapture& capture,
                      const Vec3& op, int width, int height) {
  if (model.scene_fingerprint != capture.scene_fingerprint) {
    throw std::invalid_argument(
        "run_frame: model was trained on a different scene");
  }
  if (!is_front(model.display, op)) {
    throw std::invalid_argument(
        "run_frame: observation point must face the display front");
  }
  FrameOutput out;
  out.predictions = predict_shadow_angles(model, op);
  out.resolutions = resolve_corners(out.predictions, capture.cloud, capture.trees);
  CornerPixels quad;
  auto pixel = [&](Corner c) {
    const CornerResolution& res = out.resolutions[static_cast<std::size_t>(c)];
    return Eigen::Vector2d(res.color_u, res.color_v);
  };
  quad.tl = pixel(Corner::TL);
  quad.tr = pixel(Corner::TR);
  quad.bl = pixel(Corner::BL);
  quad.br = pixel(Corner::BR);
  out.image = extract_camouflage_image(capture.color, quad, width, height);
  for (const CornerResolution& res : out.resolutions) {
    out.low_confidence = out.low_confidence || res.low_confidence;
  }
  return out;
}

namespace {

std::string fingerprint_hex(std::uint64_t fp) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fp;
  return os.str();
}

nlohmann::json vec_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

Vec3 vec_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw FileError("model bundle: bad vector in manifest");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

void save_network(const NetworkModel& nm, const std::string& path) {
  save_model(nm.arch, nm.params, path);
}

NetworkModel load_network(const std::string& path) {
  NetworkModel nm;
  load_model(path, nm.arch, nm.params);
  return nm;
}

}  // namespace

void save_model_bundle(const CamouflageModel& model, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FileError("save_model_bundle: cannot create " + dir);

  nlohmann::json manifest;
  manifest["format"] = "camo-model-bundle";
  manifest["version"] = 1;
  manifest["scene_fingerprint"] = fingerprint_hex(model.scene_fingerprint);
  manifest["display"] = {{"tl", vec_json(model.display.tl)},
                         {"tr", vec_json(model.display.tr)},
                         {"bl", vec_json(model.display.bl)},
                         {"br", vec_json(model.display.br)}};
  nlohmann::json networks = nlohmann::json::array();
  auto add = [&](const std::string& name, const NetworkModel& nm,
                 const std::optional<NetworkModel>& correction) {
    const std::string file = name + ".model";
    save_network(nm, dir + "/" + file);
    nlohmann::json entry{{"name", name}, {"file", file}};
    if (correction) {
      const std::string corr_file = name + ".correction.model";
      save_network(*correction, dir + "/" + corr_file);
      entry["correction"] = corr_file;
    }
    networks.push_back(entry);
  };
  add("TRX", model.tr.theta, model.tr.theta_correction);
  add("TRY", model.tr.phi, model.tr.phi_correction);
  add("BLX", model.bl.theta, model.bl.theta_correction);
  add("BLY", model.bl.phi, model.bl.phi_correction);
  manifest["networks"] = networks;

  std::ofstream out(dir + "/manifest.json");
  if (!out) throw FileError("save_model_bundle: cannot open manifest in " + dir);
  out << manifest.dump(2) << '\n';
  if (!out) throw FileError("save_model_bundle: manifest write failed in " + dir);
}

CamouflageModel load_model_bundle(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw FileError("load_model_bundle: cannot open manifest in " + dir);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FileError(std::string("load_model_bundle: bad manifest: ") + e.what());
  }
  CamouflageModel model;
  try {
    if (manifest.at("format").get<std::string>() != "camo-model-bundle") {
      throw FileError("load_model_bundle: not a model bundle manifest");
    }
    model.scene_fingerprint = std::stoull(
        manifest.at("scene_fingerprint").get<std::string>(), nullptr, 16);
    const auto& disp = manifest.at("display");
    model.display.tl = vec_from_json(disp.at("tl"));
    model.display.tr = vec_from_json(disp.at("tr"));
    model.display.bl = vec_from_json(disp.at("bl"));
    model.display.br = vec_from_json(disp.at("br"));
    model.frames = corner_frames(model.display);
    for (const auto& entry : manifest.at("networks")) {
      const std::string name = entry.at("name").get<std::string>();
      NetworkModel nm =
          load_network(dir + "/" + entry.at("file").get<std::string>());
      std::optional<NetworkModel> correction;
      if (entry.contains("correction")) {
        correction =
            load_network(dir + "/" + entry.at("correction").get<std::string>());
      }
      if (name == "TRX") {
        model.tr.theta = std::move(nm);
        model.tr.theta_correction = std::move(correction);
      } else if (name == "TRY") {
        model.tr.phi = std::move(nm);
        model.tr.phi_correction = std::move(correction);
      } else if (name == "BLX") {
        model.bl.theta = std::move(nm);
        model.bl.theta_correction = std::move(correction);
      } else if (name == "BLY") {
        model.bl.phi = std::move(nm);
        model.bl.phi_correction = std::move(correction);
      } else {
        throw FileError("load_model_bundle: unknown network '" + name + "'");
      }
    }
  } catch (const FileError&) {
    throw;
  } catch (const std::exception& e) {
    throw FileError(std::string("load_model_bundle: bad manifest: ") + e.what());
  }
  if (model.tr.theta.params.zeta.size() == 0 ||
      model.tr.phi.params.zeta.size() == 0 ||
      model.bl.theta.params.zeta.size() == 0 ||
      model.bl.phi.params.zeta.size() == 0) {
    throw FileError("load_model_bundle: manifest lacks the four stage-1 networks");
  }
  return model;
}

}  // namespace camo
