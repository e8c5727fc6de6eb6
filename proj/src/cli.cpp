#include "camo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "camo/errors.hpp"
#include "camo/pipeline.hpp"
#include "camo/rng.hpp"

namespace camo {
namespace {

constexpr const char* kVersion = "1.0.0";

std::string fingerprint_hex(std::uint64_t fp) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fp;
  return os.str();
}

// Manifests identify input files by content, never by path: paths usually
// point into some other run's output directory and would break the rule
// that identical runs produce identical bytes.
std::string file_fingerprint_hex(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FileError("cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return fingerprint_hex(fnv1a64(buf.str()));
}

std::string bundle_fingerprint_hex(const std::string& dir) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char* name : {"manifest.json", "TRX.model", "TRY.model",
                           "BLX.model", "BLY.model", "TRX.correction.model",
                           "TRY.correction.model", "BLX.correction.model",
                           "BLY.correction.model"}) {
    const std::string path = dir + "/" + name;
    std::ifstream f(path, std::ios::binary);
    if (!f) continue;  // corrections are optional
    std::ostringstream buf;
    buf << f.rdbuf();
    h = fnv1a64(buf.str(), h);
  }
  return fingerprint_hex(h);
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw FileError("cannot create output directory " + out);
}

// The manifest pins everything needed to reproduce the run; artifact paths
// are relative to the output directory so reruns into different directories
// stay byte-identical.
void write_run_manifest(const std::string& out, const std::string& command,
                        std::uint64_t seed, const nlohmann::json& params,
                        std::vector<std::string> artifacts) {
  nlohmann::json m;
  m["command"] = command;
  m["tool"] = {{"name", "camo"}, {"version", kVersion}};
  m["seed"] = seed;
  m["params"] = params;
  std::sort(artifacts.begin(), artifacts.end());
  m["artifacts"] = artifacts;
  const std::string path = out + "/manifest.json";
  std::ofstream f(path);
  if (!f) throw FileError("cannot open " + path);
  f << m.dump(2) << '\n';
  if (!f) throw FileError("write failed for " + path);
}

SceneDescription load_scene_with_display(const std::string& path) {
  SceneDescription desc = load_scene(path);
  if (!desc.display) {
    throw FileError("scene file " + path + " lacks a display line");
  }
  return desc;
}

struct SceneGenOpts {
  std::string variant = "default";
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_scene_gen(const SceneGenOpts& o) {
  ensure_out_dir(o.out);
  const SceneDescription desc = make_scene_variant(o.variant, o.seed);
  save_scene(desc, o.out + "/scene.txt");
  nlohmann::json params{{"variant", o.variant},
                        {"scene_fingerprint", fingerprint_hex(scene_fingerprint(desc))}};
  write_run_manifest(o.out, "scene gen", o.seed, params, {"scene.txt"});
  std::cout << "scene " << o.variant << " -> " << o.out << "/scene.txt ("
            << desc.scene.surfaces.size() << " surfaces)\n";
}

struct CloudBuildOpts {
  std::string scene;
  int threads = 1;
  std::string out;
};

void cmd_cloud_build(const CloudBuildOpts& o) {
  ensure_out_dir(o.out);
  const SceneDescription desc = load_scene(o.scene);
  const SensorRig rig = default_rig();
  const DepthMap depth = render_depth(rig.depth, desc.scene, o.threads);
  const ColorImage color = render_color(rig.color, desc.scene, o.threads);
  const PointCloud cloud = register_and_build(depth, color, rig, o.threads);
  save_pgm16(depth, o.out + "/depth.pgm");
  save_ppm(color, o.out + "/color.ppm");
  save_cloud_csv(cloud, o.out + "/cloud.csv");
  nlohmann::json params{
      {"scene_fingerprint", fingerprint_hex(scene_fingerprint(desc))},
      {"threads", o.threads}};
  write_run_manifest(o.out, "cloud build", 0, params,
                     {"depth.pgm", "color.ppm", "cloud.csv"});
  std::cout << "cloud: " << cloud.points.size() << " points, "
            << std::fixed << std::setprecision(1)
            << 100.0 * undefined_fraction(cloud) << "% undefined\n";
}

struct DatasetOpts {
  std::string scene;
  std::uint64_t seed = 1;
  std::size_t instances = 35;
  std::string targets = "oracle";
  int threads = 1;
  std::string out;
};

std::vector<CornerDataset> collect_datasets(const SceneDescription& desc,
                                            const DatasetOpts& o) {
  const std::vector<Vec3> observers = sample_observers(o.instances, o.seed);
  DatasetOptions options;
  options.seed = o.seed;
  SensorRig rig;
  PointCloud cloud;
  if (o.targets == "cloud") {
    rig = default_rig();
    const DepthMap depth = render_depth(rig.depth, desc.scene, o.threads);
    const ColorImage color = render_color(rig.color, desc.scene, o.threads);
    cloud = register_and_build(depth, color, rig, o.threads);
    options.mode = TargetMode::cloud_lookup;
    options.cloud = &cloud;
    options.depth_camera = &rig.depth;
  } else if (o.targets != "oracle") {
    throw std::invalid_argument("--targets must be oracle or cloud");
  }
  std::vector<CornerDataset> data;
  data.push_back(
      generate_dataset(desc.scene, *desc.display, Corner::TR, observers, options));
  data.push_back(
      generate_dataset(desc.scene, *desc.display, Corner::BL, observers, options));
  return data;
}

void cmd_dataset_collect(const DatasetOpts& o) {
  ensure_out_dir(o.out);
  const SceneDescription desc = load_scene_with_display(o.scene);
  const std::vector<CornerDataset> data = collect_datasets(desc, o);
  save_dataset_csv(data, o.out + "/dataset.csv");
  nlohmann::json params{
      {"scene_fingerprint", fingerprint_hex(scene_fingerprint(desc))},
      {"instances", o.instances},
      {"targets", o.targets}};
  write_run_manifest(o.out, "dataset collect", o.seed, params, {"dataset.csv"});
  std::cout << "dataset: " << o.instances << " instances per channel, corners TR BL\n";
}

struct TrainOpts {
  std::string scene;
  std::string dataset;  // optional pre-collected CSV
  std::uint64_t seed = 1;
  std::size_t instances = 35;
  std::string targets = "oracle";
  std::vector<int> hidden_sizes{2, 3, 4};
  int restarts = 5;
  int max_epochs = 1000;
  int threads = 1;
  std::string out;
};

const CornerDataset& find_corner_dataset(const std::vector<CornerDataset>& data,
                                         Corner corner) {
  for (const CornerDataset& d : data) {
    if (d.corner == corner) return d;
  }
  throw FileError(std::string("dataset lacks corner ") + corner_name(corner));
}

void cmd_train(const TrainOpts& o) {
  ensure_out_dir(o.out);
  const SceneDescription desc = load_scene_with_display(o.scene);
  std::vector<CornerDataset> data;
  std::vector<std::string> artifacts;
  if (!o.dataset.empty()) {
    data = load_dataset_csv(o.dataset);
  } else {
    DatasetOpts d;
    d.scene = o.scene;
    d.seed = o.seed;
    d.instances = o.instances;
    d.targets = o.targets;
    d.threads = o.threads;
    data = collect_datasets(desc, d);
    save_dataset_csv(data, o.out + "/dataset.csv");
    artifacts.push_back("dataset.csv");
  }
  TrainConfig config;
  config.seed = o.seed;
  config.restarts = o.restarts;
  config.max_epochs = o.max_epochs;
  const TrainOutcome outcome =
      train_model(desc, find_corner_dataset(data, Corner::TR),
                  find_corner_dataset(data, Corner::BL), o.hidden_sizes, config);

  save_model_bundle(outcome.model, o.out + "/model");
  artifacts.push_back("model/manifest.json");
  for (const char* n : {"TRX", "TRY", "BLX", "BLY"}) {
    artifacts.push_back(std::string("model/") + n + ".model");
  }

  std::ofstream sel(o.out + "/selection.csv");
  if (!sel) throw FileError("cannot open " + o.out + "/selection.csv");
  sel << "network,hidden,chosen,a,b,r2,E_T,E_V,epochs,best_epoch,restart,"
         "zeta_norm,grad_norm\n"
      << std::setprecision(17);
  std::ofstream timing(o.out + "/timing.csv");
  if (!timing) throw FileError("cannot open " + o.out + "/timing.csv");
  timing << "network,hidden,seconds\n";
  for (const NetworkSelection& ns : outcome.selections) {
    for (const SelectionEntry& e : ns.selection.entries) {
      const TrainingResult& r = e.result;
      sel << ns.name << ',' << e.hidden << ','
          << (e.hidden == ns.selection.chosen_hidden ? 1 : 0) << ','
          << e.regression.a << ',' << e.regression.b << ',' << e.regression.r2
          << ',' << r.train_history[static_cast<std::size_t>(r.best_epoch)]
          << ',' << r.min_validation_error << ',' << r.epochs << ','
          << r.best_epoch << ',' << r.restart << ',' << r.zeta_norm << ','
          << r.gradient_norm << '\n';
      timing << ns.name << ',' << e.hidden << ','
             << static_cast<long long>(std::llround(r.seconds)) << '\n';
    }
    const TrainingResult& chosen =
        ns.selection.entries[ns.selection.chosen_index].result;
    write_history_csv(chosen, o.out + "/" + ns.name + ".history.csv");
    artifacts.push_back(ns.name + ".history.csv");
    std::cout << ns.name << ": hidden=" << ns.selection.chosen_hidden
              << " E_V=" << chosen.min_validation_error
              << " epochs=" << chosen.epochs << '\n';
  }
  if (!sel || !timing) throw FileError("write failed in " + o.out);
  sel.close();
  timing.close();
  artifacts.push_back("selection.csv");
  artifacts.push_back("timing.csv");

  nlohmann::json params{
      {"scene_fingerprint", fingerprint_hex(scene_fingerprint(desc))},
      {"instances", o.instances},
      {"targets", o.targets},
      {"hidden_sizes", o.hidden_sizes},
      {"restarts", o.restarts},
      {"max_epochs", o.max_epochs}};
  if (!o.dataset.empty()) {
    params["dataset_fingerprint"] = file_fingerprint_hex(o.dataset);
  }
  write_run_manifest(o.out, "train", o.seed, params, artifacts);
}

struct ReportOpts {
  std::string run;
  std::string out;
};

void cmd_report(const ReportOpts& o) {
  const std::string path = o.run + "/selection.csv";
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw FileError("empty selection table " + path);
  std::vector<std::array<std::string, 13>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<std::string, 13> row;
    std::istringstream ss(line);
    for (auto& cell : row) {
      if (!std::getline(ss, cell, ',')) {
        throw FileError("malformed row in " + path);
      }
    }
    rows.push_back(std::move(row));
  }
  std::ostringstream table;
  table << "network  s  chosen  a             b            R2           E_T"
           "           E_V\n";
  auto shorten = [](const std::string& v) {
    std::ostringstream os;
    os << std::setprecision(6) << std::left << std::setw(13) << std::stod(v);
    return os.str();
  };
  for (const auto& r : rows) {
    table << std::left << std::setw(8) << r[0] << ' ' << std::setw(2) << r[1]
          << ' ' << std::setw(7) << (r[2] == "1" ? "*" : "") << ' '
          << shorten(r[3]) << ' ' << shorten(r[4]) << ' ' << shorten(r[5])
          << ' ' << shorten(r[6]) << ' ' << shorten(r[7]) << '\n';
  }
  std::cout << table.str();
  if (!o.out.empty()) {
    ensure_out_dir(o.out);
    std::ofstream f(o.out + "/report.txt");
    if (!f) throw FileError("cannot open " + o.out + "/report.txt");
    f << table.str();
    write_run_manifest(o.out, "report", 0,
                       nlohmann::json{{"selection_fingerprint",
                                       file_fingerprint_hex(path)}},
                       {"report.txt"});
  }
}

struct TreeStatsOpts {
  std::string scene;
  std::uint64_t seed = 1;
  std::size_t queries = 1000;
  std::string corner = "TR";
  int threads = 1;
  std::string out;
};

void cmd_tree_stats(const TreeStatsOpts& o) {
  const SceneDescription desc = load_scene_with_display(o.scene);
  const auto corner = corner_from_name(o.corner);
  if (!corner) throw std::invalid_argument("--corner must be TL, TR, BL or BR");
  const SceneCapture cap = build_capture(desc, o.threads);
  const KdTree2& tree = cap.trees.trees[static_cast<std::size_t>(*corner)];
  auto gen = substream(o.seed, "tree-queries");
  std::vector<std::pair<double, double>> queries;
  queries.reserve(o.queries);
  for (std::size_t i = 0; i < o.queries; ++i) {
    const double theta = uniform_real(gen, -kThetaRangeDeg, kThetaRangeDeg);
    const double phi = uniform_real(gen, -kPhiRangeDeg, kPhiRangeDeg);
    queries.emplace_back(theta, phi);
  }
  const VisitedProfile profile = visited_profile(tree, queries);
  std::cout << "tree " << o.corner << ": size=" << tree.size()
            << " depth=" << tree.depth() << " visited min=" << profile.min
            << " median=" << profile.median << " max=" << profile.max << '\n';
  if (!o.out.empty()) {
    ensure_out_dir(o.out);
    std::ofstream f(o.out + "/tree_stats.csv");
    if (!f) throw FileError("cannot open " + o.out + "/tree_stats.csv");
    f << "corner,size,depth,queries,visited_min,visited_median,visited_max\n"
      << o.corner << ',' << tree.size() << ',' << tree.depth() << ','
      << o.queries << ',' << profile.min << ',' << profile.median << ','
      << profile.max << '\n';
    nlohmann::json params{
        {"scene_fingerprint", fingerprint_hex(scene_fingerprint(desc))},
        {"queries", o.queries},
        {"corner", o.corner}};
    write_run_manifest(o.out, "tree stats", o.seed, params, {"tree_stats.csv"});
  }
}

void write_frame_csv(const FrameOutput& frame, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw FileError("cannot open " + path);
  f << "corner,theta_in,phi_in,theta_out,phi_out,extrapolated,cloud_index,"
       "color_u,color_v,nn_distance,visited,low_confidence\n"
    << std::setprecision(17);
  for (std::size_t i = 0; i < 4; ++i) {
    const AnglePrediction& p = frame.predictions[i];
    const CornerResolution& r = frame.resolutions[i];
    f << corner_name(p.corner) << ',' << p.theta_in << ',' << p.phi_in << ','
      << p.theta_out << ',' << p.phi_out << ',' << (p.extrapolated ? 1 : 0)
      << ',' << r.cloud_index << ',' << r.color_u << ',' << r.color_v << ','
      << r.nn_distance << ',' << r.visited << ',' << (r.low_confidence ? 1 : 0)
      << '\n';
  }
  if (!f) throw FileError("write failed for " + path);
}

struct FrameOpts {
  std::string scene;
  std::string model;
  std::vector<double> op;
  int threads = 1;
  std::string out;
};

void cmd_frame_render(const FrameOpts& o) {
  ensure_out_dir(o.out);
  const SceneDescription desc = load_scene_with_display(o.scene);
  const CamouflageModel model = load_model_bundle(o.model);
  const SceneCapture cap = build_capture(desc, o.threads);
  const Vec3 op(o.op[0], o.op[1], o.op[2]);
  const FrameOutput frame = run_frame(model, cap, op);
  save_ppm(frame.image, o.out + "/frame.ppm");
  write_frame_csv(frame, o.out + "/frame.csv");
  nlohmann::json params{
      {"scene_fingerprint", fingerprint_hex(scene_fingerprint(desc))},
      {"model_fingerprint", bundle_fingerprint_hex(o.model)},
      {"op", o.op}};
  write_run_manifest(o.out, "frame render", 0, params,
                     {"frame.ppm", "frame.csv"});
  std::cout << "frame: op (" << op.x() << ", " << op.y() << ", " << op.z()
            << ")" << (frame.low_confidence ? " [low confidence]" : "") << '\n';
}

struct SweepOpts {
  std::string scene;
  std::string model;
  std::vector<double> from;
  std::vector<double> to;
  int frames = 10;
  int threads = 1;
  std::string out;
};

void cmd_sweep(const SweepOpts& o) {
  if (o.frames < 1) throw std::invalid_argument("--frames must be positive");
  ensure_out_dir(o.out);
  const SceneDescription desc = load_scene_with_display(o.scene);
  const CamouflageModel model = load_model_bundle(o.model);
  const SceneCapture cap = build_capture(desc, o.threads);
  const Vec3 from(o.from[0], o.from[1], o.from[2]);
  const Vec3 to(o.to[0], o.to[1], o.to[2]);

  std::ofstream err(o.out + "/error.csv");
  if (!err) throw FileError("cannot open " + o.out + "/error.csv");
  err << "frame,op_x,op_y,op_z,mae,low_confidence\n" << std::setprecision(17);
  std::vector<std::string> artifacts{"error.csv"};
  for (int i = 0; i < o.frames; ++i) {
    const double t =
        o.frames > 1 ? static_cast<double>(i) / (o.frames - 1) : 0.0;
    const Vec3 op = from + t * (to - from);
    const FrameOutput frame = run_frame(model, cap, op);
    const RenderResult truth =
        occluded_region_render(op, model.display, desc.scene, frame.image.width,
                               frame.image.height, o.threads);
    const double mae = mean_absolute_error(frame.image, truth.image);
    std::ostringstream name;
    name << "frame_" << std::setw(3) << std::setfill('0') << i << ".ppm";
    save_ppm(frame.image, o.out + "/" + name.str());
    artifacts.push_back(name.str());
    err << i << ',' << op.x() << ',' << op.y() << ',' << op.z() << ',' << mae
        << ',' << (frame.low_confidence ? 1 : 0) << '\n';
    std::cout << name.str() << ": mae=" << std::setprecision(3) << mae
              << std::setprecision(17) << '\n';
  }
  if (!err) throw FileError("write failed for " + o.out + "/error.csv");
  err.close();
  nlohmann::json params{
      {"scene_fingerprint", fingerprint_hex(scene_fingerprint(desc))},
      {"model_fingerprint", bundle_fingerprint_hex(o.model)},
      {"from", o.from},
      {"to", o.to},
      {"frames", o.frames}};
  write_run_manifest(o.out, "sweep", 0, params, artifacts);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Synthetic RGB-D optical camouflage pipeline"};
  app.set_version_flag("--version", std::string("camo ") + kVersion);
  app.require_subcommand(1);

  // scene gen
  auto* scene_cmd = app.add_subcommand("scene", "Scene file tools");
  scene_cmd->require_subcommand(1);
  SceneGenOpts scene_gen;
  auto* scene_gen_cmd =
      scene_cmd->add_subcommand("gen", "Write a built-in scene variant");
  scene_gen_cmd->add_option("--variant", scene_gen.variant,
                            "default, gradient or layered");
  scene_gen_cmd->add_option("--seed", scene_gen.seed, "master seed");
  scene_gen_cmd->add_option("--out", scene_gen.out, "output directory")
      ->required();
  scene_gen_cmd->callback([&] { cmd_scene_gen(scene_gen); });

  // cloud build
  auto* cloud_cmd = app.add_subcommand("cloud", "Point cloud tools");
  cloud_cmd->require_subcommand(1);
  CloudBuildOpts cloud_build;
  auto* cloud_build_cmd = cloud_cmd->add_subcommand(
      "build", "Render the back sensor and register the point cloud");
  cloud_build_cmd->add_option("--scene", cloud_build.scene, "scene file")
      ->required();
  cloud_build_cmd->add_option("--threads", cloud_build.threads, "worker threads");
  cloud_build_cmd->add_option("--out", cloud_build.out, "output directory")
      ->required();
  cloud_build_cmd->callback([&] { cmd_cloud_build(cloud_build); });

  // dataset collect
  auto* dataset_cmd = app.add_subcommand("dataset", "Dataset tools");
  dataset_cmd->require_subcommand(1);
  DatasetOpts dataset_collect;
  auto* dataset_collect_cmd = dataset_cmd->add_subcommand(
      "collect", "Sample observers and collect shadow angles for TR and BL");
  dataset_collect_cmd->add_option("--scene", dataset_collect.scene, "scene file")
      ->required();
  dataset_collect_cmd->add_option("--seed", dataset_collect.seed, "master seed");
  dataset_collect_cmd->add_option("--instances", dataset_collect.instances,
                                  "observer positions");
  dataset_collect_cmd->add_option("--targets", dataset_collect.targets,
                                  "oracle or cloud");
  dataset_collect_cmd->add_option("--threads", dataset_collect.threads,
                                  "worker threads");
  dataset_collect_cmd->add_option("--out", dataset_collect.out,
                                  "output directory")
      ->required();
  dataset_collect_cmd->callback([&] { cmd_dataset_collect(dataset_collect); });

  // train
  TrainOpts train_opts;
  auto* train_cmd = app.add_subcommand(
      "train", "Train the four corner networks and write a model bundle");
  train_cmd->add_option("--scene", train_opts.scene, "scene file")->required();
  train_cmd->add_option("--dataset", train_opts.dataset,
                        "pre-collected dataset CSV (skips collection)");
  train_cmd->add_option("--seed", train_opts.seed, "master seed");
  train_cmd->add_option("--instances", train_opts.instances,
                        "observer positions when collecting");
  train_cmd->add_option("--targets", train_opts.targets, "oracle or cloud");
  train_cmd
      ->add_option("--hidden-sizes", train_opts.hidden_sizes,
                   "candidate hidden sizes")
      ->delimiter(',');
  train_cmd->add_option("--restarts", train_opts.restarts, "training restarts");
  train_cmd->add_option("--max-epochs", train_opts.max_epochs,
                        "epoch limit per restart");
  train_cmd->add_option("--threads", train_opts.threads, "worker threads");
  train_cmd->add_option("--out", train_opts.out, "output directory")->required();
  train_cmd->callback([&] { cmd_train(train_opts); });

  // report
  ReportOpts report_opts;
  auto* report_cmd =
      app.add_subcommand("report", "Print the per-size selection table");
  report_cmd->add_option("--run", report_opts.run, "train output directory")
      ->required();
  report_cmd->add_option("--out", report_opts.out,
                         "optional directory for report.txt");
  report_cmd->callback([&] { cmd_report(report_opts); });

  // tree stats
  auto* tree_cmd = app.add_subcommand("tree", "kd-tree tools");
  tree_cmd->require_subcommand(1);
  TreeStatsOpts tree_stats;
  auto* tree_stats_cmd = tree_cmd->add_subcommand(
      "stats", "Visited-node profile over random angle queries");
  tree_stats_cmd->add_option("--scene", tree_stats.scene, "scene file")
      ->required();
  tree_stats_cmd->add_option("--seed", tree_stats.seed, "master seed");
  tree_stats_cmd->add_option("--queries", tree_stats.queries, "query count");
  tree_stats_cmd->add_option("--corner", tree_stats.corner, "TL, TR, BL or BR");
  tree_stats_cmd->add_option("--threads", tree_stats.threads, "worker threads");
  tree_stats_cmd->add_option("--out", tree_stats.out,
                             "optional output directory");
  tree_stats_cmd->callback([&] { cmd_tree_stats(tree_stats); });

  // frame render
  auto* frame_cmd = app.add_subcommand("frame", "Frame tools");
  frame_cmd->require_subcommand(1);
  FrameOpts frame_opts;
  auto* frame_render_cmd = frame_cmd->add_subcommand(
      "render", "Render one camouflage frame for an observation point");
  frame_render_cmd->add_option("--op", frame_opts.op, "observer position x y z")
      ->expected(3)
      ->required();
  frame_render_cmd->add_option("--scene", frame_opts.scene, "scene file")
      ->required();
  frame_render_cmd->add_option("--model", frame_opts.model,
                               "model bundle directory")
      ->required();
  frame_render_cmd->add_option("--threads", frame_opts.threads,
                               "worker threads");
  frame_render_cmd->add_option("--out", frame_opts.out, "output directory")
      ->required();
  frame_render_cmd->callback([&] { cmd_frame_render(frame_opts); });

  // sweep
  SweepOpts sweep_opts;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Render frames along an observer path with concealment errors");
  sweep_cmd->add_option("--scene", sweep_opts.scene, "scene file")->required();
  sweep_cmd->add_option("--model", sweep_opts.model, "model bundle directory")
      ->required();
  sweep_cmd->add_option("--from", sweep_opts.from, "path start x y z")
      ->expected(3)
      ->required();
  sweep_cmd->add_option("--to", sweep_opts.to, "path end x y z")
      ->expected(3)
      ->required();
  sweep_cmd->add_option("--frames", sweep_opts.frames, "frame count");
  sweep_cmd->add_option("--threads", sweep_opts.threads, "worker threads");
  sweep_cmd->add_option("--out", sweep_opts.out, "output directory")->required();
  sweep_cmd->callback([&] { cmd_sweep(sweep_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}

}  // namespace camo
