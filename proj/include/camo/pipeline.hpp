#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "camo/kdtree.hpp"
#include "camo/mlp.hpp"
#include "camo/scene.hpp"
#include "camo/sensor.hpp"
#include "camo/trainer.hpp"

namespace camo {

enum class Channel { theta, phi };

// TRX, TRY, BLX, BLY and friends: corner name plus X for the theta network,
// Y for the phi network.
std::string network_name(Corner corner, Channel channel);

// Observation angles stay inside these half-FOV windows; beyond them a
// prediction is flagged as extrapolated.
constexpr double kThetaRangeDeg = 35.0;
constexpr double kPhiRangeDeg = 26.9;

struct ObserverBox {
  double x_min = -0.40, x_max = 0.40;
  double y_min = -0.30, y_max = 0.30;
  double z_min = -3.2, z_max = -2.0;
};

// Stratified jittered grid over (x, y) with uniform depth, all on the
// display's front side in the default world.
std::vector<Vec3> sample_observers(std::size_t count, std::uint64_t seed,
                                   const ObserverBox& box = ObserverBox{});

// Where dataset targets come from: the ray-cast shadow point itself, or the
// nearest cloud point found by projecting the shadow into the depth raster
// (the sensor-faithful path, quantized to cloud resolution).
enum class TargetMode { oracle_exact, cloud_lookup };

struct DatasetOptions {
  TargetMode mode = TargetMode::oracle_exact;
  const PointCloud* cloud = nullptr;          // cloud_lookup only
  const CameraModel* depth_camera = nullptr;  // cloud_lookup only
  SplitProportions proportions{};
  std::uint64_t seed = 0;
};

// Both angle channels of one tracked corner.
struct CornerDataset {
  Corner corner = Corner::TR;
  CamouflageDataset theta;
  CamouflageDataset phi;
};

// Per observer position: corner-frame observation angles in, shadow angles
// out, split 50/25/25 by a seeded shuffle per channel.
CornerDataset generate_dataset(const Scene& scene, const DisplayQuad& display,
                               Corner corner,
                               const std::vector<Vec3>& observers,
                               const DatasetOptions& options);

// CSV: corner,channel,angle_in,angle_target,split
void save_dataset_csv(const std::vector<CornerDataset>& data,
                      const std::string& path);
std::vector<CornerDataset> load_dataset_csv(const std::string& path);

struct NetworkModel {
  MlpArchitecture arch;
  MlpParameters params;
};

// Stage-1 networks for one corner plus optional stage-2 corrections that
// map stage-1 outputs to corrected angles.
struct CornerNetworks {
  NetworkModel theta;
  NetworkModel phi;
  std::optional<NetworkModel> theta_correction;
  std::optional<NetworkModel> phi_correction;
};

// Networks are trained for TR and BL only; TL and BR reuse them (the display
// is an axis-aligned rectangle, so TL shares its column with BL and its row
// with TR, and the same goes for BR mirrored).
struct CamouflageModel {
  DisplayQuad display;
  std::array<CornerFrame, 4> frames;
  std::uint64_t scene_fingerprint = 0;
  CornerNetworks tr;
  CornerNetworks bl;
};

struct NetworkSelection {
  std::string name;
  Corner corner = Corner::TR;
  Channel channel = Channel::theta;
  SelectionResult selection;
};

struct TrainOutcome {
  CamouflageModel model;
  std::vector<NetworkSelection> selections;  // TRX, TRY, BLX, BLY
};

// Runs hidden-size model selection per channel and keeps the four winners.
TrainOutcome train_model(const SceneDescription& desc,
                         const CornerDataset& tr_data,
                         const CornerDataset& bl_data,
                         const std::vector<int>& hidden_sizes,
                         const TrainConfig& config);

// One correction pair: stage-1 output angle in, true measured angle out.
struct CorrectionSet {
  std::vector<Sample> trx;
  std::vector<Sample> try_;
  std::vector<Sample> blx;
  std::vector<Sample> bly;
};

// Trains the stage-2 networks (same architecture family) on at least 8
// pairs per channel and attaches them to the model.
void train_correction(CamouflageModel& model, const CorrectionSet& set,
                      const std::vector<int>& hidden_sizes,
                      const TrainConfig& config);

struct AnglePrediction {
  Corner corner = Corner::TL;
  double theta_in = 0.0;
  double phi_in = 0.0;
  double theta_out = 0.0;
  double phi_out = 0.0;
  bool extrapolated = false;
};

// Observation angles of op in each corner frame pushed through that
// corner's networks; TL and BR use BL's theta / TR's phi nets (and the
// mirror pairing) as described on CamouflageModel.
std::array<AnglePrediction, 4> predict_shadow_angles(
    const CamouflageModel& model, const Vec3& op);

std::vector<AnglePoint> angle_points(const PointCloud& cloud, Corner corner);

struct CornerTrees {
  std::array<KdTree2, 4> trees;
};

CornerTrees build_corner_trees(const PointCloud& cloud);

// A nearest neighbor farther than this (degrees) marks the frame
// low-confidence: the predicted shadow fell into an undefined-cloud hole.
constexpr double kLowConfidenceDistanceDeg = 2.0;

struct CornerResolution {
  Corner corner = Corner::TL;
  std::size_t cloud_index = 0;
  int color_u = -1;
  int color_v = -1;
  double nn_distance = 0.0;
  std::size_t visited = 0;
  bool low_confidence = false;
};

std::array<CornerResolution, 4> resolve_corners(
    const std::array<AnglePrediction, 4>& predictions, const PointCloud& cloud,
    const CornerTrees& trees);

struct CornerPixels {
  Eigen::Vector2d tl = Eigen::Vector2d::Zero();
  Eigen::Vector2d tr = Eigen::Vector2d::Zero();
  Eigen::Vector2d bl = Eigen::Vector2d::Zero();
  Eigen::Vector2d br = Eigen::Vector2d::Zero();
};

// Homography with h33 = 1 mapping each src point to its dst point exactly.
// Throws std::invalid_argument on a degenerate (e.g. collinear) quad.
Eigen::Matrix3d solve_homography(const std::array<Eigen::Vector2d, 4>& src,
                                 const std::array<Eigen::Vector2d, 4>& dst);

// Warps the quadrilateral quad in `color` onto a width x height raster,
// raster corners (0,0)/(W-1,0)/(0,H-1)/(W-1,H-1) matching TL/TR/BL/BR,
// bilinear sampling.
ColorImage extract_camouflage_image(const ColorImage& color,
                                    const CornerPixels& quad, int width,
                                    int height);

// Everything run_frame needs from one capture of the scene.
struct SceneCapture {
  SensorRig rig;
  PointCloud cloud;
  ColorImage color;
  CornerTrees trees;
  std::uint64_t scene_fingerprint = 0;
};

SceneCapture build_capture(const SceneDescription& desc, int threads = 1);

struct FrameOutput {
  ColorImage image;
  std::array<AnglePrediction, 4> predictions;
  std::array<CornerResolution, 4> resolutions;
  bool low_confidence = false;
};

constexpr int kDisplayRasterWidth = 640;
constexpr int kDisplayRasterHeight = 360;

// predict -> resolve -> extract. Throws std::invalid_argument when op is
// behind the display or the capture's scene does not match the model.
FrameOutput run_frame(const CamouflageModel& model, const SceneCapture& capture,
                      const Vec3& op, int width = kDisplayRasterWidth,
                      int height = kDisplayRasterHeight);

// Model bundle: <dir>/manifest.json plus one model file per network
// (TRX.model, ..., TRX.correction.model when stage 2 is present).
void save_model_bundle(const CamouflageModel& model, const std::string& dir);
CamouflageModel load_model_bundle(const std::string& dir);

}  // namespace camo
