#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace camo {

// One scalar input, one tanh hidden layer, one linear output.
struct MlpArchitecture {
  int inputs = 1;
  int hidden = 2;
  int outputs = 1;
};

// zeta layout: hidden weights w[0..s), hidden biases b1[0..s), output
// weights v[0..s), output bias b2. Length 3s + 1.
int param_count(const MlpArchitecture& arch);

struct Scaling {
  double mean = 0.0;
  double std = 1.0;
};

// Standardization constants of the training split; applied to the input
// before the hidden layer and inverted on the output.
struct MlpParameters {
  Eigen::VectorXd zeta;
  Scaling input;
  Scaling target;
};

// Mean and sample standard deviation. Throws when the values are constant
// (the scaling std must stay positive).
Scaling make_scaling(const std::vector<double>& values);

// y = t_mean + t_std * (b2 + sum_j v_j tanh(w_j x_s + b1_j)),
// x_s = (x - in_mean) / in_std.
double forward(const MlpArchitecture& arch, const MlpParameters& params,
               double x);

struct Sample {
  double angle_in = 0.0;      // observer angle, degrees
  double angle_target = 0.0;  // shadow angle, degrees
};

// E = sum_q (y_q - t_q)^2 / sum_q (t_q - tbar)^2 over the given subset,
// tbar the subset target mean. Throws on an empty subset or zero-variance
// targets.
double normalized_squared_error(const MlpArchitecture& arch,
                                const MlpParameters& params,
                                const std::vector<Sample>& subset);

// Exact gradient of normalized_squared_error with respect to zeta.
Eigen::VectorXd gradient(const MlpArchitecture& arch,
                         const MlpParameters& params,
                         const std::vector<Sample>& subset);

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct CamouflageDataset {
  std::vector<Sample> instances;
  DataSplit split;
};

struct SplitProportions {
  double train = 0.50;
  double validation = 0.25;
  double test = 0.25;
};

// Validation and test sizes round down, training takes the remainder
// (35 at 50/25/25 gives 19/8/8). Index sets come from one seeded shuffle
// and are returned sorted. Throws when any split would be empty.
DataSplit split_dataset(std::size_t q, const SplitProportions& proportions,
                        std::uint64_t seed);

std::vector<Sample> gather(const CamouflageDataset& dataset,
                           const std::vector<std::size_t>& indices);

// All entries uniform in [-1, 1]; scalings left at identity.
MlpParameters random_parameters(const MlpArchitecture& arch,
                                std::mt19937_64& gen);

// Plain text: "mlp <inputs> <hidden> <outputs>", "scale <in_mean> <in_std>
// <t_mean> <t_std>", then one zeta entry per line, 17 significant digits.
void save_model(const MlpArchitecture& arch, const MlpParameters& params,
                const std::string& path);
void load_model(const std::string& path, MlpArchitecture& arch,
                MlpParameters& params);

}  // namespace camo
