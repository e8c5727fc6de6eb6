#include "camo/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "camo/errors.hpp"
#include "camo/rng.hpp"

namespace camo {
namespace {

void check_arch(const MlpArchitecture& arch) {
  if (arch.inputs != 1 || arch.outputs != 1 || arch.hidden < 1) {
    throw std::invalid_argument("mlp: architecture must be 1 x s x 1, s >= 1");
  }
}

void check_shapes(const MlpArchitecture& arch, const MlpParameters& params) {
  check_arch(arch);
  if (params.zeta.size() != param_count(arch)) {
    throw std::invalid_argument("mlp: zeta length does not match architecture");
  }
  if (!(params.input.std > 0.0) || !(params.target.std > 0.0)) {
    throw std::invalid_argument("mlp: scaling std must be positive");
  }
}

double target_variance_sum(const std::vector<Sample>& subset) {
  double mean = 0.0;
  for (const Sample& s : subset) mean += s.angle_target;
  mean /= static_cast<double>(subset.size());
  double sum = 0.0;
  for (const Sample& s : subset) {
    const double d = s.angle_target - mean;
    sum += d * d;
  }
  return sum;
}

}  // namespace

int param_count(const MlpArchitecture& arch) {
  check_arch(arch);
  return 3 * arch.hidden + 1;
}

Scaling make_scaling(const std::vector<double>& values) {
  if (values.empty()) {
    throw std::invalid_argument("make_scaling: no values");
  }
  Scaling sc;
  sc.mean = std::accumulate(values.begin(), values.end(), 0.0) /
            static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - sc.mean) * (v - sc.mean);
  if (values.size() > 1) var /= static_cast<double>(values.size() - 1);
  sc.std = std::sqrt(var);
  if (!(sc.std > 0.0)) {
    throw std::invalid_argument("make_scaling: values are constant");
  }
  return sc;
}

double forward(const MlpArchitecture& arch, const MlpParameters& params,
               double x) {
  check_shapes(arch, params);
  const int s = arch.hidden;
  const double xs = (x - params.input.mean) / params.input.std;
  double acc = params.zeta[3 * s];
  for (int j = 0; j < s; ++j) {
    acc += params.zeta[2 * s + j] *
           std::tanh(params.zeta[j] * xs + params.zeta[s + j]);
  }
  return params.target.mean + params.target.std * acc;
}

double normalized_squared_error(const MlpArchitecture& arch,
                                const MlpParameters& params,
                                const std::vector<Sample>& subset) {
  check_shapes(arch, params);
  if (subset.empty()) {
    throw std::invalid_argument("normalized_squared_error: empty subset");
  }
  const double den = target_variance_sum(subset);
  if (!(den > 0.0)) {
    throw std::invalid_argument(
        "normalized_squared_error: zero-variance targets");
  }
  double sse = 0.0;
  for (const Sample& s : subset) {
    const double d = forward(arch, params, s.angle_in) - s.angle_target;
    sse += d * d;
  }
  return sse / den;
}

Eigen::VectorXd gradient(const MlpArchitecture& arch,
                         const MlpParameters& params,
                         const std::vector<Sample>& subset) {
  check_shapes(arch, params);
  if (subset.empty()) {
    throw std::invalid_argument("gradient: empty subset");
  }
  const double den = target_variance_sum(subset);
  if (!(den > 0.0)) {
    throw std::invalid_argument("gradient: zero-variance targets");
  }
  const int s = arch.hidden;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(3 * s + 1);
  const double t_std = params.target.std;
  for (const Sample& sample : subset) {
    const double xs =
        (sample.angle_in - params.input.mean) / params.input.std;
    double acc = params.zeta[3 * s];
    Eigen::VectorXd h(s);
    for (int j = 0; j < s; ++j) {
      h[j] = std::tanh(params.zeta[j] * xs + params.zeta[s + j]);
      acc += params.zeta[2 * s + j] * h[j];
    }
    const double y = params.target.mean + t_std * acc;
    const double dy = 2.0 * (y - sample.angle_target) / den;
    for (int j = 0; j < s; ++j) {
      const double v = params.zeta[2 * s + j];
      const double through = dy * t_std * v * (1.0 - h[j] * h[j]);
      g[j] += through * xs;
      g[s + j] += through;
      g[2 * s + j] += dy * t_std * h[j];
    }
    g[3 * s] += dy * t_std;
  }
  return g;
}

DataSplit split_dataset(std::size_t q, const SplitProportions& proportions,
                        std::uint64_t seed) {
  if (!(proportions.train >= 0.0 && proportions.validation >= 0.0 &&
        proportions.test >= 0.0)) {
    throw std::invalid_argument("split_dataset: negative proportion");
  }
  const std::size_t n_val =
      static_cast<std::size_t>(std::floor(q * proportions.validation));
  const std::size_t n_test =
      static_cast<std::size_t>(std::floor(q * proportions.test));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= q) {
    throw std::invalid_argument(
        "split_dataset: every split needs at least one instance");
  }
  const std::size_t n_train = q - n_val - n_test;
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  deterministic_shuffle(order, gen);
  DataSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train,
                          order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<Sample> gather(const CamouflageDataset& dataset,
                           const std::vector<std::size_t>& indices) {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.push_back(dataset.instances.at(i));
  }
  return out;
}

MlpParameters random_parameters(const MlpArchitecture& arch,
                                std::mt19937_64& gen) {
  MlpParameters params;
  params.zeta.resize(param_count(arch));
  for (Eigen::Index i = 0; i < params.zeta.size(); ++i) {
    params.zeta[i] = uniform_real(gen, -1.0, 1.0);
  }
  return params;
}

void save_model(const MlpArchitecture& arch, const MlpParameters& params,
                const std::string& path) {
  check_shapes(arch, params);
  std::ofstream out(path);
  if (!out) throw FileError("save_model: cannot open " + path);
  out << std::setprecision(17);
  out << "mlp " << arch.inputs << ' ' << arch.hidden << ' ' << arch.outputs
      << '\n';
  out << "scale " << params.input.mean << ' ' << params.input.std << ' '
      << params.target.mean << ' ' << params.target.std << '\n';
  for (Eigen::Index i = 0; i < params.zeta.size(); ++i) {
    out << params.zeta[i] << '\n';
  }
  if (!out) throw FileError("save_model: write failed for " + path);
}

void load_model(const std::string& path, MlpArchitecture& arch,
                MlpParameters& params) {
  std::ifstream in(path);
  if (!in) throw FileError("load_model: cannot open " + path);
  std::string tag;
  if (!(in >> tag) || tag != "mlp") {
    throw FileError("load_model: missing mlp header in " + path);
  }
  MlpArchitecture a;
  if (!(in >> a.inputs >> a.hidden >> a.outputs)) {
    throw FileError("load_model: bad architecture line in " + path);
  }
  MlpParameters p;
  if (!(in >> tag) || tag != "scale" ||
      !(in >> p.input.mean >> p.input.std >> p.target.mean >> p.target.std)) {
    throw FileError("load_model: bad scale line in " + path);
  }
  try {
    p.zeta.resize(param_count(a));
  } catch (const std::invalid_argument& e) {
    throw FileError(std::string("load_model: ") + e.what());
  }
  for (Eigen::Index i = 0; i < p.zeta.size(); ++i) {
    if (!(in >> p.zeta[i])) {
      throw FileError("load_model: truncated zeta in " + path);
    }
  }
  try {
    check_shapes(a, p);
  } catch (const std::invalid_argument& e) {
    throw FileError(std::string("load_model: ") + e.what());
  }
  arch = a;
  params = std::move(p);
}

}  // namespace camo
