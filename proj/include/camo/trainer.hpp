#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "camo/mlp.hpp"

namespace camo {

struct TrainConfig {
  int max_epochs = 1000;
  double min_improvement = 1e-12;
  int restarts = 5;
  std::uint64_t seed = 0;
  double brent_tolerance = 1e-10;
  int brent_max_iters = 100;
  double initial_rate = 1e-2;
  double rate_max = 1e6;
};

// Inverse-Hessian BFGS with identity resets. The curvature guard (y's <=
// 1e-12) and the descent fallback both reset to identity, so every returned
// direction satisfies d'g < 0.
class BfgsDirection {
 public:
  explicit BfgsDirection(int n);

  void reset();

  // Fresh descent direction -g (state untouched beyond requiring a reset
  // history); used at epoch 0 and after restarts.
  Eigen::VectorXd initial_direction(const Eigen::VectorXd& grad);

  // Applies the inverse-Hessian update with the last step and gradient
  // change, then returns -H g. Throws on non-finite gradients.
  Eigen::VectorXd next_direction(const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& prev_grad,
                                 const Eigen::VectorXd& prev_step);

  const Eigen::MatrixXd& hessian_inverse() const { return h_; }

 private:
  Eigen::MatrixXd h_;
};

struct BrentResult {
  double rate = 0.0;
  double value = 0.0;  // phi(rate)
  bool hit_rate_max = false;
  int evaluations = 0;
};

// Line search along phi(rate), rate >= 0. Brackets by doubling from
// initial_rate (halving first if that point is already uphill), then runs
// Brent's method. Returns the best evaluated point, so value <= phi(0)
// always; a phi still decreasing at rate_max returns rate_max flagged.
BrentResult brent_rate(const std::function<double(double)>& phi,
                       double initial_rate = 1e-2, double rate_max = 1e6,
                       double tolerance = 1e-10, int max_iters = 100);

struct TrainingResult {
  MlpParameters params;  // restored to the epoch of minimum validation error
  int epochs = 0;
  double seconds = 0.0;
  std::vector<double> train_history;       // E_T per epoch, length epochs+1
  std::vector<double> validation_history;  // E_V per epoch, length epochs+1
  double min_validation_error = 0.0;
  int best_epoch = 0;
  int restart = 0;
  double zeta_norm = 0.0;
  double gradient_norm = 0.0;
};

// Multi-restart quasi-Newton training on the training split with per-epoch
// validation monitoring; keeps the restart with the smallest minimum E_V
// (ties to the earlier restart) and restores its best-epoch parameters.
TrainingResult train(const MlpArchitecture& arch,
                     const CamouflageDataset& dataset,
                     const TrainConfig& config);

struct LinearFit {
  double a = 0.0;  // intercept
  double b = 0.0;  // slope
};

// Least squares y = a + b x. Throws below 2 points or at zero input
// variance.
LinearFit linear_regression(const std::vector<double>& x,
                            const std::vector<double>& y);

// Squared Pearson correlation.
double r_squared(const std::vector<double>& x, const std::vector<double>& y);

struct RegressionReport {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
  std::size_t q = 0;
};

// Regression of model outputs against targets over the test split.
RegressionReport test_regression(const MlpArchitecture& arch,
                                 const MlpParameters& params,
                                 const CamouflageDataset& dataset);

struct SelectionEntry {
  int hidden = 0;
  TrainingResult result;
  RegressionReport regression;
};

struct SelectionResult {
  int chosen_hidden = 0;
  std::size_t chosen_index = 0;
  std::vector<SelectionEntry> entries;
};

// Index of the smallest validation error, first on ties.
std::size_t select_hidden_size(const std::vector<double>& validation_errors);

// Trains every candidate size and picks the minimum validation error.
SelectionResult model_selection(const CamouflageDataset& dataset,
                                const std::vector<int>& sizes,
                                const TrainConfig& config);

// CSV "epoch,E_T,E_V", one row per epoch starting at 0.
void write_history_csv(const TrainingResult& result, const std::string& path);

}  // namespace camo
