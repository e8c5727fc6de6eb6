#include "camo/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "camo/errors.hpp"
#include "camo/rng.hpp"

namespace camo {
namespace {

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite vector");
  }
}

}  // namespace

BfgsDirection::BfgsDirection(int n)
    : h_(Eigen::MatrixXd::Identity(n, n)) {
  if (n < 1) throw std::invalid_argument("BfgsDirection: bad dimension");
}

void BfgsDirection::reset() { h_.setIdentity(); }

Eigen::VectorXd BfgsDirection::initial_direction(const Eigen::VectorXd& grad) {
  check_finite(grad, "BfgsDirection::initial_direction");
  reset();
  return -grad;
}

Eigen::VectorXd BfgsDirection::next_direction(const Eigen::VectorXd& grad,
                                              const Eigen::VectorXd& prev_grad,
                                              const Eigen::VectorXd& prev_step) {
  check_finite(grad, "BfgsDirection::next_direction");
  check_finite(prev_grad, "BfgsDirection::next_direction");
  check_finite(prev_step, "BfgsDirection::next_direction");
  const Eigen::VectorXd y = grad - prev_grad;
  const Eigen::VectorXd& s = prev_step;
  const double ys = y.dot(s);
  if (ys <= 1e-12) {
    h_.setIdentity();
  } else {
    const double rho = 1.0 / ys;
    const Eigen::MatrixXd identity =
        Eigen::MatrixXd::Identity(h_.rows(), h_.cols());
    h_ = (identity - rho * s * y.transpose()) * h_ *
             (identity - rho * y * s.transpose()) +
         rho * s * s.transpose();
    h_ = ((h_ + h_.transpose()) / 2.0).eval();
  }
  Eigen::VectorXd d = -(h_ * grad);
  if (!(d.dot(grad) < 0.0)) {
    h_.setIdentity();
    d = -grad;
  }
  return d;
}

BrentResult brent_rate(const std::function<double(double)>& phi,
                       double initial_rate, double rate_max, double tolerance,
                       int max_iters) {
  if (!(initial_rate > 0.0) || !(rate_max > initial_rate)) {
    throw std::invalid_argument("brent_rate: bad rate bounds");
  }
  BrentResult out;
  double best_rate = 0.0;
  double best_val = phi(0.0);
  int evals = 1;
  auto probe = [&](double r) {
    const double v = phi(r);
    ++evals;
    if (v < best_val) {
      best_val = v;
      best_rate = r;
    }
    return v;
  };

  const double phi0 = best_val;
  double r = initial_rate;
  double fr = probe(r);
  if (!(fr < phi0)) {
    while (r > 1e-14) {
      r *= 0.5;
      fr = probe(r);
      if (fr < phi0) break;
    }
    if (!(fr < phi0)) {
      out.rate = best_rate;  // 0: no decreasing step exists at this scale
      out.value = best_val;
      out.evaluations = evals;
      return out;
    }
  }

  // Bracket (lo, mid, hi) with phi(mid) below both ends.
  double lo = 0.0;
  double mid = r;
  double f_mid = fr;
  double hi = 2.0 * r;
  for (;;) {
    bool capped = false;
    if (hi > rate_max) {
      hi = rate_max;
      capped = true;
    }
    const double f_hi = probe(hi);
    if (f_hi >= f_mid) break;
    if (capped) {
      out.rate = rate_max;
      out.value = f_hi;
      out.hit_rate_max = true;
      out.evaluations = evals;
      return out;
    }
    lo = mid;
    mid = hi;
    f_mid = f_hi;
    hi *= 2.0;
  }

  // Brent's method (golden section + parabolic interpolation) on [lo, hi].
  constexpr double kGold = 0.3819660112501051;
  double a = lo;
  double b = hi;
  double x = mid, w = mid, v = mid;
  double fx = f_mid, fw = f_mid, fv = f_mid;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tolerance * std::abs(x) + 1e-18;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool take_golden = true;
    if (std::abs(e) > tol1) {
      const double r1 = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r1;
      q = 2.0 * (q - r1);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) {
          d = xm >= x ? tol1 : -tol1;
        }
        take_golden = false;
      }
    }
    if (take_golden) {
      e = x >= xm ? a - x : b - x;
      d = kGold * e;
    }
    const double u =
        std::abs(d) >= tol1 ? x + d : x + (d >= 0.0 ? tol1 : -tol1);
    const double fu = probe(u);
    if (fu <= fx) {
      if (u >= x) {
        a = x;
      } else {
        b = x;
      }
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x) {
        a = u;
      } else {
        b = u;
      }
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }

  out.rate = best_rate;
  out.value = best_val;
  out.evaluations = evals;
  return out;
}

TrainingResult train(const MlpArchitecture& arch,
                     const CamouflageDataset& dataset,
                     const TrainConfig& config) {
  if (config.max_epochs < 1 || config.restarts < 1 ||
      !(config.min_improvement > 0.0)) {
    throw std::invalid_argument("train: bad config");
  }
  if (dataset.split.train.empty() || dataset.split.validation.empty()) {
    throw std::invalid_argument("train: dataset split missing");
  }
  const std::vector<Sample> train_sub = gather(dataset, dataset.split.train);
  const std::vector<Sample> val_sub = gather(dataset, dataset.split.validation);
  std::vector<double> xs, ts;
  xs.reserve(train_sub.size());
  ts.reserve(train_sub.size());
  for (const Sample& s : train_sub) {
    xs.push_back(s.angle_in);
    ts.push_back(s.angle_target);
  }
  const Scaling input_scaling = make_scaling(xs);
  const Scaling target_scaling = make_scaling(ts);

  TrainingResult best;
  bool have_best = false;
  for (int restart = 0; restart < config.restarts; ++restart) {
    const auto t0 = std::chrono::steady_clock::now();
    auto gen = substream(config.seed, "init/" + std::to_string(arch.hidden) +
                                          "/" + std::to_string(restart));
    MlpParameters p = random_parameters(arch, gen);
    p.input = input_scaling;
    p.target = target_scaling;

    BfgsDirection bfgs(param_count(arch));
    std::vector<double> et{normalized_squared_error(arch, p, train_sub)};
    std::vector<double> ev{normalized_squared_error(arch, p, val_sub)};
    Eigen::VectorXd best_zeta = p.zeta;
    double best_ev = ev[0];
    int best_epoch = 0;

    Eigen::VectorXd grad = gradient(arch, p, train_sub);
    Eigen::VectorXd dir = bfgs.initial_direction(grad);
    int epochs = 0;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
      auto phi = [&](double rate) {
        MlpParameters q = p;
        q.zeta = p.zeta + rate * dir;
        return normalized_squared_error(arch, q, train_sub);
      };
      const BrentResult line =
          brent_rate(phi, config.initial_rate, config.rate_max,
                     config.brent_tolerance, config.brent_max_iters);
      // Recreating the exact expression phi evaluated keeps the recorded
      // E_T bitwise equal to the line-search value.
      p.zeta = (p.zeta + line.rate * dir).eval();
      et.push_back(line.value);
      ev.push_back(normalized_squared_error(arch, p, val_sub));
      if (ev.back() < best_ev) {
        best_ev = ev.back();
        best_zeta = p.zeta;
        best_epoch = epoch;
      }
      epochs = epoch;
      if (et[static_cast<std::size_t>(epoch - 1)] -
              et[static_cast<std::size_t>(epoch)] <
          config.min_improvement) {
        break;
      }
      Eigen::VectorXd next_grad = gradient(arch, p, train_sub);
      dir = bfgs.next_direction(next_grad, grad, line.rate * dir);
      grad = std::move(next_grad);
    }
    p.zeta = best_zeta;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (!have_best || best_ev < best.min_validation_error) {
      have_best = true;
      best.params = p;
      best.epochs = epochs;
      best.seconds = seconds;
      best.train_history = std::move(et);
      best.validation_history = std::move(ev);
      best.min_validation_error = best_ev;
      best.best_epoch = best_epoch;
      best.restart = restart;
    }
  }
  best.zeta_norm = best.params.zeta.norm();
  best.gradient_norm = gradient(arch, best.params, train_sub).norm();
  return best;
}

LinearFit linear_regression(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("linear_regression: size mismatch");
  }
  const std::size_t q = x.size();
  if (q < 2) throw std::invalid_argument("linear_regression: need >= 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double qd = static_cast<double>(q);
  const double den = qd * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) {
    throw std::invalid_argument("linear_regression: zero input variance");
  }
  LinearFit fit;
  fit.b = (qd * sxy - sx * sy) / den;
  fit.a = (sy - fit.b * sx) / qd;
  return fit;
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("r_squared: size mismatch");
  }
  const std::size_t q = x.size();
  if (q < 2) throw std::invalid_argument("r_squared: need >= 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double qd = static_cast<double>(q);
  const double vx = qd * sxx - sx * sx;
  const double vy = qd * syy - sy * sy;
  if (!(vx > 0.0) || !(vy > 0.0)) {
    throw std::invalid_argument("r_squared: zero variance");
  }
  const double cov = qd * sxy - sx * sy;
  return (cov * cov) / (vx * vy);
}

RegressionReport test_regression(const MlpArchitecture& arch,
                                 const MlpParameters& params,
                                 const CamouflageDataset& dataset) {
  const std::vector<Sample> test_sub = gather(dataset, dataset.split.test);
  if (test_sub.size() < 2) {
    throw std::invalid_argument("test_regression: test split too small");
  }
  std::vector<double> targets, outputs;
  targets.reserve(test_sub.size());
  outputs.reserve(test_sub.size());
  for (const Sample& s : test_sub) {
    targets.push_back(s.angle_target);
    outputs.push_back(forward(arch, params, s.angle_in));
  }
  const LinearFit fit = linear_regression(targets, outputs);
  RegressionReport report;
  report.a = fit.a;
  report.b = fit.b;
  report.r2 = r_squared(targets, outputs);
  report.q = test_sub.size();
  return report;
}

std::size_t select_hidden_size(const std::vector<double>& validation_errors) {
  if (validation_errors.empty()) {
    throw std::invalid_argument("select_hidden_size: no candidates");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < validation_errors.size(); ++i) {
    if (validation_errors[i] < validation_errors[best]) best = i;
  }
  return best;
}

SelectionResult model_selection(const CamouflageDataset& dataset,
                                const std::vector<int>& sizes,
                                const TrainConfig& config) {
  if (sizes.empty()) {
    throw std::invalid_argument("model_selection: no sizes");
  }
  SelectionResult selection;
  std::vector<double> validation_errors;
  for (int s : sizes) {
    MlpArchitecture arch;
    arch.hidden = s;
    SelectionEntry entry;
    entry.hidden = s;
    entry.result = train(arch, dataset, config);
    entry.regression = test_regression(arch, entry.result.params, dataset);
    validation_errors.push_back(entry.result.min_validation_error);
    selection.entries.push_back(std::move(entry));
  }
  selection.chosen_index = select_hidden_size(validation_errors);
  selection.chosen_hidden = sizes[selection.chosen_index];
  return selection;
}

void write_history_csv(const TrainingResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("write_history_csv: cannot open " + path);
  out << "epoch,E_T,E_V\n" << std::setprecision(17);
  for (std::size_t i = 0; i < result.train_history.size(); ++i) {
    out << i << ',' << result.train_history[i] << ','
        << result.validation_history[i] << '\n';
  }
  if (!out) throw FileError("write_history_csv: write failed for " + path);
}

}  // namespace camo
