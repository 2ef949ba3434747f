#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <string>
#include <string_view>
#include <vector>

#include "nuq/container.hpp"

namespace nuq {

/// gamma(delta) = C0 + C1 (1.5 (delta/a) - 0.5 (delta/a)^3) for 0 < delta <= a,
/// C0 + C1 beyond the range, and 0 at delta = 0.
double spherical_variogram(double delta, double nugget, double partial_sill, double range);

struct Variogram {
  double nugget = 0.0;
  double partial_sill = 1.0;
  double range = 1.0;

  double operator()(double delta) const {
    return spherical_variogram(delta, nugget, partial_sill, range);
  }
  double sill() const { return nugget + partial_sill; }
};

struct OkConfig {
  /// Auto: nugget 0, sill = sample variance of y, range fitted to the binned
  /// empirical semivariogram. Otherwise `variogram` is used as given.
  bool auto_variogram = true;
  Variogram variogram;
  std::size_t lag_bins = 15;
};

/// Binned empirical semivariogram: equal-width bins up to half the largest
/// pairwise distance; bins with fewer than 2 pairs are dropped.
struct EmpiricalVariogram {
  std::vector<double> lags;
  std::vector<double> semivariances;
  std::vector<std::size_t> pair_counts;
};

EmpiricalVariogram empirical_variogram(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                                       std::size_t bins);

/// Ordinary kriging interpolant sum_i w_i(h) y_i with sum_i w_i = 1.
struct OkModel {
  Eigen::MatrixXd inputs;  // ns x nd (after de-duplication)
  Eigen::VectorXd values;
  Variogram variogram;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // bordered (ns+1) system
  Eigen::VectorXd dual;                     // system^{-1} [y; 0]
  EmpiricalVariogram empirical;
  std::vector<std::string> warnings;

  std::size_t nd() const { return static_cast<std::size_t>(inputs.cols()); }
};

/// The bordered matrix [[gamma(|h_i - h_j|), 1], [1^T, 0]].
Eigen::MatrixXd ok_system_matrix(const Eigen::MatrixXd& inputs, const Variogram& variogram);

OkModel fit_ok(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
               const OkConfig& config = {});

struct OkWeights {
  Eigen::VectorXd weights;
  double multiplier = 0.0;
};
/// Solves the bordered system for query h with the stored factorization.
OkWeights ok_weights(const OkModel& model, const Eigen::Ref<const Eigen::VectorXd>& h);

/// Prediction through the precomputed dual vector; algebraically equal to
/// sum_i ok_weights(h)_i y_i since the system is symmetric.
double eval_ok(const OkModel& model, const Eigen::Ref<const Eigen::VectorXd>& h);

void write_ok(const OkModel& model, Container& c, std::string_view prefix);
OkModel read_ok(const Container& c, std::string_view prefix);

}  // namespace nuq
