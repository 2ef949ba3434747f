#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "nuq/dataset.hpp"
#include "nuq/uq.hpp"

namespace nuq {

/// Full-order model h -> x.
using FullModel = std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

struct SamplingSchedule {
  std::size_t start = 100;
  double growth = 1.5;
  std::size_t max_ns = 5000;
};

struct ConvergenceOptions {
  SamplingSchedule schedule;
  double kl_tol = 1e-2;
  std::size_t n_bins = kDefaultBins;
  double beta = 0.1;
  std::uint64_t seed = 0;
};

struct ConvergenceStep {
  std::size_t ns = 0;
  double kl_to_previous = std::numeric_limits<double>::quiet_NaN();  // NaN on the first step
  double dkl0 = 0.0;
  double relative_kl = std::numeric_limits<double>::quiet_NaN();
  double energy_fraction = std::numeric_limits<double>::quiet_NaN();  // NaN for a zero spectrum
};

struct ConvergenceReport {
  std::vector<ConvergenceStep> schedule;
  std::size_t final_ns = 0;
  bool converged = false;
  double kl_tol = 0.0;
};

/// Grows a nested design ns <- ceil(growth * ns), refits a one-component
/// kPCA at every size and compares the histogram of its latent coordinate
/// with the previous one. Stops once the divergence drops below kl_tol or
/// the next size would exceed max_ns (the last step is clipped to max_ns).
ConvergenceReport converge_sampling(const FullModel& model, const InputDistribution& dist,
                                    const ConvergenceOptions& options = {});

/// Evaluates `model` on every row of `inputs`; failures are rethrown with
/// the offending sample index.
std::vector<Eigen::VectorXd> evaluate_full_model(const FullModel& model,
                                                 const Eigen::MatrixXd& inputs,
                                                 std::size_t first_index = 0);

/// One "key=value ..." line per step, then a summary line.
std::string convergence_log(const ConvergenceReport& report);
ConvergenceReport parse_convergence_log(std::string_view text);

}  // namespace nuq
