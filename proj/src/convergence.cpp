#include "nuq/convergence.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "nuq/config.hpp"
#include "nuq/dimred.hpp"
#include "nuq/error.hpp"

namespace nuq {

std::vector<Eigen::VectorXd> evaluate_full_model(const FullModel& model,
                                                 const Eigen::MatrixXd& inputs,
                                                 std::size_t first_index) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(inputs.rows()));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const std::size_t index = first_index + static_cast<std::size_t>(i);
    try {
      out.push_back(model(inputs.row(i).transpose()));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("full model failed at sample {}: {}", index, e.what()));
    } catch (const IoError& e) {
      throw IoError(fmt::format("full model failed at sample {}: {}", index, e.what()));
    } catch (const std::exception& e) {
      throw NumericalError(fmt::format("full model failed at sample {}: {}", index, e.what()));
    }
    if (!out.back().allFinite()) {
      throw NumericalError(fmt::format("full model returned non-finite output at sample {}", index));
    }
  }
  return out;
}

ConvergenceReport converge_sampling(const FullModel& model, const InputDistribution& dist,
                                    const ConvergenceOptions& options) {
  const auto& sched = options.schedule;
  if (sched.start < 10) throw ConfigError("converge: start must be at least 10");
  if (!(sched.growth > 1.0)) throw ConfigError("converge: growth must exceed 1");
  if (sched.max_ns < sched.start) throw ConfigError("converge: max_ns is below start");
  if (!(options.kl_tol > 0.0)) throw ConfigError("converge: kl_tol must be positive");

  ConvergenceReport report;
  report.kl_tol = options.kl_tol;
  Eigen::MatrixXd inputs(0, static_cast<Eigen::Index>(dist.nd()));
  Eigen::MatrixXd outputs;
  Histogram previous;
  std::size_t ns = sched.start;

  while (true) {
    const auto have = static_cast<std::size_t>(inputs.rows());
    const Eigen::MatrixXd fresh = sample_input_rows(dist, have, ns - have, options.seed);
    const auto xs = evaluate_full_model(model, fresh, have);
    Eigen::MatrixXd grown_in(static_cast<Eigen::Index>(ns), inputs.cols());
    grown_in << inputs, fresh;
    inputs = std::move(grown_in);
    const auto d = static_cast<Eigen::Index>(xs.front().size());
    Eigen::MatrixXd grown_out(d, static_cast<Eigen::Index>(ns));
    if (have > 0) grown_out.leftCols(static_cast<Eigen::Index>(have)) = outputs;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j].size() != d) throw NumericalError("full model output length changed between samples");
      grown_out.col(static_cast<Eigen::Index>(have + j)) = xs[j];
    }
    outputs = std::move(grown_out);

    const KpcaModel kpca = fit_kpca(outputs, options.beta, ComponentSelector::fixed(1));
    const Histogram hist = build_histogram(kpca.latent.col(0), options.n_bins);

    ConvergenceStep step;
    step.ns = ns;
    step.dkl0 = kl_reference(hist);
    if (kpca.eigenvalues.cwiseMax(0.0).sum() > 0.0) {
      step.energy_fraction = energy_fraction(kpca.eigenvalues, 1);
    }
    if (!report.schedule.empty()) {
      step.kl_to_previous = kl_divergence(hist, previous);
      step.relative_kl = step.dkl0 > 0.0 ? step.kl_to_previous / step.dkl0
                                         : std::numeric_limits<double>::quiet_NaN();
    }
    report.schedule.push_back(step);
    report.final_ns = ns;
    previous = hist;

    if (!std::isnan(step.kl_to_previous) && step.kl_to_previous < options.kl_tol) {
      report.converged = true;
      break;
    }
    if (ns >= sched.max_ns) break;
    const auto next = static_cast<std::size_t>(std::ceil(sched.growth * static_cast<double>(ns)));
    ns = std::min(std::max(next, ns + 1), sched.max_ns);
  }
  return report;
}

namespace {

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::string convergence_log(const ConvergenceReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.schedule.size(); ++i) {
    const auto& s = report.schedule[i];
    out += fmt::format("step={} ns={} kl_to_previous={} dkl0={} relative_kl={} energy_fraction={}\n",
                       i + 1, s.ns, fmt_real(s.kl_to_previous), fmt_real(s.dkl0),
                       fmt_real(s.relative_kl), fmt_real(s.energy_fraction));
  }
  out += fmt::format("final_ns={} converged={} kl_tol={}\n", report.final_ns,
                     report.converged ? "true" : "false", fmt_real(report.kl_tol));
  return out;
}

ConvergenceReport parse_convergence_log(std::string_view text) {
  ConvergenceReport report;
  std::istringstream in{std::string(text)};
  std::string line;
  bool summary = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    ConvergenceStep step;
    bool is_step = false;
    while (fields >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw IoError("convergence log: malformed field '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "step") {
        is_step = true;
      } else if (key == "ns") {
        step.ns = static_cast<std::size_t>(parse_int(value, key));
      } else if (key == "kl_to_previous") {
        step.kl_to_previous = parse_double(value, key);
      } else if (key == "dkl0") {
        step.dkl0 = parse_double(value, key);
      } else if (key == "relative_kl") {
        step.relative_kl = parse_double(value, key);
      } else if (key == "energy_fraction") {
        step.energy_fraction = parse_double(value, key);
      } else if (key == "final_ns") {
        report.final_ns = static_cast<std::size_t>(parse_int(value, key));
        summary = true;
      } else if (key == "converged") {
        report.converged = value == "true";
      } else if (key == "kl_tol") {
        report.kl_tol = parse_double(value, key);
      }
    }
    if (is_step) report.schedule.push_back(step);
  }
  if (!summary) throw IoError("convergence log: missing summary line");
  return report;
}

}  // namespace nuq
