#include "nuq/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "nuq/error.hpp"

namespace nuq {

double spherical_variogram(double delta, double nugget, double partial_sill, double range) {
  if (!(range > 0.0)) throw ConfigError("spherical variogram: range must be positive");
  if (delta <= 0.0) return 0.0;
  if (delta > range) return nugget + partial_sill;
  const double r = delta / range;
  return nugget + partial_sill * (1.5 * r - 0.5 * r * r * r);
}

namespace {

Eigen::VectorXd variogram_column(const Eigen::MatrixXd& inputs, const Variogram& v,
                                 const Eigen::Ref<const Eigen::VectorXd>& h) {
  const auto ns = inputs.rows();
  Eigen::VectorXd out(ns + 1);
  for (Eigen::Index i = 0; i < ns; ++i) {
    out(i) = v((inputs.row(i).transpose() - h).norm());
  }
  out(ns) = 1.0;
  return out;
}

double fit_range(const EmpiricalVariogram& emp, double sill, double max_distance) {
  if (emp.lags.empty()) return 0.5 * max_distance;
  auto sse = [&](double a) {
    double s = 0.0;
    for (std::size_t b = 0; b < emp.lags.size(); ++b) {
      const double r = spherical_variogram(emp.lags[b], 0.0, sill, a) - emp.semivariances[b];
      s += r * r;
    }
    return s;
  };
  // Log-spaced scan, then golden-section refinement around the best cell.
  const double lo = max_distance * 1e-3;
  const double hi = max_distance * 2.0;
  constexpr int kGrid = 200;
  const double ratio = std::pow(hi / lo, 1.0 / kGrid);
  int best = 0;
  double best_val = sse(lo);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = sse(lo * std::pow(ratio, i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = std::log(lo) + std::log(ratio) * std::max(best - 1, 0);
  double b = std::log(lo) + std::log(ratio) * std::min(best + 1, kGrid);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  for (int it = 0; it < 80; ++it) {
    if (sse(std::exp(c)) < sse(std::exp(d))) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return std::exp(0.5 * (a + b));
}

void factorize(OkModel& model) {
  const Eigen::MatrixXd system = ok_system_matrix(model.inputs, model.variogram);
  model.lu.compute(system);
  const double rcond = model.lu.rcond();
  if (!(rcond > 1e-14)) {
    throw NumericalError(fmt::format(
        "ordinary kriging system is singular (rcond = {:.2e}); check for collinear or "
        "duplicate points",
        rcond));
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(model.inputs.rows() + 1);
  rhs.head(model.inputs.rows()) = model.values;
  model.dual = model.lu.solve(rhs);
  if (!model.dual.allFinite()) throw NumericalError("ordinary kriging solve produced non-finite values");
}

}  // namespace

EmpiricalVariogram empirical_variogram(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                                       std::size_t bins) {
  EmpiricalVariogram emp;
  const auto ns = inputs.rows();
  if (ns < 2 || bins == 0) return emp;
  double max_distance = 0.0;
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index j = i + 1; j < ns; ++j) {
      max_distance = std::max(max_distance, (inputs.row(i) - inputs.row(j)).norm());
    }
  }
  if (max_distance == 0.0) return emp;
  const double cutoff = 0.5 * max_distance;
  const double width = cutoff / static_cast<double>(bins);
  std::vector<double> sum(bins, 0.0);
  std::vector<double> lag_sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index j = i + 1; j < ns; ++j) {
      const double dist = (inputs.row(i) - inputs.row(j)).norm();
      if (dist <= 0.0 || dist > cutoff) continue;
      const auto b = std::min(static_cast<std::size_t>(dist / width), bins - 1);
      const double diff = values(i) - values(j);
      sum[b] += 0.5 * diff * diff;
      lag_sum[b] += dist;
      ++count[b];
    }
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] < 2) continue;
    emp.lags.push_back(lag_sum[b] / static_cast<double>(count[b]));
    emp.semivariances.push_back(sum[b] / static_cast<double>(count[b]));
    emp.pair_counts.push_back(count[b]);
  }
  return emp;
}

Eigen::MatrixXd ok_system_matrix(const Eigen::MatrixXd& inputs, const Variogram& variogram) {
  const auto ns = inputs.rows();
  Eigen::MatrixXd a(ns + 1, ns + 1);
  for (Eigen::Index i = 0; i < ns; ++i) {
    a(i, i) = variogram(0.0);
    for (Eigen::Index j = i + 1; j < ns; ++j) {
      const double g = variogram((inputs.row(i) - inputs.row(j)).norm());
      a(i, j) = g;
      a(j, i) = g;
    }
    a(i, ns) = 1.0;
    a(ns, i) = 1.0;
  }
  a(ns, ns) = 0.0;
  return a;
}

OkModel fit_ok(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
               const OkConfig& config) {
  const auto ns = inputs.rows();
  if (ns < 2) throw ConfigError("fit_ok: needs at least 2 samples");
  if (values.size() != ns) throw ConfigError("fit_ok: value count does not match input rows");
  if (!inputs.allFinite() || !values.allFinite()) throw ConfigError("fit_ok: non-finite data");

  OkModel model;

  // Sort rows lexicographically to find duplicates.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ns));
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
      if (inputs(a, j) != inputs(b, j)) return inputs(a, j) < inputs(b, j);
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), row_less);
  std::vector<bool> keep(static_cast<std::size_t>(ns), true);
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < order.size(); ++r) {
    const auto a = order[r - 1];
    const auto b = order[r];
    if (inputs.row(a) == inputs.row(b)) {
      if (values(a) != values(b)) {
        throw ConfigError(fmt::format(
            "fit_ok: samples {} and {} share an input point but have different values", a, b));
      }
      keep[static_cast<std::size_t>(std::max(a, b))] = false;
      ++dropped;
    }
  }
  if (dropped > 0) {
    model.warnings.push_back(fmt::format("removed {} duplicate input rows", dropped));
  }
  const auto kept = ns - static_cast<Eigen::Index>(dropped);
  model.inputs.resize(kept, inputs.cols());
  model.values.resize(kept);
  for (Eigen::Index i = 0, r = 0; i < ns; ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    model.inputs.row(r) = inputs.row(i);
    model.values(r) = values(i);
    ++r;
  }
  if (kept < 2) throw ConfigError("fit_ok: fewer than 2 distinct input points");

  if (config.auto_variogram) {
    const double mean = model.values.mean();
    double variance = (model.values.array() - mean).square().sum() / static_cast<double>(kept - 1);
    if (!(variance > 0.0)) {
      model.warnings.push_back("constant values; using unit sill");
      variance = 1.0;
    }
    model.empirical = empirical_variogram(model.inputs, model.values, config.lag_bins);
    double max_distance = 0.0;
    for (Eigen::Index j = 0; j < model.inputs.cols(); ++j) {
      const double span = model.inputs.col(j).maxCoeff() - model.inputs.col(j).minCoeff();
      max_distance += span * span;
    }
    max_distance = std::sqrt(max_distance);
    model.variogram = Variogram{0.0, variance, fit_range(model.empirical, variance, max_distance)};
  } else {
    model.variogram = config.variogram;
    if (!(model.variogram.range > 0.0)) throw ConfigError("fit_ok: variogram range must be positive");
    if (model.variogram.nugget < 0.0 || model.variogram.partial_sill < 0.0 ||
        !(model.variogram.sill() > 0.0)) {
      throw ConfigError("fit_ok: variogram needs C0, C1 >= 0 and C0 + C1 > 0");
    }
  }
  factorize(model);
  return model;
}

OkWeights ok_weights(const OkModel& model, const Eigen::Ref<const Eigen::VectorXd>& h) {
  if (h.size() != model.inputs.cols()) {
    throw ConfigError(fmt::format("ok_weights: expected {} inputs, got {}", model.inputs.cols(),
                                  h.size()));
  }
  const Eigen::VectorXd sol = model.lu.solve(variogram_column(model.inputs, model.variogram, h));
  const auto ns = model.inputs.rows();
  return {sol.head(ns), sol(ns)};
}

double eval_ok(const OkModel& model, const Eigen::Ref<const Eigen::VectorXd>& h) {
  if (h.size() != model.inputs.cols()) {
    throw ConfigError(fmt::format("eval_ok: expected {} inputs, got {}", model.inputs.cols(),
                                  h.size()));
  }
  const auto ns = model.inputs.rows();
  double total = model.dual(ns);
  for (Eigen::Index i = 0; i < ns; ++i) {
    total += model.dual(i) * model.variogram((model.inputs.row(i).transpose() - h).norm());
  }
  return total;
}

void write_ok(const OkModel& model, Container& c, std::string_view prefix) {
  const std::string p(prefix);
  c.put_matrix(p + "inputs", model.inputs, Container::Order::RowMajor);
  c.put_vector(p + "values", model.values);
  c.put_real(p + "nugget", model.variogram.nugget);
  c.put_real(p + "partial_sill", model.variogram.partial_sill);
  c.put_real(p + "range", model.variogram.range);
}

OkModel read_ok(const Container& c, std::string_view prefix) {
  const std::string p(prefix);
  OkModel model;
  model.inputs = c.get_matrix(p + "inputs");
  model.values = c.get_vector(p + "values");
  model.variogram =
      Variogram{c.get_real(p + "nugget"), c.get_real(p + "partial_sill"), c.get_real(p + "range")};
  factorize(model);
  return model;
}

}  // namespace nuq
