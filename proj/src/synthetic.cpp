#include "nuq/synthetic.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "nuq/error.hpp"

namespace nuq {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError(fmt::format("normal_quantile: p = {} outside (0, 1)", p));
  // Newton iterations on Phi(x) - p from a logistic starting point.
  double x = std::log(p / (1.0 - p)) / 1.702;
  for (int it = 0; it < 60; ++it) {
    const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    const double step = (cdf - p) / pdf;
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double SyntheticModelSpec::switch_threshold() const {
  return h3_mean + h3_std * normal_quantile(switch_quantile);
}

void SyntheticModelSpec::validate() const {
  if (version != 1) throw ConfigError(fmt::format("synthetic: unsupported spec version {}", version));
  if (d < 2) throw ConfigError("synthetic: d must be at least 2");
  if (!(switch_quantile > 0.0 && switch_quantile < 1.0)) {
    throw ConfigError("synthetic: switch_quantile must lie in (0, 1)");
  }
  if (!(switch_width > 0.0 && h2_std > 0.0 && h3_std > 0.0 && regime_width > 0.0)) {
    throw ConfigError("synthetic: widths and standard deviations must be positive");
  }
  if (!(std::isfinite(scale) && scale != 0.0)) throw ConfigError("synthetic: scale must be nonzero");
}

Eigen::VectorXd synthetic_crash(const Eigen::Ref<const Eigen::VectorXd>& h,
                                const SyntheticModelSpec& spec) {
  if (h.size() != 3) throw ConfigError(fmt::format("synthetic: expected 3 inputs, got {}", h.size()));
  if (!h.allFinite()) throw ConfigError("synthetic: non-finite input");
  const double u = (spec.h3_mean - h(2)) / spec.h3_std;
  const double v = (h(1) - spec.h2_mean) / spec.h2_std;
  // exp overflow to +inf gives sw = 0, which is the correct limit.
  const double sw = 1.0 / (1.0 + std::exp((h(2) - spec.switch_threshold()) / spec.switch_width));
  const auto d = static_cast<Eigen::Index>(spec.d);
  Eigen::VectorXd x(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(d - 1);
    const double base = spec.base_offset + spec.base_amplitude * std::sin(std::numbers::pi * s);
    const double a = spec.slope * (1.0 + spec.slope_tilt * s);
    const double curv = spec.curvature * std::cos(2.0 * std::numbers::pi * s);
    const double c = spec.coupling * (s - 0.5) + spec.coupling_offset;
    const double g = (s - spec.regime_center) / spec.regime_width;
    const double r = spec.regime_amplitude * std::exp(-g * g) + spec.regime_floor;
    x(j) = spec.scale * (base + u * a + u * u * curv + v * c + sw * r);
  }
  return x;
}

namespace {

struct Field {
  const char* key;
  double SyntheticModelSpec::*member;
};

constexpr Field kFields[] = {
    {"h2_mean", &SyntheticModelSpec::h2_mean},
    {"h2_std", &SyntheticModelSpec::h2_std},
    {"h3_mean", &SyntheticModelSpec::h3_mean},
    {"h3_std", &SyntheticModelSpec::h3_std},
    {"switch_quantile", &SyntheticModelSpec::switch_quantile},
    {"switch_width", &SyntheticModelSpec::switch_width},
    {"scale", &SyntheticModelSpec::scale},
    {"base_offset", &SyntheticModelSpec::base_offset},
    {"base_amplitude", &SyntheticModelSpec::base_amplitude},
    {"slope", &SyntheticModelSpec::slope},
    {"slope_tilt", &SyntheticModelSpec::slope_tilt},
    {"curvature", &SyntheticModelSpec::curvature},
    {"coupling", &SyntheticModelSpec::coupling},
    {"coupling_offset", &SyntheticModelSpec::coupling_offset},
    {"regime_amplitude", &SyntheticModelSpec::regime_amplitude},
    {"regime_center", &SyntheticModelSpec::regime_center},
    {"regime_width", &SyntheticModelSpec::regime_width},
    {"regime_floor", &SyntheticModelSpec::regime_floor},
};

}  // namespace

SyntheticModelSpec synthetic_spec_from_config(const Config& cfg) {
  SyntheticModelSpec spec;
  spec.version = static_cast<int>(cfg.get_int("synthetic", "version", spec.version));
  const auto d = cfg.get_int("synthetic", "d", static_cast<long long>(spec.d));
  if (d < 2) throw ConfigError("synthetic: d must be at least 2");
  spec.d = static_cast<std::size_t>(d);
  for (const auto& f : kFields) spec.*f.member = cfg.get_double("synthetic", f.key, spec.*f.member);
  spec.validate();
  return spec;
}

Config synthetic_spec_to_config(const SyntheticModelSpec& spec) {
  Config cfg;
  cfg.set("synthetic", "version", std::to_string(spec.version));
  cfg.set("synthetic", "d", std::to_string(spec.d));
  for (const auto& f : kFields) cfg.set("synthetic", f.key, fmt::format("{}", spec.*f.member));
  return cfg;
}

}  // namespace nuq
