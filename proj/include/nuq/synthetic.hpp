#pragma once

#include <Eigen/Core>
#include <filesystem>

#include "nuq/config.hpp"

namespace nuq {

/// Deterministic stand-in for an expensive crash simulation: maps three
/// thickness parameters to a d-component strain-like field with a steep
/// regime switch on h3.
///
/// With s_j = j / (d - 1), u = (m3 - h3) / s3 and v = (h2 - m2) / s2:
///   x_j = scale * (base_j + u a_j + u^2 curv_j + v c_j + sw(h3) r_j)
///   base_j = base_offset + base_amplitude sin(pi s_j)
///   a_j    = slope (1 + slope_tilt s_j)
///   curv_j = curvature cos(2 pi s_j)
///   c_j    = coupling (s_j - 0.5) + coupling_offset
///   r_j    = regime_amplitude exp(-((s_j - regime_center) / regime_width)^2) + regime_floor
///   sw     = 1 / (1 + exp((h3 - t) / switch_width)),  t = m3 + s3 Phi^{-1}(switch_quantile)
/// h1 does not enter.
struct SyntheticModelSpec {
  int version = 1;
  std::size_t d = 142;
  double h2_mean = 1.2;
  double h2_std = 0.12;
  double h3_mean = 1.2;
  double h3_std = 0.12;
  double switch_quantile = 0.19;
  double switch_width = 0.006;
  double scale = 0.5;
  double base_offset = 0.6;
  double base_amplitude = 0.25;
  double slope = 0.06;
  double slope_tilt = 0.5;
  double curvature = 0.01;
  double coupling = 0.012;
  double coupling_offset = 0.01;
  double regime_amplitude = 0.9;
  double regime_center = 0.4;
  double regime_width = 0.22;
  double regime_floor = 0.25;

  /// h3 value below which the minor regime dominates.
  double switch_threshold() const;
  /// ConfigError unless d >= 2, 0 < switch_quantile < 1 and widths are positive.
  void validate() const;
};

/// Inverse standard normal CDF, accurate to about 1e-15.
double normal_quantile(double p);

Eigen::VectorXd synthetic_crash(const Eigen::Ref<const Eigen::VectorXd>& h,
                                const SyntheticModelSpec& spec = {});

/// Reads the `[synthetic]` section; absent keys keep their defaults.
SyntheticModelSpec synthetic_spec_from_config(const Config& cfg);
Config synthetic_spec_to_config(const SyntheticModelSpec& spec);

}  // namespace nuq
