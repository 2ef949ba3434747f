#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace nuq {

/// Uniform 1D mesh with linear (hat) shape functions.
class SectionalMesh {
 public:
  SectionalMesh() = default;
  /// Throws ConfigError unless nodes are strictly increasing and >= 2.
  explicit SectionalMesh(std::vector<double> nodes);

  /// `node_count` uniform nodes spanning [lo, hi] widened by `margin * (hi - lo)`
  /// on each side. A zero-width range is widened to +-0.5 (or +-|lo|/2).
  static SectionalMesh uniform(double lo, double hi, std::size_t node_count, double margin);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  double lower() const { return nodes_.front(); }
  double upper() const { return nodes_.back(); }
  bool contains(double t) const { return t >= lower() && t <= upper(); }

  /// The two nonzero shape functions at t (clamped into the mesh).
  struct Support {
    std::size_t left;
    double w_left;
    double w_right;
  };
  Support locate(double t) const;

  /// sum_m coeffs[m] * Psi_m(t) with t clamped to [lower, upper].
  double interpolate(const Eigen::Ref<const Eigen::VectorXd>& coeffs, double t) const;

  /// (size-1) x size slope operator, one row per element.
  Eigen::MatrixXd gradient_operator() const;

 private:
  std::vector<double> nodes_;
};

enum class QuadratureMode { Uniform, Voronoi };

/// Quadrature weights for scattered points (rows of `inputs`), summing to one.
/// Uniform: 1/ns. Voronoi: exact cell lengths for nd = 1 (cells cut at
/// midpoints, domain [min, max]); for nd > 1 cell volumes within the bounding
/// box are estimated by nearest-point counting over `probes_per_point * ns`
/// uniform probes drawn from RandomStream(seed, .).
Eigen::VectorXd quadrature_weights(const Eigen::MatrixXd& inputs, QuadratureMode mode,
                                   std::size_t probes_per_point = 64, std::uint64_t seed = 0);

}  // namespace nuq
