#include "nuq/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "nuq/error.hpp"
#include "nuq/rng.hpp"

namespace nuq {

SectionalMesh::SectionalMesh(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw ConfigError("sectional mesh needs at least 2 nodes");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) {
      throw ConfigError("sectional mesh nodes must be strictly increasing");
    }
  }
}

SectionalMesh SectionalMesh::uniform(double lo, double hi, std::size_t node_count, double margin) {
  if (node_count < 2) throw ConfigError("sectional mesh needs at least 2 nodes");
  if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ConfigError("sectional mesh: invalid range");
  }
  double width = hi - lo;
  if (width == 0.0) {
    const double half = lo != 0.0 ? 0.5 * std::abs(lo) : 0.5;
    lo -= half;
    hi += half;
    width = hi - lo;
  } else {
    lo -= margin * width;
    hi += margin * width;
    width = hi - lo;
  }
  std::vector<double> nodes(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    nodes[i] = lo + width * static_cast<double>(i) / static_cast<double>(node_count - 1);
  }
  nodes.back() = hi;
  return SectionalMesh(std::move(nodes));
}

SectionalMesh::Support SectionalMesh::locate(double t) const {
  t = std::clamp(t, lower(), upper());
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t left = static_cast<std::size_t>(it - nodes_.begin());
  left = left == 0 ? 0 : left - 1;
  left = std::min(left, nodes_.size() - 2);
  const double h = nodes_[left + 1] - nodes_[left];
  const double xi = (t - nodes_[left]) / h;
  return {left, 1.0 - xi, xi};
}

double SectionalMesh::interpolate(const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                  double t) const {
  const auto s = locate(t);
  const auto l = static_cast<Eigen::Index>(s.left);
  return s.w_left * coeffs(l) + s.w_right * coeffs(l + 1);
}

Eigen::MatrixXd SectionalMesh::gradient_operator() const {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n - 1, n);
  for (Eigen::Index e = 0; e + 1 < n; ++e) {
    const double h = nodes_[e + 1] - nodes_[e];
    g(e, e) = -1.0 / h;
    g(e, e + 1) = 1.0 / h;
  }
  return g;
}

Eigen::VectorXd quadrature_weights(const Eigen::MatrixXd& inputs, QuadratureMode mode,
                                   std::size_t probes_per_point, std::uint64_t seed) {
  const auto ns = inputs.rows();
  if (ns < 1) throw ConfigError("quadrature_weights: no points");
  if (mode == QuadratureMode::Uniform || ns == 1) {
    return Eigen::VectorXd::Constant(ns, 1.0 / static_cast<double>(ns));
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(ns);
  if (inputs.cols() == 1) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ns));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return inputs(a, 0) < inputs(b, 0); });
    const double lo = inputs(order.front(), 0);
    const double hi = inputs(order.back(), 0);
    if (hi == lo) return Eigen::VectorXd::Constant(ns, 1.0 / static_cast<double>(ns));
    for (std::size_t r = 0; r < order.size(); ++r) {
      const double x = inputs(order[r], 0);
      const double left = r == 0 ? lo : 0.5 * (inputs(order[r - 1], 0) + x);
      const double right = r + 1 == order.size() ? hi : 0.5 * (x + inputs(order[r + 1], 0));
      w(order[r]) = right - left;
    }
    return w / w.sum();
  }

  const Eigen::RowVectorXd lo = inputs.colwise().minCoeff();
  const Eigen::RowVectorXd span = inputs.colwise().maxCoeff() - lo;
  const auto probes = static_cast<std::size_t>(ns) * std::max<std::size_t>(probes_per_point, 1);
  Eigen::RowVectorXd p(inputs.cols());
  for (std::size_t i = 0; i < probes; ++i) {
    RandomStream stream(seed, i);
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) p(j) = lo(j) + span(j) * stream.uniform();
    Eigen::Index nearest = 0;
    (inputs.rowwise() - p).rowwise().squaredNorm().minCoeff(&nearest);
    w(nearest) += 1.0;
  }
  return w / w.sum();
}

}  // namespace nuq
