#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "nuq/container.hpp"
#include "nuq/mesh.hpp"

namespace nuq {

struct SrsConfig {
  std::size_t nodes_per_dim = 10;
  double margin = 0.05;
  /// Smoothing factor relative to the sectional system scale:
  /// lambda = lambda_rel * trace(M) / trace(G^T G) at every sectional solve.
  double lambda_rel = 1e-3;
  /// When finite, used as an absolute lambda instead of lambda_rel.
  double lambda_abs = std::numeric_limits<double>::quiet_NaN();
  std::size_t max_rank = 20;
  double tol_alt = 1e-6;
  double tol_greedy = 1e-4;
  std::size_t max_alt_iters = 50;
  QuadratureMode quadrature = QuadratureMode::Uniform;
};

/// One rank-one term sigma * prod_i f_i(h_i); every mode has unit Euclidean
/// nodal norm.
struct SrsTerm {
  double sigma = 0.0;
  std::vector<Eigen::VectorXd> modes;
};

struct SrsDiagnostics {
  /// Weighted residual norm before any term, then after each accepted term.
  std::vector<double> residual_history;
  /// Per term: weighted residual norm after every sectional solve.
  std::vector<std::vector<double>> solve_residuals;
  /// Per term: penalized sectional objective after every solve.
  std::vector<std::vector<double>> solve_objectives;
  std::vector<std::size_t> sweeps;
  std::vector<std::string> warnings;
};

/// Separated response surface: sum_j sigma_j prod_i f_i^j(h_i), each
/// sectional mode a piecewise-linear function on its own 1D mesh.
struct SrsModel {
  std::vector<SectionalMesh> meshes;
  std::vector<SrsTerm> terms;
  double lambda_rel = 1e-3;
  double lambda_abs = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd quadrature_weights;
  SrsDiagnostics diagnostics;

  std::size_t nd() const { return meshes.size(); }
};

/// Normal equations of one sectional least-squares problem:
///   M(l, m) = sum_k w_k T_k^2 Psi_m(h_k) Psi_l(h_k)
///   f(l)    = sum_k w_k T_k r_k Psi_l(h_k)
struct SectionalSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

SectionalSystem assemble_sectional_system(const SectionalMesh& mesh,
                                          const Eigen::Ref<const Eigen::VectorXd>& coordinate,
                                          const Eigen::Ref<const Eigen::VectorXd>& other_modes,
                                          const Eigen::Ref<const Eigen::VectorXd>& target,
                                          const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Solves [M + lambda G^T G] a = f. With lambda == 0 a node without sample
/// support makes M singular and raises NumericalError.
Eigen::VectorXd solve_sectional_system(const SectionalSystem& system, const SectionalMesh& mesh,
                                       double lambda);

SrsModel fit_srs(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                 const SrsConfig& config = {});

/// Coordinates outside a mesh are clamped to its boundary; each clamped
/// query increments *clamped when provided.
double eval_srs(const SrsModel& model, const Eigen::Ref<const Eigen::VectorXd>& h,
                std::size_t* clamped = nullptr);

void write_srs(const SrsModel& model, Container& c, std::string_view prefix);
SrsModel read_srs(const Container& c, std::string_view prefix);

}  // namespace nuq
