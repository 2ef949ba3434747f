#pragma once

#include <Eigen/Core>
#include <variant>

#include "nuq/container.hpp"

namespace nuq {

/// How many leading components to keep: a fixed count, or the smallest k
/// whose cumulative energy fraction reaches `fraction`.
struct ComponentSelector {
  enum class Mode { Fixed, Energy };
  Mode mode = Mode::Energy;
  std::size_t count = 1;
  double fraction = 0.80;

  static ComponentSelector fixed(std::size_t k) { return {Mode::Fixed, k, 0.0}; }
  static ComponentSelector energy(double tau) { return {Mode::Energy, 0, tau}; }
};

/// Linear PCA on mean-centered outputs.
struct PcaModel {
  Eigen::MatrixXd basis;        // d x k, orthonormal columns
  Eigen::VectorXd eigenvalues;  // covariance spectrum, descending, length min(d, ns)
  Eigen::VectorXd mean;         // length d
  std::size_t k = 0;
};

/// Gaussian-kernel PCA with an inverse-distance pre-image map.
///
/// Latent coordinates are projections onto unit-norm principal axes in the
/// kernel feature space, z = diag(eigenvalues)^(-1/2) V^T g_c(x), so the
/// training coordinates equal V * diag(eigenvalues)^(1/2). Components with a
/// zero eigenvalue project to zero.
struct KpcaModel {
  double beta = 0.1;
  Eigen::MatrixXd axes;              // ns x k, orthonormal columns (V*)
  Eigen::VectorXd eigenvalues;       // centered Gram spectrum, descending, length ns
  Eigen::MatrixXd training_outputs;  // d x ns
  Eigen::VectorXd gram_row_means;    // length ns
  double gram_total_mean = 0.0;
  Eigen::MatrixXd latent;            // ns x k, training latent coordinates
  double latent_diameter = 0.0;      // max pairwise distance among latent rows
  std::size_t k = 0;
};

PcaModel fit_pca(const Eigen::MatrixXd& outputs, const ComponentSelector& selector);
Eigen::VectorXd pca_forward(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd pca_backward(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& z);

/// exp(-beta * ||a - b||^2).
double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b, double beta);

/// Double-centered Gram matrix G_c = G - 1 r^T - r 1^T + m of the training
/// columns (r = row means, m = total mean).
Eigen::MatrixXd centered_gram(const Eigen::MatrixXd& outputs, double beta);

KpcaModel fit_kpca(const Eigen::MatrixXd& outputs, double beta, const ComponentSelector& selector);
Eigen::VectorXd kpca_forward(const KpcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd kpca_backward(const KpcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& z);
/// Pre-image weights: nonnegative, summing to one; a one-hot vector when z
/// lies within 1e-12 * latent_diameter of a training coordinate.
Eigen::VectorXd kpca_backward_weights(const KpcaModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& z);

/// sum(eigenvalues[0..k)) / sum(eigenvalues); ConfigError for an all-zero spectrum.
double energy_fraction(const Eigen::Ref<const Eigen::VectorXd>& eigenvalues, std::size_t k);

/// Either reduction, behind one forward/backward interface.
using ReducedModel = std::variant<PcaModel, KpcaModel>;

std::size_t latent_dim(const ReducedModel& model);
const Eigen::VectorXd& spectrum(const ReducedModel& model);
Eigen::VectorXd forward(const ReducedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd backward(const ReducedModel& model, const Eigen::Ref<const Eigen::VectorXd>& z);
/// Backward map of every column of `latent` (k x m), returned as d x m.
Eigen::MatrixXd backward_many(const ReducedModel& model, const Eigen::MatrixXd& latent);
/// ns x k latent coordinates of the training outputs the model was fitted on.
Eigen::MatrixXd training_latent(const ReducedModel& model, const Eigen::MatrixXd& outputs);

Container to_container(const ReducedModel& model);
ReducedModel reduced_model_from_container(const Container& c);

}  // namespace nuq
