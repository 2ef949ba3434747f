#include "nuq/dimred.hpp"

#include <Eigen/SVD>
#include <cmath>

#include <fmt/format.h>

#include "nuq/error.hpp"
#include "nuq/linalg.hpp"

namespace nuq {

namespace {

// Flip `v` so that score(v) >= 0; near-zero scores fall back to making the
// largest-magnitude entry positive.
void orient(Eigen::Ref<Eigen::VectorXd> v, double score, double score_scale) {
  bool flip = false;
  if (std::abs(score) > 1e-12 * score_scale) {
    flip = score < 0.0;
  } else if (v.size() > 0) {
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    flip = v(idx) < 0.0;
  }
  if (flip) v = -v;
}

std::size_t select_components(const Eigen::VectorXd& eigenvalues,
                              const ComponentSelector& selector) {
  const auto n = static_cast<std::size_t>(eigenvalues.size());
  if (selector.mode == ComponentSelector::Mode::Fixed) {
    if (selector.count < 1 || selector.count > n) {
      throw ConfigError(
          fmt::format("cannot retain {} components out of {}", selector.count, n));
    }
    return selector.count;
  }
  if (!(selector.fraction > 0.0 && selector.fraction <= 1.0)) {
    throw ConfigError(fmt::format("energy fraction must lie in (0, 1], got {}", selector.fraction));
  }
  const double total = eigenvalues.cwiseMax(0.0).sum();
  if (!(total > 0.0)) {
    throw NumericalError("all-zero spectrum: no component carries energy (k = 0)");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += std::max(eigenvalues(static_cast<Eigen::Index>(k)), 0.0);
    if (acc / total >= selector.fraction - 1e-12) return k + 1;
  }
  return n;
}

double max_pairwise_distance(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) return 0.0;
  if (rows.cols() == 1) return rows.maxCoeff() - rows.minCoeff();
  const Eigen::MatrixXd pts = rows.transpose();
  return std::sqrt(squared_distances(pts, pts).maxCoeff());
}

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& outputs, const ComponentSelector& selector) {
  const auto ns = outputs.cols();
  if (ns < 2) throw ConfigError("fit_pca: needs at least 2 samples");
  if (!outputs.allFinite()) throw ConfigError("fit_pca: non-finite outputs");

  PcaModel model;
  model.mean = outputs.rowwise().mean();
  const Eigen::MatrixXd centered = outputs.colwise() - model.mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  model.eigenvalues = svd.singularValues().array().square() / static_cast<double>(ns - 1);
  model.k = select_components(model.eigenvalues, selector);
  model.basis = svd.matrixU().leftCols(static_cast<Eigen::Index>(model.k));

  const double scale = std::sqrt(static_cast<double>(outputs.rows()));
  for (Eigen::Index c = 0; c < model.basis.cols(); ++c) {
    orient(model.basis.col(c), model.basis.col(c).sum(), scale);
  }
  return model;
}

Eigen::VectorXd pca_forward(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.mean.size()) {
    throw ConfigError(
        fmt::format("pca_forward: expected length {}, got {}", model.mean.size(), x.size()));
  }
  return model.basis.transpose() * (x - model.mean);
}

Eigen::VectorXd pca_backward(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != static_cast<Eigen::Index>(model.k)) {
    throw ConfigError(fmt::format("pca_backward: expected length {}, got {}", model.k, z.size()));
  }
  return model.basis * z + model.mean;
}

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b, double beta) {
  if (!(beta > 0.0)) throw ConfigError("gaussian_kernel: beta must be positive");
  if (a.size() != b.size()) throw ConfigError("gaussian_kernel: length mismatch");
  return std::exp(-beta * (a - b).squaredNorm());
}

namespace {

struct CenteredGram {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd row_means;
  double total_mean = 0.0;
};

CenteredGram build_centered_gram(const Eigen::MatrixXd& outputs, double beta) {
  const Eigen::MatrixXd gram = (-beta * squared_distances(outputs, outputs)).array().exp();
  if (!gram.allFinite()) throw NumericalError("fit_kpca: non-finite kernel values");
  CenteredGram out;
  out.row_means = gram.rowwise().mean();
  out.total_mean = out.row_means.mean();
  out.matrix = gram;
  out.matrix.colwise() -= out.row_means;
  out.matrix.rowwise() -= out.row_means.transpose();
  out.matrix.array() += out.total_mean;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

}  // namespace

Eigen::MatrixXd centered_gram(const Eigen::MatrixXd& outputs, double beta) {
  if (!(beta > 0.0)) throw ConfigError("centered_gram: beta must be positive");
  return build_centered_gram(outputs, beta).matrix;
}

KpcaModel fit_kpca(const Eigen::MatrixXd& outputs, double beta, const ComponentSelector& selector) {
  const auto ns = outputs.cols();
  if (ns < 2) throw ConfigError("fit_kpca: needs at least 2 samples");
  if (!(beta > 0.0)) throw ConfigError("fit_kpca: beta must be positive");
  if (!outputs.allFinite()) throw ConfigError("fit_kpca: non-finite outputs");

  auto gram = build_centered_gram(outputs, beta);
  auto eig = symmetric_eigen(gram.matrix);

  const double lead = std::max(eig.values(0), 0.0);
  const double tol = 1e-10 * std::max(lead, gram.matrix.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) < 0.0) {
      if (eig.values(i) < -tol) {
        throw NumericalError(fmt::format(
            "fit_kpca: centered Gram eigenvalue {} = {:.3e} is too negative (leading {:.3e})", i,
            eig.values(i), lead));
      }
      eig.values(i) = 0.0;
    }
  }

  KpcaModel model;
  model.beta = beta;
  model.k = select_components(eig.values, selector);
  const auto k = static_cast<Eigen::Index>(model.k);
  model.eigenvalues = std::move(eig.values);
  model.axes = eig.vectors.leftCols(k);
  model.training_outputs = outputs;
  model.gram_row_means = std::move(gram.row_means);
  model.gram_total_mean = gram.total_mean;

  // Orient each axis so its latent coordinate grows with the output average.
  Eigen::VectorXd qoi = outputs.colwise().mean().transpose();
  qoi.array() -= qoi.mean();
  const double qoi_scale = qoi.norm();
  for (Eigen::Index c = 0; c < k; ++c) {
    orient(model.axes.col(c), model.axes.col(c).dot(qoi), qoi_scale);
  }

  model.latent = model.axes * model.eigenvalues.head(k).cwiseSqrt().asDiagonal();
  model.latent_diameter = max_pairwise_distance(model.latent);
  return model;
}

Eigen::VectorXd kpca_forward(const KpcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.training_outputs.rows()) {
    throw ConfigError(fmt::format("kpca_forward: expected length {}, got {}",
                                  model.training_outputs.rows(), x.size()));
  }
  const Eigen::MatrixXd column = x;
  Eigen::VectorXd g =
      (-model.beta * squared_distances(model.training_outputs, column)).array().exp();
  const double g_mean = g.mean();
  g.array() += model.gram_total_mean - g_mean;
  g -= model.gram_row_means;

  Eigen::VectorXd z = model.axes.transpose() * g;
  for (Eigen::Index c = 0; c < z.size(); ++c) {
    const double lambda = model.eigenvalues(c);
    z(c) = lambda > 0.0 ? z(c) / std::sqrt(lambda) : 0.0;
  }
  return z;
}

Eigen::VectorXd kpca_backward_weights(const KpcaModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& z) {
  const auto ns = model.latent.rows();
  if (ns == 0) throw ConfigError("kpca_backward: degenerate model without training samples");
  if (z.size() != static_cast<Eigen::Index>(model.k)) {
    throw ConfigError(fmt::format("kpca_backward: expected length {}, got {}", model.k, z.size()));
  }
  Eigen::VectorXd dist2 = (model.latent.rowwise() - z.transpose()).rowwise().squaredNorm();
  Eigen::Index nearest = 0;
  const double min_dist2 = dist2.minCoeff(&nearest);
  const double hit = 1e-12 * model.latent_diameter;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(ns);
  if (std::sqrt(min_dist2) <= hit) {
    w(nearest) = 1.0;
    return w;
  }
  // w_i proportional to 1 / d_i^2, scaled by the smallest d^2 to stay in range.
  w = min_dist2 * dist2.cwiseInverse();
  w /= w.sum();
  return w;
}

Eigen::VectorXd kpca_backward(const KpcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& z) {
  const Eigen::VectorXd w = kpca_backward_weights(model, z);
  Eigen::Index top = 0;
  if (w.maxCoeff(&top) == 1.0) return model.training_outputs.col(top);
  return model.training_outputs * w;
}

double energy_fraction(const Eigen::Ref<const Eigen::VectorXd>& eigenvalues, std::size_t k) {
  if (k > static_cast<std::size_t>(eigenvalues.size())) {
    throw ConfigError(fmt::format("energy_fraction: k = {} exceeds spectrum length {}", k,
                                  eigenvalues.size()));
  }
  const Eigen::VectorXd clamped = eigenvalues.cwiseMax(0.0);
  const double total = clamped.sum();
  if (!(total > 0.0)) throw ConfigError("energy_fraction: all-zero spectrum");
  return clamped.head(static_cast<Eigen::Index>(k)).sum() / total;
}

std::size_t latent_dim(const ReducedModel& model) {
  return std::visit([](const auto& m) { return m.k; }, model);
}

const Eigen::VectorXd& spectrum(const ReducedModel& model) {
  return std::visit([](const auto& m) -> const Eigen::VectorXd& { return m.eigenvalues; }, model);
}

Eigen::VectorXd forward(const ReducedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (const auto* p = std::get_if<PcaModel>(&model)) return pca_forward(*p, x);
  return kpca_forward(std::get<KpcaModel>(model), x);
}

Eigen::VectorXd backward(const ReducedModel& model, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (const auto* p = std::get_if<PcaModel>(&model)) return pca_backward(*p, z);
  return kpca_backward(std::get<KpcaModel>(model), z);
}

Eigen::MatrixXd backward_many(const ReducedModel& model, const Eigen::MatrixXd& latent) {
  if (const auto* p = std::get_if<PcaModel>(&model)) {
    if (latent.rows() != static_cast<Eigen::Index>(p->k)) {
      throw ConfigError(fmt::format("pca_backward: expected length {}, got {}", p->k, latent.rows()));
    }
    return (p->basis * latent).colwise() + p->mean;
  }
  const auto& m = std::get<KpcaModel>(model);
  Eigen::MatrixXd weights(m.latent.rows(), latent.cols());
  for (Eigen::Index j = 0; j < latent.cols(); ++j) {
    weights.col(j) = kpca_backward_weights(m, latent.col(j));
  }
  return m.training_outputs * weights;
}

Eigen::MatrixXd training_latent(const ReducedModel& model, const Eigen::MatrixXd& outputs) {
  if (const auto* p = std::get_if<PcaModel>(&model)) {
    return ((outputs.colwise() - p->mean).transpose() * p->basis);
  }
  return std::get<KpcaModel>(model).latent;
}

Container to_container(const ReducedModel& model) {
  if (const auto* p = std::get_if<PcaModel>(&model)) {
    Container c("pca");
    c.put_int("k", static_cast<std::int64_t>(p->k));
    c.put_matrix("basis", p->basis);
    c.put_vector("eigenvalues", p->eigenvalues);
    c.put_vector("mean", p->mean);
    return c;
  }
  const auto& m = std::get<KpcaModel>(model);
  Container c("kpca");
  c.put_int("k", static_cast<std::int64_t>(m.k));
  c.put_real("beta", m.beta);
  c.put_vector("eigenvalues", m.eigenvalues);
  c.put_matrix("axes", m.axes);
  c.put_matrix("training_outputs", m.training_outputs);
  c.put_vector("gram_row_means", m.gram_row_means);
  c.put_real("gram_total_mean", m.gram_total_mean);
  c.put_matrix("latent", m.latent);
  c.put_real("latent_diameter", m.latent_diameter);
  return c;
}

ReducedModel reduced_model_from_container(const Container& c) {
  if (c.kind() == "pca") {
    PcaModel m;
    m.k = static_cast<std::size_t>(c.get_int("k"));
    m.basis = c.get_matrix("basis");
    m.eigenvalues = c.get_vector("eigenvalues");
    m.mean = c.get_vector("mean");
    return m;
  }
  c.expect_kind("kpca");
  KpcaModel m;
  m.k = static_cast<std::size_t>(c.get_int("k"));
  m.beta = c.get_real("beta");
  m.eigenvalues = c.get_vector("eigenvalues");
  m.axes = c.get_matrix("axes");
  m.training_outputs = c.get_matrix("training_outputs");
  m.gram_row_means = c.get_vector("gram_row_means");
  m.gram_total_mean = c.get_real("gram_total_mean");
  m.latent = c.get_matrix("latent");
  m.latent_diameter = c.get_real("latent_diameter");
  return m;
}

}  // namespace nuq
