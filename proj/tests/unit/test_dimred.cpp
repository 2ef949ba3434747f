#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nuq/dataset.hpp"
#include "nuq/dimred.hpp"
#include "nuq/error.hpp"
#include "nuq/linalg.hpp"
#include "nuq/rng.hpp"
#include "oracles.hpp"

using namespace nuq;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Eigen::MatrixXd m(rows, cols);
  RandomStream s(seed, 0);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = s.normal();
  }
  return m;
}

/// Covariance spectrum of the columns of X (d x ns) by Jacobi on the smaller
/// of the d x d and ns x ns Gram forms.
std::vector<double> covariance_spectrum_oracle(const Eigen::MatrixXd& x) {
  const auto d = static_cast<std::size_t>(x.rows());
  const auto ns = static_cast<std::size_t>(x.cols());
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < ns; ++k) mean[i] += x(i, k);
    mean[i] /= static_cast<double>(ns);
  }
  const bool small_d = d <= ns;
  const std::size_t n = small_d ? d : ns;
  oracle::Dense c(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      double s = 0.0;
      if (small_d) {
        for (std::size_t k = 0; k < ns; ++k) s += (x(a, k) - mean[a]) * (x(b, k) - mean[b]);
      } else {
        for (std::size_t i = 0; i < d; ++i) s += (x(i, a) - mean[i]) * (x(i, b) - mean[i]);
      }
      c(a, b) = s / static_cast<double>(ns - 1);
    }
  }
  return oracle::jacobi_eigenvalues(c);
}

std::vector<double> centered_gram_spectrum_oracle(const Eigen::MatrixXd& x, double beta) {
  const auto ns = static_cast<std::size_t>(x.cols());
  oracle::Dense g(ns, ns);
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      double d2 = 0.0;
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double t = x(r, static_cast<Eigen::Index>(i)) - x(r, static_cast<Eigen::Index>(j));
        d2 += t * t;
      }
      g(i, j) = std::exp(-beta * d2);
    }
  }
  std::vector<double> row(ns, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < ns; ++j) row[i] += g(i, j);
    total += row[i];
    row[i] /= static_cast<double>(ns);
  }
  total /= static_cast<double>(ns * ns);
  oracle::Dense c(ns, ns);
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < ns; ++j) c(i, j) = g(i, j) - row[i] - row[j] + total;
  }
  return oracle::jacobi_eigenvalues(c);
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("symmetric_eigen reconstructs the matrix") {
    const Eigen::MatrixXd a = random_matrix(12, 12, 4);
    const Eigen::MatrixXd s = a + a.transpose();
    const auto e = symmetric_eigen(s);
    for (Eigen::Index i = 1; i < e.values.size(); ++i) CHECK(e.values(i) <= e.values(i - 1));
    const Eigen::MatrixXd back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((back - s).norm() < 1e-12 * s.norm());
  }

  TEST_CASE("squared distances match direct differences") {
    const Eigen::MatrixXd a = random_matrix(5, 4, 1);
    const Eigen::MatrixXd b = random_matrix(5, 3, 2);
    const Eigen::MatrixXd d = squared_distances(a, b);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 3; ++j) CHECK(d(i, j) == doctest::Approx((a.col(i) - b.col(j)).squaredNorm()).epsilon(1e-12));
    }
  }
}

TEST_SUITE("pca") {
  TEST_CASE("rank-one data keeps exactly one component") {
    Eigen::VectorXd u(6);
    u << 1, -2, 0.5, 3, 0, 1;
    Eigen::MatrixXd x(6, 9);
    for (int i = 0; i < 9; ++i) x.col(i) = (0.3 * i - 1.0) * u;
    const PcaModel m = fit_pca(x, ComponentSelector::energy(0.8));
    CHECK(m.k == 1);
    CHECK(m.eigenvalues.size() == 6);
    for (Eigen::Index i = 1; i < m.eigenvalues.size(); ++i) CHECK(std::abs(m.eigenvalues(i)) <= 1e-10 * m.eigenvalues(0));
    for (int i = 0; i < 9; ++i) {
      const Eigen::VectorXd back = pca_backward(m, pca_forward(m, x.col(i)));
      CHECK((back - x.col(i)).norm() <= 1e-8 * std::max(1.0, x.col(i).norm()));
    }
  }

  TEST_CASE("points on y = 2x give the analytic principal axis") {
    Eigen::MatrixXd x(2, 5);
    for (int i = 0; i < 5; ++i) x.col(i) << i - 2.0, 2.0 * (i - 2.0);
    const PcaModel m = fit_pca(x, ComponentSelector::fixed(1));
    Eigen::Vector2d axis(1.0, 2.0);
    axis /= std::sqrt(5.0);
    CHECK(std::abs(std::abs(m.basis.col(0).dot(axis)) - 1.0) < 1e-12);
  }

  TEST_CASE("spectrum matches the Jacobi oracle on random data") {
    const Eigen::MatrixXd x = random_matrix(10, 50, 9);
    const PcaModel m = fit_pca(x, ComponentSelector::fixed(3));
    const auto ref = covariance_spectrum_oracle(x);
    REQUIRE(m.eigenvalues.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(m.eigenvalues(i) - ref[i]) <= 1e-8 * ref[0]);
  }

  TEST_CASE("forward and backward identities") {
    const Eigen::MatrixXd x = random_matrix(8, 20, 10);
    const PcaModel m = fit_pca(x, ComponentSelector::fixed(3));
    CHECK((m.basis.transpose() * m.basis - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10);
    CHECK(pca_forward(m, m.mean).norm() < 1e-12);
    CHECK((pca_forward(m, m.mean + m.basis.col(0)) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
    CHECK((pca_backward(m, Eigen::Vector3d::Zero()) - m.mean).norm() == 0.0);
    const Eigen::MatrixXd proj = m.basis * m.basis.transpose();
    for (int i = 0; i < 20; ++i) {
      const Eigen::VectorXd z(Eigen::Vector3d(0.3 * i, -1.0, 2.0));
      CHECK((pca_forward(m, pca_backward(m, z)) - z).norm() < 1e-12 * std::max(1.0, z.norm()));
      const Eigen::VectorXd expect = proj * (x.col(i) - m.mean) + m.mean;
      CHECK((pca_backward(m, pca_forward(m, x.col(i))) - expect).norm() < 1e-10);
    }
    CHECK_THROWS_AS(pca_forward(m, Eigen::VectorXd::Zero(3)), ConfigError);
    CHECK_THROWS_AS(pca_backward(m, Eigen::VectorXd::Zero(2)), ConfigError);
  }

  TEST_CASE("reconstruction error is nonincreasing in k") {
    const Eigen::MatrixXd x = random_matrix(6, 15, 11);
    std::vector<double> prev(15, std::numeric_limits<double>::infinity());
    for (std::size_t k = 1; k <= 6; ++k) {
      const PcaModel m = fit_pca(x, ComponentSelector::fixed(k));
      for (int i = 0; i < 15; ++i) {
        const double err = (x.col(i) - pca_backward(m, pca_forward(m, x.col(i)))).norm();
        CHECK(err <= prev[i] + 1e-12);
        prev[i] = err;
      }
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(fit_pca(Eigen::MatrixXd::Ones(3, 1), ComponentSelector::fixed(1)), ConfigError);
    CHECK_THROWS(fit_pca(Eigen::MatrixXd::Ones(3, 5), ComponentSelector::energy(0.8)));
  }
}

TEST_SUITE("kpca") {
  TEST_CASE("gaussian kernel") {
    Eigen::VectorXd a(2);
    Eigen::VectorXd b(2);
    a << 1.0, 2.0;
    b << 1.0 + std::sqrt(10.0), 2.0;
    CHECK(gaussian_kernel(a, a, 0.1) == 1.0);
    CHECK(gaussian_kernel(a, b, 0.1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(gaussian_kernel(a, b, 0.1) == gaussian_kernel(b, a, 0.1));
    CHECK_THROWS_AS(gaussian_kernel(a, b, 0.0), ConfigError);
  }

  TEST_CASE("spectrum matches the Jacobi oracle") {
    const Eigen::MatrixXd x = random_matrix(5, 20, 12);
    const KpcaModel m = fit_kpca(x, 0.1, ComponentSelector::fixed(2));
    const auto ref = centered_gram_spectrum_oracle(x, 0.1);
    for (int i = 0; i < 20; ++i) CHECK(std::abs(std::max(ref[i], 0.0) - m.eigenvalues(i)) <= 1e-8 * ref[0]);
  }

  TEST_CASE("fit, forward and backward consistency") {
    const Eigen::MatrixXd x = random_matrix(4, 25, 13);
    const KpcaModel m = fit_kpca(x, 0.1, ComponentSelector::fixed(3));
    REQUIRE(m.k == 3);
    CHECK((m.axes.transpose() * m.axes - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10);
    for (int j = 0; j < 25; ++j) {
      CHECK((kpca_forward(m, x.col(j)) - m.latent.row(j).transpose()).norm() < 1e-9);
      const Eigen::VectorXd back = kpca_backward(m, m.latent.row(j).transpose());
      CHECK(back == x.col(j));
    }
    // Training latents satisfy G_c L = L diag(lambda).
    const Eigen::MatrixXd gc = centered_gram(x, 0.1);
    const Eigen::MatrixXd lhs = gc * m.latent;
    const Eigen::MatrixXd rhs = m.latent * m.eigenvalues.head(3).asDiagonal();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8 * m.eigenvalues(0));
    // Zero mean per component.
    CHECK(m.latent.colwise().sum().cwiseAbs().maxCoeff() / 25.0 < 1e-8 * m.eigenvalues(0));
    // Duplicate of a training point maps to the same coordinate.
    const Eigen::VectorXd copy = x.col(7);
    CHECK((kpca_forward(m, copy) - kpca_forward(m, x.col(7))).norm() == 0.0);
  }

  TEST_CASE("backward weights are a partition of unity") {
    const Eigen::MatrixXd x = random_matrix(4, 30, 14);
    const KpcaModel m = fit_kpca(x, 0.2, ComponentSelector::fixed(2));
    RandomStream s(99, 0);
    for (int t = 0; t < 50; ++t) {
      const Eigen::Vector2d z(s.normal(), s.normal());
      const Eigen::VectorXd w = kpca_backward_weights(m, z);
      CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
      CHECK(w.minCoeff() >= 0.0);
      // Direct recomputation of the inverse-square weights.
      Eigen::VectorXd ref(30);
      for (int i = 0; i < 30; ++i) ref(i) = 1.0 / (m.latent.row(i).transpose() - Eigen::VectorXd(z)).squaredNorm();
      ref /= ref.sum();
      CHECK((w - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("equidistant pair far from the rest averages the two outputs") {
    Eigen::MatrixXd x(2, 3);
    x << 0.0, 1.0, 50.0,
         0.0, 1.0, 50.0;
    KpcaModel m = fit_kpca(x, 0.1, ComponentSelector::fixed(1));
    // Place latent points by hand: two close points and one distant.
    m.latent.resize(3, 1);
    m.latent << -1.0, 1.0, 1e6;
    m.latent_diameter = 1e6 + 1.0;
    const Eigen::VectorXd w = kpca_backward_weights(m, Eigen::VectorXd::Zero(1));
    CHECK(w(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(w(1) == doctest::Approx(0.5).epsilon(1e-9));
    const Eigen::VectorXd out = kpca_backward(m, Eigen::VectorXd::Zero(1));
    CHECK(out(0) == doctest::Approx(0.5).epsilon(1e-9));
  }

  TEST_CASE("degenerate inputs") {
    Eigen::MatrixXd x = random_matrix(3, 6, 15);
    x.col(5) = x.col(4);
    const KpcaModel m = fit_kpca(x, 0.1, ComponentSelector::fixed(1));
    CHECK(std::abs(m.eigenvalues(5)) <= 1e-10 * m.eigenvalues(0));
    // Very small beta: Gram tends to all ones and the centered Gram to zero.
    const Eigen::MatrixXd gc = centered_gram(x, 1e-14);
    CHECK(gc.cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(fit_kpca(x.leftCols(1), 0.1, ComponentSelector::fixed(1)), ConfigError);
    CHECK_THROWS_AS(fit_kpca(x, -1.0, ComponentSelector::fixed(1)), ConfigError);
  }

  TEST_CASE("spectrum is invariant under sample permutation") {
    const Eigen::MatrixXd x = random_matrix(4, 18, 16);
    std::vector<int> perm(18);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::rotate(perm.begin(), perm.begin() + 5, perm.end());
    Eigen::MatrixXd y(4, 18);
    for (int i = 0; i < 18; ++i) y.col(i) = x.col(perm[i]);
    const auto a = fit_kpca(x, 0.1, ComponentSelector::fixed(1)).eigenvalues;
    const auto b = fit_kpca(y, 0.1, ComponentSelector::fixed(1)).eigenvalues;
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9 * a(0));
  }

  TEST_CASE("uncentered Gram is positive semidefinite") {
    const Eigen::MatrixXd x = random_matrix(3, 20, 17);
    Eigen::MatrixXd g(20, 20);
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) g(i, j) = gaussian_kernel(x.col(i), x.col(j), 0.1);
    }
    const auto ev = oracle::jacobi_eigenvalues([&] {
      oracle::Dense d(20, 20);
      for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) d(i, j) = g(i, j);
      }
      return d;
    }());
    CHECK(ev.back() >= -1e-8 * ev.front());
  }
}

TEST_SUITE("energy") {
  TEST_CASE("fractions and selectors") {
    Eigen::Vector3d s(8.0, 1.0, 1.0);
    CHECK(energy_fraction(s, 1) == doctest::Approx(0.8));
    CHECK(energy_fraction(s, 3) == doctest::Approx(1.0));
    CHECK_THROWS_AS(energy_fraction(Eigen::Vector3d::Zero(), 1), ConfigError);
    CHECK_THROWS_AS(energy_fraction(s, 4), ConfigError);
  }

  TEST_CASE("model persistence round-trips") {
    const Eigen::MatrixXd x = random_matrix(4, 12, 18);
    for (const ReducedModel& model : {ReducedModel(fit_pca(x, ComponentSelector::fixed(2))),
                                      ReducedModel(fit_kpca(x, 0.1, ComponentSelector::fixed(2)))}) {
      const Container c = Container::from_bytes(to_container(model).to_bytes());
      const ReducedModel back = reduced_model_from_container(c);
      CHECK(back.index() == model.index());
      CHECK(latent_dim(back) == 2);
      CHECK(spectrum(back) == spectrum(model));
      const Eigen::Vector2d z(0.1, -0.2);
      CHECK(backward(back, z) == backward(model, z));
      CHECK(forward(back, x.col(3)) == forward(model, x.col(3)));
      CHECK(to_container(back).to_bytes() == to_container(model).to_bytes());
    }
  }

  TEST_CASE("batched backward equals one-at-a-time backward") {
    const Eigen::MatrixXd x = random_matrix(5, 20, 19);
    const ReducedModel model = fit_kpca(x, 0.1, ComponentSelector::fixed(2));
    const Eigen::MatrixXd z = random_matrix(2, 7, 20) * 0.1;
    const Eigen::MatrixXd many = backward_many(model, z);
    for (int j = 0; j < 7; ++j) CHECK((many.col(j) - backward(model, z.col(j))).norm() < 1e-13);
  }
}
