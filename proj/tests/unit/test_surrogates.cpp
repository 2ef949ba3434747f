#include <doctest.h>

#include <cmath>

#include "nuq/error.hpp"
#include "nuq/kriging.hpp"
#include "nuq/mesh.hpp"
#include "nuq/prs.hpp"
#include "nuq/rng.hpp"
#include "nuq/srs.hpp"
#include "nuq/surrogate.hpp"
#include "oracles.hpp"

using namespace nuq;

namespace {

Eigen::MatrixXd uniform_points(Eigen::Index n, Eigen::Index nd, std::uint64_t seed, double lo = 0.0,
                               double hi = 1.0) {
  Eigen::MatrixXd h(n, nd);
  for (Eigen::Index i = 0; i < n; ++i) {
    RandomStream s(seed, static_cast<std::uint64_t>(i));
    for (Eigen::Index j = 0; j < nd; ++j) h(i, j) = lo + (hi - lo) * s.uniform();
  }
  return h;
}

template <class F>
Eigen::VectorXd apply(const Eigen::MatrixXd& h, F f) {
  Eigen::VectorXd y(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) y(i) = f(h.row(i).transpose());
  return y;
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("hat functions form a partition of unity and interpolate nodes") {
    const SectionalMesh mesh = SectionalMesh::uniform(0.0, 1.0, 6, 0.0);
    CHECK(mesh.size() == 6);
    CHECK(mesh.lower() == 0.0);
    CHECK(mesh.upper() == 1.0);
    for (double t = 0.0; t <= 1.0; t += 0.013) {
      const auto s = mesh.locate(t);
      CHECK(s.w_left + s.w_right == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(s.w_left >= 0.0);
      CHECK(s.w_right >= 0.0);
      const double ref = oracle::hat(mesh.nodes(), s.left, t);
      CHECK(s.w_left == doctest::Approx(ref).epsilon(1e-12));
    }
    Eigen::VectorXd c(6);
    c << 3, 1, 4, 1, 5, 9;
    for (int m = 0; m < 6; ++m) CHECK(mesh.interpolate(c, mesh.nodes()[m]) == c(m));
    CHECK(mesh.interpolate(c, -5.0) == 3.0);
    CHECK(mesh.interpolate(c, 5.0) == 9.0);
  }

  TEST_CASE("margins and degenerate ranges") {
    const SectionalMesh m = SectionalMesh::uniform(1.0, 3.0, 5, 0.05);
    CHECK(m.lower() == doctest::Approx(0.9));
    CHECK(m.upper() == doctest::Approx(3.1));
    const SectionalMesh flat = SectionalMesh::uniform(2.0, 2.0, 3, 0.05);
    CHECK(flat.lower() < 2.0);
    CHECK(flat.upper() > 2.0);
    CHECK_THROWS_AS(SectionalMesh::uniform(0.0, 1.0, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(SectionalMesh(std::vector<double>{0.0, 0.0, 1.0}), ConfigError);
  }

  TEST_CASE("gradient operator differentiates linear functions exactly") {
    const SectionalMesh m(std::vector<double>{0.0, 0.5, 2.0, 2.5});
    Eigen::VectorXd c(4);
    for (int i = 0; i < 4; ++i) c(i) = 3.0 * m.nodes()[i] - 1.0;
    const Eigen::VectorXd g = m.gradient_operator() * c;
    for (int i = 0; i < 3; ++i) CHECK(g(i) == doctest::Approx(3.0));
  }

  TEST_CASE("quadrature weights") {
    const Eigen::MatrixXd h = uniform_points(40, 2, 3);
    const Eigen::VectorXd u = quadrature_weights(h, QuadratureMode::Uniform);
    CHECK(u.sum() == doctest::Approx(1.0));
    CHECK(u.minCoeff() == u.maxCoeff());
    Eigen::MatrixXd line(4, 1);
    line << 0.0, 3.0, 1.0, 2.0;
    const Eigen::VectorXd v = quadrature_weights(line, QuadratureMode::Voronoi);
    // Cells: [0, 0.5], [2.5, 3], [0.5, 1.5], [1.5, 2.5] over a length-3 domain.
    CHECK(v(0) == doctest::Approx(0.5 / 3.0));
    CHECK(v(1) == doctest::Approx(0.5 / 3.0));
    CHECK(v(2) == doctest::Approx(1.0 / 3.0));
    CHECK(v(3) == doctest::Approx(1.0 / 3.0));
    const Eigen::VectorXd v2 = quadrature_weights(h, QuadratureMode::Voronoi, 256);
    CHECK(v2.sum() == doctest::Approx(1.0));
    CHECK(v2.minCoeff() >= 0.0);
  }
}

TEST_SUITE("srs") {
  TEST_CASE("sectional system matches dense least squares") {
    const Eigen::MatrixXd h = uniform_points(200, 2, 5);
    const Eigen::VectorXd y = apply(h, [](const Eigen::VectorXd& p) { return std::sin(3 * p(0)) * (1 + p(1)) + p(1); });
    const SectionalMesh mesh = SectionalMesh::uniform(0.0, 1.0, 8, 0.05);
    const SectionalMesh other = SectionalMesh::uniform(0.0, 1.0, 8, 0.05);
    Eigen::VectorXd other_mode(8);
    for (int m = 0; m < 8; ++m) other_mode(m) = 1.0 + 0.5 * other.nodes()[m];
    Eigen::VectorXd t(200);
    for (int k = 0; k < 200; ++k) t(k) = other.interpolate(other_mode, h(k, 1));
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(200, 1.0 / 200.0);
    const auto sys = assemble_sectional_system(mesh, h.col(0), t, y, w);
    const Eigen::VectorXd a = solve_sectional_system(sys, mesh, 0.0);

    // Dense design: column m holds Psi_m(h1) * f2(h2).
    oracle::Dense design(200, 8);
    std::vector<double> yy(200);
    std::vector<double> ww(200, 1.0 / 200.0);
    for (std::size_t k = 0; k < 200; ++k) {
      yy[k] = y(static_cast<Eigen::Index>(k));
      for (std::size_t m = 0; m < 8; ++m) {
        design(k, m) = oracle::hat(mesh.nodes(), m, h(static_cast<Eigen::Index>(k), 0)) * t(static_cast<Eigen::Index>(k));
      }
    }
    const auto ref = oracle::normal_equations(design, yy, ww);
    for (int m = 0; m < 8; ++m) CHECK(std::abs(a(m) - ref[m]) <= 1e-6 * (1.0 + std::abs(ref[m])));
  }

  TEST_CASE("rank-one target recovered within interpolation error") {
    auto g1 = [](double x) { return 1.0 + std::sin(2.0 * x); };
    auto g2 = [](double x) { return std::exp(-x) + 0.5; };
    const Eigen::MatrixXd h = uniform_points(3000, 2, 6);
    const Eigen::VectorXd y = apply(h, [&](const Eigen::VectorXd& p) { return g1(p(0)) * g2(p(1)); });
    SrsConfig cfg;
    cfg.nodes_per_dim = 15;
    const SrsModel m = fit_srs(h, y, cfg);
    REQUIRE(!m.terms.empty());
    const Eigen::MatrixXd test = uniform_points(2000, 2, 7, 0.02, 0.98);
    double srs_err = 0.0;
    double fe_err = 0.0;
    for (Eigen::Index k = 0; k < test.rows(); ++k) {
      const double truth = g1(test(k, 0)) * g2(test(k, 1));
      const double fe = oracle::interpolate(m.meshes[0].nodes(), g1, test(k, 0)) *
                        oracle::interpolate(m.meshes[1].nodes(), g2, test(k, 1));
      srs_err += std::pow(eval_srs(m, test.row(k).transpose()) - truth, 2);
      fe_err += std::pow(fe - truth, 2);
    }
    srs_err = std::sqrt(srs_err / 2000.0);
    fe_err = std::sqrt(fe_err / 2000.0);
    MESSAGE("srs rms " << srs_err << " fe rms " << fe_err);
    CHECK(srs_err <= fe_err);
  }

  TEST_CASE("greedy residual is nonincreasing on a nonseparable target") {
    const Eigen::MatrixXd h = uniform_points(600, 2, 8);
    const Eigen::VectorXd y = apply(h, [](const Eigen::VectorXd& p) { return std::sin(3 * p(0) + 2 * p(1)) + p(0) * p(1) * p(1); });
    SrsConfig cfg;
    cfg.max_rank = 8;
    cfg.tol_greedy = 0.0;
    const SrsModel m = fit_srs(h, y, cfg);
    const auto& r = m.diagnostics.residual_history;
    REQUIRE(m.terms.size() >= 5);
    for (std::size_t j = 1; j < r.size(); ++j) CHECK(r[j] <= r[j - 1]);
    for (const auto& t : m.terms) {
      CHECK(t.sigma > 0.0);
      for (const auto& mode : t.modes) CHECK(mode.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // The fitted surface evaluates to the training data minus the residual.
    double fit_res = 0.0;
    for (Eigen::Index k = 0; k < h.rows(); ++k) fit_res += std::pow(y(k) - eval_srs(m, h.row(k).transpose()), 2);
    CHECK(std::sqrt(fit_res / 600.0) == doctest::Approx(r.back()).epsilon(1e-9));
  }

  TEST_CASE("unsupported node without smoothing is a numerical error") {
    Eigen::MatrixXd h(6, 1);
    h << 0.0, 0.05, 0.1, 0.9, 0.95, 1.0;
    const Eigen::VectorXd y = h.col(0);
    SrsConfig cfg;
    cfg.nodes_per_dim = 10;
    cfg.margin = 0.0;
    cfg.lambda_abs = 0.0;
    CHECK_THROWS_AS(fit_srs(h, y, cfg), NumericalError);
    cfg.lambda_abs = std::numeric_limits<double>::quiet_NaN();
    CHECK_NOTHROW(fit_srs(h, y, cfg));
  }

  TEST_CASE("zero target gives an empty expansion") {
    const Eigen::MatrixXd h = uniform_points(30, 2, 9);
    const SrsModel m = fit_srs(h, Eigen::VectorXd::Zero(30));
    CHECK(m.terms.empty());
    CHECK(eval_srs(m, Eigen::Vector2d(0.5, 0.5)) == 0.0);
  }

  TEST_CASE("clamped queries are counted") {
    const Eigen::MatrixXd h = uniform_points(50, 2, 10);
    const SrsModel m = fit_srs(h, apply(h, [](const Eigen::VectorXd& p) { return p.sum(); }));
    std::size_t clamped = 0;
    eval_srs(m, Eigen::Vector2d(0.5, 0.5), &clamped);
    CHECK(clamped == 0);
    const double edge = eval_srs(m, Eigen::Vector2d(m.meshes[0].upper(), 0.5), &clamped);
    CHECK(eval_srs(m, Eigen::Vector2d(10.0, 0.5), &clamped) == edge);
    CHECK(clamped == 1);
  }
}

TEST_SUITE("ok") {
  TEST_CASE("spherical variogram") {
    CHECK(spherical_variogram(0.0, 0.1, 1.0, 2.0) == 0.0);
    CHECK(spherical_variogram(2.0, 0.1, 1.0, 2.0) == doctest::Approx(1.1));
    CHECK(spherical_variogram(5.0, 0.1, 1.0, 2.0) == doctest::Approx(1.1));
    CHECK(spherical_variogram(1.0, 0.0, 1.0, 2.0) == doctest::Approx(0.6875));
    CHECK_THROWS_AS(spherical_variogram(1.0, 0.0, 1.0, 0.0), ConfigError);
  }

  TEST_CASE("interpolation, weight sum and bordered solve") {
    const Eigen::MatrixXd h = uniform_points(30, 2, 11);
    const Eigen::VectorXd y = apply(h, [](const Eigen::VectorXd& p) { return std::cos(4 * p(0)) + p(1) * p(1); });
    const OkModel m = fit_ok(h, y);
    const double range = y.maxCoeff() - y.minCoeff();
    for (Eigen::Index i = 0; i < 30; ++i) CHECK(std::abs(eval_ok(m, h.row(i).transpose()) - y(i)) <= 1e-8 * range);

    const Eigen::MatrixXd a = ok_system_matrix(m.inputs, m.variogram);
    oracle::Dense dense(31, 31);
    for (std::size_t i = 0; i < 31; ++i) {
      for (std::size_t j = 0; j < 31; ++j) dense(i, j) = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const Eigen::MatrixXd queries = uniform_points(20, 2, 12);
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
      const Eigen::VectorXd hq = queries.row(q).transpose();
      const OkWeights w = ok_weights(m, hq);
      CHECK(std::abs(w.weights.sum() - 1.0) <= 1e-10);
      std::vector<double> rhs(31, 1.0);
      for (std::size_t i = 0; i < 30; ++i) rhs[i] = m.variogram((m.inputs.row(static_cast<Eigen::Index>(i)).transpose() - hq).norm());
      const auto ref = oracle::gauss_solve(dense, rhs);
      for (std::size_t i = 0; i < 30; ++i) CHECK(std::abs(w.weights(static_cast<Eigen::Index>(i)) - ref[i]) <= 1e-8);
      CHECK(eval_ok(m, hq) == doctest::Approx(w.weights.dot(m.values)).epsilon(1e-9));
    }
  }

  TEST_CASE("explicit variogram and duplicates") {
    Eigen::MatrixXd h(4, 1);
    h << 0.0, 1.0, 1.0, 2.0;
    Eigen::VectorXd y(4);
    y << 1.0, 2.0, 2.0, 0.0;
    OkConfig cfg;
    cfg.auto_variogram = false;
    cfg.variogram = Variogram{0.0, 1.0, 3.0};
    const OkModel m = fit_ok(h, y, cfg);
    CHECK(m.inputs.rows() == 3);
    CHECK(m.warnings.size() == 1);
    CHECK(eval_ok(m, Eigen::VectorXd::Constant(1, 1.0)) == doctest::Approx(2.0));
    y(2) = 5.0;
    CHECK_THROWS_AS(fit_ok(h, y, cfg), ConfigError);
    cfg.variogram.range = 0.0;
    CHECK_THROWS_AS(fit_ok(h.topRows(2), y.head(2), cfg), ConfigError);
  }

  TEST_CASE("constant data predicts the constant") {
    const Eigen::MatrixXd h = uniform_points(12, 2, 13);
    const OkModel m = fit_ok(h, Eigen::VectorXd::Constant(12, 4.5));
    CHECK(eval_ok(m, Eigen::Vector2d(0.3, 0.7)) == doctest::Approx(4.5).epsilon(1e-10));
  }
}

TEST_SUITE("prs") {
  TEST_CASE("monomial layout") {
    CHECK(prs_coefficient_count(1) == 3);
    CHECK(prs_coefficient_count(3) == 10);
    const auto names = prs_monomial_names(2);
    REQUIRE(names.size() == 6);
    const Eigen::VectorXd row = prs_monomials(Eigen::Vector2d(2.0, 3.0));
    CHECK(row(0) == 1.0);
    CHECK(row(row.size() - 1) == 6.0);
  }

  TEST_CASE("in-class quadratic recovered exactly") {
    const Eigen::MatrixXd h = uniform_points(40, 3, 14, -1.0, 2.0);
    auto f = [](const Eigen::VectorXd& p) {
      return 1.5 - 2.0 * p(0) + 0.5 * p(1) + 3.0 * p(2) + 0.25 * p(0) * p(0) - p(1) * p(1) +
             0.7 * p(2) * p(2) + 1.1 * p(0) * p(1) - 0.4 * p(0) * p(2) + 0.9 * p(1) * p(2);
    };
    const PrsModel m = fit_prs(h, apply(h, f));
    const Eigen::MatrixXd test = uniform_points(50, 3, 15, -2.0, 3.0);
    for (Eigen::Index k = 0; k < test.rows(); ++k) {
      const double truth = f(test.row(k).transpose());
      CHECK(std::abs(eval_prs(m, test.row(k).transpose()) - truth) <= 1e-8 * (1.0 + std::abs(truth)));
    }
  }

  TEST_CASE("coefficients match the normal-equation oracle") {
    const Eigen::MatrixXd h = uniform_points(60, 2, 16);
    const Eigen::VectorXd y = apply(h, [](const Eigen::VectorXd& p) { return std::exp(p(0)) * std::sin(2 * p(1)); });
    const PrsModel m = fit_prs(h, y);
    const Eigen::MatrixXd a = prs_design_matrix(h);
    oracle::Dense dense(60, 6);
    std::vector<double> yy(60);
    for (std::size_t k = 0; k < 60; ++k) {
      yy[k] = y(static_cast<Eigen::Index>(k));
      for (std::size_t j = 0; j < 6; ++j) dense(k, j) = a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }
    const auto ref = oracle::normal_equations(dense, yy);
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(m.coefficients(static_cast<Eigen::Index>(j)) - ref[j]) <= 1e-6 * (1.0 + std::abs(ref[j])));
  }

  TEST_CASE("too few samples and rank deficiency") {
    const Eigen::MatrixXd h = uniform_points(5, 2, 17);
    CHECK_THROWS_AS(fit_prs(h, Eigen::VectorXd::Zero(5)), ConfigError);
    Eigen::MatrixXd line = uniform_points(20, 2, 18);
    line.col(1) = 2.0 * line.col(0);
    CHECK_THROWS_AS(fit_prs(line, Eigen::VectorXd::Zero(20)), NumericalError);
  }
}

TEST_SUITE("bundle") {
  TEST_CASE("kinds parse and round-trip through the container") {
    CHECK(parse_surrogate_kind("srs") == SurrogateKind::Srs);
    CHECK(parse_surrogate_kind("ok") == SurrogateKind::Ok);
    CHECK_THROWS_AS(parse_surrogate_kind("gp"), ConfigError);
    const Eigen::MatrixXd h = uniform_points(40, 3, 19);
    Eigen::MatrixXd latent(40, 2);
    latent.col(0) = apply(h, [](const Eigen::VectorXd& p) { return p(1) - p(2) * p(2); });
    latent.col(1) = apply(h, [](const Eigen::VectorXd& p) { return p(1) * p(2); });
    for (const auto kind : {SurrogateKind::Srs, SurrogateKind::Ok, SurrogateKind::Prs}) {
      const SurrogateBundle b = fit_bundle(kind, h, latent, {1, 2}, {});
      CHECK(b.latent_dim() == 2);
      const SurrogateBundle back = bundle_from_container(Container::from_bytes(to_container(b).to_bytes()));
      CHECK(back.kind == kind);
      CHECK(back.active_inputs == b.active_inputs);
      const Eigen::Vector3d q(0.9, 0.4, 0.6);
      CHECK(back.evaluate(q, nullptr) == b.evaluate(q, nullptr));
      // The inactive first input is ignored.
      CHECK(b.evaluate(Eigen::Vector3d(-50.0, 0.4, 0.6), nullptr) == b.evaluate(q, nullptr));
      CHECK(!diagnostics_report(b.components[0]).empty());
    }
    CHECK_THROWS_AS(fit_bundle(SurrogateKind::Prs, h, latent, {}, {}), ConfigError);
    CHECK_THROWS_AS(fit_bundle(SurrogateKind::Prs, h, latent, {5}, {}), ConfigError);
  }
}
