#include <doctest.h>

#include <cmath>
#include <limits>

#include "nuq/error.hpp"
#include "nuq/rng.hpp"
#include "nuq/uq.hpp"
#include "oracles.hpp"

using namespace nuq;

namespace {

Eigen::VectorXd normals(Eigen::Index n, std::uint64_t seed) {
  Eigen::VectorXd v(n);
  RandomStream s(seed, 0);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = s.normal();
  return v;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Histogram make_hist(std::initializer_list<double> f, double lo = 0.0, double hi = 1.0) {
  Histogram h = uniform_histogram(lo, hi, f.size());
  Eigen::Index i = 0;
  for (const double x : f) h.freqs(i++) = x;
  return h;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("summary statistics") {
    Eigen::VectorXd v(5);
    v << 1, 2, 3, 4, 5;
    const auto s = summary_stats(v);
    CHECK(s.mean == 3.0);
    CHECK(s.variance == doctest::Approx(2.5));
    CHECK(s.std == doctest::Approx(std::sqrt(2.5)));
    CHECK(s.n == 5);
    CHECK(summary_stats(Eigen::VectorXd::Constant(10, 7.0)).variance == 0.0);
    CHECK_THROWS_AS(summary_stats(Eigen::VectorXd::Ones(1)), ConfigError);
  }
}

TEST_SUITE("histogram") {
  TEST_CASE("bin edges") {
    CHECK(bin_index(0.0, 0.0, 1.0, 4) == 0);
    CHECK(bin_index(0.25, 0.0, 1.0, 4) == 1);
    CHECK(bin_index(1.0, 0.0, 1.0, 4) == 3);
    CHECK(bin_index(-3.0, 0.0, 1.0, 4) == 0);
    CHECK(bin_index(9.0, 0.0, 1.0, 4) == 3);
  }

  TEST_CASE("frequencies match brute-force counting") {
    const Eigen::VectorXd v = normals(100000, 21);
    const Histogram h = build_histogram(v, 40);
    validate(h);
    CHECK(h.lo == v.minCoeff());
    CHECK(h.hi == v.maxCoeff());
    CHECK(h.sample_count == 100000);
    const auto ref = oracle::count_histogram(to_std(v), h.lo, h.hi, 40);
    for (int b = 0; b < 40; ++b) CHECK(h.freqs(b) == doctest::Approx(ref[b]).epsilon(1e-12));
  }

  TEST_CASE("explicit domain clamps and counts outliers") {
    Eigen::VectorXd v(4);
    v << -1.0, 0.1, 0.6, 2.0;
    const Histogram h = build_histogram(v, 2, std::pair{0.0, 1.0});
    CHECK(h.out_of_range == 2);
    CHECK(h.freqs(0) == 0.5);
    CHECK(h.freqs(1) == 0.5);
  }

  TEST_CASE("samples without spread") {
    const Histogram h = build_histogram(Eigen::VectorXd::Constant(8, 3.0), 10);
    validate(h);
    CHECK(h.lo < 3.0);
    CHECK(h.hi > 3.0);
    CHECK(h.freqs.maxCoeff() == 1.0);
  }

  TEST_CASE("rebinning conserves mass") {
    const Histogram h = make_hist({0.1, 0.2, 0.3, 0.4});
    const Histogram r = rebin(h, -0.5, 1.5, 7);
    CHECK(r.freqs.sum() == doctest::Approx(1.0).epsilon(1e-14));
    const Histogram same = rebin(h, 0.0, 1.0, 4);
    CHECK((same.freqs - h.freqs).cwiseAbs().maxCoeff() < 1e-15);
    const Histogram halves = rebin(h, 0.0, 1.0, 8);
    CHECK(halves.freqs(0) == doctest::Approx(0.05));
    CHECK(halves.freqs(7) == doctest::Approx(0.2));
  }

  TEST_CASE("validation") {
    Histogram h = make_hist({0.5, 0.6});
    CHECK_THROWS_AS(validate(h), ConfigError);
    h = make_hist({1.5, -0.5});
    CHECK_THROWS_AS(validate(h), ConfigError);
    h = make_hist({0.5, 0.5});
    h.hi = h.lo;
    CHECK_THROWS_AS(validate(h), ConfigError);
  }

  TEST_CASE("text round-trip") {
    const Histogram h = build_histogram(normals(1000, 22), 13);
    const Histogram back = histogram_from_text(histogram_to_text(h));
    CHECK(back.lo == h.lo);
    CHECK(back.hi == h.hi);
    CHECK(back.n_bins == h.n_bins);
    CHECK(back.sample_count == h.sample_count);
    CHECK(back.freqs == h.freqs);
    CHECK(histogram_to_text(back) == histogram_to_text(h));
    CHECK_THROWS_AS(histogram_from_text("# nuq histogram\n0.5 1\n"), IoError);
  }
}

TEST_SUITE("kl") {
  TEST_CASE("identity and nonnegativity") {
    RandomStream s(23, 0);
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = 2 + static_cast<std::size_t>(s.uniform() * 30);
      Histogram p = uniform_histogram(0.0, 1.0, n);
      Histogram q = uniform_histogram(-0.5 + s.uniform(), 1.0 + s.uniform(), n);
      for (std::size_t i = 0; i < n; ++i) {
        p.freqs(static_cast<Eigen::Index>(i)) = s.uniform() < 0.2 ? 0.0 : s.uniform();
        q.freqs(static_cast<Eigen::Index>(i)) = s.uniform();
      }
      p.freqs(0) += 1e-3;
      p.freqs /= p.freqs.sum();
      q.freqs /= q.freqs.sum();
      p.sample_count = 500;
      q.sample_count = 300;
      CHECK(kl_divergence(p, p) == 0.0);
      CHECK(kl_divergence(p, q) >= 0.0);
    }
  }

  TEST_CASE("two-bin hand case") {
    const Histogram p = make_hist({1.0, 0.0});
    const Histogram q = make_hist({0.5, 0.5});
    const double d = kl_divergence(p, q, KlOptions{false});
    CHECK(std::abs(d - std::log(2.0)) <= 1e-12);
    CHECK(std::isinf(kl_divergence(q, p, KlOptions{false})));
  }

  TEST_CASE("smoothing matches the direct formula") {
    Histogram p = make_hist({0.7, 0.3, 0.0, 0.0});
    Histogram q = make_hist({0.1, 0.2, 0.3, 0.4});
    p.sample_count = 10;
    q.sample_count = 20;
    const double eps = 1.0 / (20.0 * 4.0);
    const double ref = oracle::kl_direct(to_std(p.freqs), to_std(q.freqs), eps);
    CHECK(kl_divergence(p, q) == doctest::Approx(ref).epsilon(1e-13));
    CHECK(std::isfinite(kl_divergence(q, p)));
  }

  TEST_CASE("reference divergence equals divergence to uniform") {
    RandomStream s(24, 0);
    for (int t = 0; t < 100; ++t) {
      Histogram p = uniform_histogram(-1.0, 2.0, 25);
      for (int i = 0; i < 25; ++i) p.freqs(i) = s.uniform() < 0.3 ? 0.0 : s.uniform();
      p.freqs(3) += 0.1;
      p.freqs /= p.freqs.sum();
      const Histogram u = uniform_histogram(-1.0, 2.0, 25);
      CHECK(std::abs(kl_reference(p) - kl_divergence(p, u, KlOptions{false})) <= 1e-12);
    }
    CHECK(kl_reference(uniform_histogram(0.0, 1.0, 10)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(kl_reference(make_hist({1.0, 0.0, 0.0, 0.0})) == doctest::Approx(std::log(4.0)));
  }

  TEST_CASE("different domains are compared on their union") {
    const Histogram p = make_hist({1.0}, 0.0, 1.0);
    const Histogram q = make_hist({0.5, 0.5}, 0.0, 2.0);
    // On [0, 2] with two bins: p = (1, 0) and q = (0.5, 0.5).
    CHECK(kl_divergence(p, q, KlOptions{false}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
}

TEST_SUITE("spearman") {
  TEST_CASE("hand examples") {
    Eigen::VectorXd u(5);
    u << 1, 2, 3, 4, 5;
    Eigen::VectorXd v(5);
    v << 10, 20, 30, 40, 50;
    CHECK(spearman(u, v) == doctest::Approx(1.0));
    CHECK(spearman(u, -v) == doctest::Approx(-1.0));
    Eigen::VectorXd t(4);
    t << 3, 1, 3, 2;
    const Eigen::VectorXd r = average_ranks(t);
    CHECK(r(0) == 3.5);
    CHECK(r(1) == 1.0);
    CHECK(r(2) == 3.5);
    CHECK(r(3) == 2.0);
    CHECK_THROWS_AS(spearman(u, Eigen::VectorXd::Ones(5)), ConfigError);
    CHECK_THROWS_AS(spearman(u.head(2), v.head(2)), ConfigError);
    CHECK_THROWS_AS(spearman(u, v.head(4)), ConfigError);
  }

  TEST_CASE("matches the naive oracle and is rank invariant") {
    Eigen::VectorXd u = normals(300, 25);
    Eigen::VectorXd v = u + 0.8 * normals(300, 26);
    for (int i = 0; i < 300; i += 7) v(i) = std::round(v(i));
    const double rho = spearman(u, v);
    CHECK(rho == doctest::Approx(oracle::spearman_naive(to_std(u), to_std(v))).epsilon(1e-12));
    const Eigen::VectorXd monotone = u.array().exp() * 3.0 + 1.0;
    CHECK(spearman(monotone, v) == doctest::Approx(rho).epsilon(1e-13));
    CHECK(spearman(v, u) == doctest::Approx(rho).epsilon(1e-13));
    CHECK(std::abs(rho) <= 1.0);
  }

  TEST_CASE("screening keeps correlated inputs") {
    Eigen::MatrixXd h(400, 3);
    h.col(0) = normals(400, 27);
    h.col(1) = normals(400, 28);
    h.col(2) = normals(400, 29);
    const Eigen::VectorXd latent = -2.0 * h.col(2) + 0.5 * h.col(1);
    const ScreeningResult r = screen_inputs(latent, h);
    CHECK(r.coefficients.size() == 3);
    CHECK(std::abs(r.coefficients[0]) < 0.1);
    CHECK(r.coefficients[2] < -0.8);
    CHECK(r.kept_indices() == std::vector<std::size_t>{1, 2});
    CHECK_THROWS_AS(screen_inputs(latent.head(5), h), ConfigError);
  }
}

TEST_SUITE("propagation") {
  TEST_CASE("constant latent maps to one output") {
    Eigen::MatrixXd x(3, 4);
    x << 1, 2, 3, 4,
         1, 2, 3, 4,
         1, 2, 3, 4;
    const ReducedModel reduced = fit_pca(x, ComponentSelector::fixed(1));
    Eigen::MatrixXd h(12, 2);
    h.setRandom();
    Eigen::MatrixXd latent(12, 1);
    latent.setConstant(0.0);
    // A PRS fitted to zeros evaluates to zero everywhere.
    Eigen::MatrixXd design(12, 2);
    for (int i = 0; i < 12; ++i) design.row(i) << i * 0.1, std::sin(i);
    const SurrogateBundle b = fit_bundle(SurrogateKind::Prs, design, latent, {0, 1}, {});
    const auto r = mc_propagate(b, reduced, [](const auto& v) { return qoi_average(v); }, h);
    CHECK(r.qoi.size() == 12);
    CHECK((r.qoi.array() - 2.5).abs().maxCoeff() < 1e-12);
  }

  TEST_CASE("sampling overload is reproducible and matches explicit rows") {
    Eigen::MatrixXd x(2, 20);
    for (int i = 0; i < 20; ++i) x.col(i) << i, i * i * 0.1;
    const ReducedModel reduced = fit_kpca(x, 0.1, ComponentSelector::fixed(1));
    const InputDistribution dist = default_distribution();
    const Eigen::MatrixXd h = sample_inputs(dist, 20, 3);
    const Eigen::MatrixXd lat = training_latent(reduced, x);
    const SurrogateBundle b = fit_bundle(SurrogateKind::Prs, h, lat, {0, 1, 2}, {});
    const QoiFunction q = [](const auto& v) { return v(1); };
    const auto a1 = mc_propagate(b, reduced, q, dist, 600, 9);
    const auto a2 = mc_propagate(b, reduced, q, dist, 600, 9);
    const auto a3 = mc_propagate(b, reduced, q, sample_inputs(dist, 600, 9));
    CHECK(a1.qoi == a2.qoi);
    CHECK(a1.qoi == a3.qoi);
    CHECK_THROWS_AS(mc_propagate(b, reduced, q, dist, 0, 9), ConfigError);
  }
}

TEST_SUITE("modes") {
  TEST_CASE("two separated bumps") {
    Eigen::VectorXd v(10000);
    RandomStream s(30, 0);
    for (int i = 0; i < 10000; ++i) v(i) = i < 2000 ? -3.0 + 0.3 * s.normal() : 2.0 + 0.5 * s.normal();
    const ModeSplit m = find_mode_split(v);
    CHECK(m.bimodal);
    CHECK(m.split > -2.0);
    CHECK(m.split < 1.0);
    CHECK(m.minor_mass() == doctest::Approx(0.2).epsilon(0.01));
    CHECK(m.mass_below + m.mass_above == doctest::Approx(1.0));
    CHECK(mass_below(v, m.split) == doctest::Approx(m.mass_below));
  }

  TEST_CASE("a single gaussian is unimodal") {
    const ModeSplit m = find_mode_split(normals(50000, 31));
    CHECK(!m.bimodal);
    CHECK(m.minor_mass() == 0.0);
  }
}
