#include "nuq/srs.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include <fmt/format.h>

#include "nuq/error.hpp"

namespace nuq {

namespace {

double weighted_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  return std::sqrt(w.dot(v.cwiseAbs2()));
}

Eigen::VectorXd mode_values(const SectionalMesh& mesh, const Eigen::VectorXd& coeffs,
                            const Eigen::Ref<const Eigen::VectorXd>& coordinate) {
  Eigen::VectorXd out(coordinate.size());
  for (Eigen::Index k = 0; k < coordinate.size(); ++k) {
    out(k) = mesh.interpolate(coeffs, coordinate(k));
  }
  return out;
}

}  // namespace

SectionalSystem assemble_sectional_system(const SectionalMesh& mesh,
                                          const Eigen::Ref<const Eigen::VectorXd>& coordinate,
                                          const Eigen::Ref<const Eigen::VectorXd>& other_modes,
                                          const Eigen::Ref<const Eigen::VectorXd>& target,
                                          const Eigen::Ref<const Eigen::VectorXd>& weights) {
  const auto n = static_cast<Eigen::Index>(mesh.size());
  SectionalSystem sys{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index k = 0; k < coordinate.size(); ++k) {
    const auto s = mesh.locate(coordinate(k));
    const auto l = static_cast<Eigen::Index>(s.left);
    const double t = other_modes(k);
    const double wt2 = weights(k) * t * t;
    const double wtr = weights(k) * t * target(k);
    sys.matrix(l, l) += wt2 * s.w_left * s.w_left;
    sys.matrix(l, l + 1) += wt2 * s.w_left * s.w_right;
    sys.matrix(l + 1, l) += wt2 * s.w_left * s.w_right;
    sys.matrix(l + 1, l + 1) += wt2 * s.w_right * s.w_right;
    sys.rhs(l) += wtr * s.w_left;
    sys.rhs(l + 1) += wtr * s.w_right;
  }
  return sys;
}

Eigen::VectorXd solve_sectional_system(const SectionalSystem& system, const SectionalMesh& mesh,
                                       double lambda) {
  if (lambda < 0.0) throw ConfigError("sectional smoothing factor must be nonnegative");
  Eigen::MatrixXd lhs = system.matrix;
  if (lambda > 0.0) {
    const Eigen::MatrixXd g = mesh.gradient_operator();
    lhs.noalias() += lambda * (g.transpose() * g);
  } else {
    for (Eigen::Index m = 0; m < lhs.rows(); ++m) {
      if (!(lhs(m, m) > 0.0)) {
        throw NumericalError(fmt::format(
            "singular sectional system: node {} has no sample in its support; "
            "use a smoothing factor lambda > 0 or a coarser mesh",
            m));
      }
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("sectional system is not positive definite");
  }
  Eigen::VectorXd a = ldlt.solve(system.rhs);
  if (!a.allFinite()) {
    throw NumericalError(
        "singular sectional system; use a smoothing factor lambda > 0 or a coarser mesh");
  }
  return a;
}

SrsModel fit_srs(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values,
                 const SrsConfig& config) {
  const auto ns = inputs.rows();
  const auto nd = inputs.cols();
  if (ns < 1 || nd < 1) throw ConfigError("fit_srs: empty input matrix");
  if (values.size() != ns) throw ConfigError("fit_srs: value count does not match input rows");
  if (!values.allFinite() || !inputs.allFinite()) throw ConfigError("fit_srs: non-finite data");
  if (config.max_rank < 1 || config.max_alt_iters < 1) {
    throw ConfigError("fit_srs: max_rank and max_alt_iters must be positive");
  }

  SrsModel model;
  model.lambda_rel = config.lambda_rel;
  model.lambda_abs = config.lambda_abs;
  model.quadrature_weights = quadrature_weights(inputs, config.quadrature);
  for (Eigen::Index i = 0; i < nd; ++i) {
    model.meshes.push_back(SectionalMesh::uniform(inputs.col(i).minCoeff(),
                                                  inputs.col(i).maxCoeff(), config.nodes_per_dim,
                                                  config.margin));
  }
  auto& diag = model.diagnostics;
  if (static_cast<std::size_t>(ns) < static_cast<std::size_t>(nd) * config.nodes_per_dim) {
    diag.warnings.push_back(fmt::format("only {} samples for {} dimensions x {} nodes", ns, nd,
                                        config.nodes_per_dim));
  }

  const Eigen::VectorXd& w = model.quadrature_weights;
  std::vector<Eigen::MatrixXd> penalty(static_cast<std::size_t>(nd));
  std::vector<double> penalty_trace(static_cast<std::size_t>(nd));
  for (Eigen::Index i = 0; i < nd; ++i) {
    const Eigen::MatrixXd g = model.meshes[i].gradient_operator();
    penalty[i] = g.transpose() * g;
    penalty_trace[i] = penalty[i].trace();
  }

  Eigen::VectorXd residual = values;
  diag.residual_history.push_back(weighted_norm(residual, w));
  const double initial = diag.residual_history.front();
  double sigma_first = 0.0;

  for (std::size_t term = 0; term < config.max_rank; ++term) {
    std::vector<Eigen::VectorXd> modes(static_cast<std::size_t>(nd));
    Eigen::MatrixXd evals(ns, nd);  // f_i(h_i^k)
    for (Eigen::Index i = 0; i < nd; ++i) {
      modes[i] = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(model.meshes[i].size()));
      evals.col(i) = mode_values(model.meshes[i], modes[i], inputs.col(i));
    }

    std::vector<double> solve_res;
    std::vector<double> solve_obj;
    double sigma_prev = 0.0;
    bool collapsed = false;
    std::size_t sweep = 0;
    for (; sweep < config.max_alt_iters && !collapsed; ++sweep) {
      for (Eigen::Index g = 0; g < nd; ++g) {
        Eigen::VectorXd others = Eigen::VectorXd::Ones(ns);
        for (Eigen::Index i = 0; i < nd; ++i) {
          if (i == g) continue;
          const double norm = modes[i].norm();
          if (norm == 0.0) {
            collapsed = true;
            break;
          }
          modes[i] /= norm;
          evals.col(i) /= norm;
          others.array() *= evals.col(i).array();
        }
        if (collapsed) break;

        const auto sys = assemble_sectional_system(model.meshes[g], inputs.col(g), others,
                                                   residual, w);
        const double trace_m = sys.matrix.trace();
        if (!(trace_m > 0.0)) {
          collapsed = true;
          break;
        }
        const double lambda = std::isfinite(config.lambda_abs)
                                  ? config.lambda_abs
                                  : config.lambda_rel * trace_m / penalty_trace[g];
        modes[g] = solve_sectional_system(sys, model.meshes[g], lambda);
        evals.col(g) = mode_values(model.meshes[g], modes[g], inputs.col(g));

        const Eigen::VectorXd r = residual - evals.col(g).cwiseProduct(others);
        const double res = weighted_norm(r, w);
        solve_res.push_back(res);
        solve_obj.push_back(res * res + lambda * modes[g].dot(penalty[g] * modes[g]));
      }
      if (collapsed) break;
      double sigma = 1.0;
      for (const auto& m : modes) sigma *= m.norm();
      if (sweep > 0 && std::abs(sigma - sigma_prev) <= config.tol_alt * sigma) {
        ++sweep;
        break;
      }
      sigma_prev = sigma;
    }
    diag.sweeps.push_back(sweep);

    SrsTerm t;
    t.sigma = collapsed ? 0.0 : 1.0;
    if (!collapsed) {
      for (Eigen::Index i = 0; i < nd; ++i) {
        const double norm = modes[i].norm();
        t.sigma *= norm;
        if (norm > 0.0) {
          modes[i] /= norm;
          evals.col(i) /= norm;
        }
      }
    }
    if (!(t.sigma > 0.0) || !std::isfinite(t.sigma)) break;
    if (term == 0) sigma_first = t.sigma;

    Eigen::VectorXd contribution = Eigen::VectorXd::Constant(ns, t.sigma);
    for (Eigen::Index i = 0; i < nd; ++i) contribution.array() *= evals.col(i).array();
    residual -= contribution;
    t.modes = std::move(modes);
    model.terms.push_back(std::move(t));
    diag.solve_residuals.push_back(std::move(solve_res));
    diag.solve_objectives.push_back(std::move(solve_obj));
    diag.residual_history.push_back(weighted_norm(residual, w));

    if (model.terms.back().sigma < config.tol_greedy * sigma_first) break;
    if (diag.residual_history.back() <= 1e-15 * initial) break;
  }
  return model;
}

double eval_srs(const SrsModel& model, const Eigen::Ref<const Eigen::VectorXd>& h,
                std::size_t* clamped) {
  if (h.size() != static_cast<Eigen::Index>(model.nd())) {
    throw ConfigError(fmt::format("eval_srs: expected {} inputs, got {}", model.nd(), h.size()));
  }
  if (clamped) {
    for (std::size_t i = 0; i < model.nd(); ++i) {
      if (!model.meshes[i].contains(h(static_cast<Eigen::Index>(i)))) {
        ++*clamped;
        break;
      }
    }
  }
  double total = 0.0;
  for (const auto& t : model.terms) {
    double prod = t.sigma;
    for (std::size_t i = 0; i < model.nd(); ++i) {
      prod *= model.meshes[i].interpolate(t.modes[i], h(static_cast<Eigen::Index>(i)));
    }
    total += prod;
  }
  return total;
}

void write_srs(const SrsModel& model, Container& c, std::string_view prefix) {
  const std::string p(prefix);
  c.put_int(p + "nd", static_cast<std::int64_t>(model.nd()));
  c.put_int(p + "terms", static_cast<std::int64_t>(model.terms.size()));
  c.put_real(p + "lambda_rel", model.lambda_rel);
  c.put_real(p + "lambda_abs", model.lambda_abs);
  c.put_vector(p + "quadrature_weights", model.quadrature_weights);
  for (std::size_t i = 0; i < model.nd(); ++i) {
    const auto& nodes = model.meshes[i].nodes();
    c.put_vector(fmt::format("{}mesh.{}", p, i),
                 Eigen::Map<const Eigen::VectorXd>(nodes.data(),
                                                   static_cast<Eigen::Index>(nodes.size())));
  }
  Eigen::VectorXd sigmas(static_cast<Eigen::Index>(model.terms.size()));
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    sigmas(static_cast<Eigen::Index>(j)) = model.terms[j].sigma;
    for (std::size_t i = 0; i < model.nd(); ++i) {
      c.put_vector(fmt::format("{}term.{}.mode.{}", p, j, i), model.terms[j].modes[i]);
    }
  }
  c.put_vector(p + "sigma", sigmas);
  const auto& hist = model.diagnostics.residual_history;
  c.put_vector(p + "residual_history",
               Eigen::Map<const Eigen::VectorXd>(hist.data(),
                                                 static_cast<Eigen::Index>(hist.size())));
}

SrsModel read_srs(const Container& c, std::string_view prefix) {
  const std::string p(prefix);
  SrsModel model;
  const auto nd = static_cast<std::size_t>(c.get_int(p + "nd"));
  const auto nterms = static_cast<std::size_t>(c.get_int(p + "terms"));
  model.lambda_rel = c.get_real(p + "lambda_rel");
  model.lambda_abs = c.get_real(p + "lambda_abs");
  model.quadrature_weights = c.get_vector(p + "quadrature_weights");
  for (std::size_t i = 0; i < nd; ++i) {
    const Eigen::VectorXd nodes = c.get_vector(fmt::format("{}mesh.{}", p, i));
    model.meshes.emplace_back(std::vector<double>(nodes.data(), nodes.data() + nodes.size()));
  }
  const Eigen::VectorXd sigmas = c.get_vector(p + "sigma");
  for (std::size_t j = 0; j < nterms; ++j) {
    SrsTerm t;
    t.sigma = sigmas(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < nd; ++i) {
      t.modes.push_back(c.get_vector(fmt::format("{}term.{}.mode.{}", p, j, i)));
    }
    model.terms.push_back(std::move(t));
  }
  const Eigen::VectorXd hist = c.get_vector(p + "residual_history");
  model.diagnostics.residual_history.assign(hist.data(), hist.data() + hist.size());
  return model;
}

}  // namespace nuq
