#include "nuq/surrogate.hpp"

#include <sstream>
#include <type_traits>

#include <fmt/format.h>

#include "nuq/error.hpp"

namespace nuq {

SurrogateKind parse_surrogate_kind(std::string_view name) {
  if (name == "srs") return SurrogateKind::Srs;
  if (name == "ok") return SurrogateKind::Ok;
  if (name == "prs") return SurrogateKind::Prs;
  throw ConfigError("unknown surrogate '" + std::string(name) + "' (expected srs, ok or prs)");
}

std::string_view to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::Srs:
      return "srs";
    case SurrogateKind::Ok:
      return "ok";
    case SurrogateKind::Prs:
      return "prs";
  }
  return "?";
}

SurrogateKind kind_of(const Surrogate& s) { return static_cast<SurrogateKind>(s.index()); }

double evaluate(const Surrogate& s, const Eigen::Ref<const Eigen::VectorXd>& h,
                std::size_t* clamped) {
  switch (kind_of(s)) {
    case SurrogateKind::Srs:
      return eval_srs(std::get<SrsModel>(s), h, clamped);
    case SurrogateKind::Ok:
      return eval_ok(std::get<OkModel>(s), h);
    case SurrogateKind::Prs:
      return eval_prs(std::get<PrsModel>(s), h);
  }
  return 0.0;
}

Surrogate fit_surrogate(SurrogateKind kind, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& values, const SurrogateOptions& options) {
  switch (kind) {
    case SurrogateKind::Srs:
      return fit_srs(inputs, values, options.srs);
    case SurrogateKind::Ok:
      return fit_ok(inputs, values, options.ok);
    case SurrogateKind::Prs:
      return fit_prs(inputs, values);
  }
  throw ConfigError("unknown surrogate kind");
}

namespace {

template <class Seq>
std::string join(const Seq& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ' ';
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
      out += fmt::format("{:.17g}", v);
    } else {
      out += fmt::format("{}", v);
    }
  }
  return out;
}

}  // namespace

std::string diagnostics_report(const Surrogate& s) {
  std::ostringstream out;
  out << "kind = " << to_string(kind_of(s)) << '\n';
  if (const auto* srs = std::get_if<SrsModel>(&s)) {
    const auto& d = srs->diagnostics;
    out << "terms = " << srs->terms.size() << '\n';
    out << "residual_history = " << join(d.residual_history) << '\n';
    bool monotone = true;
    for (std::size_t i = 1; i < d.residual_history.size(); ++i) {
      monotone = monotone && d.residual_history[i] <= d.residual_history[i - 1];
    }
    out << "residual_nonincreasing = " << (monotone ? "true" : "false") << '\n';
    std::vector<double> sigmas;
    for (const auto& t : srs->terms) sigmas.push_back(t.sigma);
    out << "sigma = " << join(sigmas) << '\n';
    out << "sweeps = " << join(d.sweeps) << '\n';
    out << fmt::format("lambda_rel = {:.17g}\nlambda_abs = {:.17g}\n", srs->lambda_rel,
                       srs->lambda_abs);
    for (std::size_t i = 0; i < srs->meshes.size(); ++i) {
      out << fmt::format("mesh.{} = {} nodes on [{:.17g}, {:.17g}]\n", i, srs->meshes[i].size(),
                         srs->meshes[i].lower(), srs->meshes[i].upper());
    }
    for (const auto& w : d.warnings) out << "warning = " << w << '\n';
  } else if (const auto* ok = std::get_if<OkModel>(&s)) {
    out << fmt::format("points = {}\nnugget = {:.17g}\npartial_sill = {:.17g}\nrange = {:.17g}\n",
                       ok->inputs.rows(), ok->variogram.nugget, ok->variogram.partial_sill,
                       ok->variogram.range);
    out << "empirical_lags = " << join(ok->empirical.lags) << '\n';
    out << "empirical_semivariances = " << join(ok->empirical.semivariances) << '\n';
    out << "empirical_pairs = " << join(ok->empirical.pair_counts) << '\n';
    for (const auto& w : ok->warnings) out << "warning = " << w << '\n';
  } else {
    const auto& prs = std::get<PrsModel>(s);
    const auto names = prs_monomial_names(prs.nd);
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << fmt::format("c[{}] = {:.17g}\n", names[i],
                         prs.coefficients(static_cast<Eigen::Index>(i)));
    }
  }
  return out.str();
}

Eigen::VectorXd SurrogateBundle::select(const Eigen::Ref<const Eigen::VectorXd>& h) const {
  if (h.size() != static_cast<Eigen::Index>(input_dim)) {
    throw ConfigError(fmt::format("surrogate expects {} inputs, got {}", input_dim, h.size()));
  }
  Eigen::VectorXd sub(static_cast<Eigen::Index>(active_inputs.size()));
  for (std::size_t i = 0; i < active_inputs.size(); ++i) {
    sub(static_cast<Eigen::Index>(i)) = h(static_cast<Eigen::Index>(active_inputs[i]));
  }
  return sub;
}

Eigen::VectorXd SurrogateBundle::evaluate(const Eigen::Ref<const Eigen::VectorXd>& h,
                                          std::size_t* clamped) const {
  const Eigen::VectorXd sub = select(h);
  Eigen::VectorXd z(static_cast<Eigen::Index>(components.size()));
  for (std::size_t c = 0; c < components.size(); ++c) {
    z(static_cast<Eigen::Index>(c)) = nuq::evaluate(components[c], sub, clamped);
  }
  return z;
}

SurrogateBundle fit_bundle(SurrogateKind kind, const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& latent, std::vector<std::size_t> active_inputs,
                           const SurrogateOptions& options) {
  if (latent.rows() != inputs.rows()) {
    throw ConfigError("fit_bundle: latent rows do not match input rows");
  }
  if (active_inputs.empty()) {
    throw ConfigError("fit_bundle: no active input dimensions");
  }
  Eigen::MatrixXd sub(inputs.rows(), static_cast<Eigen::Index>(active_inputs.size()));
  for (std::size_t i = 0; i < active_inputs.size(); ++i) {
    if (active_inputs[i] >= static_cast<std::size_t>(inputs.cols())) {
      throw ConfigError(fmt::format("active input {} out of range", active_inputs[i]));
    }
    sub.col(static_cast<Eigen::Index>(i)) = inputs.col(static_cast<Eigen::Index>(active_inputs[i]));
  }
  SurrogateBundle bundle;
  bundle.kind = kind;
  bundle.input_dim = static_cast<std::size_t>(inputs.cols());
  bundle.active_inputs = std::move(active_inputs);
  for (Eigen::Index c = 0; c < latent.cols(); ++c) {
    bundle.components.push_back(fit_surrogate(kind, sub, latent.col(c), options));
  }
  return bundle;
}

Container to_container(const SurrogateBundle& bundle) {
  Container c(std::string(to_string(bundle.kind)));
  c.put_int("input_dim", static_cast<std::int64_t>(bundle.input_dim));
  Eigen::VectorXd active(static_cast<Eigen::Index>(bundle.active_inputs.size()));
  for (std::size_t i = 0; i < bundle.active_inputs.size(); ++i) {
    active(static_cast<Eigen::Index>(i)) = static_cast<double>(bundle.active_inputs[i]);
  }
  c.put_vector("active_inputs", active);
  c.put_int("components", static_cast<std::int64_t>(bundle.components.size()));
  for (std::size_t k = 0; k < bundle.components.size(); ++k) {
    const auto prefix = fmt::format("component.{}.", k);
    const auto& s = bundle.components[k];
    switch (kind_of(s)) {
      case SurrogateKind::Srs:
        write_srs(std::get<SrsModel>(s), c, prefix);
        break;
      case SurrogateKind::Ok:
        write_ok(std::get<OkModel>(s), c, prefix);
        break;
      case SurrogateKind::Prs:
        write_prs(std::get<PrsModel>(s), c, prefix);
        break;
    }
  }
  return c;
}

SurrogateBundle bundle_from_container(const Container& c) {
  SurrogateBundle bundle;
  bundle.kind = parse_surrogate_kind(c.kind());
  bundle.input_dim = static_cast<std::size_t>(c.get_int("input_dim"));
  const Eigen::VectorXd active = c.get_vector("active_inputs");
  for (Eigen::Index i = 0; i < active.size(); ++i) {
    bundle.active_inputs.push_back(static_cast<std::size_t>(active(i)));
  }
  const auto count = static_cast<std::size_t>(c.get_int("components"));
  for (std::size_t k = 0; k < count; ++k) {
    const auto prefix = fmt::format("component.{}.", k);
    switch (bundle.kind) {
      case SurrogateKind::Srs:
        bundle.components.emplace_back(read_srs(c, prefix));
        break;
      case SurrogateKind::Ok:
        bundle.components.emplace_back(read_ok(c, prefix));
        break;
      case SurrogateKind::Prs:
        bundle.components.emplace_back(read_prs(c, prefix));
        break;
    }
  }
  return bundle;
}

}  // namespace nuq
