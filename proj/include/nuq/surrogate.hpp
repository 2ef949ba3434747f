#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nuq/container.hpp"
#include "nuq/kriging.hpp"
#include "nuq/prs.hpp"
#include "nuq/srs.hpp"

namespace nuq {

enum class SurrogateKind { Srs, Ok, Prs };

SurrogateKind parse_surrogate_kind(std::string_view name);
std::string_view to_string(SurrogateKind kind);

/// A scalar response surface over the input space.
using Surrogate = std::variant<SrsModel, OkModel, PrsModel>;

SurrogateKind kind_of(const Surrogate& s);
double evaluate(const Surrogate& s, const Eigen::Ref<const Eigen::VectorXd>& h,
                std::size_t* clamped = nullptr);

struct SurrogateOptions {
  SrsConfig srs;
  OkConfig ok;
};

Surrogate fit_surrogate(SurrogateKind kind, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& values, const SurrogateOptions& options = {});

/// Key-value diagnostics text: residual history, clamp counts, variogram fit.
std::string diagnostics_report(const Surrogate& s);

/// One surrogate per retained latent component, all reading the same subset
/// of input columns.
struct SurrogateBundle {
  SurrogateKind kind = SurrogateKind::Srs;
  std::size_t input_dim = 0;                // nd of the full input vector
  std::vector<std::size_t> active_inputs;   // columns fed to each component
  std::vector<Surrogate> components;

  std::size_t latent_dim() const { return components.size(); }
  Eigen::VectorXd select(const Eigen::Ref<const Eigen::VectorXd>& h) const;
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& h,
                           std::size_t* clamped = nullptr) const;
};

/// Fits component c against latent.col(c) using only `active_inputs`.
SurrogateBundle fit_bundle(SurrogateKind kind, const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& latent, std::vector<std::size_t> active_inputs,
                           const SurrogateOptions& options = {});

Container to_container(const SurrogateBundle& bundle);
SurrogateBundle bundle_from_container(const Container& c);

}  // namespace nuq
