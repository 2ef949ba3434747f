#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

#include "nuq/container.hpp"

namespace nuq {

/// Second-order polynomial response surface. Coefficients follow the
/// monomial order {1, h_i, h_i^2, h_i h_j (i < j)}.
struct PrsModel {
  std::size_t nd = 0;
  Eigen::VectorXd coefficients;
};

std::size_t prs_coefficient_count(std::size_t nd);
std::vector<std::string> prs_monomial_names(std::size_t nd);
/// The monomial row for one input point.
Eigen::VectorXd prs_monomials(const Eigen::Ref<const Eigen::VectorXd>& h);
/// ns x ncoef design matrix A.
Eigen::MatrixXd prs_design_matrix(const Eigen::MatrixXd& inputs);

/// Least-squares minimizer of ||y - A c|| via column-pivoted QR on the
/// column-equilibrated design; rank deficiency raises NumericalError naming
/// the dependent monomials.
PrsModel fit_prs(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values);
double eval_prs(const PrsModel& model, const Eigen::Ref<const Eigen::VectorXd>& h);

void write_prs(const PrsModel& model, Container& c, std::string_view prefix);
PrsModel read_prs(const Container& c, std::string_view prefix);

}  // namespace nuq
