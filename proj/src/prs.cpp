#include "nuq/prs.hpp"

#include <Eigen/QR>

#include <fmt/format.h>

#include "nuq/error.hpp"

namespace nuq {

std::size_t prs_coefficient_count(std::size_t nd) { return 1 + 2 * nd + nd * (nd - 1) / 2; }

std::vector<std::string> prs_monomial_names(std::size_t nd) {
  std::vector<std::string> names{"1"};
  for (std::size_t i = 0; i < nd; ++i) names.push_back(fmt::format("h{}", i + 1));
  for (std::size_t i = 0; i < nd; ++i) names.push_back(fmt::format("h{}^2", i + 1));
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t j = i + 1; j < nd; ++j) names.push_back(fmt::format("h{}*h{}", i + 1, j + 1));
  }
  return names;
}

Eigen::VectorXd prs_monomials(const Eigen::Ref<const Eigen::VectorXd>& h) {
  const auto nd = h.size();
  Eigen::VectorXd m(static_cast<Eigen::Index>(prs_coefficient_count(static_cast<std::size_t>(nd))));
  Eigen::Index c = 0;
  m(c++) = 1.0;
  for (Eigen::Index i = 0; i < nd; ++i) m(c++) = h(i);
  for (Eigen::Index i = 0; i < nd; ++i) m(c++) = h(i) * h(i);
  for (Eigen::Index i = 0; i < nd; ++i) {
    for (Eigen::Index j = i + 1; j < nd; ++j) m(c++) = h(i) * h(j);
  }
  return m;
}

Eigen::MatrixXd prs_design_matrix(const Eigen::MatrixXd& inputs) {
  const auto ncoef =
      static_cast<Eigen::Index>(prs_coefficient_count(static_cast<std::size_t>(inputs.cols())));
  Eigen::MatrixXd a(inputs.rows(), ncoef);
  for (Eigen::Index k = 0; k < inputs.rows(); ++k) {
    a.row(k) = prs_monomials(inputs.row(k).transpose()).transpose();
  }
  return a;
}

PrsModel fit_prs(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values) {
  const auto nd = static_cast<std::size_t>(inputs.cols());
  const auto ncoef = prs_coefficient_count(nd);
  if (nd == 0) throw ConfigError("fit_prs: no input dimensions");
  if (values.size() != inputs.rows()) {
    throw ConfigError("fit_prs: value count does not match input rows");
  }
  if (static_cast<std::size_t>(inputs.rows()) < ncoef) {
    throw ConfigError(fmt::format(
        "fit_prs: {} samples cannot determine {} second-order coefficients in {} dimensions",
        inputs.rows(), ncoef, nd));
  }
  if (!inputs.allFinite() || !values.allFinite()) throw ConfigError("fit_prs: non-finite data");

  Eigen::MatrixXd a = prs_design_matrix(inputs);
  Eigen::VectorXd scale = a.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
  }
  a = a * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(ncoef)) {
    const auto names = prs_monomial_names(nd);
    std::string dependent;
    for (Eigen::Index r = qr.rank(); r < static_cast<Eigen::Index>(ncoef); ++r) {
      dependent += (dependent.empty() ? "" : ", ") + names[qr.colsPermutation().indices()(r)];
    }
    throw NumericalError(fmt::format(
        "fit_prs: design matrix has rank {} < {}; dependent monomial directions: {}", qr.rank(),
        ncoef, dependent));
  }
  PrsModel model;
  model.nd = nd;
  model.coefficients = qr.solve(values).cwiseQuotient(scale);
  return model;
}

double eval_prs(const PrsModel& model, const Eigen::Ref<const Eigen::VectorXd>& h) {
  if (h.size() != static_cast<Eigen::Index>(model.nd)) {
    throw ConfigError(fmt::format("eval_prs: expected {} inputs, got {}", model.nd, h.size()));
  }
  return model.coefficients.dot(prs_monomials(h));
}

void write_prs(const PrsModel& model, Container& c, std::string_view prefix) {
  const std::string p(prefix);
  c.put_int(p + "nd", static_cast<std::int64_t>(model.nd));
  c.put_vector(p + "coefficients", model.coefficients);
}

PrsModel read_prs(const Container& c, std::string_view prefix) {
  const std::string p(prefix);
  PrsModel model;
  model.nd = static_cast<std::size_t>(c.get_int(p + "nd"));
  model.coefficients = c.get_vector(p + "coefficients");
  if (static_cast<std::size_t>(model.coefficients.size()) != prs_coefficient_count(model.nd)) {
    throw IoError("prs coefficient count does not match nd");
  }
  return model;
}

}  // namespace nuq
