#include "nuq/dataset.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "nuq/error.hpp"
#include "nuq/rng.hpp"

namespace nuq {

void InputDistribution::validate() const {
  if (dims.empty()) throw ConfigError("input distribution has no dimensions");
  for (const auto& m : dims) {
    if (!std::isfinite(m.mean) || !std::isfinite(m.std)) {
      throw ConfigError("dimension '" + m.name + "' has non-finite parameters");
    }
    if (m.std < 0.0) throw ConfigError("dimension '" + m.name + "' has negative std");
  }
}

InputDistribution default_distribution() {
  return InputDistribution{{{"h1", 1.2, 0.12, Law::Normal},
                            {"h2", 1.2, 0.12, Law::Normal},
                            {"h3", 1.2, 0.12, Law::Normal}}};
}

InputDistribution distribution_from_config(const Config& cfg) {
  InputDistribution dist;
  for (const auto* s : cfg.sections_with_prefix("dim ")) {
    Marginal m;
    m.name = s->name.substr(4);
    const auto* mean = s->find("mean");
    const auto* std = s->find("std");
    if (!mean || !std) throw ConfigError("[" + s->name + "] needs both mean and std");
    m.mean = parse_double(*mean, "mean");
    m.std = parse_double(*std, "std");
    if (const auto* law = s->find("law"); law && *law != "normal") {
      throw ConfigError("[" + s->name + "]: unsupported law '" + *law + "'");
    }
    dist.dims.push_back(std::move(m));
  }
  dist.validate();
  return dist;
}

Config distribution_to_config(const InputDistribution& dist) {
  Config cfg;
  for (const auto& m : dist.dims) {
    const auto section = "dim " + m.name;
    cfg.set(section, "mean", fmt::format("{}", m.mean));
    cfg.set(section, "std", fmt::format("{}", m.std));
    cfg.set(section, "law", "normal");
  }
  return cfg;
}

Eigen::MatrixXd sample_input_rows(const InputDistribution& dist, std::size_t first,
                                  std::size_t count, std::uint64_t seed) {
  dist.validate();
  if (count == 0) throw ConfigError("sample_inputs: requested zero samples");
  const auto nd = dist.nd();
  Eigen::MatrixXd h(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(nd));
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream stream(seed, first + i);
    for (std::size_t j = 0; j < nd; ++j) {
      const auto& m = dist.dims[j];
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m.mean + m.std * stream.normal();
    }
  }
  return h;
}

Eigen::MatrixXd sample_inputs(const InputDistribution& dist, std::size_t n, std::uint64_t seed) {
  return sample_input_rows(dist, 0, n, seed);
}

double qoi_average(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) throw ConfigError("qoi_average: empty output vector");
  return x.mean();
}

TrainingSet assemble_training_set(const Eigen::MatrixXd& inputs,
                                  const std::vector<Eigen::VectorXd>& outputs, std::uint64_t seed,
                                  std::string provenance) {
  if (static_cast<Eigen::Index>(outputs.size()) != inputs.rows()) {
    throw ConfigError(fmt::format("training set: {} input rows but {} outputs", inputs.rows(),
                                  outputs.size()));
  }
  if (outputs.empty()) throw ConfigError("training set: no samples");
  const auto d = outputs.front().size();
  TrainingSet ts;
  ts.inputs = inputs;
  ts.outputs.resize(d, static_cast<Eigen::Index>(outputs.size()));
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].size() != d) {
      throw ConfigError(fmt::format("training set: output {} has length {}, expected {}", i,
                                    outputs[i].size(), d));
    }
    ts.outputs.col(static_cast<Eigen::Index>(i)) = outputs[i];
  }
  ts.seed = seed;
  ts.provenance = std::move(provenance);
  validate(ts);
  return ts;
}

void validate(const TrainingSet& ts) {
  if (ts.inputs.rows() < 1 || ts.outputs.rows() < 1 || ts.inputs.cols() < 1) {
    throw ConfigError("training set: needs ns >= 1, nd >= 1 and d >= 1");
  }
  if (ts.outputs.cols() != ts.inputs.rows()) {
    throw ConfigError(fmt::format("training set: X has {} columns but H has {} rows",
                                  ts.outputs.cols(), ts.inputs.rows()));
  }
  if (!ts.inputs.allFinite() || !ts.outputs.allFinite()) {
    throw ConfigError("training set: non-finite entries");
  }
}

Container to_container(const TrainingSet& ts) {
  Container c("training-set");
  c.put_int("ns", static_cast<std::int64_t>(ts.ns()));
  c.put_int("nd", static_cast<std::int64_t>(ts.nd()));
  c.put_int("d", static_cast<std::int64_t>(ts.d()));
  c.put_int("seed", static_cast<std::int64_t>(ts.seed));
  c.put_matrix("X", ts.outputs, Container::Order::ColMajor);
  c.put_matrix("H", ts.inputs, Container::Order::RowMajor);
  c.put_string("provenance", ts.provenance);
  return c;
}

TrainingSet training_set_from_container(const Container& c) {
  c.expect_kind("training-set");
  TrainingSet ts;
  ts.outputs = c.get_matrix("X");
  ts.inputs = c.get_matrix("H");
  ts.seed = static_cast<std::uint64_t>(c.get_int("seed"));
  ts.provenance = c.get_string("provenance");
  if (static_cast<std::int64_t>(ts.ns()) != c.get_int("ns") ||
      static_cast<std::int64_t>(ts.nd()) != c.get_int("nd") ||
      static_cast<std::int64_t>(ts.d()) != c.get_int("d")) {
    throw IoError("training set header does not match its blocks");
  }
  validate(ts);
  return ts;
}

void save_training_set(const TrainingSet& ts, const std::filesystem::path& path) {
  to_container(ts).save(path);
}

TrainingSet load_training_set(const std::filesystem::path& path) {
  return training_set_from_container(Container::load(path));
}

std::string training_set_csv(const TrainingSet& ts) {
  std::string out;
  for (std::size_t j = 0; j < ts.nd(); ++j) out += fmt::format("{}h{}", j ? "," : "", j + 1);
  for (std::size_t j = 0; j < ts.d(); ++j) out += fmt::format(",x{}", j + 1);
  out += '\n';
  for (Eigen::Index i = 0; i < ts.inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < ts.inputs.cols(); ++j) {
      out += fmt::format("{}{:.17g}", j ? "," : "", ts.inputs(i, j));
    }
    for (Eigen::Index j = 0; j < ts.outputs.rows(); ++j) {
      out += fmt::format(",{:.17g}", ts.outputs(j, i));
    }
    out += '\n';
  }
  return out;
}

}  // namespace nuq
