#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nuq/config.hpp"
#include "nuq/container.hpp"

namespace nuq {

enum class Law { Normal };

struct Marginal {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  Law law = Law::Normal;
};

/// Independent marginals, one per stochastic input dimension.
struct InputDistribution {
  std::vector<Marginal> dims;

  std::size_t nd() const { return dims.size(); }
  /// Throws ConfigError on an empty list, negative or non-finite parameters.
  void validate() const;
};

/// Three thickness parameters, each N(1.2, 0.12^2).
InputDistribution default_distribution();

/// Reads `[dim <name>]` blocks with keys mean, std and optional law.
InputDistribution distribution_from_config(const Config& cfg);
Config distribution_to_config(const InputDistribution& dist);

/// n x nd matrix; row i is drawn from RandomStream(seed, i).
Eigen::MatrixXd sample_inputs(const InputDistribution& dist, std::size_t n, std::uint64_t seed);

/// Rows [first, first + count) of the same sequence sample_inputs produces,
/// so a design can be extended without redrawing its prefix.
Eigen::MatrixXd sample_input_rows(const InputDistribution& dist, std::size_t first,
                                  std::size_t count, std::uint64_t seed);

/// Component average of an output field.
double qoi_average(const Eigen::Ref<const Eigen::VectorXd>& x);

struct TrainingSet {
  Eigen::MatrixXd inputs;   // ns x nd, one sample per row
  Eigen::MatrixXd outputs;  // d x ns, one sample per column
  std::uint64_t seed = 0;
  std::string provenance;

  std::size_t ns() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t nd() const { return static_cast<std::size_t>(inputs.cols()); }
  std::size_t d() const { return static_cast<std::size_t>(outputs.rows()); }
};

TrainingSet assemble_training_set(const Eigen::MatrixXd& inputs,
                                  const std::vector<Eigen::VectorXd>& outputs,
                                  std::uint64_t seed = 0, std::string provenance = {});
/// Checks shape and finiteness invariants; throws ConfigError.
void validate(const TrainingSet& ts);

Container to_container(const TrainingSet& ts);
TrainingSet training_set_from_container(const Container& c);
void save_training_set(const TrainingSet& ts, const std::filesystem::path& path);
TrainingSet load_training_set(const std::filesystem::path& path);

/// One sample per row: h_1..h_nd then x_1..x_d, 17 significant digits.
std::string training_set_csv(const TrainingSet& ts);

}  // namespace nuq
