#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nuq/dataset.hpp"
#include "nuq/dimred.hpp"
#include "nuq/surrogate.hpp"

namespace nuq {

struct StatsSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased, 1/(n-1)
  double std = 0.0;
  std::size_t n = 0;
};

/// ConfigError when fewer than two samples are given.
StatsSummary summary_stats(const Eigen::Ref<const Eigen::VectorXd>& samples);

/// Piecewise-constant density on a uniform partition of [lo, hi].
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n_bins = 0;
  Eigen::VectorXd freqs;          // sums to one
  std::size_t sample_count = 0;
  std::size_t out_of_range = 0;   // samples clamped into an edge bin

  double width() const { return (hi - lo) / static_cast<double>(n_bins); }
  double center(std::size_t bin) const { return lo + (static_cast<double>(bin) + 0.5) * width(); }
};

constexpr std::size_t kDefaultBins = 40;

/// Bin index of t on [lo, hi] with n uniform bins: interior edges belong to
/// the right bin, hi to the last bin; values outside are clamped.
std::size_t bin_index(double t, double lo, double hi, std::size_t n);

/// Uniform bins over `domain`, or [min, max] of the samples when absent. A
/// sample set without spread gets the domain [v - eps, v + eps] with
/// eps = max(|v|, 1) * 1e-9.
Histogram build_histogram(const Eigen::Ref<const Eigen::VectorXd>& samples, std::size_t n_bins,
                          std::optional<std::pair<double, double>> domain = std::nullopt);

Histogram uniform_histogram(double lo, double hi, std::size_t n_bins);

/// Redistributes mass onto n_bins uniform bins of [lo, hi], assuming a
/// uniform density within every source bin.
Histogram rebin(const Histogram& h, double lo, double hi, std::size_t n_bins);

/// Checks lo < hi, n_bins >= 1, freqs >= 0 and a unit sum; ConfigError.
void validate(const Histogram& h);

struct KlOptions {
  /// Adds eps = 1 / (max(sample counts) * n_bins) to every bin of both
  /// histograms, then renormalizes.
  bool smooth = true;
};

/// Discrete KL divergence (natural log) after rebinning both histograms onto
/// the union domain with the larger bin count. Without smoothing a bin with
/// p > 0 and q = 0 yields +infinity.
double kl_divergence(const Histogram& p, const Histogram& q, const KlOptions& options = {});

/// Divergence from the uniform histogram on the same partition:
/// sum over p_l > 0 of p_l log(n_bins p_l).
double kl_reference(const Histogram& p);

/// Pearson correlation of average ranks; ConfigError on mismatched lengths,
/// fewer than 3 samples or a constant argument.
double spearman(const Eigen::Ref<const Eigen::VectorXd>& u,
                const Eigen::Ref<const Eigen::VectorXd>& v);

/// Average ranks (1-based) with ties sharing the mean of their positions.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& v);

struct ScreeningResult {
  std::vector<double> coefficients;  // SpC(latent, h_i) per input dimension
  std::vector<bool> keep;
  double threshold = 0.1;

  std::vector<std::size_t> kept_indices() const;
};

/// Flags input dimension i for removal when |SpC(latent, H.col(i))| < threshold.
ScreeningResult screen_inputs(const Eigen::Ref<const Eigen::VectorXd>& latent,
                              const Eigen::MatrixXd& inputs, double threshold = 0.1);

using QoiFunction = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

struct PropagationResult {
  Eigen::VectorXd qoi;
  std::size_t clamped = 0;  // SRS queries that fell outside a sectional mesh
};

/// Surrogate Monte Carlo over explicit input rows: z = bundle(h),
/// x = backward(z), value = qoi(x).
PropagationResult mc_propagate(const SurrogateBundle& bundle, const ReducedModel& reduced,
                               const QoiFunction& qoi, const Eigen::MatrixXd& inputs);

/// Draws n_mc rows with sample_inputs(dist, n_mc, seed) and propagates them.
PropagationResult mc_propagate(const SurrogateBundle& bundle, const ReducedModel& reduced,
                               const QoiFunction& qoi, const InputDistribution& dist,
                               std::size_t n_mc, std::uint64_t seed);

/// Location and masses of the two modes of a sample. On a 3-bin moving
/// average of the histogram, the secondary peak is the local maximum with the
/// largest prominence over the valley separating it from the dominant peak;
/// it counts only when that valley is below half its height. The split is
/// the midpoint of the bins near the valley floor.
struct ModeSplit {
  bool bimodal = false;
  double split = 0.0;
  double mass_below = 0.0;
  double mass_above = 0.0;
  double minor_mass() const { return bimodal ? std::min(mass_below, mass_above) : 0.0; }
};

ModeSplit find_mode_split(const Eigen::Ref<const Eigen::VectorXd>& samples,
                          std::size_t n_bins = kDefaultBins);

/// Fraction of samples strictly below `split`.
double mass_below(const Eigen::Ref<const Eigen::VectorXd>& samples, double split);

/// Text table: '#' header lines with lo, hi, bins, samples, then one
/// "center frequency" row per bin, 17 significant digits.
std::string histogram_to_text(const Histogram& h);
Histogram histogram_from_text(std::string_view text);
void save_histogram(const Histogram& h, const std::filesystem::path& path);
Histogram load_histogram(const std::filesystem::path& path);

}  // namespace nuq
