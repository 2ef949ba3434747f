#include "nuq/uq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "nuq/config.hpp"
#include "nuq/error.hpp"

namespace nuq {

StatsSummary summary_stats(const Eigen::Ref<const Eigen::VectorXd>& samples) {
  const auto n = samples.size();
  if (n < 2) throw ConfigError(fmt::format("summary_stats: need at least 2 samples, got {}", n));
  StatsSummary s;
  s.n = static_cast<std::size_t>(n);
  s.mean = samples.mean();
  s.variance = (samples.array() - s.mean).square().sum() / static_cast<double>(n - 1);
  s.std = std::sqrt(s.variance);
  return s;
}

std::size_t bin_index(double t, double lo, double hi, std::size_t n) {
  if (!(t > lo)) return 0;
  if (!(t < hi)) return n - 1;
  const auto idx = static_cast<std::size_t>(std::floor((t - lo) / (hi - lo) * static_cast<double>(n)));
  return std::min(idx, n - 1);
}

void validate(const Histogram& h) {
  if (!(std::isfinite(h.lo) && std::isfinite(h.hi) && h.lo < h.hi)) {
    throw ConfigError(fmt::format("histogram: invalid domain [{}, {}]", h.lo, h.hi));
  }
  if (h.n_bins == 0 || h.freqs.size() != static_cast<Eigen::Index>(h.n_bins)) {
    throw ConfigError("histogram: bin count does not match frequency vector");
  }
  if ((h.freqs.array() < 0.0).any() || !h.freqs.allFinite()) {
    throw ConfigError("histogram: frequencies must be finite and nonnegative");
  }
  if (std::abs(h.freqs.sum() - 1.0) > 1e-9) {
    throw ConfigError(fmt::format("histogram: frequencies sum to {:.17g}", h.freqs.sum()));
  }
}

Histogram build_histogram(const Eigen::Ref<const Eigen::VectorXd>& samples, std::size_t n_bins,
                          std::optional<std::pair<double, double>> domain) {
  if (samples.size() == 0) throw ConfigError("build_histogram: no samples");
  if (n_bins < 2) throw ConfigError("build_histogram: need at least 2 bins");
  if (!samples.allFinite()) throw NumericalError("build_histogram: non-finite sample");
  Histogram h;
  h.n_bins = n_bins;
  if (domain) {
    h.lo = domain->first;
    h.hi = domain->second;
    if (!(h.lo < h.hi)) {
      throw ConfigError(fmt::format("build_histogram: empty domain [{}, {}]", h.lo, h.hi));
    }
  } else {
    h.lo = samples.minCoeff();
    h.hi = samples.maxCoeff();
    if (!(h.lo < h.hi)) {
      const double eps = std::max(std::abs(h.lo), 1.0) * 1e-9;
      h.lo -= eps;
      h.hi += eps;
    }
  }
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_bins));
  for (const double t : samples) {
    if (t < h.lo || t > h.hi) ++h.out_of_range;
    counts(static_cast<Eigen::Index>(bin_index(t, h.lo, h.hi, n_bins))) += 1.0;
  }
  h.sample_count = static_cast<std::size_t>(samples.size());
  h.freqs = counts / static_cast<double>(samples.size());
  return h;
}

Histogram uniform_histogram(double lo, double hi, std::size_t n_bins) {
  if (n_bins == 0 || !(lo < hi)) throw ConfigError("uniform_histogram: invalid partition");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.n_bins = n_bins;
  h.freqs = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_bins),
                                      1.0 / static_cast<double>(n_bins));
  return h;
}

Histogram rebin(const Histogram& h, double lo, double hi, std::size_t n_bins) {
  validate(h);
  if (!(lo < hi) || n_bins == 0) throw ConfigError("rebin: invalid target partition");
  Histogram out;
  out.lo = lo;
  out.hi = hi;
  out.n_bins = n_bins;
  out.sample_count = h.sample_count;
  out.out_of_range = h.out_of_range;
  out.freqs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_bins));
  if (h.lo == lo && h.hi == hi && h.n_bins == n_bins) {
    out.freqs = h.freqs;
    return out;
  }
  const double src_w = h.width();
  const double dst_w = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i < h.n_bins; ++i) {
    const double mass = h.freqs(static_cast<Eigen::Index>(i));
    if (mass == 0.0) continue;
    const double a = h.lo + static_cast<double>(i) * src_w;
    const double b = (i + 1 == h.n_bins) ? h.hi : a + src_w;
    const auto first = bin_index(a, lo, hi, n_bins);
    const auto last = bin_index(b, lo, hi, n_bins);
    double assigned = 0.0;
    for (std::size_t j = first; j <= last; ++j) {
      const double c = lo + static_cast<double>(j) * dst_w;
      const double e = (j + 1 == n_bins) ? hi : c + dst_w;
      const double overlap = std::max(0.0, std::min(b, e) - std::max(a, c));
      const double share = (j == last) ? mass - assigned : mass * overlap / (b - a);
      out.freqs(static_cast<Eigen::Index>(j)) += share;
      assigned += share;
    }
  }
  // Rounding in the shares can leave tiny negatives in the final bin.
  out.freqs = out.freqs.cwiseMax(0.0);
  out.freqs /= out.freqs.sum();
  return out;
}

double kl_divergence(const Histogram& p, const Histogram& q, const KlOptions& options) {
  validate(p);
  validate(q);
  const double lo = std::min(p.lo, q.lo);
  const double hi = std::max(p.hi, q.hi);
  const std::size_t n = std::max(p.n_bins, q.n_bins);
  Eigen::VectorXd pf = rebin(p, lo, hi, n).freqs;
  Eigen::VectorXd qf = rebin(q, lo, hi, n).freqs;
  const auto count = std::max(p.sample_count, q.sample_count);
  if (options.smooth && count > 0) {
    const double eps = 1.0 / (static_cast<double>(count) * static_cast<double>(n));
    pf = (pf.array() + eps) / (1.0 + static_cast<double>(n) * eps);
    qf = (qf.array() + eps) / (1.0 + static_cast<double>(n) * eps);
  }
  double sum = 0.0;
  for (Eigen::Index l = 0; l < pf.size(); ++l) {
    if (pf(l) == 0.0) continue;
    if (qf(l) == 0.0) return std::numeric_limits<double>::infinity();
    sum += pf(l) * std::log(pf(l) / qf(l));
  }
  // Gibbs' inequality holds exactly; only rounding can push the sum below zero.
  return std::max(sum, 0.0);
}

double kl_reference(const Histogram& p) {
  validate(p);
  const double n = static_cast<double>(p.n_bins);
  double sum = 0.0;
  for (const double f : p.freqs) {
    if (f > 0.0) sum += f * std::log(n * f);
  }
  return sum;
}

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const auto n = v.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v(a) < v(b); });
  Eigen::VectorXd ranks(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j + 1 < n && v(order[static_cast<std::size_t>(j + 1)]) == v(order[static_cast<std::size_t>(i)])) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index t = i; t <= j; ++t) ranks(order[static_cast<std::size_t>(t)]) = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const Eigen::Ref<const Eigen::VectorXd>& u,
                const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) throw ConfigError("spearman: length mismatch");
  if (u.size() < 3) throw ConfigError("spearman: need at least 3 samples");
  const Eigen::VectorXd ru = average_ranks(u);
  const Eigen::VectorXd rv = average_ranks(v);
  const Eigen::VectorXd cu = ru.array() - ru.mean();
  const Eigen::VectorXd cv = rv.array() - rv.mean();
  const double su = cu.squaredNorm();
  const double sv = cv.squaredNorm();
  if (su == 0.0 || sv == 0.0) throw ConfigError("spearman: constant argument has no rank variance");
  return std::clamp(cu.dot(cv) / std::sqrt(su * sv), -1.0, 1.0);
}

std::vector<std::size_t> ScreeningResult::kept_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

ScreeningResult screen_inputs(const Eigen::Ref<const Eigen::VectorXd>& latent,
                              const Eigen::MatrixXd& inputs, double threshold) {
  if (latent.size() != inputs.rows()) {
    throw ConfigError(fmt::format("screen_inputs: {} latent values for {} input rows",
                                  latent.size(), inputs.rows()));
  }
  ScreeningResult r;
  r.threshold = threshold;
  for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
    const double c = spearman(latent, inputs.col(i));
    r.coefficients.push_back(c);
    r.keep.push_back(std::abs(c) >= threshold);
  }
  return r;
}

PropagationResult mc_propagate(const SurrogateBundle& bundle, const ReducedModel& reduced,
                               const QoiFunction& qoi, const Eigen::MatrixXd& inputs) {
  const auto k = latent_dim(reduced);
  if (bundle.latent_dim() != k) {
    throw ConfigError(fmt::format("mc_propagate: {} surrogates for a {}-dimensional latent space",
                                  bundle.latent_dim(), k));
  }
  if (static_cast<std::size_t>(inputs.cols()) != bundle.input_dim) {
    throw ConfigError(fmt::format("mc_propagate: inputs have {} columns, surrogates expect {}",
                                  inputs.cols(), bundle.input_dim));
  }
  constexpr Eigen::Index kChunk = 256;
  PropagationResult out;
  out.qoi.resize(inputs.rows());
  Eigen::MatrixXd z(static_cast<Eigen::Index>(k), kChunk);
  for (Eigen::Index first = 0; first < inputs.rows(); first += kChunk) {
    const Eigen::Index m = std::min(kChunk, inputs.rows() - first);
    for (Eigen::Index j = 0; j < m; ++j) {
      z.col(j) = bundle.evaluate(inputs.row(first + j).transpose(), &out.clamped);
    }
    const Eigen::MatrixXd x = backward_many(reduced, z.leftCols(m));
    for (Eigen::Index j = 0; j < m; ++j) out.qoi(first + j) = qoi(x.col(j));
  }
  return out;
}

PropagationResult mc_propagate(const SurrogateBundle& bundle, const ReducedModel& reduced,
                               const QoiFunction& qoi, const InputDistribution& dist,
                               std::size_t n_mc, std::uint64_t seed) {
  if (n_mc == 0) throw ConfigError("mc_propagate: n_mc must be at least 1");
  return mc_propagate(bundle, reduced, qoi, sample_inputs(dist, n_mc, seed));
}

double mass_below(const Eigen::Ref<const Eigen::VectorXd>& samples, double split) {
  if (samples.size() == 0) throw ConfigError("mass_below: no samples");
  return static_cast<double>((samples.array() < split).count()) /
         static_cast<double>(samples.size());
}

ModeSplit find_mode_split(const Eigen::Ref<const Eigen::VectorXd>& samples, std::size_t n_bins) {
  const Histogram h = build_histogram(samples, n_bins);
  const auto n = static_cast<Eigen::Index>(n_bins);
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index a = std::max<Eigen::Index>(0, i - 1);
    const Eigen::Index b = std::min<Eigen::Index>(n - 1, i + 1);
    s(i) = h.freqs.segment(a, b - a + 1).mean();
  }
  Eigen::Index top = 0;
  s.maxCoeff(&top);

  ModeSplit result;
  double best = 0.0;
  Eigen::Index valley_at = -1;
  Eigen::Index partner = -1;
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool local_max = (j == 0 || s(j) >= s(j - 1)) && (j == n - 1 || s(j) >= s(j + 1));
    if (j == top || !local_max || std::abs(j - top) < 2) continue;
    const Eigen::Index a = std::min(j, top) + 1;
    const Eigen::Index len = std::max(j, top) - a;
    Eigen::Index rel = 0;
    const double valley = s.segment(a, len).minCoeff(&rel);
    const double prominence = s(j) - valley;
    if (valley < 0.5 * s(j) && prominence > best) {
      best = prominence;
      valley_at = a + rel;
      partner = j;
    }
  }
  if (valley_at < 0) return result;
  // A flat valley makes its argmin noise-driven; split at the middle of the
  // run of bins that stay close to the valley floor instead.
  const double floor = s(valley_at);
  const double cutoff = floor + 0.25 * (s(partner) - floor);
  const Eigen::Index lo_peak = std::min(partner, top);
  const Eigen::Index hi_peak = std::max(partner, top);
  Eigen::Index first = valley_at;
  Eigen::Index last = valley_at;
  while (first - 1 > lo_peak && s(first - 1) <= cutoff) --first;
  while (last + 1 < hi_peak && s(last + 1) <= cutoff) ++last;
  result.bimodal = true;
  result.split = h.lo + 0.5 * static_cast<double>(first + last + 1) * h.width();
  result.mass_below = mass_below(samples, result.split);
  result.mass_above = 1.0 - result.mass_below;
  return result;
}

std::string histogram_to_text(const Histogram& h) {
  validate(h);
  std::string out = "# nuq histogram\n";
  out += fmt::format("# lo = {:.17g}\n# hi = {:.17g}\n# bins = {}\n# samples = {}\n", h.lo, h.hi,
                     h.n_bins, h.sample_count);
  out += fmt::format("# out_of_range = {}\n# columns = center frequency\n", h.out_of_range);
  for (std::size_t i = 0; i < h.n_bins; ++i) {
    out += fmt::format("{:.17g} {:.17g}\n", h.center(i), h.freqs(static_cast<Eigen::Index>(i)));
  }
  return out;
}

Histogram histogram_from_text(std::string_view text) {
  Histogram h;
  bool have_lo = false;
  bool have_hi = false;
  std::vector<double> freqs;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t#");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "lo") {
        h.lo = parse_double(value, "histogram lo");
        have_lo = true;
      } else if (key == "hi") {
        h.hi = parse_double(value, "histogram hi");
        have_hi = true;
      } else if (key == "bins") {
        h.n_bins = static_cast<std::size_t>(parse_int(value, "histogram bins"));
      } else if (key == "samples") {
        h.sample_count = static_cast<std::size_t>(parse_int(value, "histogram samples"));
      } else if (key == "out_of_range") {
        h.out_of_range = static_cast<std::size_t>(parse_int(value, "histogram out_of_range"));
      }
      continue;
    }
    std::istringstream row(line);
    std::string center;
    std::string freq;
    if (!(row >> center >> freq)) throw IoError("histogram: malformed row '" + line + "'");
    freqs.push_back(parse_double(freq, "histogram frequency"));
  }
  if (!have_lo || !have_hi) throw IoError("histogram: missing lo/hi header");
  if (freqs.size() != h.n_bins) {
    throw IoError(fmt::format("histogram: header declares {} bins, found {} rows", h.n_bins,
                              freqs.size()));
  }
  h.freqs = Eigen::Map<Eigen::VectorXd>(freqs.data(), static_cast<Eigen::Index>(freqs.size()));
  try {
    validate(h);
  } catch (const ConfigError& e) {
    throw IoError(e.what());
  }
  return h;
}

void save_histogram(const Histogram& h, const std::filesystem::path& path) {
  write_file(path, histogram_to_text(h));
}

Histogram load_histogram(const std::filesystem::path& path) {
  return histogram_from_text(read_file(path));
}

}  // namespace nuq
