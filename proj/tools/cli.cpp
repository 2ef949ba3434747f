#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "full_model.hpp"
#include "nuq/convergence.hpp"
#include "nuq/dataset.hpp"
#include "nuq/dimred.hpp"
#include "nuq/error.hpp"
#include "nuq/surrogate.hpp"
#include "nuq/synthetic.hpp"
#include "nuq/uq.hpp"

namespace nuq::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kBaseDefaults = R"(
[run]
seed = 1

[model]
kind = synthetic

[generate]
ns = 2366
csv = false

[reduce]
method = kpca
beta = 0.1
selector = energy
components = 1
energy = 0.8

[fit]
surrogate = srs
screen = true
screen_threshold = 0.1
nii = 10
margin = 0.05
lambda_rel = 0.001
max_rank = 20
tol_alt = 1e-6
tol_greedy = 0.0001
max_alt_iters = 50
quadrature = uniform
variogram = auto
lag_bins = 15

[uq]
n_mc = 50000
bins = 40
domain = auto

[pipeline]
surrogates = srs,ok,prs
oracle = true

[converge]
start = 100
growth = 1.5
max_ns = 5000
kl_tol = 0.01
)";

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::uint64_t run_seed(const Config& cfg) {
  const long long seed = cfg.get_int("run", "seed", 1);
  if (seed < 0) throw ConfigError("[run] seed must be nonnegative");
  return static_cast<std::uint64_t>(seed);
}

std::size_t positive_count(const Config& cfg, std::string_view section, std::string_view key,
                           long long fallback) {
  const long long v = cfg.get_int(section, key, fallback);
  if (v < 1) throw ConfigError(fmt::format("[{}] {} must be at least 1", section, key));
  return static_cast<std::size_t>(v);
}

InputDistribution distribution(const Config& cfg) {
  InputDistribution dist = distribution_from_config(cfg);
  dist.validate();
  return dist;
}

std::optional<std::pair<double, double>> histogram_domain(const Config& cfg) {
  const std::string text = cfg.get_string("uq", "domain", "auto");
  if (text == "auto") return std::nullopt;
  const auto parts = split_list(text);
  if (parts.size() != 2) throw ConfigError("[uq] domain must be 'auto' or 'lo, hi'");
  return std::pair{parse_double(parts[0], "domain lo"), parse_double(parts[1], "domain hi")};
}

/// Per-run state: resolved configuration, output directory and manifest.
struct Run {
  Config cfg;
  fs::path out;
  RunManifest manifest;
  std::ostream& log;
  std::string manifest_tag;  // distinguishes repeated runs of one command in a directory

  void add_input(const fs::path& p) { manifest.inputs.push_back(record_file(p)); }

  void write(const std::string& name, std::string_view bytes) {
    const fs::path p = out / name;
    write_file(p, bytes);
    manifest.outputs.push_back(record_file(p));
    log << "wrote " << p.string() << '\n';
  }

  const std::string& file(const Invocation& inv, const std::string& key) const {
    const auto it = inv.files.find(key);
    if (it == inv.files.end() || it->second.empty()) {
      throw ConfigError(fmt::format("{}: missing required --{} file", inv.command, key));
    }
    return it->second;
  }
};

TrainingSet generate_training(Run& run) {
  const auto handle = make_full_model(run.cfg);
  const auto dist = distribution(run.cfg);
  const auto seed = run_seed(run.cfg);
  const auto ns = positive_count(run.cfg, "generate", "ns", 2366);
  run.manifest.seeds["generate"] = seed;
  const Eigen::MatrixXd inputs = sample_inputs(dist, ns, seed);
  const auto outputs = evaluate_full_model(handle.model, inputs);
  TrainingSet ts = assemble_training_set(inputs, outputs, seed, handle.provenance);
  run.write("training_set.nuqc", to_container(ts).to_bytes());
  if (run.cfg.get_bool("generate", "csv", false)) run.write("training_set.csv", training_set_csv(ts));
  return ts;
}

ReducedModel reduce_training(Run& run, const TrainingSet& ts) {
  const std::string method = run.cfg.get_string("reduce", "method", "kpca");
  const std::string selector_name = run.cfg.get_string("reduce", "selector", "energy");
  ComponentSelector selector;
  if (selector_name == "fixed") {
    selector = ComponentSelector::fixed(positive_count(run.cfg, "reduce", "components", 1));
  } else if (selector_name == "energy") {
    selector = ComponentSelector::energy(run.cfg.get_double("reduce", "energy", 0.8));
  } else {
    throw ConfigError("[reduce] selector must be fixed or energy");
  }
  ReducedModel model;
  if (method == "pca") {
    model = fit_pca(ts.outputs, selector);
  } else if (method == "kpca") {
    model = fit_kpca(ts.outputs, run.cfg.get_double("reduce", "beta", 0.1), selector);
  } else {
    throw ConfigError("unknown method '" + method + "' (expected pca or kpca)");
  }
  const auto& spec = spectrum(model);
  const auto k = latent_dim(model);
  std::string report = fmt::format("method = {}\nk = {}\n", method, k);
  if (spec.cwiseMax(0.0).sum() > 0.0) {
    report += fmt::format("energy_fraction = {:.17g}\n", energy_fraction(spec, k));
  } else {
    report += "energy_fraction = nan\n";
  }
  report += fmt::format("spectrum_total = {:.17g}\n", spec.cwiseMax(0.0).sum());
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(spec.size(), 10); ++i) {
    report += fmt::format("eigenvalue.{} = {:.17g}\n", i + 1, spec(i));
  }
  run.write("reduced.nuqc", to_container(model).to_bytes());
  run.write("energy.txt", report);
  run.log << report;
  return model;
}

SurrogateOptions surrogate_options(const Config& cfg) {
  SurrogateOptions o;
  o.srs.nodes_per_dim = positive_count(cfg, "fit", "nii", 10);
  o.srs.margin = cfg.get_double("fit", "margin", o.srs.margin);
  o.srs.lambda_rel = cfg.get_double("fit", "lambda_rel", o.srs.lambda_rel);
  if (cfg.get("fit", "lambda")) o.srs.lambda_abs = cfg.get_double("fit", "lambda", 0.0);
  o.srs.max_rank = positive_count(cfg, "fit", "max_rank", 20);
  o.srs.tol_alt = cfg.get_double("fit", "tol_alt", o.srs.tol_alt);
  o.srs.tol_greedy = cfg.get_double("fit", "tol_greedy", o.srs.tol_greedy);
  o.srs.max_alt_iters = positive_count(cfg, "fit", "max_alt_iters", 50);
  const std::string quad = cfg.get_string("fit", "quadrature", "uniform");
  if (quad == "uniform") {
    o.srs.quadrature = QuadratureMode::Uniform;
  } else if (quad == "voronoi") {
    o.srs.quadrature = QuadratureMode::Voronoi;
  } else {
    throw ConfigError("[fit] quadrature must be uniform or voronoi");
  }
  const std::string vario = cfg.get_string("fit", "variogram", "auto");
  if (vario == "manual") {
    o.ok.auto_variogram = false;
    o.ok.variogram.nugget = cfg.get_double("fit", "nugget", 0.0);
    o.ok.variogram.partial_sill = cfg.get_double("fit", "partial_sill", 1.0);
    o.ok.variogram.range = cfg.get_double("fit", "range", 1.0);
  } else if (vario != "auto") {
    throw ConfigError("[fit] variogram must be auto or manual");
  }
  o.ok.lag_bins = positive_count(cfg, "fit", "lag_bins", 15);
  return o;
}

std::vector<SurrogateKind> surrogate_kinds(const std::string& list) {
  std::vector<SurrogateKind> kinds;
  for (const auto& name : split_list(list)) kinds.push_back(parse_surrogate_kind(name));
  if (kinds.empty()) throw ConfigError("no surrogate selected");
  return kinds;
}

/// Screens inputs on every latent component; an input survives when any
/// component correlates with it above the threshold.
std::vector<std::size_t> screen(Run& run, const TrainingSet& ts, const Eigen::MatrixXd& latent,
                                json* summary) {
  std::vector<std::size_t> active;
  const auto dist = distribution(run.cfg);
  if (!run.cfg.get_bool("fit", "screen", true)) {
    for (std::size_t i = 0; i < ts.nd(); ++i) active.push_back(i);
    run.write("screening.txt", "screen = false\n");
    return active;
  }
  const double threshold = run.cfg.get_double("fit", "screen_threshold", 0.1);
  std::vector<bool> keep(ts.nd(), false);
  std::string report = fmt::format("threshold = {:.17g}\n", threshold);
  json rows = json::array();
  for (Eigen::Index c = 0; c < latent.cols(); ++c) {
    const ScreeningResult r = screen_inputs(latent.col(c), ts.inputs, threshold);
    for (std::size_t i = 0; i < ts.nd(); ++i) {
      keep[i] = keep[i] || r.keep[i];
      const std::string name = i < dist.nd() ? dist.dims[i].name : fmt::format("h{}", i + 1);
      report += fmt::format("component.{}.{} = {:.17g} {}\n", c + 1, name, r.coefficients[i],
                            r.keep[i] ? "keep" : "discard");
      rows.push_back({{"component", c + 1}, {"input", name}, {"spc", r.coefficients[i]},
                      {"keep", static_cast<bool>(r.keep[i])}});
    }
  }
  for (std::size_t i = 0; i < ts.nd(); ++i) {
    if (keep[i]) active.push_back(i);
  }
  if (active.empty()) throw ConfigError("screening discarded every input; lower [fit] screen_threshold");
  run.write("screening.txt", report);
  run.log << report;
  if (summary) (*summary)["screening"] = rows;
  return active;
}

std::vector<SurrogateBundle> fit_surrogates(Run& run, const TrainingSet& ts, const ReducedModel& model,
                                            const std::vector<SurrogateKind>& kinds, json* summary) {
  const Eigen::MatrixXd latent = training_latent(model, ts.outputs);
  if (latent.rows() != static_cast<Eigen::Index>(ts.ns())) {
    throw ConfigError("reduced model was fitted on a different training set");
  }
  const auto active = screen(run, ts, latent, summary);
  auto options = surrogate_options(run.cfg);
  std::vector<SurrogateBundle> bundles;
  for (const auto kind : kinds) {
    SurrogateBundle b = fit_bundle(kind, ts.inputs, latent, active, options);
    const std::string name(to_string(kind));
    std::string report;
    for (std::size_t c = 0; c < b.components.size(); ++c) {
      report += fmt::format("# component {}\n", c + 1) + diagnostics_report(b.components[c]);
    }
    run.write("surrogate_" + name + ".nuqc", to_container(b).to_bytes());
    run.write("diagnostics_" + name + ".txt", report);
    bundles.push_back(std::move(b));
  }
  return bundles;
}

json stats_json(const Eigen::VectorXd& samples, const Histogram& hist) {
  const StatsSummary s = summary_stats(samples);
  const ModeSplit m = find_mode_split(samples, hist.n_bins);
  return {{"n", s.n},
          {"mean", s.mean},
          {"variance", s.variance},
          {"std", s.std},
          {"dkl0", kl_reference(hist)},
          {"bimodal", m.bimodal},
          {"split", m.split},
          {"minor_mass", m.minor_mass()}};
}

double qoi(const Eigen::Ref<const Eigen::VectorXd>& x) { return qoi_average(x); }

// --- commands -------------------------------------------------------------

void cmd_generate(Run& run, const Invocation&) { generate_training(run); }

void cmd_reduce(Run& run, const Invocation& inv) {
  const auto& path = run.file(inv, "training");
  run.add_input(path);
  reduce_training(run, load_training_set(path));
}

void cmd_fit(Run& run, const Invocation& inv) {
  const auto& tpath = run.file(inv, "training");
  const auto& rpath = run.file(inv, "reduced");
  run.add_input(tpath);
  run.add_input(rpath);
  const TrainingSet ts = load_training_set(tpath);
  const ReducedModel model = reduced_model_from_container(Container::load(rpath));
  fit_surrogates(run, ts, model, surrogate_kinds(run.cfg.get_string("fit", "surrogate", "srs")),
                 nullptr);
}

void cmd_uq(Run& run, const Invocation& inv) {
  const auto& spath = run.file(inv, "surrogate");
  const auto& rpath = run.file(inv, "reduced");
  run.add_input(spath);
  run.add_input(rpath);
  const SurrogateBundle bundle = bundle_from_container(Container::load(spath));
  const ReducedModel model = reduced_model_from_container(Container::load(rpath));
  const auto dist = distribution(run.cfg);
  const auto n_mc = positive_count(run.cfg, "uq", "n_mc", 50000);
  const auto bins = positive_count(run.cfg, "uq", "bins", kDefaultBins);
  const auto seed = run_seed(run.cfg) + 1;
  run.manifest.seeds["uq"] = seed;
  const PropagationResult r = mc_propagate(bundle, model, qoi, dist, n_mc, seed);
  const Histogram h = build_histogram(r.qoi, bins, histogram_domain(run.cfg));
  const std::string name(to_string(bundle.kind));
  run.manifest_tag = name;
  json j = stats_json(r.qoi, h);
  j["surrogate"] = name;
  j["seed"] = seed;
  j["clamped"] = r.clamped;
  run.write("qoi_" + name + ".hist", histogram_to_text(h));
  run.write("stats_" + name + ".json", j.dump(2) + "\n");
  run.log << j.dump(2) << '\n';
}

void cmd_compare(Run& run, const Invocation& inv) {
  if (inv.positional.size() != 2) throw ConfigError("compare: expected two histogram files");
  run.add_input(inv.positional[0]);
  run.add_input(inv.positional[1]);
  const Histogram a = load_histogram(inv.positional[0]);
  const Histogram b = load_histogram(inv.positional[1]);
  const double kl_ab = kl_divergence(a, b);
  const double kl_ba = kl_divergence(b, a);
  const double d0 = kl_reference(a);
  json j = {{"kl_ab", kl_ab},
            {"kl_ba", kl_ba},
            {"dkl0_a", d0},
            {"dkl0_b", kl_reference(b)},
            {"relative_kl", d0 > 0.0 ? json(kl_ab / d0) : json(nullptr)}};
  run.write("compare.json", j.dump(2) + "\n");
  run.log << fmt::format("D(A||B) = {:.6g}\nD(B||A) = {:.6g}\nD0(A) = {:.6g}\n", kl_ab, kl_ba, d0);
}

void cmd_converge(Run& run, const Invocation&) {
  const auto handle = make_full_model(run.cfg);
  ConvergenceOptions o;
  o.schedule.start = positive_count(run.cfg, "converge", "start", 100);
  o.schedule.growth = run.cfg.get_double("converge", "growth", 1.5);
  o.schedule.max_ns = positive_count(run.cfg, "converge", "max_ns", 5000);
  o.kl_tol = run.cfg.get_double("converge", "kl_tol", 1e-2);
  o.n_bins = positive_count(run.cfg, "uq", "bins", kDefaultBins);
  o.beta = run.cfg.get_double("reduce", "beta", 0.1);
  o.seed = run_seed(run.cfg);
  run.manifest.seeds["converge"] = o.seed;
  const ConvergenceReport report = converge_sampling(handle.model, distribution(run.cfg), o);
  const std::string text = convergence_log(report);
  run.write("convergence.log", text);
  run.log << text;
}

void cmd_pipeline(Run& run, const Invocation&) {
  json summary;
  const TrainingSet ts = generate_training(run);
  summary["training"] = {{"ns", ts.ns()}, {"nd", ts.nd()}, {"d", ts.d()}};
  const ReducedModel model = reduce_training(run, ts);
  const auto& spec = spectrum(model);
  summary["reduction"] = {
      {"method", run.cfg.get_string("reduce", "method", "kpca")},
      {"k", latent_dim(model)},
      {"energy_fraction",
       spec.cwiseMax(0.0).sum() > 0.0 ? json(energy_fraction(spec, latent_dim(model))) : json(nullptr)}};

  const auto kinds = surrogate_kinds(run.cfg.get_string("pipeline", "surrogates", "srs,ok,prs"));
  const auto bundles = fit_surrogates(run, ts, model, kinds, &summary);

  const auto dist = distribution(run.cfg);
  const auto n_mc = positive_count(run.cfg, "uq", "n_mc", 50000);
  const auto bins = positive_count(run.cfg, "uq", "bins", kDefaultBins);
  const auto seed = run_seed(run.cfg) + 1;
  run.manifest.seeds["uq"] = seed;
  const Eigen::MatrixXd mc_inputs = sample_inputs(dist, n_mc, seed);

  std::vector<std::pair<std::string, PropagationResult>> results;
  for (const auto& b : bundles) {
    results.emplace_back(std::string(to_string(b.kind)), mc_propagate(b, model, qoi, mc_inputs));
  }
  std::optional<Eigen::VectorXd> oracle;
  if (run.cfg.get_bool("pipeline", "oracle", true)) {
    const auto handle = make_full_model(run.cfg);
    const auto xs = evaluate_full_model(handle.model, mc_inputs);
    Eigen::VectorXd values(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) values(static_cast<Eigen::Index>(i)) = qoi(xs[i]);
    oracle = std::move(values);
  }

  // One partition for every histogram so the comparisons need no rebinning.
  auto domain = histogram_domain(run.cfg);
  if (!domain) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& [name, r] : results) {
      lo = std::min(lo, r.qoi.minCoeff());
      hi = std::max(hi, r.qoi.maxCoeff());
    }
    if (oracle) {
      lo = std::min(lo, oracle->minCoeff());
      hi = std::max(hi, oracle->maxCoeff());
    }
    if (!(lo < hi)) {
      const double eps = std::max(std::abs(lo), 1.0) * 1e-9;
      lo -= eps;
      hi += eps;
    }
    domain = std::pair{lo, hi};
  }

  std::optional<Histogram> oracle_hist;
  std::optional<StatsSummary> oracle_stats;
  if (oracle) {
    oracle_hist = build_histogram(*oracle, bins, domain);
    oracle_stats = summary_stats(*oracle);
    summary["oracle"] = stats_json(*oracle, *oracle_hist);
    run.write("qoi_oracle.hist", histogram_to_text(*oracle_hist));
  }
  for (const auto& [name, r] : results) {
    const Histogram h = build_histogram(r.qoi, bins, domain);
    json j = stats_json(r.qoi, h);
    j["clamped"] = r.clamped;
    if (oracle) {
      const double kl = kl_divergence(*oracle_hist, h);
      const double d0 = kl_reference(*oracle_hist);
      j["kl_to_oracle"] = kl;
      j["relative_kl"] = d0 > 0.0 ? json(kl / d0) : json(nullptr);
      j["mean_error_over_std"] =
          oracle_stats->std > 0.0 ? json(std::abs(j["mean"].get<double>() - oracle_stats->mean) / oracle_stats->std)
                                  : json(nullptr);
    }
    summary["surrogates"][name] = j;
    run.write("qoi_" + name + ".hist", histogram_to_text(h));
  }
  summary["n_mc"] = n_mc;
  summary["bins"] = bins;
  run.write("summary.json", summary.dump(2) + "\n");
  run.log << summary.dump(2) << '\n';
}

using Handler = void (*)(Run&, const Invocation&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"generate", cmd_generate}, {"reduce", cmd_reduce},   {"fit", cmd_fit},
      {"uq", cmd_uq},             {"compare", cmd_compare}, {"converge", cmd_converge},
      {"pipeline", cmd_pipeline}};
  return table;
}

}  // namespace

Config default_config() {
  Config cfg = Config::parse(kBaseDefaults, "<defaults>");
  cfg.merge(distribution_to_config(default_distribution()));
  cfg.merge(synthetic_spec_to_config(SyntheticModelSpec{}));
  return cfg;
}

RunManifest execute(const Invocation& inv, std::ostream& log) {
  const auto it = handlers().find(inv.command);
  if (it == handlers().end()) throw ConfigError("unknown command '" + inv.command + "'");
  const auto start = std::chrono::steady_clock::now();
  Run run{Config::parse(inv.config_text, "<resolved>"), inv.out_dir, {}, log, {}};
  run.manifest.invocation = inv;
  run.manifest.config_hash = fnv1a_hex(inv.config_text);
  run.manifest.tool_version = NUQ_VERSION;
  fs::create_directories(inv.out_dir);
  it->second(run, inv);
  run.manifest.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string suffix = run.manifest_tag.empty() ? "" : "_" + run.manifest_tag;
  write_file(inv.out_dir / ("manifest_" + inv.command + suffix + ".json"),
             manifest_to_json(run.manifest));
  return run.manifest;
}

std::vector<std::string> replay(const RunManifest& manifest, const fs::path& out_dir,
                                std::ostream& log) {
  if (fnv1a_hex(manifest.invocation.config_text) != manifest.config_hash) {
    throw IoError("manifest config hash does not match its configuration text");
  }
  for (const auto& in : manifest.inputs) {
    if (record_file(in.path).hash != in.hash) {
      throw IoError("replay input changed since the recorded run: " + in.path);
    }
  }
  Invocation inv = manifest.invocation;
  inv.out_dir = out_dir;
  std::ostringstream quiet;
  const RunManifest again = execute(inv, quiet);
  std::map<std::string, std::string> produced;
  for (const auto& r : again.outputs) produced[fs::path(r.path).filename().string()] = r.hash;
  std::vector<std::string> differing;
  for (const auto& r : manifest.outputs) {
    const std::string name = fs::path(r.path).filename().string();
    const auto found = produced.find(name);
    const bool same = found != produced.end() && found->second == r.hash;
    log << (same ? "identical " : "differs   ") << name << '\n';
    if (!same) differing.push_back(name);
  }
  return differing;
}

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<long long> seed;
  std::optional<std::string> method;
  std::optional<std::string> surrogate;
  std::optional<long long> n_mc;
  std::optional<double> kl_tol;
  std::optional<long long> bins;
  std::optional<double> beta;
  std::optional<long long> ns;
  std::map<std::string, std::string> files;
  std::vector<std::string> positional;
};

fs::path default_out_dir() {
  if (const char* env = std::getenv("NUQ_OUT_DIR"); env && *env) return env;
  return "nuq_out";
}

std::string absolute(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

Invocation resolve(const std::string& command, const Flags& f) {
  Config cfg = default_config();
  if (!f.config.empty()) {
    const Config user = Config::load(f.config);
    if (!user.sections_with_prefix("dim ").empty()) cfg.remove_sections_with_prefix("dim ");
    cfg.merge(user);
  }
  if (f.seed) cfg.set("run", "seed", std::to_string(*f.seed));
  if (f.method) cfg.set("reduce", "method", *f.method);
  if (f.surrogate) {
    cfg.set("fit", "surrogate", *f.surrogate);
    cfg.set("pipeline", "surrogates", *f.surrogate);
  }
  if (f.n_mc) cfg.set("uq", "n_mc", std::to_string(*f.n_mc));
  if (f.kl_tol) cfg.set("converge", "kl_tol", fmt::format("{}", *f.kl_tol));
  if (f.bins) cfg.set("uq", "bins", std::to_string(*f.bins));
  if (f.beta) cfg.set("reduce", "beta", fmt::format("{}", *f.beta));
  if (f.ns) cfg.set("generate", "ns", std::to_string(*f.ns));

  Invocation inv;
  inv.command = command;
  inv.config_text = cfg.to_string();
  inv.out_dir = fs::absolute(f.out.empty() ? default_out_dir() : fs::path(f.out)).lexically_normal();
  for (const auto& [k, v] : f.files) {
    if (!v.empty()) inv.files[k] = absolute(v);
  }
  for (const auto& p : f.positional) inv.positional.push_back(absolute(p));
  return inv;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Configuration file (key = value with [sections])");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--out", f.out, "Output directory (default: $NUQ_OUT_DIR or ./nuq_out)");
  sub->add_option("--method", f.method, "Dimensionality reduction: pca or kpca");
  sub->add_option("--surrogate", f.surrogate, "Surrogate(s): srs, ok, prs (comma list)");
  sub->add_option("--n-mc", f.n_mc, "Monte Carlo sample count");
  sub->add_option("--kl-tol", f.kl_tol, "Convergence tolerance on the KL divergence");
  sub->add_option("--bins", f.bins, "Histogram bin count");
  sub->add_option("--beta", f.beta, "Gaussian kernel width for kpca");
  sub->add_option("--ns", f.ns, "Training set size");
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"nuq: surrogate-based uncertainty quantification with nonlinear dimensionality reduction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(NUQ_VERSION));

  Flags flags;
  std::string manifest_path;
  std::string replay_out;
  auto* generate = app.add_subcommand("generate", "Sample inputs and run the full model");
  auto* reduce = app.add_subcommand("reduce", "Fit pca or kpca on a training set");
  auto* fit = app.add_subcommand("fit", "Fit surrogates from inputs to latent coordinates");
  auto* uq = app.add_subcommand("uq", "Monte Carlo propagation through a surrogate");
  auto* compare = app.add_subcommand("compare", "KL divergence between two histogram files");
  auto* converge = app.add_subcommand("converge", "Grow the training set until the latent histogram settles");
  auto* pipeline = app.add_subcommand("pipeline", "generate, reduce, fit, uq and compare in one run");
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare its outputs");
  for (auto* sub : {generate, reduce, fit, uq, compare, converge, pipeline}) add_common(sub, flags);
  for (auto* sub : {reduce, fit}) sub->add_option("--training", flags.files["training"], "Training set file");
  for (auto* sub : {fit, uq}) sub->add_option("--reduced", flags.files["reduced"], "Reduced model file");
  uq->add_option("--model", flags.files["surrogate"], "Surrogate model file");
  compare->add_option("histograms", flags.positional, "Histogram files A and B")->expected(2)->required();
  replay_cmd->add_option("manifest", manifest_path, "Manifest written by an earlier run")->required();
  replay_cmd->add_option("--out", replay_out, "Directory for the re-run (default: <out_dir>/replay)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (replay_cmd->parsed()) {
      const RunManifest m = manifest_from_json(read_file(manifest_path));
      const fs::path out = replay_out.empty() ? m.invocation.out_dir / "replay" : fs::path(replay_out);
      const auto differing = replay(m, fs::absolute(out).lexically_normal(), std::cout);
      if (!differing.empty()) {
        std::cerr << "replay: " << differing.size() << " output(s) differ\n";
        return 3;
      }
      return 0;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    execute(resolve(command, flags), std::cout);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace nuq::cli
