#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nuq/convergence.hpp"
#include "nuq/dataset.hpp"
#include "nuq/dimred.hpp"
#include "nuq/error.hpp"
#include "nuq/surrogate.hpp"
#include "nuq/synthetic.hpp"
#include "nuq/uq.hpp"

namespace py = pybind11;
using namespace nuq;

namespace {

// Holds either reduction so Python sees a single class.
struct PyReducedModel {
  ReducedModel model;

  std::string method() const { return std::holds_alternative<PcaModel>(model) ? "pca" : "kpca"; }
};

InputDistribution make_distribution(const std::vector<double>& means, const std::vector<double>& stds) {
  if (means.size() != stds.size()) throw ConfigError("means and stds differ in length");
  InputDistribution dist;
  for (std::size_t i = 0; i < means.size(); ++i) {
    dist.dims.push_back({"h" + std::to_string(i + 1), means[i], stds[i], Law::Normal});
  }
  dist.validate();
  return dist;
}

ComponentSelector make_selector(std::optional<std::size_t> k, double energy) {
  return k ? ComponentSelector::fixed(*k) : ComponentSelector::energy(energy);
}

}  // namespace

PYBIND11_MODULE(_nuq, m) {
  m.doc() = "Surrogate-based uncertainty quantification with kernel PCA.";
  m.attr("__version__") = NUQ_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<SyntheticModelSpec>(m, "SyntheticModelSpec")
      .def(py::init<>())
      .def_readwrite("d", &SyntheticModelSpec::d)
      .def_readwrite("scale", &SyntheticModelSpec::scale)
      .def_readwrite("switch_quantile", &SyntheticModelSpec::switch_quantile)
      .def_readwrite("switch_width", &SyntheticModelSpec::switch_width)
      .def_readwrite("h3_mean", &SyntheticModelSpec::h3_mean)
      .def_readwrite("h3_std", &SyntheticModelSpec::h3_std)
      .def("switch_threshold", &SyntheticModelSpec::switch_threshold);

  m.def("synthetic_crash",
        [](const Eigen::VectorXd& h, const SyntheticModelSpec& spec) { return synthetic_crash(h, spec); },
        py::arg("h"), py::arg("spec") = SyntheticModelSpec{});

  m.def("sample_inputs",
        [](std::size_t n, std::uint64_t seed, std::vector<double> means, std::vector<double> stds) {
          return sample_inputs(make_distribution(means, stds), n, seed);
        },
        py::arg("n"), py::arg("seed") = 1, py::arg("means") = std::vector<double>{1.2, 1.2, 1.2},
        py::arg("stds") = std::vector<double>{0.12, 0.12, 0.12},
        "n x nd matrix of independent normal inputs; row i depends only on (seed, i).");

  py::class_<PyReducedModel>(m, "ReducedModel")
      .def_property_readonly("method", &PyReducedModel::method)
      .def_property_readonly("k", [](const PyReducedModel& r) { return latent_dim(r.model); })
      .def_property_readonly("spectrum", [](const PyReducedModel& r) { return spectrum(r.model); })
      .def("energy_fraction", [](const PyReducedModel& r) { return energy_fraction(spectrum(r.model), latent_dim(r.model)); })
      .def("forward", [](const PyReducedModel& r, const Eigen::VectorXd& x) { return forward(r.model, x); })
      .def("backward", [](const PyReducedModel& r, const Eigen::VectorXd& z) { return backward(r.model, z); })
      .def("backward_many", [](const PyReducedModel& r, const Eigen::MatrixXd& z) { return backward_many(r.model, z); },
           "Backward map of every column of a k x m matrix.")
      .def("training_latent", [](const PyReducedModel& r, const Eigen::MatrixXd& outputs) { return training_latent(r.model, outputs); })
      .def("save", [](const PyReducedModel& r, const std::string& path) { to_container(r.model).save(path); })
      .def_static("load", [](const std::string& path) { return PyReducedModel{reduced_model_from_container(Container::load(path))}; });

  m.def("fit_pca",
        [](const Eigen::MatrixXd& outputs, std::optional<std::size_t> k, double energy) {
          return PyReducedModel{fit_pca(outputs, make_selector(k, energy))};
        },
        py::arg("outputs"), py::arg("k") = py::none(), py::arg("energy") = 0.8,
        "outputs is d x ns, one sample per column.");
  m.def("fit_kpca",
        [](const Eigen::MatrixXd& outputs, double beta, std::optional<std::size_t> k, double energy) {
          return PyReducedModel{fit_kpca(outputs, beta, make_selector(k, energy))};
        },
        py::arg("outputs"), py::arg("beta") = 0.1, py::arg("k") = py::none(), py::arg("energy") = 0.8);

  py::class_<SurrogateBundle>(m, "Surrogate")
      .def_property_readonly("kind", [](const SurrogateBundle& b) { return std::string(to_string(b.kind)); })
      .def_readonly("active_inputs", &SurrogateBundle::active_inputs)
      .def("__call__", [](const SurrogateBundle& b, const Eigen::VectorXd& h) { return b.evaluate(h, nullptr); })
      .def("diagnostics", [](const SurrogateBundle& b) {
        std::string out;
        for (const auto& c : b.components) out += diagnostics_report(c);
        return out;
      })
      .def("save", [](const SurrogateBundle& b, const std::string& path) { to_container(b).save(path); })
      .def_static("load", [](const std::string& path) { return bundle_from_container(Container::load(path)); });

  m.def("fit_surrogate",
        [](const std::string& kind, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& latent,
           std::optional<std::vector<std::size_t>> active, std::size_t nii) {
          std::vector<std::size_t> dims;
          if (active) {
            dims = *active;
          } else {
            for (Eigen::Index i = 0; i < inputs.cols(); ++i) dims.push_back(static_cast<std::size_t>(i));
          }
          SurrogateOptions o;
          o.srs.nodes_per_dim = nii;
          return fit_bundle(parse_surrogate_kind(kind), inputs, latent, dims, o);
        },
        py::arg("kind"), py::arg("inputs"), py::arg("latent"), py::arg("active_inputs") = py::none(),
        py::arg("nii") = 10, "kind is 'srs', 'ok' or 'prs'; latent is ns x k.");

  m.def("propagate",
        [](const SurrogateBundle& b, const PyReducedModel& r, const Eigen::MatrixXd& inputs) {
          return mc_propagate(b, r.model, [](const auto& x) { return qoi_average(x); }, inputs).qoi;
        },
        py::arg("surrogate"), py::arg("reduced"), py::arg("inputs"),
        "QoI (component average of the reconstructed output) for every input row.");

  py::class_<Histogram>(m, "Histogram")
      .def_readonly("lo", &Histogram::lo)
      .def_readonly("hi", &Histogram::hi)
      .def_readonly("n_bins", &Histogram::n_bins)
      .def_readonly("freqs", &Histogram::freqs)
      .def_readonly("sample_count", &Histogram::sample_count)
      .def("to_text", [](const Histogram& h) { return histogram_to_text(h); });

  m.def("histogram",
        [](const Eigen::VectorXd& samples, std::size_t bins, std::optional<std::pair<double, double>> domain) {
          return build_histogram(samples, bins, domain);
        },
        py::arg("samples"), py::arg("bins") = kDefaultBins, py::arg("domain") = py::none());
  m.def("kl_divergence",
        [](const Histogram& p, const Histogram& q, bool smooth) { return kl_divergence(p, q, KlOptions{smooth}); },
        py::arg("p"), py::arg("q"), py::arg("smooth") = true);
  m.def("kl_reference", &kl_reference, py::arg("p"));
  m.def("spearman", [](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return spearman(u, v); });

  m.def("summary_stats", [](const Eigen::VectorXd& v) {
    const auto s = summary_stats(v);
    py::dict d;
    d["mean"] = s.mean;
    d["variance"] = s.variance;
    d["std"] = s.std;
    d["n"] = s.n;
    return d;
  });
  m.def("mode_split",
        [](const Eigen::VectorXd& v, std::size_t bins) {
          const auto s = find_mode_split(v, bins);
          py::dict d;
          d["bimodal"] = s.bimodal;
          d["split"] = s.split;
          d["minor_mass"] = s.minor_mass();
          return d;
        },
        py::arg("samples"), py::arg("bins") = kDefaultBins);

  m.def("converge_sampling",
        [](const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& model, std::size_t start,
           double growth, std::size_t max_ns, double kl_tol, std::uint64_t seed) {
          ConvergenceOptions o;
          o.schedule = {start, growth, max_ns};
          o.kl_tol = kl_tol;
          o.seed = seed;
          const FullModel full = [&](const Eigen::Ref<const Eigen::VectorXd>& h) { return model(h); };
          return convergence_log(converge_sampling(full, default_distribution(), o));
        },
        py::arg("model"), py::arg("start") = 100, py::arg("growth") = 1.5, py::arg("max_ns") = 5000,
        py::arg("kl_tol") = 1e-2, py::arg("seed") = 0,
        "Runs the sampling-size driver on a Python callable h -> x and returns the log text.");
}
