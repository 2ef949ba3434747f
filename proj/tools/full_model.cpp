#include "full_model.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "nuq/container.hpp"
#include "nuq/error.hpp"
#include "nuq/synthetic.hpp"

namespace nuq::cli {

namespace {

std::string replace_all(std::string text, std::string_view key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

Eigen::VectorXd run_external(const std::string& command, const Eigen::Ref<const Eigen::VectorXd>& h) {
  static std::atomic<unsigned> counter{0};
  const auto dir = std::filesystem::temp_directory_path();
  const auto stem = fmt::format("nuq-{}-{}", ::getpid(), counter++);
  const auto in_path = dir / (stem + ".in");
  const auto out_path = dir / (stem + ".out");
  std::string row;
  for (Eigen::Index i = 0; i < h.size(); ++i) row += fmt::format("{}{:.17g}", i ? " " : "", h(i));
  write_file(in_path, row + "\n");
  const std::string cmd = replace_all(replace_all(command, "{input}", in_path.string()), "{output}",
                                      out_path.string());
  const int status = std::system(cmd.c_str());
  std::filesystem::remove(in_path);
  if (status != 0) {
    std::filesystem::remove(out_path);
    throw NumericalError(fmt::format("external model exited with status {}", status));
  }
  std::istringstream in(read_file(out_path));
  std::filesystem::remove(out_path);
  std::vector<double> values;
  for (std::string tok; in >> tok;) values.push_back(parse_double(tok, "external model output"));
  if (values.empty()) throw NumericalError("external model produced no output");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

ModelHandle make_full_model(const Config& cfg) {
  const std::string kind = cfg.get_string("model", "kind", "synthetic");
  if (kind == "synthetic") {
    const SyntheticModelSpec spec = synthetic_spec_from_config(cfg);
    return {[spec](const Eigen::Ref<const Eigen::VectorXd>& h) { return synthetic_crash(h, spec); },
            fmt::format("synthetic v{} d={}", spec.version, spec.d)};
  }
  if (kind == "external") {
    const std::string command = cfg.get_string("model", "command", "");
    if (command.empty()) throw ConfigError("[model] command is required for kind = external");
    return {[command](const Eigen::Ref<const Eigen::VectorXd>& h) { return run_external(command, h); },
            "external: " + command};
  }
  throw ConfigError("unknown [model] kind '" + kind + "' (expected synthetic or external)");
}

}  // namespace nuq::cli
