#pragma once

#include <string>

#include "nuq/config.hpp"
#include "nuq/convergence.hpp"

namespace nuq::cli {

struct ModelHandle {
  FullModel model;
  std::string provenance;
};

/// `[model] kind = synthetic` uses the `[synthetic]` section. `kind = external`
/// runs `[model] command` once per sample after substituting {input} and
/// {output} with paths of whitespace-separated text files holding h and x.
ModelHandle make_full_model(const Config& cfg);

}  // namespace nuq::cli
