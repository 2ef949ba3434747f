#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "manifest.hpp"
#include "nuq/config.hpp"

namespace nuq::cli {

/// Built-in defaults every run starts from.
Config default_config();

/// Runs one fully resolved command and returns its manifest, which is also
/// written to <out_dir>/manifest_<command>.json (uq appends _<surrogate>).
RunManifest execute(const Invocation& inv, std::ostream& log);

/// Re-executes a manifest into `out_dir` and compares every recorded output
/// by content hash. Returns the names of outputs that differ.
std::vector<std::string> replay(const RunManifest& manifest, const std::filesystem::path& out_dir,
                                std::ostream& log);

/// Command-line entry point; returns the process exit code
/// (0 ok, 2 configuration, 3 numerical or replay mismatch, 4 I/O).
int run(int argc, char** argv);

}  // namespace nuq::cli
