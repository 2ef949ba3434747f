#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nuq::cli {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct FileRecord {
  std::string path;  // absolute
  std::string hash;
  std::uint64_t bytes = 0;
};

FileRecord record_file(const std::filesystem::path& path);

/// Everything needed to run one command again: the resolved configuration,
/// file-valued options and positional arguments.
struct Invocation {
  std::string command;
  std::map<std::string, std::string> files;
  std::vector<std::string> positional;
  std::string config_text;
  std::filesystem::path out_dir;
};

struct RunManifest {
  Invocation invocation;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
  std::string tool_version;
  double wall_time_s = 0.0;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(std::string_view text);

}  // namespace nuq::cli
