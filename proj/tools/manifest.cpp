#include "manifest.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "nuq/container.hpp"
#include "nuq/error.hpp"

namespace nuq::cli {

using nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

FileRecord record_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  return {std::filesystem::absolute(path).lexically_normal().string(), fnv1a_hex(bytes),
          static_cast<std::uint64_t>(bytes.size())};
}

namespace {

json records_to_json(const std::vector<FileRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back({{"path", r.path}, {"hash", r.hash}, {"bytes", r.bytes}});
  return out;
}

std::vector<FileRecord> records_from_json(const json& j) {
  std::vector<FileRecord> out;
  for (const auto& r : j) {
    out.push_back({r.at("path").get<std::string>(), r.at("hash").get<std::string>(),
                   r.at("bytes").get<std::uint64_t>()});
  }
  return out;
}

}  // namespace

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["command"] = m.invocation.command;
  j["files"] = m.invocation.files;
  j["positional"] = m.invocation.positional;
  j["out_dir"] = m.invocation.out_dir.string();
  j["config"] = m.invocation.config_text;
  j["config_hash"] = m.config_hash;
  j["seeds"] = m.seeds;
  j["inputs"] = records_to_json(m.inputs);
  j["outputs"] = records_to_json(m.outputs);
  j["tool_version"] = m.tool_version;
  j["wall_time_s"] = m.wall_time_s;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.invocation.command = j.at("command").get<std::string>();
    m.invocation.files = j.at("files").get<std::map<std::string, std::string>>();
    m.invocation.positional = j.at("positional").get<std::vector<std::string>>();
    m.invocation.out_dir = j.at("out_dir").get<std::string>();
    m.invocation.config_text = j.at("config").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.inputs = records_from_json(j.at("inputs"));
    m.outputs = records_from_json(j.at("outputs"));
    m.tool_version = j.at("tool_version").get<std::string>();
    m.wall_time_s = j.at("wall_time_s").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
}

}  // namespace nuq::cli
