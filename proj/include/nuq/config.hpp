#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nuq {

/// Plain-text key-value configuration.
///
///     # comment
///     seed = 7              (keys before any header live in section "")
///     [dim h1]
///     mean = 1.2
///     std  = 0.12
///
/// Section and key order is preserved; to_string() emits a canonical form
/// that is stable under re-parsing and is what run manifests hash.
class Config {
 public:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(std::string_view key) const;
  };

  static Config parse(std::string_view text, std::string_view origin = "<string>");
  static Config load(const std::filesystem::path& path);

  const Section* section(std::string_view name) const;
  /// Sections whose name starts with `prefix`, in file order.
  std::vector<const Section*> sections_with_prefix(std::string_view prefix) const;
  const std::vector<Section>& sections() const { return sections_; }

  std::optional<std::string> get(std::string_view section, std::string_view key) const;
  std::string get_string(std::string_view section, std::string_view key,
                         std::string_view fallback) const;
  double get_double(std::string_view section, std::string_view key, double fallback) const;
  long long get_int(std::string_view section, std::string_view key, long long fallback) const;
  bool get_bool(std::string_view section, std::string_view key, bool fallback) const;

  void set(std::string_view section, std::string_view key, std::string value);
  /// Appends `other`'s entries, overriding keys already present.
  void merge(const Config& other);
  void remove_sections_with_prefix(std::string_view prefix);

  std::string to_string() const;

 private:
  Section& section_mut(std::string_view name);

  std::vector<Section> sections_;
};

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

}  // namespace nuq
