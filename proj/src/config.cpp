#include "nuq/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "nuq/error.hpp"

namespace nuq {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

const std::string* Config::Section::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  std::string current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                          ": unterminated section header");
      }
      current = std::string(trim(line.substr(1, line.size() - 2)));
      cfg.section_mut(current);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.set(current, key, std::string(trim(line.substr(eq + 1))));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const Config::Section* Config::section(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::vector<const Config::Section*> Config::sections_with_prefix(std::string_view prefix) const {
  std::vector<const Section*> out;
  for (const auto& s : sections_) {
    if (s.name.starts_with(prefix)) out.push_back(&s);
  }
  return out;
}

std::optional<std::string> Config::get(std::string_view section_name,
                                       std::string_view key) const {
  if (const auto* s = section(section_name)) {
    if (const auto* v = s->find(key)) return *v;
  }
  return std::nullopt;
}

std::string Config::get_string(std::string_view s, std::string_view key,
                               std::string_view fallback) const {
  auto v = get(s, key);
  return v ? *v : std::string(fallback);
}

double Config::get_double(std::string_view s, std::string_view key, double fallback) const {
  auto v = get(s, key);
  return v ? parse_double(*v, key) : fallback;
}

long long Config::get_int(std::string_view s, std::string_view key, long long fallback) const {
  auto v = get(s, key);
  return v ? parse_int(*v, key) : fallback;
}

bool Config::get_bool(std::string_view s, std::string_view key, bool fallback) const {
  auto v = get(s, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1" || *v == "on") return true;
  if (*v == "false" || *v == "no" || *v == "0" || *v == "off") return false;
  throw ConfigError("invalid boolean for '" + std::string(key) + "': " + *v);
}

Config::Section& Config::section_mut(std::string_view name) {
  for (auto& s : sections_) {
    if (s.name == name) return s;
  }
  sections_.push_back(Section{std::string(name), {}});
  return sections_.back();
}

void Config::set(std::string_view section_name, std::string_view key, std::string value) {
  auto& s = section_mut(section_name);
  for (auto& [k, v] : s.entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  s.entries.emplace_back(std::string(key), std::move(value));
}

void Config::merge(const Config& other) {
  for (const auto& s : other.sections_) {
    section_mut(s.name);
    for (const auto& [k, v] : s.entries) set(s.name, k, v);
  }
}

void Config::remove_sections_with_prefix(std::string_view prefix) {
  std::erase_if(sections_, [&](const Section& s) { return s.name.starts_with(prefix); });
}

std::string Config::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& s : sections_) {
    if (s.entries.empty() && s.name.empty()) continue;
    if (!s.name.empty()) {
      if (!first) out << '\n';
      out << '[' << s.name << "]\n";
    }
    for (const auto& [k, v] : s.entries) out << k << " = " << v << '\n';
    first = false;
  }
  return out.str();
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("invalid number for '" + std::string(what) + "': " + std::string(text));
  }
  return value;
}

long long parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  long long value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid integer for '" + std::string(what) + "': " + std::string(text));
  }
  return value;
}

}  // namespace nuq
