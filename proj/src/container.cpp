#include "nuq/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nuq/error.hpp"

namespace nuq {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'N', 'U', 'Q', 'C'};

enum class Tag : std::uint8_t { Int = 1, Real = 2, String = 3, Matrix = 4 };

template <class T>
void append(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void append_str(std::string& out, std::string_view s) {
  append<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T read() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string read_str() {
    const auto n = read<std::uint32_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  void read_doubles(double* dst, std::size_t count) {
    need(count * sizeof(double));
    std::memcpy(dst, bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError("container truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Container::expect_kind(std::string_view expected) const {
  if (kind_ != expected) {
    throw IoError("expected a '" + std::string(expected) + "' container, found '" + kind_ + "'");
  }
}

void Container::put(std::string_view name, Value v) {
  for (auto& [k, existing] : entries_) {
    if (k == name) {
      existing = std::move(v);
      return;
    }
  }
  entries_.emplace_back(std::string(name), std::move(v));
}

void Container::put_int(std::string_view name, std::int64_t v) { put(name, v); }
void Container::put_real(std::string_view name, double v) { put(name, v); }
void Container::put_string(std::string_view name, std::string v) { put(name, std::move(v)); }

void Container::put_matrix(std::string_view name, const Eigen::MatrixXd& m, Order order) {
  put(name, MatrixEntry{m, order});
}

void Container::put_vector(std::string_view name, const Eigen::VectorXd& v) {
  put(name, MatrixEntry{Eigen::MatrixXd(v), Order::ColMajor});
}

bool Container::contains(std::string_view name) const {
  for (const auto& [k, v] : entries_) {
    if (k == name) return true;
  }
  return false;
}

const Container::Value& Container::at(std::string_view name) const {
  for (const auto& [k, v] : entries_) {
    if (k == name) return v;
  }
  throw IoError("container '" + kind_ + "' has no entry '" + std::string(name) + "'");
}

std::int64_t Container::get_int(std::string_view name) const {
  if (const auto* v = std::get_if<std::int64_t>(&at(name))) return *v;
  throw IoError("entry '" + std::string(name) + "' is not an integer");
}

double Container::get_real(std::string_view name) const {
  if (const auto* v = std::get_if<double>(&at(name))) return *v;
  throw IoError("entry '" + std::string(name) + "' is not a real");
}

const std::string& Container::get_string(std::string_view name) const {
  if (const auto* v = std::get_if<std::string>(&at(name))) return *v;
  throw IoError("entry '" + std::string(name) + "' is not a string");
}

const Eigen::MatrixXd& Container::get_matrix(std::string_view name) const {
  if (const auto* v = std::get_if<MatrixEntry>(&at(name))) return v->value;
  throw IoError("entry '" + std::string(name) + "' is not a matrix");
}

Eigen::VectorXd Container::get_vector(std::string_view name) const {
  const auto& m = get_matrix(name);
  if (m.cols() != 1 && m.size() != 0) {
    throw IoError("entry '" + std::string(name) + "' is not a vector");
  }
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

std::string Container::to_bytes() const {
  std::string out(kMagic, sizeof(kMagic));
  append<std::uint32_t>(out, kVersion);
  append_str(out, kind_);
  append<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, value] : entries_) {
    append_str(out, name);
    std::visit(
        [&out](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::int64_t>) {
            append(out, Tag::Int);
            append(out, v);
          } else if constexpr (std::is_same_v<T, double>) {
            append(out, Tag::Real);
            append(out, v);
          } else if constexpr (std::is_same_v<T, std::string>) {
            append(out, Tag::String);
            append_str(out, v);
          } else {
            append(out, Tag::Matrix);
            append<std::uint64_t>(out, static_cast<std::uint64_t>(v.value.rows()));
            append<std::uint64_t>(out, static_cast<std::uint64_t>(v.value.cols()));
            append(out, static_cast<char>(v.order));
            if (v.order == Order::ColMajor) {
              out.append(reinterpret_cast<const char*>(v.value.data()),
                         v.value.size() * sizeof(double));
            } else {
              const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm =
                  v.value;
              out.append(reinterpret_cast<const char*>(rm.data()), rm.size() * sizeof(double));
            }
          }
        },
        value);
  }
  return out;
}

Container Container::from_bytes(std::string_view bytes) {
  Reader r(bytes);
  char magic[4];
  for (auto& c : magic) c = r.read<char>();
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw IoError("not a nuq container");
  const auto version = r.read<std::uint32_t>();
  if (version != kVersion) {
    throw IoError("unsupported container version " + std::to_string(version));
  }
  Container c(r.read_str());
  const auto count = r.read<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.read_str();
    switch (static_cast<Tag>(r.read<std::uint8_t>())) {
      case Tag::Int:
        c.put_int(name, r.read<std::int64_t>());
        break;
      case Tag::Real:
        c.put_real(name, r.read<double>());
        break;
      case Tag::String:
        c.put_string(name, r.read_str());
        break;
      case Tag::Matrix: {
        const auto rows = static_cast<Eigen::Index>(r.read<std::uint64_t>());
        const auto cols = static_cast<Eigen::Index>(r.read<std::uint64_t>());
        const auto order = static_cast<Order>(r.read<char>());
        if (order == Order::ColMajor) {
          Eigen::MatrixXd m(rows, cols);
          r.read_doubles(m.data(), static_cast<std::size_t>(m.size()));
          c.put_matrix(name, m, order);
        } else if (order == Order::RowMajor) {
          Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
          r.read_doubles(m.data(), static_cast<std::size_t>(m.size()));
          c.put_matrix(name, m, order);
        } else {
          throw IoError("bad matrix order tag in entry '" + name + "'");
        }
        break;
      }
      default:
        throw IoError("unknown entry type in '" + name + "'");
    }
  }
  if (!r.done()) throw IoError("trailing bytes after container");
  return c;
}

void Container::save(const std::filesystem::path& path) const { write_file(path, to_bytes()); }

Container Container::load(const std::filesystem::path& path) {
  return from_bytes(read_file(path));
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace nuq
