#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace nuq {

/// Self-describing binary container shared by training sets and all models.
///
/// Layout (little-endian):
///   "NUQC" | u32 version | str kind | u32 entry_count | entries...
///   entry  = str name | u8 type | payload
///   str    = u32 length | bytes
///   type 1 = i64, 2 = f64, 3 = str,
///   type 4 = matrix: u64 rows | u64 cols | u8 order ('C' column-major,
///            'R' row-major) | rows*cols f64 in that order
/// Reals are stored as raw binary64, so save/load is lossless.
class Container {
 public:
  enum class Order : char { ColMajor = 'C', RowMajor = 'R' };

  struct MatrixEntry {
    Eigen::MatrixXd value;
    Order order = Order::ColMajor;
  };
  using Value = std::variant<std::int64_t, double, std::string, MatrixEntry>;

  static constexpr std::uint32_t kVersion = 1;

  Container() = default;
  explicit Container(std::string kind) : kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }
  /// Throws IoError unless the container carries `expected` as its kind tag.
  void expect_kind(std::string_view expected) const;

  void put_int(std::string_view name, std::int64_t v);
  void put_real(std::string_view name, double v);
  void put_string(std::string_view name, std::string v);
  void put_matrix(std::string_view name, const Eigen::MatrixXd& m,
                  Order order = Order::ColMajor);
  void put_vector(std::string_view name, const Eigen::VectorXd& v);

  bool contains(std::string_view name) const;
  std::int64_t get_int(std::string_view name) const;
  double get_real(std::string_view name) const;
  const std::string& get_string(std::string_view name) const;
  const Eigen::MatrixXd& get_matrix(std::string_view name) const;
  Eigen::VectorXd get_vector(std::string_view name) const;

  const std::vector<std::pair<std::string, Value>>& entries() const { return entries_; }

  std::string to_bytes() const;
  static Container from_bytes(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static Container load(const std::filesystem::path& path);

 private:
  const Value& at(std::string_view name) const;
  void put(std::string_view name, Value v);

  std::string kind_;
  std::vector<std::pair<std::string, Value>> entries_;
};

/// Writes `bytes` to `path`, creating parent directories; IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace nuq
