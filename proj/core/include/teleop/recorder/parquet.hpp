#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace teleop::parquet {

using Bytes = std::vector<uint8_t>;

class ParquetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The column shapes the dataset needs. Everything is REQUIRED and written
// uncompressed with PLAIN encoding in a single row group.
enum class ColumnKind {
  float64,       // DOUBLE
  uint32,        // INT32 annotated UINT_32
  uint64,        // INT64 annotated UINT_64
  float32_list,  // LIST of required FLOAT
};

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::float64;
  std::vector<double> f64;
  std::vector<uint64_t> ints;
  std::vector<std::vector<float>> lists;

  std::size_t rows() const;
  friend bool operator==(const Column&, const Column&) = default;
};

struct Table {
  std::vector<Column> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().rows(); }
  /// Throws ParquetError if absent.
  const Column& column(const std::string& name) const;
  bool has(const std::string& name) const;
  friend bool operator==(const Table&, const Table&) = default;
};

/// Serializes a complete file. Throws ParquetError if the columns disagree
/// on row count or a uint32 value does not fit.
Bytes write(const Table& table);

/// Reads files with the layout write() produces: flat required columns and
/// three-level lists, PLAIN pages, uncompressed, any number of row groups
/// and data pages. Throws ParquetError on anything else.
Table read(std::span<const uint8_t> bytes);

}  // namespace teleop::parquet
