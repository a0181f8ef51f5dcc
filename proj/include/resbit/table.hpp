#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace resbit {

using Row = std::vector<std::string>;

// String-valued table with a header row, as read from CSV.
struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::size_t column_count() const noexcept { return header.size(); }
};

// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// RFC 4180-style CSV: quoted fields, doubled quotes, CRLF or LF endings.
class CsvReader {
 public:
  CsvReader(std::istream& in, char delimiter = ',') : in_(in), delimiter_(delimiter) {}
  // Reads one record; returns false at end of input.
  bool next(Row& record);
  std::size_t records_read() const noexcept { return records_; }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t records_ = 0;
};

void write_csv_record(std::ostream& out, std::span<const std::string> fields, char delimiter = ',');

// Whole-table helpers. The first record is the header; every record must
// have the header's field count (FormatError otherwise).
Table read_csv(std::istream& in, char delimiter = ',');
Table read_csv_file(const std::string& path, char delimiter = ',');
void write_csv(std::ostream& out, const Table& table, char delimiter = ',');

// Shortest decimal that reads back to the same double.
std::string format_double(double value);
// 17 significant digits, as used for transformed-matrix CSV.
std::string format_double17(double value);
// Throws FormatError on anything that is not a complete decimal number.
double parse_double(std::string_view text);

// Matrix CSV: one row per line, no header, 17 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& m, char delimiter = ',');
Matrix read_matrix_csv(std::istream& in, char delimiter = ',');

// Framed binary matrix:
//   bytes 0..3   magic "RBIT"
//   bytes 4..5   format version, u16 little-endian (currently 1)
//   bytes 6..7   reserved, zero
//   bytes 8..15  column count, u64 little-endian
//   then row-major IEEE-754 f64 little-endian values until end of stream.
// The row count follows from the payload size, which allows streaming.
inline constexpr std::uint16_t kMatrixFormatVersion = 1;
void write_matrix_header(std::ostream& out, std::size_t cols);
void write_matrix_rows(std::ostream& out, const Matrix& m);
void write_matrix_binary(std::ostream& out, const Matrix& m);
Matrix read_matrix_binary(std::istream& in);
// Incremental reading: header first, then one row at a time. read_matrix_row
// returns false at a clean end of stream and throws FormatError on a partial
// row.
std::size_t read_matrix_header(std::istream& in);
bool read_matrix_row(std::istream& in, std::span<double> row);

}  // namespace resbit
