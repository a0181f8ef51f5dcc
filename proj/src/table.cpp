#include "resbit/table.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "resbit/errors.hpp"

namespace resbit {

std::optional<std::size_t> Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("matrix storage holds " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(rows_ * cols_));
  }
}

bool CsvReader::next(Row& record) {
  record.clear();
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return false;

  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  while (true) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw FormatError("unterminated quoted field in CSV record " + std::to_string(records_ + 1));
      record.push_back(std::move(field));
      break;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"' && field.empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
    } else if (ch == delimiter_) {
      record.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && in_.peek() == '\n') in_.get();
      record.push_back(std::move(field));
      break;
    } else {
      field.push_back(ch);
    }
    c = in_.get();
  }
  ++records_;
  return true;
}

void write_csv_record(std::ostream& out, std::span<const std::string> fields, char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.put(delimiter);
    const auto& f = fields[i];
    const bool needs_quotes = f.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
    if (!needs_quotes) {
      out << f;
      continue;
    }
    out.put('"');
    for (char ch : f) {
      if (ch == '"') out.put('"');
      out.put(ch);
    }
    out.put('"');
  }
  out.put('\n');
}

Table read_csv(std::istream& in, char delimiter) {
  CsvReader reader(in, delimiter);
  Table table;
  if (!reader.next(table.header)) throw FormatError("CSV input is empty (no header row)");
  Row record;
  while (reader.next(record)) {
    if (record.size() == 1 && record.front().empty() && table.header.size() > 1) continue;
    if (record.size() != table.header.size()) {
      throw FormatError("CSV record " + std::to_string(reader.records_read()) + " has " +
                        std::to_string(record.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(record));
    record = Row{};
  }
  return table;
}

Table read_csv_file(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(in, delimiter);
}

void write_csv(std::ostream& out, const Table& table, char delimiter) {
  write_csv_record(out, table.header, delimiter);
  for (const auto& row : table.rows) write_csv_record(out, row, delimiter);
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string format_double17(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("'" + std::string(text) + "' is not a number");
  }
  return value;
}

void write_matrix_csv(std::ostream& out, const Matrix& m, char delimiter) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c > 0) out.put(delimiter);
      out << format_double17(m(r, c));
    }
    out.put('\n');
  }
}

Matrix read_matrix_csv(std::istream& in, char delimiter) {
  CsvReader reader(in, delimiter);
  Row record;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  while (reader.next(record)) {
    if (record.size() == 1 && record.front().empty()) continue;
    if (rows == 0) {
      cols = record.size();
    } else if (record.size() != cols) {
      throw FormatError("matrix CSV row " + std::to_string(reader.records_read()) + " has " +
                        std::to_string(record.size()) + " values, expected " + std::to_string(cols));
    }
    for (const auto& f : record) values.push_back(parse_double(f));
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

namespace {

constexpr std::array<char, 4> kMagic{'R', 'B', 'I', 'T'};

void put_le(std::ostream& out, std::uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((value >> (8 * i)) & 0xFF));
}

bool get_le(std::istream& in, std::uint64_t& value, int bytes) {
  std::array<unsigned char, 8> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), bytes);
  if (in.gcount() != bytes) return false;
  value = 0;
  for (int i = bytes; i-- > 0;) value = (value << 8) | buf[static_cast<std::size_t>(i)];
  return true;
}

}  // namespace

void write_matrix_header(std::ostream& out, std::size_t cols) {
  out.write(kMagic.data(), kMagic.size());
  put_le(out, kMatrixFormatVersion, 2);
  put_le(out, 0, 2);
  put_le(out, cols, 8);
}

void write_matrix_rows(std::ostream& out, const Matrix& m) {
  for (double v : m.values()) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
}

void write_matrix_binary(std::ostream& out, const Matrix& m) {
  write_matrix_header(out, m.cols());
  write_matrix_rows(out, m);
}

std::size_t read_matrix_header(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kMagic) throw FormatError("binary matrix lacks the RBIT magic");
  std::uint64_t version = 0;
  std::uint64_t reserved = 0;
  std::uint64_t cols = 0;
  if (!get_le(in, version, 2) || !get_le(in, reserved, 2) || !get_le(in, cols, 8)) {
    throw FormatError("truncated binary matrix header");
  }
  if (version != kMatrixFormatVersion) {
    throw FormatError("unsupported binary matrix version " + std::to_string(version));
  }
  return static_cast<std::size_t>(cols);
}

bool read_matrix_row(std::istream& in, std::span<double> row) {
  if (row.empty()) return false;
  std::uint64_t bits = 0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (!get_le(in, bits, 8)) {
      if (c == 0 && in.gcount() == 0) return false;
      throw FormatError("binary matrix payload ends inside a row");
    }
    row[c] = std::bit_cast<double>(bits);
  }
  return true;
}

Matrix read_matrix_binary(std::istream& in) {
  const auto cols = read_matrix_header(in);
  if (cols == 0) {
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("binary matrix with zero columns carries data");
    return Matrix(0, 0);
  }
  std::vector<double> values;
  std::vector<double> row(cols);
  std::size_t rows = 0;
  while (read_matrix_row(in, row)) {
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

}  // namespace resbit
