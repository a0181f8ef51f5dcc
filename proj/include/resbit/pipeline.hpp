#pragma once

// Fit / transform / inverse pipeline for mixed tabular data.
//
// Output layout: numerical columns first (schema order), then each
// categorical column's code bits (schema order). Every categorical bit b is
// log-clamped to log(max(b, floor)) before a per-dimension quantile-to-normal
// map is applied to the whole concatenated vector.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "resbit/encoding.hpp"
#include "resbit/quantile.hpp"
#include "resbit/table.hpp"

namespace resbit {

enum class ColumnKind { numerical, categorical };

std::string_view to_string(ColumnKind kind) noexcept;

inline constexpr std::string_view kMaskedLabel = "__masked__";
inline constexpr std::string_view kOutOfIndexLabel = "__out_of_index__";
inline constexpr double kDefaultClampFloor = 1e-30;

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numerical;
  Scheme scheme = Scheme::resbit;  // ignored for numerical columns
  double min_frequency = 0.0;      // rare-label masking threshold, in [0, 1)

  static ColumnSchema numerical(std::string name);
  static ColumnSchema categorical(std::string name, Scheme scheme, double min_frequency = 0.0);

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

// Throws SchemaError on duplicate names or a threshold outside [0, 1).
void validate_schemas(const std::vector<ColumnSchema>& schemas);

// Schema JSON:
//   {"columns": [{"name": "age", "kind": "numerical"},
//                {"name": "state", "kind": "categorical",
//                 "scheme": "resbit", "min_frequency": 0.001}]}
std::vector<ColumnSchema> schemas_from_json(const nlohmann::json& doc);
nlohmann::json schemas_to_json(const std::vector<ColumnSchema>& schemas);
std::vector<ColumnSchema> read_schema_file(const std::string& path);

struct LayoutEntry {
  std::size_t column;  // index into FittedPipeline::columns()
  std::size_t offset;
  std::size_t width;

  friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

// Missing numeric tokens: "", "NA", "NaN", "nan", "null". Such fields are
// imputed with the column's training mean.
bool is_missing_numeric(std::string_view field);

class FittedPipeline {
 public:
  const std::vector<ColumnSchema>& columns() const noexcept { return columns_; }
  // Category space for column i; nullopt for numerical columns.
  const std::optional<CategorySpace>& space(std::size_t column) const { return spaces_.at(column); }
  const CategorySpace& space(std::string_view name) const;
  // Mean used to impute missing values in numerical column i.
  double numeric_fill(std::size_t column) const { return fills_.at(column); }
  const std::vector<LayoutEntry>& layout() const noexcept { return layout_; }
  const std::vector<QuantileTable>& quantile_tables() const noexcept { return tables_; }
  double clamp_floor() const noexcept { return clamp_floor_; }
  std::size_t width() const noexcept { return width_; }

  // Log-clamped value of a bit: log(max(bit, floor)).
  double bit_level(std::uint8_t bit) const;
  // Decision threshold between the two bit levels.
  double bit_threshold() const;

  // Encoded, log-clamped values before the quantile map. Exposed so callers
  // can drive the quantile stage directly.
  std::vector<double> encode_row(const Row& record, const std::vector<std::size_t>& source_columns) const;
  // Resolves schema columns against a table header; SchemaError if missing.
  std::vector<std::size_t> bind(const std::vector<std::string>& header) const;

  nlohmann::json to_json() const;
  static FittedPipeline from_json(const nlohmann::json& doc);
  std::string serialize() const;
  static FittedPipeline deserialize(std::string_view text);
  void save(const std::string& path) const;
  static FittedPipeline load(const std::string& path);

  friend FittedPipeline fit(const Table& rows, const std::vector<ColumnSchema>& schemas,
                            double clamp_floor);

 private:
  std::vector<ColumnSchema> columns_;
  std::vector<std::optional<CategorySpace>> spaces_;
  std::vector<double> fills_;
  std::vector<LayoutEntry> layout_;
  std::vector<QuantileTable> tables_;
  double clamp_floor_ = kDefaultClampFloor;
  std::size_t width_ = 0;

  void build_layout();
};

FittedPipeline fit(const Table& rows, const std::vector<ColumnSchema>& schemas,
                   double clamp_floor = kDefaultClampFloor);

// Rows are bound to columns by header name. Data-parallel across rows when
// threads > 1; output does not depend on the thread count.
Matrix transform(const Table& rows, const FittedPipeline& pipeline, unsigned threads = 1);

struct InverseResult {
  Table rows;  // header = schema column names, in schema order
  // Out-of-index decodes per schema column (binary scheme only can be > 0).
  std::vector<std::uint64_t> out_of_index;
  // One-hot patterns that did not threshold to exactly one set bit. One-hot
  // columns decode by argmax of the recovered values either way.
  std::vector<std::uint64_t> malformed;
};

InverseResult inverse_transform(const Matrix& matrix, const FittedPipeline& pipeline,
                                unsigned threads = 1);

struct ColumnCardinality {
  std::string name;
  std::uint64_t cardinality = 0;
  std::uint64_t onehot_dims = 0;
  std::uint64_t binary_dims = 0;
  std::uint64_t resbit_dims = 0;
};

struct SurveyReport {
  std::vector<ColumnCardinality> columns;
  std::uint64_t total_cardinality = 0;
  std::uint64_t onehot_dims = 0;
  std::uint64_t binary_dims = 0;
  std::uint64_t resbit_dims = 0;
};

SurveyReport survey_from_cardinalities(
    const std::vector<std::pair<std::string, std::uint64_t>>& cardinalities);
// Distinct raw labels per categorical column (no masking).
SurveyReport cardinality_survey(const Table& rows, const std::vector<ColumnSchema>& schemas);

struct ColumnCoverage {
  std::string name;
  std::uint64_t generated_distinct = 0;
  std::uint64_t training_distinct = 0;
  double ratio = 0.0;
};

struct CoverageReport {
  std::vector<ColumnCoverage> columns;
  double mean_ratio = 0.0;  // 0 when there are no categorical columns
};

// Distinct generated labels over distinct training labels, per categorical
// column. Generated labels are folded through the fitted vocabulary the same
// way transform folds them (unseen -> masked category when masking is on);
// the out-of-index sentinel is never counted.
CoverageReport coverage_ratio(const Table& generated, const FittedPipeline& pipeline);

}  // namespace resbit
