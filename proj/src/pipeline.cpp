#include "resbit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "resbit/errors.hpp"
#include "resbit/parallel.hpp"

namespace resbit {
namespace {

constexpr int kPipelineFormatVersion = 1;
constexpr const char* kPipelineFormatName = "resbit.pipeline";

ColumnKind parse_kind(std::string_view name) {
  if (name == "numerical") return ColumnKind::numerical;
  if (name == "categorical") return ColumnKind::categorical;
  throw SchemaError("unknown column kind '" + std::string(name) +
                    "' (expected numerical|categorical)");
}

std::vector<std::uint8_t> to_bits(std::span<const double> levels, double threshold) {
  std::vector<std::uint8_t> bits(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) bits[i] = levels[i] >= threshold ? 1 : 0;
  return bits;
}

double parse_numeric_field(const std::string& field, const std::string& column) {
  try {
    const double v = parse_double(field);
    if (!std::isfinite(v)) throw FormatError("non-finite");
    return v;
  } catch (const FormatError&) {
    throw FormatError("column '" + column + "': '" + field + "' is not a finite number");
  }
}

}  // namespace

std::string_view to_string(ColumnKind kind) noexcept {
  return kind == ColumnKind::numerical ? "numerical" : "categorical";
}

ColumnSchema ColumnSchema::numerical(std::string name) {
  return ColumnSchema{std::move(name), ColumnKind::numerical, Scheme::resbit, 0.0};
}

ColumnSchema ColumnSchema::categorical(std::string name, Scheme scheme, double min_frequency) {
  return ColumnSchema{std::move(name), ColumnKind::categorical, scheme, min_frequency};
}

void validate_schemas(const std::vector<ColumnSchema>& schemas) {
  std::set<std::string> seen;
  for (const auto& s : schemas) {
    if (s.name.empty()) throw SchemaError("column schema with an empty name");
    if (!seen.insert(s.name).second) throw SchemaError("duplicate column '" + s.name + "' in schema");
    if (!(s.min_frequency >= 0.0 && s.min_frequency < 1.0)) {
      throw SchemaError("column '" + s.name + "': min_frequency must lie in [0, 1)");
    }
  }
}

std::vector<ColumnSchema> schemas_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array()) {
    throw SchemaError("schema document needs a \"columns\" array");
  }
  std::vector<ColumnSchema> out;
  for (const auto& col : doc["columns"]) {
    if (!col.is_object() || !col.contains("name") || !col["name"].is_string()) {
      throw SchemaError("schema column entries need a string \"name\"");
    }
    ColumnSchema s;
    s.name = col["name"].get<std::string>();
    s.kind = parse_kind(col.value("kind", std::string("numerical")));
    if (s.kind == ColumnKind::categorical) {
      s.scheme = parse_scheme(col.value("scheme", std::string("resbit")));
      const auto& mf = col.contains("min_frequency") ? col["min_frequency"] : nlohmann::json(0.0);
      if (!mf.is_number()) throw SchemaError("column '" + s.name + "': min_frequency must be a number");
      s.min_frequency = mf.get<double>();
    } else if (col.contains("scheme")) {
      throw SchemaError("numerical column '" + s.name + "' must not carry a scheme");
    }
    out.push_back(std::move(s));
  }
  validate_schemas(out);
  return out;
}

nlohmann::json schemas_to_json(const std::vector<ColumnSchema>& schemas) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& s : schemas) {
    nlohmann::json c = {{"name", s.name}, {"kind", std::string(to_string(s.kind))}};
    if (s.kind == ColumnKind::categorical) {
      c["scheme"] = std::string(to_string(s.scheme));
      c["min_frequency"] = s.min_frequency;
    }
    cols.push_back(std::move(c));
  }
  return nlohmann::json{{"columns", std::move(cols)}};
}

std::vector<ColumnSchema> read_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("schema '" + path + "' is not valid JSON: " + e.what());
  }
  return schemas_from_json(doc);
}

bool is_missing_numeric(std::string_view field) {
  return field.empty() || field == "NA" || field == "NaN" || field == "nan" || field == "null";
}

const CategorySpace& FittedPipeline::space(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name && spaces_[i]) return *spaces_[i];
  }
  throw SchemaError("no categorical column named '" + std::string(name) + "'");
}

double FittedPipeline::bit_level(std::uint8_t bit) const {
  return std::log(std::max(static_cast<double>(bit), clamp_floor_));
}

double FittedPipeline::bit_threshold() const { return 0.5 * (bit_level(0) + bit_level(1)); }

void FittedPipeline::build_layout() {
  layout_.clear();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].kind != ColumnKind::numerical) continue;
    layout_.push_back({i, offset, 1});
    offset += 1;
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].kind != ColumnKind::categorical) continue;
    const auto width = dims(spaces_[i]->class_count(), columns_[i].scheme);
    layout_.push_back({i, offset, width});
    offset += width;
  }
  width_ = offset;
}

std::vector<std::size_t> FittedPipeline::bind(const std::vector<std::string>& header) const {
  std::unordered_map<std::string_view, std::size_t> positions;
  for (std::size_t i = 0; i < header.size(); ++i) positions.emplace(header[i], i);
  std::vector<std::size_t> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) {
    auto it = positions.find(c.name);
    if (it == positions.end()) throw SchemaError("column '" + c.name + "' not present in input header");
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> FittedPipeline::encode_row(const Row& record,
                                               const std::vector<std::size_t>& source_columns) const {
  std::vector<double> out(width());
  for (const auto& entry : layout_) {
    const auto& schema = columns_[entry.column];
    const auto& field = record.at(source_columns[entry.column]);
    if (schema.kind == ColumnKind::numerical) {
      out[entry.offset] = is_missing_numeric(field) ? fills_[entry.column]
                                                    : parse_numeric_field(field, schema.name);
      continue;
    }
    const auto& space = *spaces_[entry.column];
    auto index = space.find(field);
    if (!index) index = space.masked_index();
    if (!index) {
      throw VocabularyError("unseen label '" + field + "' in column '" + schema.name + "'");
    }
    const auto bits = schema.scheme == Scheme::resbit ? encode_resbit(*index, space.layout())
                                                      : encode(*index, space.class_count(), schema.scheme);
    for (std::size_t b = 0; b < bits.size(); ++b) out[entry.offset + b] = bit_level(bits[b]);
  }
  return out;
}

FittedPipeline fit(const Table& rows, const std::vector<ColumnSchema>& schemas, double clamp_floor) {
  validate_schemas(schemas);
  if (rows.rows.empty()) throw DomainError("cannot fit on a dataset with no rows");
  if (!(clamp_floor > 0.0 && clamp_floor < 1.0)) throw DomainError("clamp floor must lie in (0, 1)");

  FittedPipeline p;
  p.columns_ = schemas;
  p.clamp_floor_ = clamp_floor;
  p.spaces_.resize(schemas.size());
  p.fills_.assign(schemas.size(), 0.0);
  const auto source = p.bind(rows.header);
  const double n = static_cast<double>(rows.rows.size());

  for (std::size_t c = 0; c < schemas.size(); ++c) {
    const auto& schema = schemas[c];
    const auto col = source[c];
    if (schema.kind == ColumnKind::numerical) {
      double sum = 0.0;
      std::size_t present = 0;
      for (const auto& row : rows.rows) {
        const auto& field = row.at(col);
        if (is_missing_numeric(field)) continue;
        sum += parse_numeric_field(field, schema.name);
        ++present;
      }
      if (present == 0) throw DomainError("numerical column '" + schema.name + "' has no values");
      p.fills_[c] = sum / static_cast<double>(present);
      continue;
    }

    std::unordered_map<std::string, std::size_t> counts;
    bool all_missing = true;
    for (const auto& row : rows.rows) {
      ++counts[row.at(col)];
      all_missing = all_missing && row[col].empty();
    }
    if (all_missing) throw DomainError("categorical column '" + schema.name + "' has no values");

    const std::string sentinel(kMaskedLabel);
    bool masked_any = false;
    for (const auto& [label, count] : counts) {
      if (static_cast<double>(count) / n < schema.min_frequency) masked_any = true;
    }
    if (masked_any && counts.contains(sentinel) &&
        static_cast<double>(counts[sentinel]) / n >= schema.min_frequency) {
      throw SchemaError("column '" + schema.name + "' already contains the reserved label '" + sentinel + "'");
    }

    std::vector<std::string> labels;
    std::unordered_set<std::string> seen;
    for (const auto& row : rows.rows) {
      const auto& raw = row[col];
      const bool rare = static_cast<double>(counts[raw]) / n < schema.min_frequency;
      const std::string& label = rare ? sentinel : raw;
      if (seen.insert(label).second) labels.push_back(label);
    }
    p.spaces_[c].emplace(std::move(labels), masked_any ? std::optional<std::string>(sentinel) : std::nullopt);
  }

  p.build_layout();

  // Pre-quantile training values, column-major per output dimension.
  std::vector<std::vector<double>> columns(p.width());
  for (auto& v : columns) v.reserve(rows.rows.size());
  for (const auto& row : rows.rows) {
    const auto encoded = p.encode_row(row, source);
    for (std::size_t d = 0; d < encoded.size(); ++d) columns[d].push_back(encoded[d]);
  }
  p.tables_.reserve(columns.size());
  for (const auto& values : columns) p.tables_.push_back(QuantileTable::fit(values));
  return p;
}

Matrix transform(const Table& rows, const FittedPipeline& pipeline, unsigned threads) {
  const auto source = pipeline.bind(rows.header);
  Matrix out(rows.rows.size(), pipeline.width());
  const auto& tables = pipeline.quantile_tables();
  parallel_slices(rows.rows.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto encoded = pipeline.encode_row(rows.rows[r], source);
      auto dst = out.row(r);
      for (std::size_t d = 0; d < encoded.size(); ++d) dst[d] = tables[d].to_normal(encoded[d]);
    }
  });
  return out;
}

InverseResult inverse_transform(const Matrix& matrix, const FittedPipeline& pipeline, unsigned threads) {
  if (matrix.cols() != pipeline.width()) {
    throw ShapeError("matrix has " + std::to_string(matrix.cols()) + " columns, pipeline layout has " +
                     std::to_string(pipeline.width()));
  }
  const auto& columns = pipeline.columns();
  const auto& tables = pipeline.quantile_tables();
  const double threshold = pipeline.bit_threshold();

  InverseResult result;
  for (const auto& c : columns) result.rows.header.push_back(c.name);
  result.rows.rows.assign(matrix.rows(), Row(columns.size()));

  struct Tally {
    std::vector<std::uint64_t> ooi, malformed;
  };
  // One tally per row slice, merged in slice order.
  std::mutex tally_mutex;
  std::map<std::size_t, Tally> by_slice;

  parallel_slices(matrix.rows(), threads, [&](std::size_t begin, std::size_t end) {
    Tally tally{std::vector<std::uint64_t>(columns.size(), 0), std::vector<std::uint64_t>(columns.size(), 0)};
    std::vector<double> levels;
    for (std::size_t r = begin; r < end; ++r) {
      const auto src = matrix.row(r);
      auto& dst = result.rows.rows[r];
      for (const auto& entry : pipeline.layout()) {
        const auto& schema = columns[entry.column];
        if (schema.kind == ColumnKind::numerical) {
          dst[entry.column] = format_double(tables[entry.offset].from_normal(src[entry.offset]));
          continue;
        }
        const auto& space = *pipeline.space(entry.column);
        levels.resize(entry.width);
        for (std::size_t b = 0; b < entry.width; ++b) {
          levels[b] = tables[entry.offset + b].from_normal(src[entry.offset + b]);
        }
        const auto bits = to_bits(levels, threshold);
        ClassIndex index = 0;
        switch (schema.scheme) {
          case Scheme::resbit:
            index = decode_resbit(bits, space.layout());
            break;
          case Scheme::binary: {
            const auto decoded = decode_binary(bits, space.class_count());
            if (std::holds_alternative<OutOfIndex>(decoded)) {
              ++tally.ooi[entry.column];
              dst[entry.column] = std::string(kOutOfIndexLabel);
              continue;
            }
            index = std::get<ClassIndex>(decoded);
            break;
          }
          case Scheme::onehot:
            if (!try_decode_onehot(bits)) ++tally.malformed[entry.column];
            index = static_cast<ClassIndex>(std::max_element(levels.begin(), levels.end()) - levels.begin());
            break;
        }
        dst[entry.column] = space.label(index);
      }
    }
    std::lock_guard lock(tally_mutex);
    by_slice.emplace(begin, std::move(tally));
  });

  result.out_of_index.assign(columns.size(), 0);
  result.malformed.assign(columns.size(), 0);
  for (const auto& [begin, tally] : by_slice) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      result.out_of_index[c] += tally.ooi[c];
      result.malformed[c] += tally.malformed[c];
    }
  }
  return result;
}

nlohmann::json FittedPipeline::to_json() const {
  nlohmann::json doc;
  doc["format"] = kPipelineFormatName;
  doc["version"] = kPipelineFormatVersion;
  doc["clamp_floor"] = clamp_floor_;
  doc["columns"] = schemas_to_json(columns_)["columns"];

  nlohmann::json spaces = nlohmann::json::array();
  nlohmann::json fills = nlohmann::json::array();
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (spaces_[i]) {
      const auto& s = *spaces_[i];
      nlohmann::json js;
      js["class_count"] = s.class_count();
      js["block_lengths"] = s.block_lengths();
      js["labels"] = s.labels();
      js["masked_label"] = s.masked_label() ? nlohmann::json(*s.masked_label()) : nlohmann::json(nullptr);
      spaces.push_back(std::move(js));
      fills.push_back(nullptr);
    } else {
      spaces.push_back(nullptr);
      fills.push_back(fills_[i]);
    }
  }
  doc["spaces"] = std::move(spaces);
  doc["numeric_fill"] = std::move(fills);

  nlohmann::json layout = nlohmann::json::array();
  for (const auto& e : layout_) {
    layout.push_back({{"column", columns_[e.column].name}, {"offset", e.offset}, {"width", e.width}});
  }
  doc["layout"] = std::move(layout);

  nlohmann::json quantiles = nlohmann::json::array();
  for (const auto& t : tables_) quantiles.push_back(t.knots());
  doc["quantiles"] = std::move(quantiles);
  return doc;
}

FittedPipeline FittedPipeline::from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("format", std::string()) != kPipelineFormatName) {
      throw FormatError("not a fitted pipeline document");
    }
    if (doc.at("version").get<int>() != kPipelineFormatVersion) {
      throw FormatError("unsupported pipeline version " + doc.at("version").dump());
    }
    FittedPipeline p;
    p.clamp_floor_ = doc.at("clamp_floor").get<double>();
    p.columns_ = schemas_from_json(nlohmann::json{{"columns", doc.at("columns")}});
    const auto& spaces = doc.at("spaces");
    const auto& fills = doc.at("numeric_fill");
    if (spaces.size() != p.columns_.size() || fills.size() != p.columns_.size()) {
      throw FormatError("pipeline spaces/numeric_fill do not match the column list");
    }
    p.spaces_.resize(p.columns_.size());
    p.fills_.assign(p.columns_.size(), 0.0);
    for (std::size_t i = 0; i < p.columns_.size(); ++i) {
      if (p.columns_[i].kind == ColumnKind::numerical) {
        p.fills_[i] = fills[i].get<double>();
        continue;
      }
      const auto& js = spaces[i];
      std::optional<std::string> masked;
      if (!js.at("masked_label").is_null()) masked = js.at("masked_label").get<std::string>();
      p.spaces_[i].emplace(js.at("labels").get<std::vector<std::string>>(), std::move(masked));
      if (js.at("block_lengths").get<std::vector<unsigned>>() != p.spaces_[i]->block_lengths() ||
          js.at("class_count").get<std::uint64_t>() != p.spaces_[i]->class_count()) {
        throw FormatError("stored block lengths disagree with column '" + p.columns_[i].name + "'");
      }
    }
    p.build_layout();
    const auto& layout = doc.at("layout");
    if (layout.size() != p.layout_.size()) throw FormatError("pipeline layout length mismatch");
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto& e = p.layout_[i];
      if (layout[i].at("column").get<std::string>() != p.columns_[e.column].name ||
          layout[i].at("offset").get<std::size_t>() != e.offset ||
          layout[i].at("width").get<std::size_t>() != e.width) {
        throw FormatError("pipeline layout entry " + std::to_string(i) + " is inconsistent");
      }
    }
    const auto& quantiles = doc.at("quantiles");
    const std::size_t width = p.layout_.empty() ? 0 : p.layout_.back().offset + p.layout_.back().width;
    if (quantiles.size() != width) throw FormatError("pipeline has the wrong number of quantile tables");
    for (const auto& q : quantiles) p.tables_.push_back(QuantileTable::from_knots(q.get<std::vector<double>>()));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed pipeline document: ") + e.what());
  } catch (const SchemaError& e) {
    throw FormatError(std::string("malformed pipeline document: ") + e.what());
  }
}

std::string FittedPipeline::serialize() const { return to_json().dump(1) + "\n"; }

FittedPipeline FittedPipeline::deserialize(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("pipeline is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

void FittedPipeline::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << serialize();
  if (!out) throw IoError("failed writing '" + path + "'");
}

FittedPipeline FittedPipeline::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open pipeline '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

SurveyReport survey_from_cardinalities(
    const std::vector<std::pair<std::string, std::uint64_t>>& cardinalities) {
  SurveyReport report;
  for (const auto& [name, m] : cardinalities) {
    ColumnCardinality c{name, m, 0, 0, 0};
    if (m > 0) {
      c.onehot_dims = dims(m, Scheme::onehot);
      c.binary_dims = dims(m, Scheme::binary);
      c.resbit_dims = dims(m, Scheme::resbit);
    }
    report.total_cardinality += c.cardinality;
    report.onehot_dims += c.onehot_dims;
    report.binary_dims += c.binary_dims;
    report.resbit_dims += c.resbit_dims;
    report.columns.push_back(std::move(c));
  }
  return report;
}

SurveyReport cardinality_survey(const Table& rows, const std::vector<ColumnSchema>& schemas) {
  validate_schemas(schemas);
  std::vector<std::pair<std::string, std::uint64_t>> cards;
  for (const auto& s : schemas) {
    if (s.kind != ColumnKind::categorical) continue;
    auto col = rows.column_index(s.name);
    if (!col) throw SchemaError("column '" + s.name + "' not present in input header");
    std::unordered_set<std::string_view> distinct;
    for (const auto& row : rows.rows) distinct.insert(row[*col]);
    cards.emplace_back(s.name, distinct.size());
  }
  return survey_from_cardinalities(cards);
}

CoverageReport coverage_ratio(const Table& generated, const FittedPipeline& pipeline) {
  CoverageReport report;
  const auto& columns = pipeline.columns();
  double sum = 0.0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].kind != ColumnKind::categorical) continue;
    const auto col = generated.column_index(columns[c].name);
    if (!col) throw SchemaError("column '" + columns[c].name + "' not present in generated data");
    const auto& space = *pipeline.space(c);
    std::unordered_set<ClassIndex> known;
    std::unordered_set<std::string_view> unknown;
    for (const auto& row : generated.rows) {
      const auto& label = row[*col];
      auto index = space.find(label);
      if (!index && label == kOutOfIndexLabel) continue;
      if (!index) index = space.masked_index();
      if (index) {
        known.insert(*index);
      } else {
        unknown.insert(label);
      }
    }
    ColumnCoverage cov{columns[c].name, known.size() + unknown.size(), space.class_count(), 0.0};
    cov.ratio = static_cast<double>(cov.generated_distinct) / static_cast<double>(cov.training_distinct);
    sum += cov.ratio;
    report.columns.push_back(std::move(cov));
  }
  if (!report.columns.empty()) report.mean_ratio = sum / static_cast<double>(report.columns.size());
  return report;
}

}  // namespace resbit
