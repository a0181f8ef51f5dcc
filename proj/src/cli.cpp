#include "resbit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "resbit/collapse.hpp"
#include "resbit/encoding.hpp"
#include "resbit/errors.hpp"
#include "resbit/ooi.hpp"
#include "resbit/pipeline.hpp"
#include "resbit/table.hpp"

namespace resbit::cli {
namespace {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level_from_env() {
  const char* raw = std::getenv("RESBIT_LOG");
  if (raw == nullptr) return LogLevel::warn;
  const std::string_view v(raw);
  if (v == "error") return LogLevel::error;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err), level_(log_level_from_env()) {}

  void log(LogLevel level, const std::string& message) const {
    if (level > level_) return;
    static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
    err_ << kNames[static_cast<int>(level)] << ": " << message << '\n';
  }

 private:
  std::ostream& err_;
  LogLevel level_;
};

// Diagnostics must stay on one line.
std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

// Writes to `fallback` when path is empty or "-", else to a file.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback, bool binary = false) : path_(path) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_.open(path, binary ? std::ios::out | std::ios::binary | std::ios::trunc : std::ios::out | std::ios::trunc);
    if (!file_) throw IoError("cannot open '" + path + "' for writing");
    stream_ = &file_;
  }

  std::ostream& stream() { return *stream_; }

  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("failed writing '" + (path_.empty() ? std::string("-") : path_) + "'");
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open input '" + path + "'");
  return in;
}

char delimiter_from(const std::string& text) {
  if (text == "\\t" || text == "tab") return '\t';
  if (text.size() != 1) throw FormatError("delimiter must be a single character, got '" + text + "'");
  return text[0];
}

Bits parse_bit_string(const std::string& text) {
  Bits bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c == ',' || c == ' ') continue;
    if (c != '0' && c != '1') throw FormatError("bit string may contain only 0 and 1, got '" + text + "'");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return bits;
}

std::string bit_string(const Bits& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

// ---- option bundles --------------------------------------------------------

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct EncodeArgs {
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::string scheme = "resbit";
};

struct DecodeArgs {
  std::uint64_t m = 0;
  std::string scheme = "resbit";
  std::string bits;
};

struct DimsArgs {
  std::optional<std::uint64_t> m;
  std::optional<std::uint64_t> m_max;
  std::vector<std::string> schemes{"onehot", "binary", "resbit"};
  std::string output;
};

struct SurveyArgs {
  std::string input;
  std::string schema;
  std::string format = "csv";
  std::string delimiter = ",";
  std::string output;
};

struct FitArgs {
  std::string input;
  std::string schema;
  std::string output;
  std::optional<double> min_frequency;
  std::string delimiter = ",";
};

struct TransformArgs {
  std::string pipeline;
  std::string input;
  std::string output;
  std::string format = "csv";
  std::string delimiter = ",";
  std::size_t batch = 4096;
};

struct InvertArgs {
  std::string pipeline;
  std::string input;
  std::string output;
  std::string format = "csv";
  std::size_t batch = 4096;
};

struct CoverageArgs {
  std::string pipeline;
  std::string input;
  std::string output;
  std::string format = "csv";
  std::string delimiter = ",";
};

struct CollapseArgs {
  std::vector<std::size_t> k_list{2, 10, 100, 10000};
  std::size_t t = 2;
  std::size_t steps = DiffusionSchedule::kDefaultSteps;
  double beta_start = DiffusionSchedule::kDefaultBetaStart;
  double beta_end = DiffusionSchedule::kDefaultBetaEnd;
  std::vector<double> betas;
  std::size_t x0 = 0;
  std::optional<std::size_t> xt;
  std::string output;
};

struct OoiArgs {
  std::vector<std::uint64_t> m{50};
  std::vector<std::string> schemes{"onehot", "binary", "resbit"};
  std::vector<std::string> noise{"uniform"};
  std::vector<double> params{0.25};
  std::uint64_t trials = 100000;
  std::optional<double> zipf;
  std::string format = "csv";
  std::string output;
};

// ---- subcommands -----------------------------------------------------------

void do_encode(const EncodeArgs& a, std::ostream& out) {
  out << bit_string(encode(a.n, a.m, parse_scheme(a.scheme))) << '\n';
}

void do_decode(const DecodeArgs& a, std::ostream& out) {
  const auto bits = parse_bit_string(a.bits);
  switch (parse_scheme(a.scheme)) {
    case Scheme::resbit:
      out << decode_resbit(bits, ResBitLayout(a.m)) << '\n';
      return;
    case Scheme::binary: {
      const auto r = decode_binary(bits, a.m);
      if (const auto* idx = std::get_if<ClassIndex>(&r)) {
        out << *idx << '\n';
      } else {
        out << "out_of_index:" << std::get<OutOfIndex>(r).value << '\n';
      }
      return;
    }
    case Scheme::onehot:
      out << decode_onehot(bits, a.m) << '\n';
      return;
  }
}

// Exact rows up to 1000, then 128 log-spaced rows per decade, then m_max.
std::vector<std::uint64_t> dims_rows(std::uint64_t m_max) {
  constexpr std::uint64_t kExactLimit = 1000;
  constexpr double kPerDecade = 128.0;
  std::vector<std::uint64_t> rows;
  for (std::uint64_t m = 1; m <= std::min(m_max, kExactLimit); ++m) rows.push_back(m);
  for (int i = 1;; ++i) {
    const double v = static_cast<double>(kExactLimit) * std::pow(10.0, i / kPerDecade);
    if (!(v <= static_cast<double>(m_max))) break;
    const auto m = static_cast<std::uint64_t>(std::llround(v));
    if (m > rows.back() && m <= m_max) rows.push_back(m);
  }
  if (rows.back() != m_max) rows.push_back(m_max);
  return rows;
}

void do_dims(const DimsArgs& a, std::ostream& fallback) {
  if (a.m && a.m_max) throw DomainError("give either --m or --m-max, not both");
  if (!a.m && !a.m_max) throw DomainError("dims needs --m or --m-max");
  const std::uint64_t top = a.m ? *a.m : *a.m_max;
  if (top == 0) throw DomainError("M must be at least 1");
  std::vector<Scheme> schemes;
  for (const auto& s : a.schemes) schemes.push_back(parse_scheme(s));

  Output output(a.output, fallback);
  auto& out = output.stream();
  out << 'M';
  for (auto s : schemes) out << ',' << to_string(s) << "_dims";
  out << ",reduction_pct\n";
  const auto rows = a.m ? std::vector<std::uint64_t>{*a.m} : dims_rows(top);
  char pct[32];
  for (auto m : rows) {
    out << m;
    for (auto s : schemes) out << ',' << dims(m, s);
    // Saving of ResBit over one-hot.
    const double reduction =
        100.0 * (1.0 - static_cast<double>(dims(m, Scheme::resbit)) / static_cast<double>(dims(m, Scheme::onehot)));
    std::snprintf(pct, sizeof pct, "%.1f", reduction);
    out << ',' << pct << '\n';
  }
  output.finish();
}

std::vector<ColumnSchema> all_categorical(const Table& table) {
  std::vector<ColumnSchema> schemas;
  for (const auto& name : table.header) schemas.push_back(ColumnSchema::categorical(name, Scheme::resbit));
  return schemas;
}

void do_survey(const SurveyArgs& a, std::ostream& fallback) {
  const auto table = read_csv_file(a.input, delimiter_from(a.delimiter));
  const auto schemas = a.schema.empty() ? all_categorical(table) : read_schema_file(a.schema);
  const auto report = cardinality_survey(table, schemas);

  Output output(a.output, fallback);
  auto& out = output.stream();
  if (a.format == "json") {
    nlohmann::json doc;
    doc["columns"] = nlohmann::json::array();
    for (const auto& c : report.columns) {
      doc["columns"].push_back({{"name", c.name},
                                {"cardinality", c.cardinality},
                                {"onehot_dims", c.onehot_dims},
                                {"binary_dims", c.binary_dims},
                                {"resbit_dims", c.resbit_dims}});
    }
    doc["total"] = {{"cardinality", report.total_cardinality},
                    {"onehot_dims", report.onehot_dims},
                    {"binary_dims", report.binary_dims},
                    {"resbit_dims", report.resbit_dims}};
    out << doc.dump(1) << '\n';
  } else {
    out << "column,cardinality,onehot_dims,binary_dims,resbit_dims\n";
    for (const auto& c : report.columns) {
      const std::string fields[] = {c.name, std::to_string(c.cardinality), std::to_string(c.onehot_dims),
                                    std::to_string(c.binary_dims), std::to_string(c.resbit_dims)};
      write_csv_record(out, fields);
    }
    out << "__total__," << report.total_cardinality << ',' << report.onehot_dims << ',' << report.binary_dims
        << ',' << report.resbit_dims << '\n';
  }
  output.finish();
}

void do_fit(const FitArgs& a, std::ostream& fallback, const Logger& log) {
  const auto table = read_csv_file(a.input, delimiter_from(a.delimiter));
  auto schemas = read_schema_file(a.schema);
  if (a.min_frequency) {
    for (auto& s : schemas) {
      if (s.kind == ColumnKind::categorical) s.min_frequency = *a.min_frequency;
    }
  }
  const auto pipeline = fit(table, schemas);
  log.log(LogLevel::info, "fitted " + std::to_string(table.rows.size()) + " rows into " +
                              std::to_string(pipeline.width()) + " dimensions");
  Output output(a.output, fallback);
  output.stream() << pipeline.serialize();
  output.finish();
}

void check_record(const Row& record, const Table& batch, std::size_t line) {
  if (record.size() != batch.header.size()) {
    throw FormatError("record " + std::to_string(line) + " has " + std::to_string(record.size()) +
                      " fields, header has " + std::to_string(batch.header.size()));
  }
}

void do_transform(const TransformArgs& a, std::ostream& fallback, unsigned threads) {
  if (a.batch == 0) throw DomainError("batch size must be positive");
  const auto pipeline = FittedPipeline::load(a.pipeline);
  auto in = open_input(a.input);
  CsvReader reader(in, delimiter_from(a.delimiter));
  Table batch;
  if (!reader.next(batch.header)) throw FormatError("input '" + a.input + "' is empty");
  const bool binary = a.format == "bin";
  Output output(a.output, fallback, binary);
  auto& out = output.stream();
  if (binary) write_matrix_header(out, pipeline.width());

  auto flush = [&] {
    if (batch.rows.empty()) return;
    const auto m = transform(batch, pipeline, threads);
    if (binary) {
      write_matrix_rows(out, m);
    } else {
      write_matrix_csv(out, m);
    }
    batch.rows.clear();
  };
  Row record;
  while (reader.next(record)) {
    if (batch.header.size() > 1 && record.size() == 1 && record[0].empty()) continue;
    check_record(record, batch, reader.records_read());
    batch.rows.push_back(std::move(record));
    if (batch.rows.size() == a.batch) flush();
  }
  flush();
  output.finish();
}

// Pulls up to `limit` matrix rows from CSV or binary input.
class MatrixSource {
 public:
  MatrixSource(const std::string& path, bool binary, std::size_t expected_cols)
      : in_(open_input(path, binary)), binary_(binary), cols_(expected_cols), csv_(in_) {
    if (binary_) {
      const auto cols = read_matrix_header(in_);
      if (cols != cols_) {
        throw ShapeError("matrix has " + std::to_string(cols) + " columns, pipeline expects " +
                         std::to_string(cols_));
      }
    }
  }

  Matrix next_batch(std::size_t limit) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::vector<double> row(cols_);
    Row record;
    while (rows < limit) {
      if (binary_) {
        if (!read_matrix_row(in_, row)) break;
      } else {
        if (!csv_.next(record)) break;
        if (record.size() == 1 && record[0].empty() && cols_ != 1) continue;
        if (record.size() != cols_) {
          throw ShapeError("matrix row " + std::to_string(csv_.records_read()) + " has " +
                           std::to_string(record.size()) + " values, pipeline expects " + std::to_string(cols_));
        }
        for (std::size_t c = 0; c < cols_; ++c) row[c] = parse_double(record[c]);
      }
      values.insert(values.end(), row.begin(), row.end());
      ++rows;
    }
    return Matrix(rows, cols_, std::move(values));
  }

 private:
  std::ifstream in_;
  bool binary_;
  std::size_t cols_;
  CsvReader csv_;
};

void do_invert(const InvertArgs& a, std::ostream& fallback, unsigned threads, const Logger& log) {
  if (a.batch == 0) throw DomainError("batch size must be positive");
  const auto pipeline = FittedPipeline::load(a.pipeline);
  MatrixSource source(a.input, a.format == "bin", pipeline.width());
  const auto& columns = pipeline.columns();
  std::vector<std::uint64_t> ooi(columns.size(), 0);
  std::vector<std::uint64_t> malformed(columns.size(), 0);

  Output output(a.output, fallback);
  auto& out = output.stream();
  std::vector<std::string> header;
  for (const auto& c : columns) header.push_back(c.name);
  write_csv_record(out, header);
  std::uint64_t total_rows = 0;
  for (;;) {
    const auto batch = source.next_batch(a.batch);
    if (batch.rows() == 0) break;
    total_rows += batch.rows();
    const auto result = inverse_transform(batch, pipeline, threads);
    for (const auto& row : result.rows.rows) write_csv_record(out, row);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      ooi[c] += result.out_of_index[c];
      malformed[c] += result.malformed[c];
    }
  }
  output.finish();

  log.log(LogLevel::info, "inverted " + std::to_string(total_rows) + " rows");
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (ooi[c] > 0) {
      log.log(LogLevel::warn, "column '" + columns[c].name + "': " + std::to_string(ooi[c]) +
                                  " out-of-index decodes written as " + std::string(kOutOfIndexLabel));
    }
    if (malformed[c] > 0) {
      log.log(LogLevel::warn, "column '" + columns[c].name + "': " + std::to_string(malformed[c]) +
                                  " malformed one-hot patterns decoded by argmax");
    }
  }
}

void do_coverage(const CoverageArgs& a, std::ostream& fallback) {
  const auto pipeline = FittedPipeline::load(a.pipeline);
  const auto generated = read_csv_file(a.input, delimiter_from(a.delimiter));
  const auto report = coverage_ratio(generated, pipeline);

  Output output(a.output, fallback);
  auto& out = output.stream();
  if (a.format == "json") {
    nlohmann::json doc;
    doc["columns"] = nlohmann::json::array();
    for (const auto& c : report.columns) {
      doc["columns"].push_back({{"name", c.name},
                                {"generated_distinct", c.generated_distinct},
                                {"training_distinct", c.training_distinct},
                                {"ratio", c.ratio}});
    }
    doc["mean_ratio"] = report.mean_ratio;
    out << doc.dump(1) << '\n';
  } else {
    out << "column,generated_distinct,training_distinct,ratio\n";
    for (const auto& c : report.columns) {
      const std::string fields[] = {c.name, std::to_string(c.generated_distinct),
                                    std::to_string(c.training_distinct), format_double(c.ratio)};
      write_csv_record(out, fields);
    }
    out << "__mean__,,," << format_double(report.mean_ratio) << '\n';
  }
  output.finish();
}

void do_collapse(const CollapseArgs& a, std::ostream& fallback) {
  const auto schedule = a.betas.empty() ? DiffusionSchedule::linear(a.steps, a.beta_start, a.beta_end)
                                        : DiffusionSchedule::from_betas(a.betas);
  const auto curve = collapse_curve(a.k_list, a.t, schedule, a.x0, a.xt.value_or(a.x0));
  Output output(a.output, fallback);
  write_collapse_csv(output.stream(), curve);
  output.finish();
}

void do_ooi(const OoiArgs& a, std::ostream& fallback, const Globals& g) {
  std::vector<Scheme> schemes;
  for (const auto& s : a.schemes) schemes.push_back(parse_scheme(s));
  std::vector<NoiseSetting> grid;
  for (const auto& name : a.noise) {
    const auto kind = parse_noise_kind(name);
    if (kind == NoiseKind::uniform_bits) {
      grid.push_back({kind, 0.0});  // parameter-free
      continue;
    }
    for (double p : a.params) grid.push_back({kind, p});
  }
  SimulationOptions options;
  options.threads = g.threads;
  if (a.zipf) {
    options.index_distribution = IndexDistribution::zipf;
    options.zipf_exponent = *a.zipf;
  }
  const auto reports = sweep(a.m, schemes, grid, a.trials, g.seed, options);
  Output output(a.output, fallback);
  if (a.format == "json") {
    write_reports_json(output.stream(), reports);
  } else {
    write_reports_csv(output.stream(), reports);
  }
  output.finish();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Logger log(err);
  CLI::App app{"ResBit toolkit: category codes, tabular pipeline, diffusion and out-of-index simulations",
               args.empty() ? "resbit" : args[0]};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master seed for simulations (default 0)");
  app.add_option("--threads", g.threads, "Worker threads; output does not depend on it")
      ->check(CLI::Range(1u, 4096u));

  const auto scheme_check = CLI::IsMember({"onehot", "binary", "resbit"});

  EncodeArgs enc;
  auto* encode_cmd = app.add_subcommand("encode", "Encode one class index");
  encode_cmd->add_option("--m", enc.m, "Class count")->required();
  encode_cmd->add_option("--n", enc.n, "Class index in [0, M)")->required();
  encode_cmd->add_option("--scheme", enc.scheme)->check(scheme_check);

  DecodeArgs dec;
  auto* decode_cmd = app.add_subcommand("decode", "Decode one bit string");
  decode_cmd->add_option("--m", dec.m, "Class count")->required();
  decode_cmd->add_option("--bits", dec.bits, "Bits, most significant first, e.g. 110101")->required();
  decode_cmd->add_option("--scheme", dec.scheme)->check(scheme_check);

  DimsArgs dim;
  auto* dims_cmd = app.add_subcommand("dims", "Code width per scheme as M grows");
  dims_cmd->add_option("--m", dim.m, "Single class count");
  dims_cmd->add_option("--m-max", dim.m_max, "Emit rows for M = 1 .. m-max");
  dims_cmd->add_option("--schemes", dim.schemes)->delimiter(',')->check(scheme_check);
  dims_cmd->add_option("--output,--out", dim.output);

  SurveyArgs sur;
  auto* survey_cmd = app.add_subcommand("survey", "Cardinality report for a CSV");
  survey_cmd->add_option("--input", sur.input)->required();
  survey_cmd->add_option("--schema", sur.schema, "Schema JSON; default treats every column as categorical");
  survey_cmd->add_option("--format", sur.format)->check(CLI::IsMember({"csv", "json"}));
  survey_cmd->add_option("--delimiter", sur.delimiter);
  survey_cmd->add_option("--output", sur.output);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a pipeline and write its JSON");
  fit_cmd->add_option("--input", fa.input)->required();
  fit_cmd->add_option("--schema", fa.schema)->required();
  fit_cmd->add_option("--output", fa.output);
  fit_cmd->add_option("--min-frequency", fa.min_frequency, "Override every categorical threshold");
  fit_cmd->add_option("--delimiter", fa.delimiter);

  TransformArgs tr;
  auto* transform_cmd = app.add_subcommand("transform", "Map a CSV to the continuous matrix");
  transform_cmd->add_option("--pipeline", tr.pipeline)->required();
  transform_cmd->add_option("--input", tr.input)->required();
  transform_cmd->add_option("--output", tr.output);
  transform_cmd->add_option("--format", tr.format)->check(CLI::IsMember({"csv", "bin"}));
  transform_cmd->add_option("--delimiter", tr.delimiter);
  transform_cmd->add_option("--batch-size", tr.batch);

  InvertArgs inv;
  auto* invert_cmd = app.add_subcommand("invert", "Map a continuous matrix back to labels");
  invert_cmd->add_option("--pipeline", inv.pipeline)->required();
  invert_cmd->add_option("--input", inv.input)->required();
  invert_cmd->add_option("--output", inv.output);
  invert_cmd->add_option("--format", inv.format, "Input matrix format")->check(CLI::IsMember({"csv", "bin"}));
  invert_cmd->add_option("--batch-size", inv.batch);

  CoverageArgs cov;
  auto* coverage_cmd = app.add_subcommand("coverage", "Distinct-category coverage of generated rows");
  coverage_cmd->add_option("--pipeline", cov.pipeline)->required();
  coverage_cmd->add_option("--input", cov.input)->required();
  coverage_cmd->add_option("--output", cov.output);
  coverage_cmd->add_option("--format", cov.format)->check(CLI::IsMember({"csv", "json"}));
  coverage_cmd->add_option("--delimiter", cov.delimiter);

  CollapseArgs col;
  auto* collapse_cmd = app.add_subcommand("collapse-sim", "Posterior distance to Cat(x0) as K grows");
  collapse_cmd->add_option("--k-list", col.k_list)->delimiter(',');
  collapse_cmd->add_option("--t", col.t, "Time step, 2 <= t <= T");
  collapse_cmd->add_option("--steps", col.steps);
  collapse_cmd->add_option("--beta-start", col.beta_start);
  collapse_cmd->add_option("--beta-end", col.beta_end);
  collapse_cmd->add_option("--betas", col.betas, "Explicit schedule; overrides the linear one")->delimiter(',');
  collapse_cmd->add_option("--x0", col.x0);
  collapse_cmd->add_option("--xt", col.xt, "Defaults to --x0");
  collapse_cmd->add_option("--output", col.output);

  OoiArgs oa;
  auto* ooi_cmd = app.add_subcommand("ooi-sim", "Out-of-index rates under corrupted codes");
  ooi_cmd->add_option("--m", oa.m)->delimiter(',');
  ooi_cmd->add_option("--schemes,--scheme", oa.schemes)->delimiter(',')->check(scheme_check);
  ooi_cmd->add_option("--noise", oa.noise, "gaussian, uniform, bitflip")->delimiter(',');
  ooi_cmd->add_option("--params", oa.params, "Sigma or flip probability grid")->delimiter(',');
  ooi_cmd->add_option("--trials", oa.trials);
  ooi_cmd->add_option("--zipf", oa.zipf, "Draw indices from Zipf with this exponent");
  ooi_cmd->add_option("--format", oa.format)->check(CLI::IsMember({"csv", "json"}));
  ooi_cmd->add_option("--output", oa.output);

  std::vector<const char*> argv;
  const std::string program = args.empty() ? "resbit" : args[0];
  argv.push_back(program.c_str());
  for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    // Subcommand help arrives as CallForHelp from the subcommand.
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    err << "error: usage: " << one_line(e.what()) << '\n';
    return kUsageError;
  }

  try {
    if (*encode_cmd) do_encode(enc, out);
    else if (*decode_cmd) do_decode(dec, out);
    else if (*dims_cmd) do_dims(dim, out);
    else if (*survey_cmd) do_survey(sur, out);
    else if (*fit_cmd) do_fit(fa, out, log);
    else if (*transform_cmd) do_transform(tr, out, g.threads);
    else if (*invert_cmd) do_invert(inv, out, g.threads, log);
    else if (*coverage_cmd) do_coverage(cov, out);
    else if (*collapse_cmd) do_collapse(col, out);
    else if (*ooi_cmd) do_ooi(oa, out, g);
    return kSuccess;
  } catch (const ScheduleError& e) {
    err << "error: " << e.kind() << ": " << one_line(e.what()) << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << one_line(e.what()) << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << '\n';
    return kInternalError;
  }
}

}  // namespace resbit::cli
