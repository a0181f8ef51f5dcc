#pragma once

// Out-of-index simulation: encode a class index, corrupt the code the way an
// imperfect generator would, round each coordinate back to the nearer bit
// level and decode. Tallies out-of-index decodes (binary), malformed one-hot
// patterns and the spread of decoded indices.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "resbit/encoding.hpp"

namespace resbit {

enum class NoiseKind {
  gaussian,      // add N(0, sigma^2) to every bit
  uniform_bits,  // replace the code by independent fair bits
  bitflip,       // flip each bit independently with probability p
};

std::string_view to_string(NoiseKind kind) noexcept;
// Accepts "gaussian", "uniform" / "uniform-random-bits", "bitflip".
NoiseKind parse_noise_kind(std::string_view name);

struct NoiseModel {
  NoiseKind kind = NoiseKind::uniform_bits;
  double param = 0.0;  // sigma for gaussian, flip probability for bitflip
  std::uint64_t seed = 0;

  // Throws DomainError: sigma >= 0, flip probability in [0, 0.5].
  void validate() const;
};

enum class IndexDistribution { uniform, zipf };

struct SimulationOptions {
  IndexDistribution index_distribution = IndexDistribution::uniform;
  double zipf_exponent = 1.0;
  unsigned threads = 1;
};

struct SimulationReport {
  Scheme scheme = Scheme::resbit;
  std::uint64_t class_count = 0;
  NoiseModel noise;
  std::uint64_t trials = 0;
  std::uint64_t out_of_index_count = 0;
  std::uint64_t malformed_count = 0;
  double out_of_index_rate = 0.0;
  double malformed_rate = 0.0;
  // Distinct decoded indices over M.
  double coverage_ratio = 0.0;
  // Decoded-index frequencies; with the two counts above this sums to trials.
  std::vector<std::uint64_t> histogram;
};

// Trials are split into fixed-size chunks with seeds derived from
// noise.seed, so the report does not depend on options.threads.
SimulationReport run_ooi_sim(std::uint64_t class_count, Scheme scheme, const NoiseModel& noise,
                             std::uint64_t trials, const SimulationOptions& options = {});

struct NoiseSetting {
  NoiseKind kind;
  double param;
};

// Cross product M x scheme x noise, in that nesting order. Cell i runs with
// seed derive_seed(master_seed, i).
std::vector<SimulationReport> sweep(std::span<const std::uint64_t> class_counts,
                                    std::span<const Scheme> schemes,
                                    std::span<const NoiseSetting> noise_grid, std::uint64_t trials,
                                    std::uint64_t master_seed, const SimulationOptions& options = {});

// CSV: scheme,M,noise_kind,param,trials,ooi_rate,malformed_rate,coverage_ratio
void write_reports_csv(std::ostream& out, std::span<const SimulationReport> reports);
// JSON array of reports including histograms.
void write_reports_json(std::ostream& out, std::span<const SimulationReport> reports);

}  // namespace resbit
