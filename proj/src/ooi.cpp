#include "resbit/ooi.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "resbit/errors.hpp"
#include "resbit/parallel.hpp"
#include "resbit/random.hpp"
#include "resbit/table.hpp"

namespace resbit {
namespace {

constexpr std::uint64_t kChunkTrials = 1 << 14;

__extension__ using Wide = unsigned __int128;

struct Tally {
  std::uint64_t ooi = 0;
  std::uint64_t malformed = 0;
  std::vector<std::uint64_t> histogram;
};

class IndexSampler {
 public:
  IndexSampler(std::uint64_t class_count, const SimulationOptions& options) : class_count_(class_count) {
    if (options.index_distribution != IndexDistribution::zipf) return;
    if (!(options.zipf_exponent >= 0.0)) throw DomainError("zipf exponent must be non-negative");
    cdf_.resize(class_count);
    double total = 0.0;
    for (std::uint64_t k = 0; k < class_count; ++k) {
      total += std::pow(static_cast<double>(k + 1), -options.zipf_exponent);
      cdf_[k] = total;
    }
    for (auto& c : cdf_) c /= total;
  }

  ClassIndex operator()(Rng& rng) const {
    if (cdf_.empty()) {
      return static_cast<ClassIndex>((static_cast<Wide>(rng()) * class_count_) >> 64);
    }
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<ClassIndex>(static_cast<ClassIndex>(it - cdf_.begin()), class_count_ - 1);
  }

 private:
  std::uint64_t class_count_;
  std::vector<double> cdf_;
};

void run_chunk(std::uint64_t chunk, std::uint64_t count, std::uint64_t class_count, Scheme scheme,
               const NoiseModel& noise, const IndexSampler& sampler,
               const std::optional<ResBitLayout>& layout, Tally& tally) {
  Rng rng(derive_seed(noise.seed, chunk));
  std::normal_distribution<double> gauss(0.0, noise.param > 0.0 ? noise.param : 1.0);
  Bits code;
  Bits received;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto truth = sampler(rng);
    code = layout ? encode_resbit(truth, *layout) : encode(truth, class_count, scheme);
    received.resize(code.size());
    for (std::size_t b = 0; b < code.size(); ++b) {
      switch (noise.kind) {
        case NoiseKind::gaussian: {
          const double level = code[b] + (noise.param > 0.0 ? gauss(rng) : 0.0);
          received[b] = level >= 0.5 ? 1 : 0;
          break;
        }
        case NoiseKind::uniform_bits:
          received[b] = static_cast<std::uint8_t>(rng() >> 63);
          break;
        case NoiseKind::bitflip:
          received[b] = uniform01(rng) < noise.param ? code[b] ^ 1 : code[b];
          break;
      }
    }
    std::optional<ClassIndex> decoded;
    switch (scheme) {
      case Scheme::resbit:
        decoded = decode_resbit(received, *layout);
        break;
      case Scheme::binary: {
        const auto r = decode_binary(received, class_count);
        if (auto* idx = std::get_if<ClassIndex>(&r)) {
          decoded = *idx;
        } else {
          ++tally.ooi;
        }
        break;
      }
      case Scheme::onehot:
        decoded = try_decode_onehot(received);
        if (!decoded) ++tally.malformed;
        break;
    }
    if (decoded) ++tally.histogram[*decoded];
  }
}

}  // namespace

std::string_view to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::uniform_bits: return "uniform";
    case NoiseKind::bitflip: return "bitflip";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian" || name == "gaussian-on-bits") return NoiseKind::gaussian;
  if (name == "uniform" || name == "uniform-random-bits") return NoiseKind::uniform_bits;
  if (name == "bitflip") return NoiseKind::bitflip;
  throw DomainError("unknown noise kind '" + std::string(name) + "' (expected gaussian|uniform|bitflip)");
}

void NoiseModel::validate() const {
  if (kind == NoiseKind::gaussian && !(param >= 0.0 && std::isfinite(param))) {
    throw DomainError("gaussian sigma must be a finite non-negative number");
  }
  if (kind == NoiseKind::bitflip && !(param >= 0.0 && param <= 0.5)) {
    throw DomainError("flip probability must lie in [0, 0.5]");
  }
}

SimulationReport run_ooi_sim(std::uint64_t class_count, Scheme scheme, const NoiseModel& noise,
                             std::uint64_t trials, const SimulationOptions& options) {
  if (class_count == 0) throw DomainError("empty category space (class count 0)");
  if (trials == 0) throw DomainError("simulation needs at least one trial");
  noise.validate();

  const IndexSampler sampler(class_count, options);
  std::optional<ResBitLayout> layout;
  if (scheme == Scheme::resbit) layout.emplace(class_count);

  const std::uint64_t chunks = (trials + kChunkTrials - 1) / kChunkTrials;
  Tally total{0, 0, std::vector<std::uint64_t>(class_count, 0)};
  std::mutex merge_mutex;
  parallel_slices(chunks, options.threads, [&](std::size_t begin, std::size_t end) {
    Tally local{0, 0, std::vector<std::uint64_t>(class_count, 0)};
    for (std::size_t c = begin; c < end; ++c) {
      const auto first = c * kChunkTrials;
      const auto count = std::min(kChunkTrials, trials - first);
      run_chunk(c, count, class_count, scheme, noise, sampler, layout, local);
    }
    // Integer sums, so merge order does not matter.
    std::lock_guard lock(merge_mutex);
    total.ooi += local.ooi;
    total.malformed += local.malformed;
    for (std::size_t k = 0; k < class_count; ++k) total.histogram[k] += local.histogram[k];
  });

  SimulationReport report;
  report.scheme = scheme;
  report.class_count = class_count;
  report.noise = noise;
  report.trials = trials;
  report.out_of_index_count = total.ooi;
  report.malformed_count = total.malformed;
  report.out_of_index_rate = static_cast<double>(total.ooi) / static_cast<double>(trials);
  report.malformed_rate = static_cast<double>(total.malformed) / static_cast<double>(trials);
  const auto covered = std::count_if(total.histogram.begin(), total.histogram.end(),
                                     [](std::uint64_t n) { return n > 0; });
  report.coverage_ratio = static_cast<double>(covered) / static_cast<double>(class_count);
  report.histogram = std::move(total.histogram);
  return report;
}

std::vector<SimulationReport> sweep(std::span<const std::uint64_t> class_counts,
                                    std::span<const Scheme> schemes,
                                    std::span<const NoiseSetting> noise_grid, std::uint64_t trials,
                                    std::uint64_t master_seed, const SimulationOptions& options) {
  std::vector<SimulationReport> reports;
  reports.reserve(class_counts.size() * schemes.size() * noise_grid.size());
  std::uint64_t cell = 0;
  for (auto m : class_counts) {
    for (auto scheme : schemes) {
      for (const auto& setting : noise_grid) {
        const NoiseModel noise{setting.kind, setting.param, derive_seed(master_seed, cell++)};
        reports.push_back(run_ooi_sim(m, scheme, noise, trials, options));
      }
    }
  }
  return reports;
}

void write_reports_csv(std::ostream& out, std::span<const SimulationReport> reports) {
  out << "scheme,M,noise_kind,param,trials,ooi_rate,malformed_rate,coverage_ratio\n";
  for (const auto& r : reports) {
    out << to_string(r.scheme) << ',' << r.class_count << ',' << to_string(r.noise.kind) << ','
        << format_double(r.noise.param) << ',' << r.trials << ',' << format_double(r.out_of_index_rate) << ','
        << format_double(r.malformed_rate) << ',' << format_double(r.coverage_ratio) << '\n';
  }
}

void write_reports_json(std::ostream& out, std::span<const SimulationReport> reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : reports) {
    doc.push_back({{"scheme", std::string(to_string(r.scheme))},
                   {"M", r.class_count},
                   {"noise_kind", std::string(to_string(r.noise.kind))},
                   {"param", r.noise.param},
                   {"seed", r.noise.seed},
                   {"trials", r.trials},
                   {"out_of_index_count", r.out_of_index_count},
                   {"malformed_count", r.malformed_count},
                   {"ooi_rate", r.out_of_index_rate},
                   {"malformed_rate", r.malformed_rate},
                   {"coverage_ratio", r.coverage_ratio},
                   {"histogram", r.histogram}});
  }
  out << doc.dump(1) << '\n';
}

}  // namespace resbit
