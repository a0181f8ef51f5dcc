#include "resbit/quantile.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "resbit/errors.hpp"

namespace resbit {
namespace {

const boost::math::normal_distribution<double>& standard_normal() {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return dist;
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string("non-finite ") + what);
}

}  // namespace

double normal_cdf(double x) {
  if (std::isnan(x)) throw DomainError("normal_cdf of NaN");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(standard_normal(), x);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile needs p in (0, 1)");
  return boost::math::quantile(standard_normal(), p);
}

QuantileTable QuantileTable::fit(std::span<const double> values, std::size_t max_knots) {
  if (values.empty()) throw DomainError("cannot fit a quantile table on an empty sample");
  if (max_knots < 2) throw DomainError("quantile table needs at least two knots");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) require_finite(v, "value in quantile fit");
  std::sort(sorted.begin(), sorted.end());

  const std::size_t n = sorted.size();
  const std::size_t k = std::min(max_knots, n);
  if (k == 1) return QuantileTable({sorted.front()});

  // Percentile at j/(k-1) with linear interpolation: position j(n-1)/(k-1),
  // split exactly into integer and fractional parts.
  std::vector<double> knots(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t scaled = j * (n - 1);
    const std::size_t lower = scaled / (k - 1);
    const std::size_t rem = scaled % (k - 1);
    if (rem == 0 || sorted[lower] == sorted[lower + 1]) {
      knots[j] = sorted[lower];
    } else {
      const double frac = static_cast<double>(rem) / static_cast<double>(k - 1);
      knots[j] = sorted[lower] + frac * (sorted[lower + 1] - sorted[lower]);
    }
  }
  return QuantileTable(std::move(knots));
}

QuantileTable QuantileTable::from_knots(std::vector<double> knots) {
  if (knots.empty()) throw FormatError("quantile table has no knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i])) throw FormatError("quantile knot is not finite");
    if (i > 0 && knots[i] < knots[i - 1]) throw FormatError("quantile knots are not sorted");
  }
  return QuantileTable(std::move(knots));
}

double QuantileTable::reference(std::size_t j) const noexcept {
  if (knots_.size() == 1) return 0.5;
  return static_cast<double>(j) / static_cast<double>(knots_.size() - 1);
}

double QuantileTable::cdf(double x) const {
  if (std::isnan(x)) throw DomainError("quantile transform of NaN");
  if (knots_.size() == 1) {
    if (x < knots_.front()) return 0.0;
    if (x > knots_.front()) return 1.0;
    return 0.5;
  }
  if (x < knots_.front()) return 0.0;
  if (x > knots_.back()) return 1.0;
  const auto first = std::lower_bound(knots_.begin(), knots_.end(), x);
  const auto last = std::upper_bound(first, knots_.end(), x);
  const auto lo = static_cast<std::size_t>(first - knots_.begin());
  if (first != last) {
    const auto hi = static_cast<std::size_t>(last - knots_.begin()) - 1;
    return 0.5 * (reference(lo) + reference(hi));
  }
  // knots_[lo - 1] < x < knots_[lo]
  const double x0 = knots_[lo - 1];
  const double x1 = knots_[lo];
  const double r0 = reference(lo - 1);
  const double r1 = reference(lo);
  return r0 + (x - x0) / (x1 - x0) * (r1 - r0);
}

bool QuantileTable::is_clamped(double x) const {
  const double p = cdf(x);
  return p < kBoundsThreshold || p > 1.0 - kBoundsThreshold;
}

double QuantileTable::to_normal(double x) const {
  const double p = std::clamp(cdf(x), kBoundsThreshold, 1.0 - kBoundsThreshold);
  return normal_quantile(p);
}

double QuantileTable::from_normal(double y) const {
  if (std::isnan(y)) throw DomainError("inverse quantile transform of NaN");
  if (knots_.size() == 1) return knots_.front();
  const double p = normal_cdf(y);
  const std::size_t segments = knots_.size() - 1;
  auto j = static_cast<std::size_t>(p * static_cast<double>(segments));
  j = std::min(j, segments - 1);
  // Guard against the floor landing one segment off near a knot.
  while (j > 0 && p < reference(j)) --j;
  while (j + 1 < segments && p > reference(j + 1)) ++j;
  const double x0 = knots_[j];
  const double x1 = knots_[j + 1];
  if (x0 == x1) return x0;
  const double r0 = reference(j);
  const double r1 = reference(j + 1);
  const double t = std::clamp((p - r0) / (r1 - r0), 0.0, 1.0);
  return x0 + t * (x1 - x0);
}

}  // namespace resbit
