#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace resbit {

// Standard normal CDF and its inverse.
double normal_cdf(double x);
double normal_quantile(double p);

// Monotone per-dimension map from empirical values onto standard-normal
// quantiles.
//
// Fitting keeps min(max_knots, n) knots: the empirical quantiles of the
// training values at evenly spaced reference probabilities j/(k-1), computed
// with linear interpolation between order statistics. A value is mapped to an
// empirical CDF position by linear interpolation between knots; a value that
// hits a run of tied knots maps to the midpoint of the run's references
// (averaged rank). The position is clipped to [1e-7, 1 - 1e-7] and sent
// through the inverse normal CDF. Values outside the knot range clamp to the
// table ends.
class QuantileTable {
 public:
  static constexpr std::size_t kDefaultMaxKnots = 1000;
  static constexpr double kBoundsThreshold = 1e-7;

  // Throws DomainError on an empty or non-finite sample.
  static QuantileTable fit(std::span<const double> values, std::size_t max_knots = kDefaultMaxKnots);
  // Rebuild from stored knots; throws FormatError if they are not
  // non-decreasing finite values.
  static QuantileTable from_knots(std::vector<double> knots);

  const std::vector<double>& knots() const noexcept { return knots_; }
  std::size_t size() const noexcept { return knots_.size(); }
  double reference(std::size_t j) const noexcept;

  // Empirical CDF position in [0, 1], before clipping.
  double cdf(double x) const;
  // True when cdf(x) lies outside the clip interval, i.e. the value sits on
  // a table end and will not invert exactly.
  bool is_clamped(double x) const;

  double to_normal(double x) const;
  double from_normal(double y) const;

 private:
  explicit QuantileTable(std::vector<double> knots) : knots_(std::move(knots)) {}
  std::vector<double> knots_;
};

}  // namespace resbit
