#pragma once

// Forward process of multinomial (categorical) diffusion, its closed-form
// posterior, and the large-K posterior collapse onto the clean class.
//
//   q(x_t | x_{t-1}) = Cat((1 - beta_t) x_{t-1} + beta_t / K)
//   q(x_t | x_0)     = Cat(abar_t x_0 + (1 - abar_t) / K)
//   q(x_{t-1} | x_t, x_0) = Cat(pi / sum(pi)),
//     pi = [alpha_t x_t + (1 - alpha_t)/K] * [abar_{t-1} x_0 + (1 - abar_{t-1})/K]
//
// Time steps are 1-based; abar_0 = 1.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace resbit {

class DiffusionSchedule {
 public:
  static constexpr std::size_t kDefaultSteps = 1000;
  static constexpr double kDefaultBetaStart = 1e-4;
  static constexpr double kDefaultBetaEnd = 0.02;

  // Linearly spaced betas. T == 1 uses beta_start alone. Throws ScheduleError
  // if the result is not strictly increasing inside (0, 1).
  static DiffusionSchedule linear(std::size_t steps = kDefaultSteps, double beta_start = kDefaultBetaStart,
                                  double beta_end = kDefaultBetaEnd);
  static DiffusionSchedule from_betas(std::vector<double> betas);

  std::size_t steps() const noexcept { return betas_.size(); }
  double beta(std::size_t t) const;
  double alpha(std::size_t t) const;
  double alpha_bar(std::size_t t) const;  // t in [0, T]
  const std::vector<double>& betas() const noexcept { return betas_; }

 private:
  explicit DiffusionSchedule(std::vector<double> betas);
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;  // index t, alpha_bars_[0] = 1
};

// Realized categorical state: a one-hot vector stored as (classes, hot).
struct OneHot {
  std::size_t classes = 1;
  std::size_t hot = 0;

  // Throws ShapeError unless hot < classes.
  static OneHot make(std::size_t classes, std::size_t hot);
  // Throws ShapeError unless exactly one entry is 1 and the rest are 0.
  static OneHot from_dense(std::span<const double> values);
  std::vector<double> dense() const;

  friend bool operator==(const OneHot&, const OneHot&) = default;
};

// Probability vector over K classes.
struct CategoricalState {
  std::vector<double> probs;

  std::size_t classes() const noexcept { return probs.size(); }
  // Non-negative entries summing to 1 within tolerance.
  bool is_valid(double tolerance = 1e-10) const noexcept;
};

CategoricalState forward_step_dist(const OneHot& previous, std::size_t t, const DiffusionSchedule& schedule);
CategoricalState marginal_dist(const OneHot& x0, std::size_t t, const DiffusionSchedule& schedule);
// Requires 2 <= t <= T and matching class counts.
CategoricalState posterior_dist(const OneHot& xt, const OneHot& x0, std::size_t t,
                                const DiffusionSchedule& schedule);
// Same posterior from the two coefficients alpha_t and abar_{t-1} directly,
// for values no strictly increasing schedule reaches. alpha_t must lie in
// (0, 1], abar_{t-1} in [0, 1].
CategoricalState posterior_dist(const OneHot& xt, const OneHot& x0, double alpha_t, double alpha_bar_prev);

// Half the L1 distance between two probability vectors of equal length.
double tv_distance(std::span<const double> p, std::span<const double> q);

struct CollapsePoint {
  std::size_t classes;
  std::size_t t;
  double tv_distance;  // TV(posterior, Cat(x0))
};

// Posterior-to-Cat(x0) distance as K grows, with the hot indices of x0 and
// x_t held fixed (each K must exceed both).
std::vector<CollapsePoint> collapse_curve(std::span<const std::size_t> class_counts, std::size_t t,
                                          const DiffusionSchedule& schedule, std::size_t x0_hot,
                                          std::size_t xt_hot);

// Realized x_1..x_T, each drawn from forward_step_dist given its predecessor.
std::vector<OneHot> sample_trajectory(const OneHot& x0, const DiffusionSchedule& schedule, std::uint64_t seed);

// CSV with header "K,t,tv_distance".
void write_collapse_csv(std::ostream& out, std::span<const CollapsePoint> curve);

}  // namespace resbit
