#include "resbit/collapse.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "resbit/errors.hpp"
#include "resbit/random.hpp"
#include "resbit/table.hpp"

namespace resbit {
namespace {

void require_step(std::size_t t, std::size_t lo, const DiffusionSchedule& schedule) {
  if (t < lo || t > schedule.steps()) {
    throw DomainError("time step " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(schedule.steps()) + "]");
  }
}

// a * onehot + (1 - a) / K * 1
std::vector<double> mix_with_uniform(const OneHot& x, double a) {
  const double floor = (1.0 - a) / static_cast<double>(x.classes);
  std::vector<double> out(x.classes, floor);
  out[x.hot] += a;
  return out;
}

}  // namespace

DiffusionSchedule::DiffusionSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.empty()) throw ScheduleError("diffusion schedule needs at least one step");
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    const double b = betas_[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw ScheduleError("beta_" + std::to_string(i + 1) + " = " + format_double(b) + " outside (0, 1)");
    }
    if (i > 0 && !(b > betas_[i - 1])) {
      throw ScheduleError("betas must be strictly increasing (beta_" + std::to_string(i + 1) +
                          " <= beta_" + std::to_string(i) + ")");
    }
  }
  alpha_bars_.resize(betas_.size() + 1);
  alpha_bars_[0] = 1.0;
  for (std::size_t t = 1; t <= betas_.size(); ++t) alpha_bars_[t] = alpha_bars_[t - 1] * (1.0 - betas_[t - 1]);
}

DiffusionSchedule DiffusionSchedule::linear(std::size_t steps, double beta_start, double beta_end) {
  if (steps == 0) throw ScheduleError("diffusion schedule needs at least one step");
  std::vector<double> betas(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    betas[i] = steps == 1 ? beta_start
                          : beta_start + (beta_end - beta_start) * static_cast<double>(i) /
                                             static_cast<double>(steps - 1);
  }
  return DiffusionSchedule(std::move(betas));
}

DiffusionSchedule DiffusionSchedule::from_betas(std::vector<double> betas) {
  return DiffusionSchedule(std::move(betas));
}

double DiffusionSchedule::beta(std::size_t t) const {
  require_step(t, 1, *this);
  return betas_[t - 1];
}

double DiffusionSchedule::alpha(std::size_t t) const { return 1.0 - beta(t); }

double DiffusionSchedule::alpha_bar(std::size_t t) const {
  require_step(t, 0, *this);
  return alpha_bars_[t];
}

OneHot OneHot::make(std::size_t classes, std::size_t hot) {
  if (classes == 0 || hot >= classes) {
    throw ShapeError("one-hot index " + std::to_string(hot) + " invalid for " + std::to_string(classes) +
                     " classes");
  }
  return OneHot{classes, hot};
}

OneHot OneHot::from_dense(std::span<const double> values) {
  std::size_t hot = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) continue;
    if (values[i] != 1.0 || hot != values.size()) throw ShapeError("vector is not one-hot");
    hot = i;
  }
  if (hot == values.size()) throw ShapeError("vector is not one-hot (no hot entry)");
  return OneHot{values.size(), hot};
}

std::vector<double> OneHot::dense() const {
  std::vector<double> out(classes, 0.0);
  out.at(hot) = 1.0;
  return out;
}

bool CategoricalState::is_valid(double tolerance) const noexcept {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return !probs.empty() && std::abs(sum - 1.0) <= tolerance;
}

CategoricalState forward_step_dist(const OneHot& previous, std::size_t t, const DiffusionSchedule& schedule) {
  OneHot::make(previous.classes, previous.hot);
  return {mix_with_uniform(previous, schedule.alpha(t))};
}

CategoricalState marginal_dist(const OneHot& x0, std::size_t t, const DiffusionSchedule& schedule) {
  OneHot::make(x0.classes, x0.hot);
  return {mix_with_uniform(x0, schedule.alpha_bar(t))};
}

CategoricalState posterior_dist(const OneHot& xt, const OneHot& x0, double alpha_t, double alpha_bar_prev) {
  OneHot::make(xt.classes, xt.hot);
  OneHot::make(x0.classes, x0.hot);
  if (xt.classes != x0.classes) throw ShapeError("x_t and x_0 have different class counts");
  if (!(alpha_t > 0.0 && alpha_t <= 1.0)) throw DomainError("alpha_t must lie in (0, 1]");
  if (!(alpha_bar_prev >= 0.0 && alpha_bar_prev <= 1.0)) throw DomainError("alpha_bar must lie in [0, 1]");
  const auto likelihood = mix_with_uniform(xt, alpha_t);
  const auto prior = mix_with_uniform(x0, alpha_bar_prev);
  std::vector<double> pi(xt.classes);
  double total = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    pi[k] = likelihood[k] * prior[k];
    total += pi[k];
  }
  // Zero only when alpha_t = 1, abar = 1 and x_t != x_0, which no valid
  // trajectory produces.
  if (!(total > 0.0)) throw DomainError("posterior is undefined: x_t is unreachable from x_0");
  for (auto& p : pi) p /= total;
  return {std::move(pi)};
}

CategoricalState posterior_dist(const OneHot& xt, const OneHot& x0, std::size_t t,
                                const DiffusionSchedule& schedule) {
  require_step(t, 2, schedule);
  return posterior_dist(xt, x0, schedule.alpha(t), schedule.alpha_bar(t - 1));
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("tv_distance on vectors of different length");
  double l1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
  return 0.5 * l1;
}

std::vector<CollapsePoint> collapse_curve(std::span<const std::size_t> class_counts, std::size_t t,
                                          const DiffusionSchedule& schedule, std::size_t x0_hot,
                                          std::size_t xt_hot) {
  std::vector<CollapsePoint> out;
  out.reserve(class_counts.size());
  for (auto k : class_counts) {
    const auto x0 = OneHot::make(k, x0_hot);
    const auto xt = OneHot::make(k, xt_hot);
    if (k == 1) {
      require_step(t, 2, schedule);
      out.push_back({k, t, 0.0});
      continue;
    }
    const auto posterior = posterior_dist(xt, x0, t, schedule);
    out.push_back({k, t, tv_distance(posterior.probs, x0.dense())});
  }
  return out;
}

std::vector<OneHot> sample_trajectory(const OneHot& x0, const DiffusionSchedule& schedule, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<OneHot> states;
  states.reserve(schedule.steps());
  OneHot current = OneHot::make(x0.classes, x0.hot);
  for (std::size_t t = 1; t <= schedule.steps(); ++t) {
    const auto dist = forward_step_dist(current, t, schedule);
    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t next = dist.classes() - 1;
    for (std::size_t k = 0; k < dist.classes(); ++k) {
      cumulative += dist.probs[k];
      if (u < cumulative) {
        next = k;
        break;
      }
    }
    current = OneHot{current.classes, next};
    states.push_back(current);
  }
  return states;
}

void write_collapse_csv(std::ostream& out, std::span<const CollapsePoint> curve) {
  out << "K,t,tv_distance\n";
  for (const auto& p : curve) out << p.classes << ',' << p.t << ',' << format_double(p.tv_distance) << '\n';
}

}  // namespace resbit
