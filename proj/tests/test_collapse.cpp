#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "resbit/collapse.hpp"
#include "resbit/errors.hpp"

namespace resbit {
namespace {

using Vec = std::vector<double>;

// Dense transition step: p' = (1 - beta) p + beta / K.
Vec apply_step(const Vec& p, double beta) {
  const double k = static_cast<double>(p.size());
  Vec out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = (1.0 - beta) * p[i] + beta / k;
  return out;
}

// Row j of the transition matrix: q(x_t = i | x_{t-1} = j).
double transition(std::size_t from, std::size_t to, std::size_t k, double beta) {
  return (from == to ? 1.0 - beta : 0.0) + beta / static_cast<double>(k);
}

Vec iterate_marginal(std::size_t k, std::size_t hot, const std::vector<double>& betas, std::size_t t) {
  Vec p(k, 0.0);
  p[hot] = 1.0;
  for (std::size_t s = 0; s < t; ++s) p = apply_step(p, betas[s]);
  return p;
}

std::vector<double> ramp(std::size_t steps, double lo, double hi) {
  std::vector<double> b(steps);
  for (std::size_t i = 0; i < steps; ++i) b[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps);
  return b;
}

TEST(Schedule, DefaultLinear) {
  const auto s = DiffusionSchedule::linear();
  EXPECT_EQ(s.steps(), 1000u);
  EXPECT_DOUBLE_EQ(s.beta(1), 1e-4);
  EXPECT_DOUBLE_EQ(s.beta(1000), 0.02);
  EXPECT_EQ(s.alpha_bar(0), 1.0);
  EXPECT_DOUBLE_EQ(s.alpha_bar(2), (1 - 1e-4) * (1 - s.beta(2)));
  EXPECT_THROW(s.beta(0), DomainError);
  EXPECT_THROW(s.alpha_bar(1001), DomainError);
}

TEST(Schedule, Rejections) {
  EXPECT_THROW(DiffusionSchedule::from_betas({0.2, 0.1}), ScheduleError);
  EXPECT_THROW(DiffusionSchedule::from_betas({0.1, 0.1}), ScheduleError);
  EXPECT_THROW(DiffusionSchedule::from_betas({0.0, 0.1}), ScheduleError);
  EXPECT_THROW(DiffusionSchedule::from_betas({0.5, 1.0}), ScheduleError);
  EXPECT_THROW(DiffusionSchedule::from_betas({}), ScheduleError);
  EXPECT_THROW(DiffusionSchedule::linear(10, 0.02, 0.01), ScheduleError);
  EXPECT_NO_THROW(DiffusionSchedule::linear(1, 0.3, 0.3));
}

TEST(OneHotState, Construction) {
  EXPECT_THROW(OneHot::make(3, 3), ShapeError);
  EXPECT_THROW(OneHot::make(0, 0), ShapeError);
  EXPECT_EQ(OneHot::from_dense(Vec{0, 0, 1}), OneHot::make(3, 2));
  EXPECT_THROW(OneHot::from_dense(Vec{0, 1, 1}), ShapeError);
  EXPECT_THROW(OneHot::from_dense(Vec{0, 0.5, 0}), ShapeError);
  EXPECT_THROW(OneHot::from_dense(Vec{0, 0}), ShapeError);
  EXPECT_EQ(OneHot::make(4, 1).dense(), (Vec{0, 1, 0, 0}));
}

TEST(Forward, HandArithmetic) {
  const auto s = DiffusionSchedule::from_betas({0.5});
  const auto d = forward_step_dist(OneHot::make(2, 0), 1, s);
  EXPECT_DOUBLE_EQ(d.probs[0], 0.75);
  EXPECT_DOUBLE_EQ(d.probs[1], 0.25);
}

TEST(Forward, NearlyFullNoiseIsUniform) {
  const auto s = DiffusionSchedule::from_betas({0.999999});
  const auto d = forward_step_dist(OneHot::make(5, 3), 1, s);
  for (double p : d.probs) EXPECT_NEAR(p, 0.2, 1e-6);
  EXPECT_TRUE(d.is_valid());
}

TEST(Marginal, HandArithmetic) {
  const auto s = DiffusionSchedule::from_betas({0.01});
  const auto d = marginal_dist(OneHot::make(4, 1), 1, s);
  const Vec expected{0.0025, 0.9925, 0.0025, 0.0025};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(d.probs[i], expected[i], 1e-15);
}

TEST(Marginal, VanishingSignalIsUniform) {
  const auto s = DiffusionSchedule::from_betas({0.9, 0.95, 0.99});
  const auto d = marginal_dist(OneHot::make(6, 0), 3, s);
  for (double p : d.probs) EXPECT_NEAR(p, 1.0 / 6.0, 1e-4);
  EXPECT_EQ(marginal_dist(OneHot::make(6, 2), 0, s).probs, OneHot::make(6, 2).dense());
}

TEST(Marginal, MatchesIteratedSteps) {
  for (std::size_t steps = 1; steps <= 10; ++steps) {
    const auto betas = ramp(steps, 0.05, 0.6);
    const auto s = DiffusionSchedule::from_betas(betas);
    for (std::size_t k = 1; k <= 8; ++k) {
      for (std::size_t hot = 0; hot < k; ++hot) {
        for (std::size_t t = 0; t <= steps; ++t) {
          const auto closed = marginal_dist(OneHot::make(k, hot), t, s);
          const auto iterated = iterate_marginal(k, hot, betas, t);
          for (std::size_t i = 0; i < k; ++i) ASSERT_NEAR(closed.probs[i], iterated[i], 1e-10);
          ASSERT_TRUE(closed.is_valid());
        }
      }
    }
  }
}

TEST(Posterior, HandArithmetic) {
  const auto d = posterior_dist(OneHot::make(2, 0), OneHot::make(2, 0), 0.9, 0.8);
  EXPECT_NEAR(d.probs[0], 0.855 / 0.86, 1e-15);
  EXPECT_NEAR(d.probs[1], 0.005 / 0.86, 1e-15);
}

TEST(Posterior, Preconditions) {
  const auto s = DiffusionSchedule::from_betas({0.1, 0.2, 0.3});
  EXPECT_THROW(posterior_dist(OneHot::make(3, 0), OneHot::make(3, 0), 1, s), DomainError);
  EXPECT_THROW(posterior_dist(OneHot::make(3, 0), OneHot::make(3, 0), 4, s), DomainError);
  EXPECT_THROW(posterior_dist(OneHot::make(3, 0), OneHot::make(4, 0), 2, s), ShapeError);
  EXPECT_THROW(posterior_dist(OneHot::make(3, 0), OneHot::make(3, 0), 1.5, 0.5), DomainError);
}

// Bayes: q(x_{t-1} | x_t, x_0) = q(x_t | x_{t-1}) q(x_{t-1} | x_0) / q(x_t | x_0),
// with both marginals from iterated steps.
TEST(Posterior, ChainConsistencyByEnumeration) {
  for (std::size_t steps = 2; steps <= 10; ++steps) {
    const auto betas = ramp(steps, 0.02, 0.45);
    const auto s = DiffusionSchedule::from_betas(betas);
    for (std::size_t k = 2; k <= 8; ++k) {
      for (std::size_t t = 2; t <= steps; ++t) {
        for (std::size_t h0 = 0; h0 < k; ++h0) {
          const auto prev = iterate_marginal(k, h0, betas, t - 1);
          const auto cur = iterate_marginal(k, h0, betas, t);
          for (std::size_t ht = 0; ht < k; ++ht) {
            const auto post = posterior_dist(OneHot::make(k, ht), OneHot::make(k, h0), t, s);
            double total = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
              const double bayes = transition(j, ht, k, betas[t - 1]) * prev[j] / cur[ht];
              ASSERT_NEAR(post.probs[j], bayes, 1e-12);
              total += transition(j, ht, k, betas[t - 1]) * prev[j];
            }
            ASSERT_NEAR(total, cur[ht], 1e-12);
            ASSERT_TRUE(post.is_valid());
          }
        }
      }
    }
  }
}

TEST(Posterior, RelabelingPermutesTheOutput) {
  const auto s = DiffusionSchedule::from_betas({0.1, 0.25, 0.4});
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  for (std::size_t h0 = 0; h0 < 5; ++h0) {
    for (std::size_t ht = 0; ht < 5; ++ht) {
      const auto a = posterior_dist(OneHot::make(5, ht), OneHot::make(5, h0), 3, s);
      const auto b = posterior_dist(OneHot::make(5, perm[ht]), OneHot::make(5, perm[h0]), 3, s);
      for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(b.probs[perm[i]], a.probs[i]);
    }
  }
}

// Conditional frequencies of x_{t-1} given (x_0, x_t) from simulated chains.
TEST(Posterior, MonteCarloAgreement) {
  const auto s = DiffusionSchedule::from_betas({0.1, 0.2, 0.3});
  const std::size_t k = 3, t = 3;
  const auto x0 = OneHot::make(k, 0);
  std::vector<std::vector<double>> counts(k, std::vector<double>(k, 0.0));
  for (std::uint64_t i = 0; i < 300000; ++i) {
    const auto path = sample_trajectory(x0, s, 1000 + i);
    counts[path[t - 1].hot][path[t - 2].hot] += 1.0;
  }
  for (std::size_t ht = 0; ht < k; ++ht) {
    const double n = std::accumulate(counts[ht].begin(), counts[ht].end(), 0.0);
    ASSERT_GT(n, 10000.0);
    const auto post = posterior_dist(OneHot::make(k, ht), x0, t, s);
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(counts[ht][j] / n, post.probs[j], 0.01) << ht << "," << j;
  }
}

TEST(Trajectory, ReplayAndMarginal) {
  const auto s = DiffusionSchedule::from_betas({0.05, 0.15, 0.3, 0.5});
  const auto x0 = OneHot::make(4, 2);
  EXPECT_EQ(sample_trajectory(x0, s, 42), sample_trajectory(x0, s, 42));
  EXPECT_EQ(sample_trajectory(x0, s, 42).size(), 4u);

  std::vector<double> freq(4, 0.0);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) freq[sample_trajectory(x0, s, static_cast<std::uint64_t>(i))[2].hot] += 1.0 / n;
  const auto closed = marginal_dist(x0, 3, s);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(freq[c], closed.probs[c], 0.005);
}

TEST(Trajectory, HeavyNoiseEndsUniform) {
  const auto s = DiffusionSchedule::from_betas({0.95, 0.96, 0.97, 0.98, 0.99});
  const std::size_t k = 5;
  const int n = 100000;
  std::vector<double> counts(k, 0.0);
  for (int i = 0; i < n; ++i) counts[sample_trajectory(OneHot::make(k, 0), s, 7 * i + 1).back().hot] += 1.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
  EXPECT_LT(chi2, 13.276704135987622);  // chi-square(4) upper 1% point
}

TEST(Collapse, DistanceShrinksWithClassCount) {
  const auto s = DiffusionSchedule::linear();
  const std::vector<std::size_t> ks{2, 10, 100, 10000};
  const auto curve = collapse_curve(ks, 2, s, 0, 0);
  ASSERT_EQ(curve.size(), 4u);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LT(curve[i].tv_distance, curve[i - 1].tv_distance);
  EXPECT_LT(curve.back().tv_distance, 1e-3);
  EXPECT_EQ(collapse_curve(std::vector<std::size_t>{1}, 2, s, 0, 0)[0].tv_distance, 0.0);
}

// beta_t = 0.1, abar_{t-1} = 0.5, x_t = x_0. Reference values computed in
// double precision from the unnormalized products.
TEST(Collapse, GoldenValuesAtFixedCoefficients) {
  const std::pair<std::size_t, double> golden[] = {
      {2, 0.01724137931034475}, {10, 0.00891089108910792}, {100, 0.0010867178924209853}, {10000, 1.110864196285366e-05}};
  double previous = 1.0;
  for (const auto& [k, tv] : golden) {
    const auto x0 = OneHot::make(k, 0);
    const double d = tv_distance(posterior_dist(x0, x0, 0.9, 0.5).probs, x0.dense());
    EXPECT_NEAR(d, tv, 1e-12) << k;
    EXPECT_LT(d, previous);
    previous = d;
  }
}

TEST(Collapse, CsvFormat) {
  const auto s = DiffusionSchedule::from_betas({0.1, 0.2});
  const auto curve = collapse_curve(std::vector<std::size_t>{2, 3}, 2, s, 0, 1);
  std::ostringstream out;
  write_collapse_csv(out, curve);
  EXPECT_EQ(out.str().substr(0, 16), "K,t,tv_distance\n");
  EXPECT_THROW(collapse_curve(std::vector<std::size_t>{2}, 2, s, 0, 2), ShapeError);
}

TEST(TotalVariation, Basics) {
  EXPECT_EQ(tv_distance(Vec{1, 0}, Vec{0, 1}), 1.0);
  EXPECT_EQ(tv_distance(Vec{0.5, 0.5}, Vec{0.5, 0.5}), 0.0);
  EXPECT_THROW(tv_distance(Vec{1}, Vec{0.5, 0.5}), ShapeError);
}

}  // namespace
}  // namespace resbit
