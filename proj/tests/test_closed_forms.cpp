#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vmrd/closed_forms.hpp"
#include "vmrd/infotheory.hpp"
#include "vmrd/solver.hpp"

using namespace vmrd;

namespace {

double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

// Feedforward example by a plain scan over how the block distortion 2D is
// split between the two symbols.
double feedforward_scan(double p, double q, double D) {
  if (D >= 0.5 * (p + q)) return 0.0;
  double best = INFINITY;
  const int n = 200000;
  const double lo = std::max(0.0, 2 * D - q), hi = std::min(p, 2 * D);
  for (int k = 0; k <= n; ++k) {
    const double d1 = lo + (hi - lo) * k / n;
    const double d2 = std::clamp(2 * D - d1, 0.0, q);
    best = std::min(best, 0.5 * (h2(p) - h2(d1) + h2(q) - h2(d2)));
  }
  return best;
}

}  // namespace

TEST_CASE("feedforward example values") {
  CHECK(std::abs(feedforward_example_rate(0.25, 0.25, 0.1) - 0.342282) < 1e-6);
  CHECK(feedforward_example_rate(0.25, 0.25, 0.0) == doctest::Approx(h2(0.25)));
  CHECK(feedforward_example_rate(0.25, 0.25, 0.25) == 0.0);
  CHECK(feedforward_example_rate(0.25, 0.25, 0.3) == 0.0);
  // Without noise on the second symbol only the first one costs anything.
  CHECK(feedforward_example_rate(0.3, 0.0, 0.05) == doctest::Approx(0.5 * (h2(0.3) - h2(0.1))));
  for (double p : {0.1, 0.25, 0.5}) {
    for (double q : {0.05, 0.2, 0.5}) {
      for (double D : {0.01, 0.05, 0.1, 0.2}) {
        CHECK(feedforward_example_rate(p, q, D) == doctest::Approx(feedforward_scan(p, q, D)).epsilon(1e-6));
      }
    }
  }
  CHECK_THROWS_AS(feedforward_example_rate(0.6, 0.25, 0.1), std::domain_error);
  CHECK_THROWS_AS(feedforward_example_rate(0.25, -0.1, 0.1), std::domain_error);
  CHECK_THROWS_AS(feedforward_example_rate(0.25, 0.25, -0.1), std::domain_error);
}

TEST_CASE("feedforward rate is nonincreasing and hits zero at the midpoint") {
  for (double p : {0.1, 0.3}) {
    for (double q : {0.1, 0.4}) {
      double last = INFINITY;
      for (int k = 0; k <= 100; ++k) {
        const double D = 0.005 * k;
        const double r = feedforward_example_rate(p, q, D);
        CHECK(r <= last + 1e-12);
        CHECK(r >= 0.0);
        last = r;
        if (D >= 0.5 * (p + q)) CHECK(r == 0.0);
        if (D < 0.5 * (p + q) - 1e-3) CHECK(r > 0.0);
      }
    }
  }
}

TEST_CASE("repeat request values") {
  const RepeatRequestRate r = repeat_request_rate(0.5, 0.1);
  CHECK(std::abs(r.rate - 0.007262) < 1e-6);
  CHECK(r.min_sufficient_cost == 0.5);
  CHECK(repeat_request_rate(0.5, 0.125).rate == 0.0);
  CHECK(repeat_request_rate(0.5, 0.2).rate == 0.0);
  CHECK(repeat_request_rate(0.0, 0.0).rate == 0.0);
  for (double eps : {0.2, 0.5, 0.8}) {
    for (double D : {0.001, 0.01, 0.05}) {
      CHECK(repeat_request_rate(eps, D).rate <= classic_binary_rd(0.5, D) + 1e-12);
    }
  }
}

TEST_CASE("classic binary rate-distortion") {
  CHECK(classic_binary_rd(0.5, 0.1) == doctest::Approx(1.0 - h2(0.1)));
  CHECK(classic_binary_rd(0.5, 0.5) == 0.0);
  CHECK(classic_binary_rd(0.25, 0.3) == 0.0);
  CHECK(classic_binary_rd(0.25, 0.0) == doctest::Approx(h2(0.25)));
}

TEST_CASE("embeddings are valid problems") {
  const ProblemSpec ff = feedforward_embedding(0.25, 0.25);
  CHECK(validate(ff).empty());
  CHECK(count_codetrees(ff) == 8);
  CHECK(ff.source.px[0] == doctest::Approx(0.75 * 0.75));
  CHECK(ff.source.px[1] == doctest::Approx(0.75 * 0.25));
  CHECK(ff.source.px[3] == doctest::Approx(0.25 * 0.75));

  const ProblemSpec rr = repeat_request_embedding(0.5);
  CHECK(validate(rr).empty());
  CHECK(count_codetrees(rr) == 4096);

  const ProblemSpec bh = binary_hamming_problem(0.3);
  CHECK(validate(bh).empty());
  CHECK(count_codetrees(bh) == 2);
}

TEST_CASE("solver reproduces the feedforward curve") {
  const ProblemSpec s = feedforward_embedding(0.25, 0.25);
  const CodetreeSet set = full_codetree_set(s);
  const PairMetrics pm = compute_pair_metrics(s, set);
  for (double D : {0.02, 0.05, 0.1, 0.15}) {
    const RdcPoint p = rdc_at(pm, D, 1.0);
    CHECK(std::abs(p.rate - feedforward_example_rate(0.25, 0.25, D)) < 1e-2);
  }

  // At an optimum the directed information the estimates carry about the
  // source block equals the codetree rate I(X^2; J).
  const RdcPoint p = ba_solve(pm, 3.0, 0.0);
  JointTable joint{{2, 2, 2, 2}, Eigen::VectorXd::Zero(16)};
  for (Eigen::Index r = 0; r < pm.rows(); ++r) {
    const std::size_t x = pm.x_support[static_cast<std::size_t>(r)];
    for (std::size_t j = 0; j < set.size(); ++j) {
      const double w = pm.px[r] * p.pj_given_x(r, static_cast<Eigen::Index>(j));
      for_each_path(s, x, set.tree(j), [&](std::span<const int>, std::span<const int>, std::span<const int> xh,
                                          double prob) {
        joint.p[static_cast<Eigen::Index>(x * 4 + static_cast<std::size_t>(xh[0] * 2 + xh[1]))] += w * prob;
      });
    }
  }
  const double di = directed_information(joint, 2);
  const double mi = conditional_mutual_information(joint, std::vector<int>{0, 1}, std::vector<int>{2, 3},
                                                   std::vector<int>{});
  CHECK(std::abs(di - 2.0 * p.rate) < 1e-6);
  CHECK(di <= mi + 1e-10);
}
