#include "vmrd/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vmrd/infotheory.hpp"

namespace vmrd {

namespace {

void require_range(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw std::domain_error(std::string(name) + " = " + std::to_string(v) + " outside [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::domain_error(std::string(name) + " must be a finite value >= 0");
  }
}

}  // namespace

double feedforward_example_rate(double p, double q, double D) {
  require_range(p, 0.0, 0.5, "p");
  require_range(q, 0.0, 0.5, "q");
  require_nonnegative(D, "D");
  if (D >= 0.5 * (p + q)) return 0.0;

  // The whole budget 2D is spent (H2 increases on [0, 1/2]); what is left is
  // a convex function of D1 on the feasible interval.
  const double budget = 2.0 * D;
  double lo = std::max(0.0, budget - q), hi = std::min(p, budget);
  auto loss = [&](double d1) { return -binary_entropy(d1) - binary_entropy(budget - d1); };
  while (hi - lo > 1e-10) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (loss(m1) <= loss(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double d1 = 0.5 * (lo + hi);
  const double d2 = std::clamp(budget - d1, 0.0, q);
  const double r = 0.5 * (binary_entropy(p) - binary_entropy(d1) + binary_entropy(q) - binary_entropy(d2));
  return std::max(r, 0.0);
}

RepeatRequestRate repeat_request_rate(double epsilon, double D) {
  require_range(epsilon, 0.0, 1.0, "epsilon");
  require_nonnegative(D, "D");
  const double e2 = epsilon * epsilon;
  RepeatRequestRate out;
  out.min_sufficient_cost = epsilon;
  if (e2 > 0.0 && D < 0.5 * e2) out.rate = e2 * (1.0 - binary_entropy(D / e2));
  return out;
}

double classic_binary_rd(double p, double D) {
  require_range(p, 0.0, 0.5, "p");
  require_nonnegative(D, "D");
  if (D >= p) return 0.0;
  return binary_entropy(p) - binary_entropy(D);
}

ProblemSpec feedforward_embedding(double p, double q) {
  require_range(p, 0.0, 0.5, "p");
  require_range(q, 0.0, 0.5, "q");
  ProblemSpec s;
  s.alphabets = {2, {2, 2}, {1, 1}, {1, 2}, {2, 2}};

  s.source.px.resize(4);
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int x2 = 0; x2 < 2; ++x2) {
      s.source.px[2 * x1 + x2] = (x1 ? p : 1.0 - p) * ((x1 != x2) ? q : 1.0 - q);
    }
  }

  KernelSideInfo k;
  k.tables.push_back(Eigen::VectorXd::Ones(4));  // [a1, x, y1], |Y_1| = 1
  Eigen::VectorXd t2 = Eigen::VectorXd::Zero(8);  // [a1, a2, x, y2]
  for (int x = 0; x < 4; ++x) t2[2 * x + x / 2] = 1.0;
  k.tables.push_back(t2);
  s.side_info = k;

  s.metrics.d.resize(16);
  for (int x = 0; x < 4; ++x) {
    for (int xh = 0; xh < 4; ++xh) {
      s.metrics.d[4 * x + xh] = ((x / 2) != (xh / 2)) + ((x % 2) != (xh % 2));
    }
  }
  s.metrics.gamma = Eigen::VectorXd::Zero(4);
  return s;
}

ProblemSpec repeat_request_embedding(double epsilon) {
  require_range(epsilon, 0.0, 1.0, "epsilon");
  constexpr int kErase = 2;
  ProblemSpec s;
  s.alphabets = {2, {2, 1}, {1, 2}, {3, 3}, {1, 2}};
  s.source.px = Eigen::VectorXd::Constant(2, 0.5);

  KernelSideInfo k;
  Eigen::VectorXd t1 = Eigen::VectorXd::Zero(6);  // [a1, x, y1]
  for (int x = 0; x < 2; ++x) {
    t1[3 * x + x] += 1.0 - epsilon;
    t1[3 * x + kErase] += epsilon;
  }
  k.tables.push_back(t1);
  Eigen::VectorXd t2 = Eigen::VectorXd::Zero(12);  // [a1, a2, x, y2]
  for (int x = 0; x < 2; ++x) {
    t2[3 * x + kErase] = 1.0;  // no repeat
    t2[6 + 3 * x + x] += 1.0 - epsilon;
    t2[6 + 3 * x + kErase] += epsilon;
  }
  k.tables.push_back(t2);
  s.side_info = k;

  s.metrics.d.resize(4);  // [x, xhat]; the only estimate that matters is xhat_2
  for (int x = 0; x < 2; ++x) {
    for (int xh = 0; xh < 2; ++xh) s.metrics.d[2 * x + xh] = x != xh ? 2.0 : 0.0;
  }
  s.metrics.gamma.resize(4);  // [a, x]
  for (int a = 0; a < 2; ++a) {
    for (int x = 0; x < 2; ++x) s.metrics.gamma[2 * a + x] = a == 1 ? 2.0 : 0.0;
  }
  return s;
}

ProblemSpec binary_hamming_problem(double p) {
  require_range(p, 0.0, 1.0, "p");
  ProblemSpec s;
  s.alphabets = {1, {2}, {1}, {1}, {2}};
  s.source.px = Eigen::Vector2d(1.0 - p, p);
  KernelSideInfo k;
  k.tables.push_back(Eigen::VectorXd::Ones(2));
  s.side_info = k;
  s.metrics.d = Eigen::Vector4d(0.0, 1.0, 1.0, 0.0);
  s.metrics.gamma = Eigen::VectorXd::Zero(2);
  return s;
}

}  // namespace vmrd
