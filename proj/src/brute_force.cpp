#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <tuple>

#include "vmrd/errors.hpp"
#include "vmrd/solver.hpp"

namespace vmrd {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Calls fn(counts) for every composition of `total` into counts.size() parts.
void for_each_composition(std::vector<int>& counts, std::size_t pos, int left,
                          const std::function<void(const std::vector<int>&)>& fn) {
  if (pos + 1 == counts.size()) {
    counts[pos] = left;
    fn(counts);
    return;
  }
  for (int c = 0; c <= left; ++c) {
    counts[pos] = c;
    for_each_composition(counts, pos + 1, left - c, fn);
  }
}

std::vector<double> multiplier_ladder() {
  std::vector<double> l{0.0};
  for (int k = -6; k <= 16; ++k) l.push_back(std::exp2(0.5 * k));
  return l;
}

}  // namespace

RateBracket brute_force_rdc(const PairMetrics& pm, double d_target, double g_target, int grid_steps) {
  const Eigen::Index nx = pm.rows(), nj = pm.trees();
  if (nx > 4 || nj > 8) {
    throw CapExceeded("grid oracle supports at most 4 source atoms and 8 codetrees");
  }
  if (grid_steps < 1) throw std::invalid_argument("grid_steps must be >= 1");
  const double L = pm.block_length;
  const double d_block = d_target * L, g_block = g_target * L;
  constexpr double kSlack = 1e-12;

  const std::vector<double> lambdas = multiplier_ladder();
  const bool cost_slack = g_block >= pm.g_bar.maxCoeff();
  const std::vector<double> mus = cost_slack ? std::vector<double>{0.0} : lambdas;

  RateBracket out;
  out.resolution = 1.0 / grid_steps;
  double best_upper = std::numeric_limits<double>::infinity();
  double best_lower = 0.0;
  Eigen::VectorXd r(nj), z(nx);
  Eigen::MatrixXd P(nx, nj), w(nx, nj);
  std::vector<int> counts(static_cast<std::size_t>(nj));

  // One tilt 2^{-(l d + m g)} of the marginal r: updates both bounds and
  // returns the expected block distortion.
  const auto visit = [&](double l, double m) {
    w = (-kLn2 * (l * pm.d_bar + m * pm.g_bar)).array().exp().matrix();
    z = w * r;
    double phi = 0.0;
    for (Eigen::Index x = 0; x < nx; ++x) phi -= pm.px[x] * std::log2(z[x]);

    // Jensen: min_r' phi(r') >= phi(r) - log2 max_k sum_x px w(x,k) / z(x).
    const Eigen::VectorXd ratio = w.transpose() * pm.px.cwiseQuotient(z);
    best_lower = std::max(best_lower, phi - std::log2(ratio.maxCoeff()) - l * d_block - m * g_block);

    for (Eigen::Index x = 0; x < nx; ++x) P.row(x) = (r.array() * w.row(x).transpose().array() / z[x]).transpose();
    const double ed = pm.px.dot(pm.d_bar.cwiseProduct(P).rowwise().sum());
    const double eg = pm.px.dot(pm.g_bar.cwiseProduct(P).rowwise().sum());
    ++out.evaluated;
    if (ed > d_block + kSlack || eg > g_block + kSlack) return ed;
    const Eigen::VectorXd q = P.transpose() * pm.px;
    double info = 0.0;
    for (Eigen::Index x = 0; x < nx; ++x) {
      for (Eigen::Index j = 0; j < nj; ++j) {
        if (P(x, j) > 0.0 && q[j] > 0.0) info += pm.px[x] * P(x, j) * std::log2(P(x, j) / q[j]);
      }
    }
    best_upper = std::min(best_upper, std::max(info, 0.0));
    return ed;
  };

  for_each_composition(counts, 0, grid_steps, [&](const std::vector<int>& c) {
    for (Eigen::Index j = 0; j < nj; ++j) r[j] = static_cast<double>(c[j]) / grid_steps;
    for (double m : mus) {
      // Distortion falls as l grows, so the first ladder rung that meets the
      // target brackets the exact crossing with the rung before it.
      double lo = -1.0, hi = -1.0;
      for (double l : lambdas) {
        if (visit(l, m) <= d_block + kSlack) {
          hi = l;
          break;
        }
        lo = l;
      }
      if (hi <= 0.0 || lo < 0.0) continue;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (visit(mid, m) <= d_block + kSlack ? hi : lo) = mid;
      }
    }
  });

  if (!std::isfinite(best_upper)) {
    throw InfeasibleTarget("no grid point meets the distortion and cost targets");
  }
  out.upper = best_upper / L;
  out.lower = std::min(best_lower / L, out.upper);
  return out;
}

}  // namespace vmrd
