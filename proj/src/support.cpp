#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

#include "vmrd/errors.hpp"
#include "vmrd/infotheory.hpp"
#include "vmrd/solver.hpp"

namespace vmrd {

namespace {

// Columns: per-tree images of the preserved functionals. Rows: P(x) for all
// but the last support row, H(X|J=j), E[d|J=j], E[g|J=j], mass.
Eigen::MatrixXd features(const PairMetrics& pm, const Eigen::MatrixXd& posterior,
                         const std::vector<Eigen::Index>& cols) {
  const Eigen::Index nx = pm.rows();
  const Eigen::Index m = nx + 3;
  Eigen::MatrixXd A(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const Eigen::Index j = cols[k];
    const auto post = posterior.col(j);
    const auto c = static_cast<Eigen::Index>(k);
    A.block(0, c, nx - 1, 1) = post.head(nx - 1);
    A(nx - 1, c) = entropy(post);
    A(nx, c) = post.dot(pm.d_bar.col(j));
    A(nx + 1, c) = post.dot(pm.g_bar.col(j));
    A(nx + 2, c) = 1.0;
  }
  return A;
}

}  // namespace

SupportReduction reduce_support(const PairMetrics& pm, const Eigen::MatrixXd& pj_given_x,
                                std::size_t bound) {
  if (pj_given_x.rows() != pm.rows() || pj_given_x.cols() != pm.trees()) {
    throw std::invalid_argument("conditional shape does not match the pair metrics");
  }
  const Eigen::Index nx = pm.rows(), nj = pm.trees();
  if (bound == 0) bound = static_cast<std::size_t>(nx) + 3;

  SupportReduction out;
  out.bound = bound;
  Eigen::VectorXd q = tree_marginal(pm, pj_given_x);
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < nj; ++j) {
    if (q[j] > 0.0) support.push_back(j);
  }
  out.support_before = support.size();
  if (support.size() <= bound) {
    out.pj_given_x = pj_given_x;
    out.support_after = support.size();
    out.reached_bound = true;
    return out;
  }

  // P(x | j), fixed from here on.
  Eigen::MatrixXd posterior = Eigen::MatrixXd::Zero(nx, nj);
  for (Eigen::Index j : support) {
    posterior.col(j) = pm.px.cwiseProduct(pj_given_x.col(j)) / q[j];
    posterior.col(j) /= posterior.col(j).sum();
  }

  const Eigen::Index rows = nx + 3;
  while (support.size() > bound) {
    // Work on the lightest atoms first so each step perturbs little mass.
    std::stable_sort(support.begin(), support.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return q[a] < q[b]; });
    const std::size_t width = std::min(support.size(), static_cast<std::size_t>(rows) + 1);
    std::vector<Eigen::Index> cols(support.begin(), support.begin() + static_cast<std::ptrdiff_t>(width));
    const Eigen::MatrixXd A = features(pm, posterior, cols);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const auto k = static_cast<Eigen::Index>(width);
    if (k <= rows) {
      // Square or tall: a null direction exists only if A is rank deficient.
      const double smallest = sv.size() >= k ? sv[k - 1] : 0.0;
      if (smallest > 1e-10 * std::max(1.0, sv[0])) break;
    }
    Eigen::VectorXd v = svd.matrixV().col(k - 1);

    // Largest step along +v and along -v that keeps every atom >= 0; take the
    // shorter one.
    double step_pos = std::numeric_limits<double>::infinity(), step_neg = step_pos;
    Eigen::Index hit_pos = -1, hit_neg = -1;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double mass = q[cols[static_cast<std::size_t>(c)]];
      if (v[c] < 0.0 && mass / -v[c] < step_pos) {
        step_pos = mass / -v[c];
        hit_pos = c;
      }
      if (v[c] > 0.0 && mass / v[c] < step_neg) {
        step_neg = mass / v[c];
        hit_neg = c;
      }
    }
    double t = step_pos;
    Eigen::Index hit = hit_pos;
    if (hit_neg >= 0 && (hit_pos < 0 || step_neg < step_pos)) {
      t = -step_neg;
      hit = hit_neg;
    }
    if (hit < 0) break;
    for (Eigen::Index c = 0; c < k; ++c) {
      auto& mass = q[cols[static_cast<std::size_t>(c)]];
      mass = std::max(0.0, mass + t * v[c]);
    }
    q[cols[static_cast<std::size_t>(hit)]] = 0.0;
    support.erase(std::remove_if(support.begin(), support.end(), [&](Eigen::Index j) { return q[j] <= 0.0; }),
                  support.end());
  }

  out.pj_given_x = Eigen::MatrixXd::Zero(nx, nj);
  for (Eigen::Index j : support) {
    out.pj_given_x.col(j) = (q[j] * posterior.col(j)).cwiseQuotient(pm.px);
  }
  const Eigen::VectorXd row_sums = out.pj_given_x.rowwise().sum();
  double drift = (row_sums.array() - 1.0).abs().maxCoeff();
  for (Eigen::Index x = 0; x < nx; ++x) out.pj_given_x.row(x) /= row_sums[x];

  const Operating before = evaluate(pm, pj_given_x);
  const Operating after = evaluate(pm, out.pj_given_x);
  drift = std::max({drift, std::abs(before.rate - after.rate), std::abs(before.distortion - after.distortion),
                    std::abs(before.cost - after.cost)});
  out.max_drift = drift;
  out.support_after = support.size();
  out.reached_bound = support.size() <= bound;
  if (drift > 1e-6) {
    throw NumericalError("support reduction drifted by " + std::to_string(drift));
  }
  return out;
}

}  // namespace vmrd
