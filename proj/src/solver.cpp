#include "vmrd/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "vmrd/errors.hpp"
#include "vmrd/infotheory.hpp"
#include "parallel.hpp"

namespace vmrd {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Mutual information of px * P in bits, P given row-wise.
double joint_information(const Eigen::VectorXd& px, const Eigen::MatrixXd& P) {
  const Eigen::VectorXd q = P.transpose() * px;
  double info = 0.0;
  for (Eigen::Index x = 0; x < P.rows(); ++x) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const double p = P(x, j);
      // q[j] can underflow to zero while p stays subnormal; px p is then 0.
      if (p > 0.0 && q[j] > 0.0) row += p * std::log2(p / q[j]);
    }
    info += px[x] * row;
  }
  return std::max(info, 0.0);
}

// Trees grouped by identical cost columns.
struct Classes {
  std::vector<Eigen::Index> of_tree;
  Eigen::VectorXd size;
  Eigen::MatrixXd cost, d, g;  // per class; d and g are member averages
};

Classes group_trees(const PairMetrics& pm, double ld, double lg) {
  const Eigen::Index nx = pm.rows(), nj = pm.trees();
  const Eigen::MatrixXd c = ld * pm.d_bar + lg * pm.g_bar;
  std::map<std::vector<double>, Eigen::Index> index;
  Classes cl;
  cl.of_tree.resize(static_cast<std::size_t>(nj));
  std::vector<Eigen::Index> first;
  std::vector<double> key(static_cast<std::size_t>(nx));
  for (Eigen::Index j = 0; j < nj; ++j) {
    for (Eigen::Index x = 0; x < nx; ++x) key[x] = c(x, j);
    auto [it, inserted] = index.try_emplace(key, static_cast<Eigen::Index>(first.size()));
    if (inserted) first.push_back(j);
    cl.of_tree[j] = it->second;
  }
  const auto nc = static_cast<Eigen::Index>(first.size());
  cl.size = Eigen::VectorXd::Zero(nc);
  cl.cost.resize(nx, nc);
  cl.d = Eigen::MatrixXd::Zero(nx, nc);
  cl.g = Eigen::MatrixXd::Zero(nx, nc);
  for (Eigen::Index k = 0; k < nc; ++k) cl.cost.col(k) = c.col(first[k]);
  for (Eigen::Index j = 0; j < nj; ++j) {
    const auto k = cl.of_tree[j];
    cl.size[k] += 1.0;
    cl.d.col(k) += pm.d_bar.col(j);
    cl.g.col(k) += pm.g_bar.col(j);
  }
  for (Eigen::Index k = 0; k < nc; ++k) {
    cl.d.col(k) /= cl.size[k];
    cl.g.col(k) /= cl.size[k];
  }
  return cl;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what + " in Blahut-Arimoto iteration");
}

}  // namespace

PairMetrics compute_pair_metrics(const ProblemSpec& spec, const CodetreeSet& set, unsigned threads) {
  require_valid(spec);
  PairMetrics pm;
  pm.block_length = spec.alphabets.L;
  pm.x_support = support_x(spec);
  const auto nx = static_cast<Eigen::Index>(pm.x_support.size());
  const auto nj = static_cast<Eigen::Index>(set.size());
  pm.px.resize(nx);
  for (Eigen::Index r = 0; r < nx; ++r) pm.px[r] = spec.source.px[static_cast<Eigen::Index>(pm.x_support[r])];
  pm.d_bar.resize(nx, nj);
  pm.g_bar.resize(nx, nj);
  detail::parallel_for(static_cast<std::size_t>(nj), threads, [&](std::size_t j) {
    const JointCodetree tree = set.tree(j);
    for (Eigen::Index r = 0; r < nx; ++r) {
      const auto m = induced_metrics(spec, tree, pm.x_support[r]);
      pm.d_bar(r, static_cast<Eigen::Index>(j)) = m.d_bar;
      pm.g_bar(r, static_cast<Eigen::Index>(j)) = m.g_bar;
    }
  });
  return pm;
}

Eigen::VectorXd tree_marginal(const PairMetrics& pm, const Eigen::MatrixXd& pj_given_x) {
  return pj_given_x.transpose() * pm.px;
}

std::size_t support_size(const PairMetrics& pm, const Eigen::MatrixXd& pj_given_x, double threshold) {
  const Eigen::VectorXd q = tree_marginal(pm, pj_given_x);
  return static_cast<std::size_t>((q.array() > threshold).count());
}

Operating evaluate(const PairMetrics& pm, const Eigen::MatrixXd& pj_given_x) {
  if (pj_given_x.rows() != pm.rows() || pj_given_x.cols() != pm.trees()) {
    throw std::invalid_argument("conditional shape does not match the pair metrics");
  }
  const double L = pm.block_length;
  Operating op;
  op.rate = joint_information(pm.px, pj_given_x) / L;
  op.distortion = pm.px.dot(pm.d_bar.cwiseProduct(pj_given_x).rowwise().sum()) / L;
  op.cost = pm.px.dot(pm.g_bar.cwiseProduct(pj_given_x).rowwise().sum()) / L;
  return op;
}

RdcPoint ba_solve(const PairMetrics& pm, double lambda_d, double lambda_g, const BaOptions& opt) {
  if (!(lambda_d >= 0.0) || !(lambda_g >= 0.0) || !std::isfinite(lambda_d) || !std::isfinite(lambda_g)) {
    throw std::invalid_argument("multipliers must be finite and >= 0");
  }
  if (pm.rows() == 0 || pm.trees() == 0) throw std::invalid_argument("empty pair metrics");
  if (opt.max_iter < 1 || !(opt.tol > 0.0)) throw std::invalid_argument("bad iteration options");

  const Classes cl = group_trees(pm, lambda_d, lambda_g);
  const Eigen::Index nx = pm.rows(), nc = cl.size.size();
  const double total = static_cast<double>(pm.trees());
  const Eigen::VectorXd& px = pm.px;

  Eigen::MatrixXd P(nx, nc);
  for (Eigen::Index x = 0; x < nx; ++x) P.row(x) = cl.size.transpose() / total;

  const auto lagrangian = [&](const Eigen::MatrixXd& cond) {
    const double expected = px.dot(cl.cost.cwiseProduct(cond).rowwise().sum());
    return joint_information(px, cond) + expected;
  };

  RdcPoint out;
  out.lambda_d = lambda_d;
  out.lambda_g = lambda_g;
  double f_prev = lagrangian(P);
  require_finite(f_prev, "Lagrangian");
  Eigen::VectorXd logit(nc);
  for (int it = 1; it <= opt.max_iter; ++it) {
    const Eigen::VectorXd q = P.transpose() * px;
    for (Eigen::Index x = 0; x < nx; ++x) {
      double top = -std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < nc; ++c) {
        logit[c] = q[c] > 0.0 ? std::log(q[c]) - cl.cost(x, c) * kLn2
                              : -std::numeric_limits<double>::infinity();
        top = std::max(top, logit[c]);
      }
      require_finite(top, "normalizer");
      double z = 0.0;
      for (Eigen::Index c = 0; c < nc; ++c) {
        const double w = std::exp(logit[c] - top);
        P(x, c) = w;
        z += w;
      }
      P.row(x) /= z;
    }
    const double f = lagrangian(P);
    require_finite(f, "Lagrangian");
    out.max_lagrangian_increase = std::max(out.max_lagrangian_increase, f - f_prev);
    out.iterations = it;
    const bool done = std::abs(f_prev - f) < opt.tol;
    f_prev = f;
    if (done) {
      out.converged = true;
      break;
    }
  }

  out.pj_given_x.resize(nx, pm.trees());
  for (Eigen::Index j = 0; j < pm.trees(); ++j) {
    const auto c = cl.of_tree[static_cast<std::size_t>(j)];
    out.pj_given_x.col(j) = P.col(c) / cl.size[c];
  }
  const double L = pm.block_length;
  out.rate = joint_information(px, P) / L;
  out.distortion = px.dot(cl.d.cwiseProduct(P).rowwise().sum()) / L;
  out.cost = px.dot(cl.g.cwiseProduct(P).rowwise().sum()) / L;
  return out;
}

std::vector<double> geometric_grid(double start, double stop, int count) {
  if (count < 1) throw std::invalid_argument("grid count must be >= 1");
  if (count == 1) return {start};
  if (!(start > 0.0) || !(stop > 0.0)) throw std::invalid_argument("geometric grid needs positive endpoints");
  std::vector<double> g(static_cast<std::size_t>(count));
  const double ratio = std::log(stop / start) / (count - 1);
  for (int k = 0; k < count; ++k) g[k] = start * std::exp(ratio * k);
  g.back() = stop;
  return g;
}

std::vector<SurfaceEntry> rdc_surface(const PairMetrics& pm, std::vector<std::pair<double, double>> grid,
                                      const BaOptions& opt, unsigned threads) {
  std::sort(grid.begin(), grid.end());
  std::vector<SurfaceEntry> out(grid.size());
  detail::parallel_for(grid.size(), threads, [&](std::size_t k) {
    auto& e = out[k];
    e.lambda_d = grid[k].first;
    e.lambda_g = grid[k].second;
    try {
      e.point = ba_solve(pm, e.lambda_d, e.lambda_g, opt);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  });
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> supporting_plane_violations(
    const std::vector<RdcPoint>& points, double tol) {
  std::vector<std::pair<std::size_t, std::size_t>> bad;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    const double own = p.rate + p.lambda_d * p.distortion + p.lambda_g * p.cost;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& o = points[i];
      const double other = o.rate + p.lambda_d * o.distortion + p.lambda_g * o.cost;
      if (other < own - tol) bad.emplace_back(i, k);
    }
  }
  return bad;
}

namespace {

RdcPoint mix(const PairMetrics& pm, const RdcPoint& a, const RdcPoint& b, double theta) {
  RdcPoint m = b;
  m.pj_given_x = theta * a.pj_given_x + (1.0 - theta) * b.pj_given_x;
  const Operating op = evaluate(pm, m.pj_given_x);
  m.rate = op.rate;
  m.distortion = op.distortion;
  m.cost = op.cost;
  m.iterations = a.iterations + b.iterations;
  m.converged = a.converged && b.converged;
  m.max_lagrangian_increase = std::max(a.max_lagrangian_increase, b.max_lagrangian_increase);
  m.mixed = true;
  return m;
}

// Smallest multiplier in [0, lambda_max] whose solution has value(point) <=
// target, where value is nonincreasing in the multiplier.
template <typename Solve, typename Value>
RdcPoint bisect(const PairMetrics& pm, Solve&& solve, Value&& value, double target,
                const TargetOptions& opt, const char* what) {
  constexpr double kSlack = 1e-12;
  RdcPoint lo_pt = solve(0.0);
  if (value(lo_pt) <= target + kSlack) return lo_pt;
  double lo = 0.0, hi = 1.0;
  RdcPoint hi_pt = solve(hi);
  while (value(hi_pt) > target + kSlack) {
    if (hi >= opt.lambda_max) {
      throw InfeasibleTarget(std::string(what) + " target unreachable below multiplier " +
                             std::to_string(opt.lambda_max));
    }
    lo = hi;
    lo_pt = std::move(hi_pt);
    hi = std::min(2.0 * hi, opt.lambda_max);
    hi_pt = solve(hi);
  }
  while (target - value(hi_pt) > opt.tol_dg) {
    if (hi - lo <= 1e-9 * hi) {
      // The operating point jumps between lo and hi; time-share to land on
      // the target.
      const double vl = value(lo_pt), vh = value(hi_pt);
      const double theta = (target - vh) / (vl - vh);
      return mix(pm, lo_pt, hi_pt, std::clamp(theta, 0.0, 1.0));
    }
    const double mid = 0.5 * (lo + hi);
    RdcPoint m = solve(mid);
    if (value(m) <= target + kSlack) {
      hi = mid;
      hi_pt = std::move(m);
    } else {
      lo = mid;
      lo_pt = std::move(m);
    }
  }
  return hi_pt;
}

}  // namespace

RdcPoint rdc_at(const PairMetrics& pm, double d_target, double g_target, const TargetOptions& opt) {
  if (std::isnan(d_target) || std::isnan(g_target)) throw std::invalid_argument("NaN target");
  const double L = pm.block_length;
  const Eigen::Index nj = pm.trees();

  const double d_floor = pm.px.dot(pm.d_bar.rowwise().minCoeff()) / L;
  const double g_floor = pm.px.dot(pm.g_bar.rowwise().minCoeff()) / L;
  if (d_target < d_floor - 1e-12) {
    throw InfeasibleTarget("distortion target " + std::to_string(d_target) +
                           " below the achievable floor " + std::to_string(d_floor));
  }
  if (g_target < g_floor - 1e-12) {
    throw InfeasibleTarget("cost target " + std::to_string(g_target) +
                           " below the achievable floor " + std::to_string(g_floor));
  }

  // A single tree meeting both targets is a zero-rate solution.
  const Eigen::RowVectorXd dz = pm.px.transpose() * pm.d_bar / L;
  const Eigen::RowVectorXd gz = pm.px.transpose() * pm.g_bar / L;
  Eigen::Index best = -1;
  for (Eigen::Index j = 0; j < nj; ++j) {
    if (dz[j] <= d_target + 1e-12 && gz[j] <= g_target + 1e-12) {
      if (best < 0 || dz[j] < dz[best] || (dz[j] == dz[best] && gz[j] < gz[best])) best = j;
    }
  }
  if (best >= 0) {
    RdcPoint p;
    p.pj_given_x = Eigen::MatrixXd::Zero(pm.rows(), nj);
    p.pj_given_x.col(best).setOnes();
    p.rate = 0.0;
    p.distortion = dz[best];
    p.cost = gz[best];
    p.converged = true;
    return p;
  }

  const auto inner = [&](double lg) {
    return bisect(
        pm, [&](double ld) { return ba_solve(pm, ld, lg, opt.ba); },
        [](const RdcPoint& p) { return p.distortion; }, d_target, opt, "distortion");
  };
  return bisect(pm, inner, [](const RdcPoint& p) { return p.cost; }, g_target, opt, "cost");
}

}  // namespace vmrd
