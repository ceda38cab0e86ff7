#pragma once

// Rate-distortion-cost computation over a codetree alphabet.
//
// The optimization variable is the conditional P(j | x^L) over codetrees.
// Everything here works on PairMetrics, the per-(x^L, codetree) expected
// block distortion and cost, so the same solver runs on the full codetree
// set or on a restricted one. User-facing rate, distortion and cost are per
// source symbol (block quantities divided by L); multipliers are in bits per
// block distortion/cost unit, which is the same as bits per per-symbol unit.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vmrd/codetree.hpp"
#include "vmrd/problem.hpp"

namespace vmrd {

struct PairMetrics {
  int block_length = 1;
  std::vector<std::size_t> x_support;  // x^L index of each row
  Eigen::VectorXd px;                  // P(x^L) on the support
  Eigen::MatrixXd d_bar;               // [row, tree]
  Eigen::MatrixXd g_bar;               // [row, tree]

  Eigen::Index rows() const { return px.size(); }
  Eigen::Index trees() const { return d_bar.cols(); }
};

/// induced_metrics for every (x^L in the support, tree in the set). Work is
/// split over `threads` workers; the result does not depend on the count.
PairMetrics compute_pair_metrics(const ProblemSpec& spec, const CodetreeSet& set,
                                 unsigned threads = 1);

struct BaOptions {
  double tol = 1e-10;
  int max_iter = 100000;
};

struct RdcPoint {
  double lambda_d = 0.0;
  double lambda_g = 0.0;
  double rate = 0.0;        // bits per source symbol
  double distortion = 0.0;  // per symbol
  double cost = 0.0;        // per symbol
  Eigen::MatrixXd pj_given_x;  // [row, tree]
  int iterations = 0;
  bool converged = false;
  /// Largest rise of the Lagrangian between consecutive iterations (0 when
  /// the iteration was monotone).
  double max_lagrangian_increase = 0.0;
  /// Time-shared between two multiplier settings to hit a target exactly.
  bool mixed = false;
};

struct Operating {
  double rate = 0.0;
  double distortion = 0.0;
  double cost = 0.0;
};

/// Per-symbol rate, distortion and cost of an arbitrary conditional.
Operating evaluate(const PairMetrics& pm, const Eigen::MatrixXd& pj_given_x);

/// Codetree marginal q(j) = sum_x P(x) P(j|x).
Eigen::VectorXd tree_marginal(const PairMetrics& pm, const Eigen::MatrixXd& pj_given_x);

/// Number of trees with q(j) > threshold.
std::size_t support_size(const PairMetrics& pm, const Eigen::MatrixXd& pj_given_x,
                         double threshold = 0.0);

/// Blahut-Arimoto iteration for fixed multipliers, started from the uniform
/// conditional. Trees whose cost columns coincide are iterated as one class;
/// this is exact because such trees keep equal conditionals under the update.
RdcPoint ba_solve(const PairMetrics& pm, double lambda_d, double lambda_g,
                  const BaOptions& opt = {});

std::vector<double> geometric_grid(double start, double stop, int count);

struct SurfaceEntry {
  double lambda_d = 0.0;
  double lambda_g = 0.0;
  std::optional<RdcPoint> point;
  std::string error;
};

/// One ba_solve per multiplier pair, sorted by (lambda_d, lambda_g). A failed
/// point carries its error message and does not abort the sweep.
std::vector<SurfaceEntry> rdc_surface(const PairMetrics& pm,
                                      std::vector<std::pair<double, double>> grid,
                                      const BaOptions& opt = {}, unsigned threads = 1);

/// Pairs (i, k) where point i lies below the supporting plane of point k by
/// more than tol, i.e. R_i + l_k.(D_i, G_i) < R_k + l_k.(D_k, G_k) - tol.
std::vector<std::pair<std::size_t, std::size_t>> supporting_plane_violations(
    const std::vector<RdcPoint>& points, double tol);

class InfeasibleTarget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TargetOptions {
  double tol_dg = 1e-4;
  double lambda_max = 1e4;
  BaOptions ba;
};

/// Minimum rate with per-symbol distortion <= d_target and cost <= g_target.
/// Nested bisection: outer on lambda_g, inner on lambda_d, each stopping once
/// the achieved value is within tol_dg below its target or the constraint is
/// slack. A jump in the operating point between two close multipliers is
/// bridged by time sharing the two conditionals.
RdcPoint rdc_at(const PairMetrics& pm, double d_target, double g_target,
                const TargetOptions& opt = {});

struct SupportReduction {
  Eigen::MatrixXd pj_given_x;
  std::size_t support_before = 0;
  std::size_t support_after = 0;
  std::size_t bound = 0;
  /// max |change| over rate, distortion, cost and the source marginal.
  double max_drift = 0.0;
  bool reached_bound = false;
};

/// Caratheodory reduction. Holds P(x^L | j) fixed and moves the codetree
/// marginal along null directions of the linear map to (P(x^L) but one,
/// H(X^L|J), E d, E gamma, total mass) until at most `bound` trees carry
/// mass. bound = 0 means |supp P(x^L)| + 3.
SupportReduction reduce_support(const PairMetrics& pm, const Eigen::MatrixXd& pj_given_x,
                                std::size_t bound = 0);

struct RateBracket {
  double lower = 0.0;       // certified lower bound on R
  double upper = 0.0;       // best feasible grid point (an achievable rate)
  double resolution = 0.0;  // simplex grid spacing
  std::size_t evaluated = 0;
};

/// Exhaustive grid oracle for tiny instances (<= 4 source atoms, <= 8 trees).
/// Enumerates every codetree marginal r on a simplex grid with `grid_steps`
/// subdivisions and a fixed ladder of multipliers, evaluates the conditional
/// r_j 2^{-cost} / Z(x) exactly, and keeps the least rate among feasible
/// ones. The distortion multiplier is bisected between ladder rungs down to
/// the point where the distortion target is met. The lower end is the
/// Lagrange dual bound with a Jensen certificate for the inner minimum,
/// maximized over the same grid.
RateBracket brute_force_rdc(const PairMetrics& pm, double d_target, double g_target,
                            int grid_steps);

}  // namespace vmrd
