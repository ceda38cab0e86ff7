#pragma once

// Random-coding simulation of the L-block scheme: a codebook of
// concatenated block codetrees, a min-score encoder and causal decoding
// against sampled side information.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vmrd/codetree.hpp"
#include "vmrd/problem.hpp"
#include "vmrd/solver.hpp"

namespace vmrd {

inline constexpr std::uint64_t kDefaultCodebookCap = std::uint64_t{1} << 20;

/// Independent generator for one (seed, trial, stream) triple.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(std::mt19937_64& rng);

/// Index drawn from a (not necessarily normalized) nonnegative vector.
std::size_t sample_index(const Eigen::VectorXd& weights, std::mt19937_64& rng);

/// 2^ceil(m L rate); throws CapExceeded above `cap`.
std::uint64_t codebook_size(double rate, int m, int L, std::uint64_t cap = kDefaultCodebookCap);

struct Codebook {
  double rate = 0.0;
  int m = 1;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  Eigen::VectorXd pj;
  std::size_t messages = 1;
  /// entries[w * m + b]: position in the codetree set of block b of message w.
  std::vector<std::uint32_t> entries;

  std::uint32_t tree(std::size_t w, int b) const { return entries[w * static_cast<std::size_t>(m) + b]; }
};

/// Draws every message's m blocks i.i.d. from pj. Message w uses substream
/// (seed, trial, w), so the codebook is a pure function of its arguments.
Codebook generate_codebook(const Eigen::VectorXd& pj, double rate, int m, int L,
                           std::uint64_t seed, std::uint64_t trial = 0,
                           std::uint64_t cap = kDefaultCodebookCap);

struct TrialResult {
  double distortion = 0.0;  // per symbol
  double cost = 0.0;        // per symbol
  std::size_t message = 0;
};

/// Everything that happened in one trial, slot by slot.
struct TrialTrace {
  TrialResult result;
  std::vector<std::size_t> x_blocks;  // x^L index per block
  std::vector<int> z_blocks;          // functional variant only
  std::vector<int> actions, y, estimates;
};

struct TrialReport {
  double empirical_distortion = 0.0;
  double stderr_d = 0.0;
  double empirical_cost = 0.0;
  double stderr_c = 0.0;
  int trials = 0;
};

class Simulator {
 public:
  /// `pm` must be compute_pair_metrics(spec, set).
  Simulator(ProblemSpec spec, CodetreeSet set, PairMetrics pm);
  Simulator(ProblemSpec spec, CodetreeSet set);

  const ProblemSpec& spec() const noexcept { return spec_; }
  const CodetreeSet& set() const noexcept { return set_; }
  const PairMetrics& metrics() const noexcept { return pm_; }

  /// argmin_w sum_b [d_bar(x_b, j_b(w)) + eta g_bar(x_b, j_b(w))], smallest w
  /// on ties.
  std::size_t encode(std::span<const std::size_t> x_blocks, const Codebook& book, double eta) const;

  /// Source and side information come from substreams (seed, trial, .) that
  /// no codebook message can use.
  TrialTrace run_trial_traced(const Codebook& book, double eta) const;
  TrialResult run_trial(const Codebook& book, double eta) const;

  /// Fresh codebook per trial; trial t uses the substreams of (seed, t).
  /// Results do not depend on `threads`.
  TrialReport simulate(const Eigen::VectorXd& pj, double rate, int m, int trials, double eta,
                       std::uint64_t seed, unsigned threads = 1,
                       std::uint64_t cap = kDefaultCodebookCap) const;

 private:
  std::size_t row_of(std::size_t x) const;

  ProblemSpec spec_;
  CodetreeSet set_;
  PairMetrics pm_;
  std::vector<std::ptrdiff_t> row_;  // x^L -> row of pm_, -1 off the support
};

/// Sum in a fixed binary tree over the input order.
double pairwise_sum(std::span<const double> v);

}  // namespace vmrd
