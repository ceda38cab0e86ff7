#pragma once

// Random problem instances for property checks.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "vmrd/infotheory.hpp"
#include "vmrd/problem.hpp"

namespace vmrd::tools {

struct RandomSpecOptions {
  int max_L = 2;
  int max_alphabet = 3;
  bool functional = false;
  /// Kernel ignores the actions and the cost table is zero.
  bool action_independent = false;
  /// Alphabet draws are repeated until the codetree count is at most this.
  std::uint64_t max_codetrees = 2048;
  /// Draw a zero source probability with this chance per x^L.
  double zero_mass = 0.0;
};

/// Flat Dirichlet(1) draw.
Eigen::VectorXd random_distribution(int n, std::mt19937_64& rng);

ProblemSpec random_spec(std::mt19937_64& rng, const RandomSpecOptions& opt = {});

/// The same problem with every action alphabet reduced to one symbol. Only
/// meaningful for action-independent specs.
ProblemSpec collapse_actions(const ProblemSpec& spec);

/// Random joint over (X_1..X_L, Xhat_1..Xhat_L) with the given alphabets.
JointTable random_joint(std::mt19937_64& rng, const std::vector<int>& x_sizes,
                        const std::vector<int>& xhat_sizes);

}  // namespace vmrd::tools
