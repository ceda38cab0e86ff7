#pragma once

// Analytic rates for special cases, plus problem builders that embed those
// cases into the general L-block model so the solver can be checked against
// them. Every rate is in bits per source symbol.

#include "vmrd/problem.hpp"

namespace vmrd {

/// Two-symbol block with X_2 = X_1 xor Q, X_1 ~ Bern(p), Q ~ Bern(q), and
/// the decoder seeing X_1 before estimating X_2. Throws std::domain_error
/// outside 0 <= p, q <= 0.5, D >= 0.
double feedforward_example_rate(double p, double q, double D);

struct RepeatRequestRate {
  double rate = 0.0;
  double min_sufficient_cost = 0.0;
};

/// Uniform binary source, erasure side information with probability
/// epsilon, one optional repeat request.
RepeatRequestRate repeat_request_rate(double epsilon, double D);

/// H2(p) - H2(D) below p, else 0.
double classic_binary_rd(double p, double D);

/// L = 2 problem: Y_1 constant, Y_2 = X_1, trivial actions, Hamming sum
/// distortion, zero cost.
ProblemSpec feedforward_embedding(double p, double q);

/// L = 2 problem: slot 1 carries the source bit through an erasure channel;
/// slot 2 has a constant source symbol, a repeat/no-repeat action and the
/// estimate. Distortion and cost are doubled so per-symbol values equal the
/// memoryless ones.
ProblemSpec repeat_request_embedding(double epsilon);

/// Binary Hamming problem with L = 1 and nothing to control.
ProblemSpec binary_hamming_problem(double p);

}  // namespace vmrd
