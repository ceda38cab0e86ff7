#pragma once

// Problem model for source coding with in-block memory and an
// action-controlled side-information channel ("vending machine").
//
// Every table is flat and uses the canonical mixed-radix convention of
// mixed_radix.hpp. Composite indices nest in the order they are written:
//
//   source px          [x^L]
//   kernel slot i      [a_1..a_i, x^L, y_i]
//   functional f_i     [z]                -> symbol of X_i
//   functional g_i     [a_1..a_i, z]      -> symbol of Y_i
//   distortion         [x^L, xhat^L]
//   cost               [a^L, x^L]
//
// Slots are 0-based in code; slot i here is slot i+1 in the usual notation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "vmrd/mixed_radix.hpp"

namespace vmrd {

inline constexpr double kInputTolerance = 1e-12;
inline constexpr double kDerivedTolerance = 1e-9;

/// Largest flat table the model will allocate.
inline constexpr std::uint64_t kMaxTableSize = std::uint64_t{1} << 28;

/// Slot of the block that global symbol i (1-based) falls into: r(i-1, L).
constexpr int t_index(long long i, int L) { return static_cast<int>((i - 1) % L); }

struct BlockAlphabets {
  int L = 1;
  std::vector<int> sizes_x, sizes_a, sizes_y, sizes_xhat;

  /// Throws ValidationError on bad lengths/cardinalities and CapExceeded when a
  /// product alphabet does not fit.
  void check() const;

  std::size_t num_x() const;
  std::size_t num_a() const;
  std::size_t num_y() const;
  std::size_t num_xhat() const;

  /// |Y_1 x ... x Y_i|; 1 for the empty prefix.
  std::size_t y_prefix_count(int i) const;
  /// |A_1 x ... x A_i|.
  std::size_t a_prefix_count(int i) const;

  MixedRadix x_radix() const { return MixedRadix(sizes_x); }
  MixedRadix a_radix() const { return MixedRadix(sizes_a); }
  MixedRadix y_radix() const { return MixedRadix(sizes_y); }
  MixedRadix xhat_radix() const { return MixedRadix(sizes_xhat); }
};

struct SourceLaw {
  Eigen::VectorXd px;
};

/// P(y_i | a_1..a_i, x^L) per slot, stored without y^{i-1} dependence.
struct KernelSideInfo {
  std::vector<Eigen::VectorXd> tables;
};

/// Y_i = g_i(a_1..a_i, Z) and X_i = f_i(Z) with Z ~ pz, shared across a block.
struct FunctionalSideInfo {
  int z_size = 1;
  Eigen::VectorXd pz;
  std::vector<std::vector<int>> f;
  std::vector<std::vector<int>> g;
};

using SideInfoLaw = std::variant<KernelSideInfo, FunctionalSideInfo>;

struct Metrics {
  Eigen::VectorXd d;      // [x^L, xhat^L]
  Eigen::VectorXd gamma;  // [a^L, x^L]
};

struct ProblemSpec {
  BlockAlphabets alphabets;
  SourceLaw source;
  SideInfoLaw side_info;
  Metrics metrics;

  bool is_functional() const { return std::holds_alternative<FunctionalSideInfo>(side_info); }
  const KernelSideInfo& kernel() const { return std::get<KernelSideInfo>(side_info); }
  const FunctionalSideInfo& functional() const { return std::get<FunctionalSideInfo>(side_info); }

  double distortion(std::size_t x, std::size_t xhat) const {
    return metrics.d[static_cast<Eigen::Index>(x * alphabets.num_xhat() + xhat)];
  }
  double cost(std::size_t a, std::size_t x) const {
    return metrics.gamma[static_cast<Eigen::Index>(a * alphabets.num_x() + x)];
  }

  /// P(y_i | a^i, x^L) for the kernel variant; `a_prefix` is the index of
  /// (a_1..a_i) over A_1 x ... x A_i.
  double kernel_prob(int slot, std::size_t a_prefix, std::size_t x, int y) const;
};

/// Result of pushing Z through the functional model.
struct CompiledFunctional {
  SourceLaw source;
  FunctionalSideInfo side_info;
  Eigen::MatrixXd posterior;                 // [x^L, z] = P(z | x^L); zero rows where px = 0
  std::vector<std::size_t> zero_probability; // x^L with px = 0
};

CompiledFunctional compile_functional(const Eigen::VectorXd& pz,
                                      const std::vector<std::vector<int>>& f,
                                      const std::vector<std::vector<int>>& g,
                                      const BlockAlphabets& alphabets);

/// P(z | x^L) for one source block, computed from the functional model.
Eigen::VectorXd functional_posterior(const ProblemSpec& spec, std::size_t x);

/// Every invariant violation, in a fixed order. Empty means valid.
std::vector<std::string> validate(const ProblemSpec& spec);

/// Throws ValidationError carrying validate(spec) when it is non-empty.
void require_valid(const ProblemSpec& spec);

/// x^L indices with px > 0, ascending.
std::vector<std::size_t> support_x(const ProblemSpec& spec);

}  // namespace vmrd
