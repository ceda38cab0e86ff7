#pragma once

// Joint codetrees: deterministic causal strategies that map side-information
// prefixes to actions and estimates within one block.
//
// A tree is stored densely: action_maps[i] has one entry per y-prefix of
// length i (a single entry for slot 0), estimate_maps[i] one entry per
// y-prefix of length i + 1. Prefixes are indexed in canonical mixed-radix
// order over Y_1 x ... x Y_i.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vmrd/problem.hpp"

namespace vmrd {

inline constexpr std::uint64_t kDefaultCodetreeCap = std::uint64_t{1} << 24;

struct JointCodetree {
  std::vector<int> y_sizes;
  std::vector<std::vector<int>> action_maps;
  std::vector<std::vector<int>> estimate_maps;

  int length() const { return static_cast<int>(y_sizes.size()); }
  int action(int slot, std::size_t y_prefix) const { return action_maps[slot][y_prefix]; }
  int estimate(int slot, std::size_t y_prefix) const { return estimate_maps[slot][y_prefix]; }

  bool operator==(const JointCodetree&) const = default;
  auto operator<=>(const JointCodetree&) const = default;
};

/// Action-only strategy v^L.
struct ActionCodetree {
  std::vector<int> y_sizes;
  std::vector<std::vector<int>> maps;
  bool operator==(const ActionCodetree&) const = default;
};

/// Estimate-only strategy u^L.
struct EstimateCodetree {
  std::vector<int> y_sizes;
  std::vector<std::vector<int>> maps;
  bool operator==(const EstimateCodetree&) const = default;
};

struct CodetreeRun {
  std::vector<int> actions;
  std::vector<int> estimates;
  bool operator==(const CodetreeRun&) const = default;
};

/// Canonical enumeration of all joint codetrees for one set of alphabets.
/// Ordinals are mixed-radix over every map entry: action_maps[0] most
/// significant, then estimate_maps[0], action_maps[1], ..., estimate_maps[L-1];
/// prefix indices ascending within a map.
class CodetreeLayout {
 public:
  CodetreeLayout() = default;
  explicit CodetreeLayout(const BlockAlphabets& alphabets);

  const BlockAlphabets& alphabets() const noexcept { return alphabets_; }

  /// Number of distinct trees. Throws CapExceeded above `cap`.
  std::uint64_t count(std::uint64_t cap = UINT64_MAX) const;

  JointCodetree decode(std::uint64_t ordinal) const;
  std::uint64_t encode(const JointCodetree& tree) const;
  JointCodetree zero() const;

  /// Shapes and alphabets match this layout.
  bool conforms(const JointCodetree& tree) const;

  /// Radix of every digit, in ordinal order.
  const std::vector<int>& digit_radices() const noexcept { return radices_; }

 private:
  BlockAlphabets alphabets_;
  std::vector<int> radices_;
};

std::uint64_t count_codetrees(const ProblemSpec& spec, std::uint64_t cap = UINT64_MAX);

/// Every tree in ordinal order; throws CapExceeded above `cap`.
std::vector<JointCodetree> enumerate_codetrees(const ProblemSpec& spec,
                                               std::uint64_t cap = kDefaultCodetreeCap);

CodetreeRun run_codetree(const JointCodetree& tree, std::span<const int> y);

/// Probability of observing the full y^L path when `tree` is run against
/// source block x^L.
double codetree_path_law(const ProblemSpec& spec, std::size_t x, const JointCodetree& tree,
                         std::span<const int> y);

using PathVisitor = std::function<void(std::span<const int> y, std::span<const int> a,
                                       std::span<const int> xhat, double prob)>;

/// Visits every y^L path with positive probability, depth first in prefix
/// order.
void for_each_path(const ProblemSpec& spec, std::size_t x, const JointCodetree& tree,
                   const PathVisitor& visit);

struct InducedMetrics {
  double d_bar = 0.0;
  double g_bar = 0.0;
};

/// Expected block distortion and cost of `tree` given x^L.
InducedMetrics induced_metrics(const ProblemSpec& spec, const JointCodetree& tree, std::size_t x);

std::pair<ActionCodetree, EstimateCodetree> split_codetree(const JointCodetree& tree);
JointCodetree merge_codetree(const ActionCodetree& actions, const EstimateCodetree& estimates);
std::vector<int> run_action_tree(const ActionCodetree& tree, std::span<const int> y);
std::vector<int> run_estimate_tree(const EstimateCodetree& tree, std::span<const int> y);

/// m block codetrees executed back to back over n = mL slots. The root of
/// block b+1 takes over from the leaves of block b, so slot k only ever sees
/// the y-values of its own block.
class ConcatenatedCodetree {
 public:
  explicit ConcatenatedCodetree(std::vector<JointCodetree> blocks);

  int block_length() const { return blocks_.front().length(); }
  int blocks() const { return static_cast<int>(blocks_.size()); }
  int length() const { return block_length() * blocks(); }
  const JointCodetree& block(int b) const { return blocks_[b]; }

  /// Action at global slot k given y_1..y_k (`y_prefix` has length >= k).
  int action(int k, std::span<const int> y_prefix) const;
  /// Estimate at global slot k given y_1..y_{k+1}.
  int estimate(int k, std::span<const int> y_prefix) const;

  CodetreeRun run(std::span<const int> y) const;

  /// The equivalent single codetree over all n slots. Throws CapExceeded when
  /// its widest map would exceed `max_entries`.
  JointCodetree materialize(std::size_t max_entries = std::size_t{1} << 20) const;

 private:
  std::size_t local_prefix(int k, int len, std::span<const int> y) const;

  std::vector<JointCodetree> blocks_;
};

ConcatenatedCodetree concatenate(std::vector<JointCodetree> blocks);

/// "a[i]: ..." / "xhat[i]: ..." lines, slots numbered from 1.
std::string to_text(const JointCodetree& tree);

/// Trees taking part in an optimization: either every tree of the layout or
/// a user-supplied list of ordinals (an upper bound on the rate).
struct CodetreeSet {
  CodetreeLayout layout;
  std::vector<std::uint64_t> ordinals;
  bool restricted = false;

  std::size_t size() const { return ordinals.size(); }
  JointCodetree tree(std::size_t k) const { return layout.decode(ordinals[k]); }
};

CodetreeSet full_codetree_set(const ProblemSpec& spec, std::uint64_t cap = kDefaultCodetreeCap);
CodetreeSet restricted_codetree_set(const ProblemSpec& spec, std::vector<std::uint64_t> ordinals);

}  // namespace vmrd
