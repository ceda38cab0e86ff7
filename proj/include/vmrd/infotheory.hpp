#pragma once

// Entropy, mutual information and directed information on finite tables.
// Logs are base 2; 0 log 0 = 0.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace vmrd {

/// -sum p log2 p over every coefficient of `p`.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::DenseBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Scalar h(0);
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const Scalar v = p(r, c);
      if (v > Scalar(0)) h -= v * std::log2(v);
    }
  }
  return h;
}

double binary_entropy(double p);

/// I(U;V) of a joint with U along rows and V along columns. Tiny negative
/// round-off (> -1e-12) is clamped to zero.
template <typename Derived>
typename Derived::Scalar mutual_information(const Eigen::MatrixBase<Derived>& joint) {
  using Scalar = typename Derived::Scalar;
  const Scalar mi = entropy(joint.rowwise().sum()) + entropy(joint.colwise().sum()) - entropy(joint);
  if (mi < Scalar(0) && mi > Scalar(-1e-12)) return Scalar(0);
  return mi;
}

/// A joint law over several finite variables, flattened in canonical
/// mixed-radix order (axis 0 most significant).
struct JointTable {
  std::vector<int> dims;
  Eigen::VectorXd p;

  /// Throws std::invalid_argument unless shapes agree and p is a
  /// distribution within 1e-10.
  void check() const;
};

/// Marginal over `keep` (in the given axis order).
JointTable marginalize(const JointTable& joint, std::span<const int> keep);

/// H of the marginal over `axes`; 0 for the empty set.
double entropy(const JointTable& joint, std::span<const int> axes);

/// I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C).
double conditional_mutual_information(const JointTable& joint, std::span<const int> a,
                                      std::span<const int> b, std::span<const int> c);

/// I(Xhat^L -> X^L) = sum_i I(X_i; Xhat^i | X^{i-1}). Axes 0..L-1 are the
/// source symbols and L..2L-1 the estimates.
double directed_information(const JointTable& joint, int L);

}  // namespace vmrd
