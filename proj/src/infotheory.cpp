#include "vmrd/infotheory.hpp"

#include <algorithm>
#include <numeric>

#include "vmrd/mixed_radix.hpp"

namespace vmrd {

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary entropy needs p in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

void JointTable::check() const {
  if (dims.empty()) throw std::invalid_argument("joint table has no axes");
  std::size_t n = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("joint table axis with size < 1");
    n *= static_cast<std::size_t>(d);
  }
  if (static_cast<std::size_t>(p.size()) != n) throw std::invalid_argument("joint table size mismatch");
  if ((p.array() < 0.0).any() || !p.allFinite()) throw std::invalid_argument("joint table has negative entries");
  if (std::abs(p.sum() - 1.0) > 1e-10) throw std::invalid_argument("joint table does not sum to 1");
}

JointTable marginalize(const JointTable& joint, std::span<const int> keep) {
  const MixedRadix full(joint.dims);
  JointTable out;
  for (int ax : keep) {
    if (ax < 0 || ax >= static_cast<int>(joint.dims.size())) throw std::out_of_range("axis out of range");
    out.dims.push_back(joint.dims[ax]);
  }
  const MixedRadix part(out.dims);
  out.p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(part.size()));
  std::vector<int> digits(joint.dims.size()), sub(keep.size());
  for (std::size_t k = 0; k < full.size(); ++k) {
    const double v = joint.p[static_cast<Eigen::Index>(k)];
    if (v == 0.0) continue;
    full.decode(k, digits);
    for (std::size_t j = 0; j < keep.size(); ++j) sub[j] = digits[keep[j]];
    out.p[static_cast<Eigen::Index>(part.encode(sub))] += v;
  }
  return out;
}

double entropy(const JointTable& joint, std::span<const int> axes) {
  if (axes.empty()) return 0.0;
  return entropy(marginalize(joint, axes).p);
}

double conditional_mutual_information(const JointTable& joint, std::span<const int> a,
                                      std::span<const int> b, std::span<const int> c) {
  const auto cat = [](std::span<const int> u, std::span<const int> v) {
    std::vector<int> w(u.begin(), u.end());
    w.insert(w.end(), v.begin(), v.end());
    return w;
  };
  const auto ac = cat(a, c);
  const auto bc = cat(b, c);
  const auto abc = cat(a, bc);
  const double v = entropy(joint, ac) + entropy(joint, bc) - entropy(joint, abc) - entropy(joint, c);
  return (v < 0.0 && v > -1e-12) ? 0.0 : v;
}

double directed_information(const JointTable& joint, int L) {
  joint.check();
  if (L < 1 || static_cast<int>(joint.dims.size()) != 2 * L) {
    throw std::invalid_argument("directed information needs 2L axes (source then estimates)");
  }
  double total = 0.0;
  for (int i = 0; i < L; ++i) {
    std::vector<int> past(static_cast<std::size_t>(i));
    std::iota(past.begin(), past.end(), 0);
    std::vector<int> est(static_cast<std::size_t>(i + 1));
    std::iota(est.begin(), est.end(), L);
    const int xi[] = {i};
    total += conditional_mutual_information(joint, xi, est, past);
  }
  return total;
}

}  // namespace vmrd
