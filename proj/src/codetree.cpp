#include "vmrd/codetree.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "vmrd/errors.hpp"

namespace vmrd {

namespace {

void check_y(const std::vector<int>& y_sizes, std::span<const int> y, std::size_t len) {
  if (y.size() < len) throw std::invalid_argument("side-information sequence too short");
  for (std::size_t i = 0; i < len; ++i) {
    if (y[i] < 0 || y[i] >= y_sizes[i % y_sizes.size()]) {
      throw std::out_of_range("y[" + std::to_string(i) + "] = " + std::to_string(y[i]) +
                              " outside its alphabet");
    }
  }
}

void require_positive(const ProblemSpec& spec, std::size_t x) {
  if (x >= static_cast<std::size_t>(spec.source.px.size())) {
    throw std::out_of_range("x^L index out of range");
  }
  if (!(spec.source.px[static_cast<Eigen::Index>(x)] > 0.0)) {
    throw std::domain_error("x^L index " + std::to_string(x) + " has zero probability");
  }
}

struct PathState {
  const ProblemSpec& spec;
  const JointCodetree& tree;
  std::size_t x;
  const PathVisitor& visit;
  std::vector<int> y, a, xhat;
};

void walk_kernel(PathState& s, int slot, std::size_t y_pref, std::size_t a_pref, double prob) {
  const auto& ab = s.spec.alphabets;
  if (slot == ab.L) {
    s.visit(s.y, s.a, s.xhat, prob);
    return;
  }
  const int act = s.tree.action(slot, y_pref);
  s.a[slot] = act;
  const std::size_t a_next = a_pref * static_cast<std::size_t>(ab.sizes_a[slot]) +
                             static_cast<std::size_t>(act);
  for (int yv = 0; yv < ab.sizes_y[slot]; ++yv) {
    const double p = s.spec.kernel_prob(slot, a_next, s.x, yv);
    if (p <= 0.0) continue;
    const std::size_t y_next = y_pref * static_cast<std::size_t>(ab.sizes_y[slot]) +
                               static_cast<std::size_t>(yv);
    s.y[slot] = yv;
    s.xhat[slot] = s.tree.estimate(slot, y_next);
    walk_kernel(s, slot + 1, y_next, a_next, prob * p);
  }
}

// `weights` holds the unnormalized P(z | x^L, y^slot) restricted to the z
// consistent with the path so far; its sum is the path probability.
void walk_functional(PathState& s, int slot, std::size_t y_pref, std::size_t a_pref,
                     const Eigen::VectorXd& weights) {
  const auto& ab = s.spec.alphabets;
  if (slot == ab.L) {
    s.visit(s.y, s.a, s.xhat, weights.sum());
    return;
  }
  const auto& fn = s.spec.functional();
  const int act = s.tree.action(slot, y_pref);
  s.a[slot] = act;
  const std::size_t a_next = a_pref * static_cast<std::size_t>(ab.sizes_a[slot]) +
                             static_cast<std::size_t>(act);
  const auto& g = fn.g[slot];
  for (int yv = 0; yv < ab.sizes_y[slot]; ++yv) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(weights.size());
    bool any = false;
    for (int z = 0; z < fn.z_size; ++z) {
      if (weights[z] > 0.0 && g[a_next * static_cast<std::size_t>(fn.z_size) + z] == yv) {
        w[z] = weights[z];
        any = true;
      }
    }
    if (!any) continue;
    const std::size_t y_next = y_pref * static_cast<std::size_t>(ab.sizes_y[slot]) +
                               static_cast<std::size_t>(yv);
    s.y[slot] = yv;
    s.xhat[slot] = s.tree.estimate(slot, y_next);
    walk_functional(s, slot + 1, y_next, a_next, w);
  }
}

std::size_t encode_digits(const std::vector<int>& radices, std::span<const int> digits) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < radices.size(); ++k) {
    idx = idx * static_cast<std::size_t>(radices[k]) + static_cast<std::size_t>(digits[k]);
  }
  return idx;
}

std::vector<std::vector<int>> zero_maps(const std::vector<int>& y_sizes, int offset) {
  std::vector<std::vector<int>> maps;
  std::size_t n = 1;
  for (std::size_t i = 0; i < y_sizes.size(); ++i) {
    if (offset == 1) n *= static_cast<std::size_t>(y_sizes[i]);
    maps.emplace_back(n, 0);
    if (offset == 0) n *= static_cast<std::size_t>(y_sizes[i]);
  }
  return maps;
}

}  // namespace

CodetreeLayout::CodetreeLayout(const BlockAlphabets& alphabets) : alphabets_(alphabets) {
  alphabets_.check();
  for (int i = 0; i < alphabets_.L; ++i) {
    const std::size_t na = alphabets_.y_prefix_count(i);
    const std::size_t ne = alphabets_.y_prefix_count(i + 1);
    // Trees with more than 2^24 map entries are not representable densely.
    if (radices_.size() + na + ne > (std::size_t{1} << 24)) {
      throw CapExceeded("codetree maps too large to represent");
    }
    radices_.insert(radices_.end(), na, alphabets_.sizes_a[i]);
    radices_.insert(radices_.end(), ne, alphabets_.sizes_xhat[i]);
  }
}

std::uint64_t CodetreeLayout::count(std::uint64_t cap) const {
  try {
    return checked_product(radices_, cap);
  } catch (const CapExceeded&) {
    throw CapExceeded("codetree count exceeds the cap of " + std::to_string(cap) +
                      "; use a restricted codetree set");
  }
}

JointCodetree CodetreeLayout::decode(std::uint64_t ordinal) const {
  if (ordinal >= count()) throw std::out_of_range("codetree ordinal out of range");
  JointCodetree t = zero();
  // Walk digits from least significant (the last estimate map) backwards.
  for (int i = alphabets_.L; i-- > 0;) {
    auto& em = t.estimate_maps[i];
    for (std::size_t k = em.size(); k-- > 0;) {
      const auto r = static_cast<std::uint64_t>(alphabets_.sizes_xhat[i]);
      em[k] = static_cast<int>(ordinal % r);
      ordinal /= r;
    }
    auto& am = t.action_maps[i];
    for (std::size_t k = am.size(); k-- > 0;) {
      const auto r = static_cast<std::uint64_t>(alphabets_.sizes_a[i]);
      am[k] = static_cast<int>(ordinal % r);
      ordinal /= r;
    }
  }
  return t;
}

std::uint64_t CodetreeLayout::encode(const JointCodetree& tree) const {
  if (!conforms(tree)) throw std::invalid_argument("codetree does not match the layout");
  count();  // ordinals must be representable
  std::uint64_t ord = 0;
  for (int i = 0; i < alphabets_.L; ++i) {
    for (int v : tree.action_maps[i]) ord = ord * static_cast<std::uint64_t>(alphabets_.sizes_a[i]) + v;
    for (int v : tree.estimate_maps[i]) ord = ord * static_cast<std::uint64_t>(alphabets_.sizes_xhat[i]) + v;
  }
  return ord;
}

JointCodetree CodetreeLayout::zero() const {
  JointCodetree t;
  t.y_sizes = alphabets_.sizes_y;
  t.action_maps = zero_maps(t.y_sizes, 0);
  t.estimate_maps = zero_maps(t.y_sizes, 1);
  return t;
}

bool CodetreeLayout::conforms(const JointCodetree& tree) const {
  if (tree.y_sizes != alphabets_.sizes_y) return false;
  if (static_cast<int>(tree.action_maps.size()) != alphabets_.L ||
      static_cast<int>(tree.estimate_maps.size()) != alphabets_.L) {
    return false;
  }
  for (int i = 0; i < alphabets_.L; ++i) {
    if (tree.action_maps[i].size() != alphabets_.y_prefix_count(i)) return false;
    if (tree.estimate_maps[i].size() != alphabets_.y_prefix_count(i + 1)) return false;
    const auto in = [](int hi) { return [hi](int v) { return v >= 0 && v < hi; }; };
    if (!std::all_of(tree.action_maps[i].begin(), tree.action_maps[i].end(), in(alphabets_.sizes_a[i])))
      return false;
    if (!std::all_of(tree.estimate_maps[i].begin(), tree.estimate_maps[i].end(),
                     in(alphabets_.sizes_xhat[i])))
      return false;
  }
  return true;
}

std::uint64_t count_codetrees(const ProblemSpec& spec, std::uint64_t cap) {
  return CodetreeLayout(spec.alphabets).count(cap);
}

std::vector<JointCodetree> enumerate_codetrees(const ProblemSpec& spec, std::uint64_t cap) {
  const CodetreeLayout layout(spec.alphabets);
  const std::uint64_t n = layout.count(cap);
  std::vector<JointCodetree> out;
  out.reserve(static_cast<std::size_t>(n));
  // Odometer over the digits in ordinal order (last digit fastest).
  JointCodetree t = layout.zero();
  const auto& ab = spec.alphabets;
  for (std::uint64_t k = 0; k < n; ++k) {
    out.push_back(t);
    for (int i = ab.L; i-- > 0;) {
      bool carry = true;
      auto& em = t.estimate_maps[i];
      for (std::size_t e = em.size(); carry && e-- > 0;) {
        if (++em[e] < ab.sizes_xhat[i]) carry = false; else em[e] = 0;
      }
      auto& am = t.action_maps[i];
      for (std::size_t e = am.size(); carry && e-- > 0;) {
        if (++am[e] < ab.sizes_a[i]) carry = false; else am[e] = 0;
      }
      if (!carry) break;
    }
  }
  return out;
}

CodetreeRun run_codetree(const JointCodetree& tree, std::span<const int> y) {
  const int L = tree.length();
  check_y(tree.y_sizes, y, static_cast<std::size_t>(L));
  CodetreeRun r{std::vector<int>(L), std::vector<int>(L)};
  std::size_t pref = 0;
  for (int i = 0; i < L; ++i) {
    r.actions[i] = tree.action(i, pref);
    pref = pref * static_cast<std::size_t>(tree.y_sizes[i]) + static_cast<std::size_t>(y[i]);
    r.estimates[i] = tree.estimate(i, pref);
  }
  return r;
}

double codetree_path_law(const ProblemSpec& spec, std::size_t x, const JointCodetree& tree,
                         std::span<const int> y) {
  require_positive(spec, x);
  const auto& ab = spec.alphabets;
  check_y(ab.sizes_y, y, static_cast<std::size_t>(ab.L));
  // a^i along this path
  std::vector<std::size_t> a_pref(static_cast<std::size_t>(ab.L));
  std::size_t yp = 0, ap = 0;
  for (int i = 0; i < ab.L; ++i) {
    ap = ap * static_cast<std::size_t>(ab.sizes_a[i]) + static_cast<std::size_t>(tree.action(i, yp));
    a_pref[i] = ap;
    yp = yp * static_cast<std::size_t>(ab.sizes_y[i]) + static_cast<std::size_t>(y[i]);
  }
  if (!spec.is_functional()) {
    double p = 1.0;
    for (int i = 0; i < ab.L; ++i) p *= spec.kernel_prob(i, a_pref[i], x, y[i]);
    return p;
  }
  const auto& fn = spec.functional();
  const Eigen::VectorXd post = functional_posterior(spec, x);
  double p = 0.0;
  for (int z = 0; z < fn.z_size; ++z) {
    bool ok = post[z] > 0.0;
    for (int i = 0; i < ab.L && ok; ++i) {
      ok = fn.g[i][a_pref[i] * static_cast<std::size_t>(fn.z_size) + z] == y[i];
    }
    if (ok) p += post[z];
  }
  return p;
}

void for_each_path(const ProblemSpec& spec, std::size_t x, const JointCodetree& tree,
                   const PathVisitor& visit) {
  require_positive(spec, x);
  const int L = spec.alphabets.L;
  PathState s{spec, tree, x, visit, std::vector<int>(L), std::vector<int>(L), std::vector<int>(L)};
  if (spec.is_functional()) {
    walk_functional(s, 0, 0, 0, functional_posterior(spec, x));
  } else {
    walk_kernel(s, 0, 0, 0, 1.0);
  }
}

InducedMetrics induced_metrics(const ProblemSpec& spec, const JointCodetree& tree, std::size_t x) {
  const auto& ab = spec.alphabets;
  InducedMetrics m;
  for_each_path(spec, x, tree, [&](std::span<const int>, std::span<const int> a,
                                   std::span<const int> xhat, double prob) {
    m.d_bar += prob * spec.distortion(x, encode_digits(ab.sizes_xhat, xhat));
    m.g_bar += prob * spec.cost(encode_digits(ab.sizes_a, a), x);
  });
  return m;
}

std::pair<ActionCodetree, EstimateCodetree> split_codetree(const JointCodetree& tree) {
  return {ActionCodetree{tree.y_sizes, tree.action_maps},
          EstimateCodetree{tree.y_sizes, tree.estimate_maps}};
}

JointCodetree merge_codetree(const ActionCodetree& actions, const EstimateCodetree& estimates) {
  if (actions.y_sizes != estimates.y_sizes) {
    throw std::invalid_argument("action and estimate trees disagree on Y alphabets");
  }
  return JointCodetree{actions.y_sizes, actions.maps, estimates.maps};
}

std::vector<int> run_action_tree(const ActionCodetree& tree, std::span<const int> y) {
  const std::size_t L = tree.y_sizes.size();
  check_y(tree.y_sizes, y, L - 1);
  std::vector<int> a(L);
  std::size_t pref = 0;
  for (std::size_t i = 0; i < L; ++i) {
    a[i] = tree.maps[i][pref];
    if (i + 1 < L) pref = pref * static_cast<std::size_t>(tree.y_sizes[i]) + static_cast<std::size_t>(y[i]);
  }
  return a;
}

std::vector<int> run_estimate_tree(const EstimateCodetree& tree, std::span<const int> y) {
  const std::size_t L = tree.y_sizes.size();
  check_y(tree.y_sizes, y, L);
  std::vector<int> xh(L);
  std::size_t pref = 0;
  for (std::size_t i = 0; i < L; ++i) {
    pref = pref * static_cast<std::size_t>(tree.y_sizes[i]) + static_cast<std::size_t>(y[i]);
    xh[i] = tree.maps[i][pref];
  }
  return xh;
}

ConcatenatedCodetree::ConcatenatedCodetree(std::vector<JointCodetree> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw std::invalid_argument("concatenation needs at least one block");
  for (const auto& b : blocks_) {
    if (b.y_sizes != blocks_.front().y_sizes) {
      throw std::invalid_argument("concatenated blocks must share one set of alphabets");
    }
  }
}

std::size_t ConcatenatedCodetree::local_prefix(int k, int len, std::span<const int> y) const {
  const int L = block_length();
  const int start = (k / L) * L;
  const auto& ys = blocks_.front().y_sizes;
  std::size_t pref = 0;
  for (int j = start; j < start + len; ++j) {
    const int yv = y[static_cast<std::size_t>(j)];
    if (yv < 0 || yv >= ys[j - start]) throw std::out_of_range("y outside its alphabet");
    pref = pref * static_cast<std::size_t>(ys[j - start]) + static_cast<std::size_t>(yv);
  }
  return pref;
}

int ConcatenatedCodetree::action(int k, std::span<const int> y_prefix) const {
  if (k < 0 || k >= length()) throw std::out_of_range("slot out of range");
  const int L = block_length();
  if (static_cast<int>(y_prefix.size()) < k) throw std::invalid_argument("y prefix too short");
  return blocks_[k / L].action(k % L, local_prefix(k, k % L, y_prefix));
}

int ConcatenatedCodetree::estimate(int k, std::span<const int> y_prefix) const {
  if (k < 0 || k >= length()) throw std::out_of_range("slot out of range");
  const int L = block_length();
  if (static_cast<int>(y_prefix.size()) < k + 1) throw std::invalid_argument("y prefix too short");
  return blocks_[k / L].estimate(k % L, local_prefix(k, k % L + 1, y_prefix));
}

CodetreeRun ConcatenatedCodetree::run(std::span<const int> y) const {
  const int n = length();
  if (static_cast<int>(y.size()) < n) throw std::invalid_argument("side-information sequence too short");
  CodetreeRun r{std::vector<int>(n), std::vector<int>(n)};
  for (int k = 0; k < n; ++k) {
    r.actions[k] = action(k, y);
    r.estimates[k] = estimate(k, y);
  }
  return r;
}

JointCodetree ConcatenatedCodetree::materialize(std::size_t max_entries) const {
  const int n = length();
  const int L = block_length();
  JointCodetree out;
  for (int k = 0; k < n; ++k) out.y_sizes.push_back(blocks_.front().y_sizes[k % L]);
  std::size_t prefixes = 1;  // number of y-prefixes of length k
  std::vector<int> digits;
  for (int k = 0; k < n; ++k) {
    const std::size_t next = static_cast<std::size_t>(
        checked_mul(prefixes, static_cast<std::uint64_t>(out.y_sizes[k]), max_entries));
    const MixedRadix before(std::vector<int>(out.y_sizes.begin(), out.y_sizes.begin() + k));
    const MixedRadix after(std::vector<int>(out.y_sizes.begin(), out.y_sizes.begin() + k + 1));
    std::vector<int> am(prefixes), em(next);
    for (std::size_t p = 0; p < prefixes; ++p) am[p] = action(k, before.decode(p));
    for (std::size_t p = 0; p < next; ++p) em[p] = estimate(k, after.decode(p));
    out.action_maps.push_back(std::move(am));
    out.estimate_maps.push_back(std::move(em));
    prefixes = next;
  }
  return out;
}

ConcatenatedCodetree concatenate(std::vector<JointCodetree> blocks) {
  return ConcatenatedCodetree(std::move(blocks));
}

std::string to_text(const JointCodetree& tree) {
  std::ostringstream os;
  const auto line = [&os](const char* name, int slot, const std::vector<int>& m) {
    os << name << "[" << slot + 1 << "]:";
    for (int v : m) os << ' ' << v;
    os << '\n';
  };
  for (int i = 0; i < tree.length(); ++i) {
    line("a", i, tree.action_maps[i]);
    line("xhat", i, tree.estimate_maps[i]);
  }
  return os.str();
}

CodetreeSet full_codetree_set(const ProblemSpec& spec, std::uint64_t cap) {
  CodetreeSet s{CodetreeLayout(spec.alphabets), {}, false};
  const std::uint64_t n = s.layout.count(cap);
  s.ordinals.resize(static_cast<std::size_t>(n));
  for (std::uint64_t k = 0; k < n; ++k) s.ordinals[k] = k;
  return s;
}

CodetreeSet restricted_codetree_set(const ProblemSpec& spec, std::vector<std::uint64_t> ordinals) {
  CodetreeSet s{CodetreeLayout(spec.alphabets), std::move(ordinals), true};
  if (s.ordinals.empty()) throw ValidationError("codetrees: restricted set is empty");
  const std::uint64_t n = s.layout.count();
  for (auto o : s.ordinals) {
    if (o >= n) {
      throw ValidationError("codetrees: ordinal " + std::to_string(o) + " >= codetree count " +
                            std::to_string(n));
    }
  }
  return s;
}

}  // namespace vmrd
