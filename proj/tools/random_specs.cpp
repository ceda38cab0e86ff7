#include "random_specs.hpp"

#include <stdexcept>

#include "vmrd/codetree.hpp"
#include "vmrd/errors.hpp"

namespace vmrd::tools {

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::vector<int> random_sizes(std::mt19937_64& rng, int L, int lo, int hi) {
  std::vector<int> s(static_cast<std::size_t>(L));
  for (auto& v : s) v = uniform_int(rng, lo, hi);
  return s;
}

BlockAlphabets random_alphabets(std::mt19937_64& rng, const RandomSpecOptions& opt) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    BlockAlphabets ab;
    ab.L = uniform_int(rng, 1, opt.max_L);
    ab.sizes_x = random_sizes(rng, ab.L, 1, opt.max_alphabet);
    ab.sizes_a = random_sizes(rng, ab.L, 1, opt.max_alphabet);
    ab.sizes_y = random_sizes(rng, ab.L, 1, opt.max_alphabet);
    ab.sizes_xhat = random_sizes(rng, ab.L, 1, opt.max_alphabet);
    try {
      if (CodetreeLayout(ab).count(opt.max_codetrees) >= 1) return ab;
    } catch (const CapExceeded&) {
    }
  }
  throw std::runtime_error("could not draw alphabets under the codetree cap");
}

Eigen::VectorXd random_table(int slices, int width, std::mt19937_64& rng) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(slices) * width);
  for (int s = 0; s < slices; ++s) t.segment(static_cast<Eigen::Index>(s) * width, width) = random_distribution(width, rng);
  return t;
}

Eigen::VectorXd random_nonnegative(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& e : v) e = u(rng);
  return v;
}

}  // namespace

Eigen::VectorXd random_distribution(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = e(rng);
  return v / v.sum();
}

ProblemSpec random_spec(std::mt19937_64& rng, const RandomSpecOptions& opt) {
  ProblemSpec s;
  s.alphabets = random_alphabets(rng, opt);
  const BlockAlphabets& ab = s.alphabets;
  const int L = ab.L;
  const auto nx = static_cast<int>(ab.num_x());

  if (opt.functional) {
    FunctionalSideInfo fs;
    fs.z_size = uniform_int(rng, 1, 4);
    fs.pz = random_distribution(fs.z_size, rng);
    for (int i = 0; i < L; ++i) {
      std::vector<int> f(static_cast<std::size_t>(fs.z_size));
      for (auto& v : f) v = uniform_int(rng, 0, ab.sizes_x[i] - 1);
      fs.f.push_back(std::move(f));
      std::vector<int> g(ab.a_prefix_count(i + 1) * static_cast<std::size_t>(fs.z_size));
      for (auto& v : g) v = uniform_int(rng, 0, ab.sizes_y[i] - 1);
      fs.g.push_back(std::move(g));
    }
    CompiledFunctional c = compile_functional(fs.pz, fs.f, fs.g, ab);
    s.source = c.source;
    s.side_info = c.side_info;
  } else {
    s.source.px = random_distribution(nx, rng);
    if (opt.zero_mass > 0.0) {
      std::bernoulli_distribution drop(opt.zero_mass);
      Eigen::VectorXd p = s.source.px;
      for (auto& v : p) {
        if (drop(rng)) v = 0.0;
      }
      if (p.sum() > 0.0) s.source.px = p / p.sum();
    }
    KernelSideInfo k;
    for (int i = 0; i < L; ++i) {
      const auto prefixes = static_cast<int>(ab.a_prefix_count(i + 1));
      if (opt.action_independent) {
        const Eigen::VectorXd base = random_table(nx, ab.sizes_y[i], rng);
        k.tables.push_back(base.replicate(prefixes, 1));
      } else {
        k.tables.push_back(random_table(prefixes * nx, ab.sizes_y[i], rng));
      }
    }
    s.side_info = k;
  }

  s.metrics.d = random_nonnegative(static_cast<std::size_t>(nx) * ab.num_xhat(), rng);
  s.metrics.gamma = opt.action_independent ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ab.num_a() * nx))
                                           : random_nonnegative(ab.num_a() * static_cast<std::size_t>(nx), rng);
  require_valid(s);
  return s;
}

ProblemSpec collapse_actions(const ProblemSpec& spec) {
  if (spec.is_functional()) throw std::invalid_argument("collapse_actions needs a kernel spec");
  ProblemSpec c = spec;
  BlockAlphabets& ab = c.alphabets;
  const auto nx = static_cast<Eigen::Index>(ab.num_x());
  KernelSideInfo k;
  for (int i = 0; i < ab.L; ++i) {
    // The first a-prefix slice stands for all of them.
    k.tables.push_back(spec.kernel().tables[i].head(nx * ab.sizes_y[i]));
  }
  ab.sizes_a.assign(static_cast<std::size_t>(ab.L), 1);
  c.side_info = k;
  c.metrics.gamma = spec.metrics.gamma.head(nx);
  require_valid(c);
  return c;
}

JointTable random_joint(std::mt19937_64& rng, const std::vector<int>& x_sizes,
                        const std::vector<int>& xhat_sizes) {
  JointTable j;
  j.dims = x_sizes;
  j.dims.insert(j.dims.end(), xhat_sizes.begin(), xhat_sizes.end());
  int n = 1;
  for (int d : j.dims) n *= d;
  j.p = random_distribution(n, rng);
  return j;
}

}  // namespace vmrd::tools
