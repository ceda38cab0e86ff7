#include "vmrd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

#include "parallel.hpp"
#include "vmrd/errors.hpp"

namespace vmrd {

namespace {

// Stream ids above every possible message index.
constexpr std::uint64_t kSourceStream = UINT64_MAX;
constexpr std::uint64_t kSideInfoStream = UINT64_MAX - 1;

std::vector<double> cumulative(const Eigen::VectorXd& w) {
  std::vector<double> cdf(static_cast<std::size_t>(w.size()));
  double acc = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    acc += w[k];
    cdf[static_cast<std::size_t>(k)] = acc;
  }
  return cdf;
}

// Inverse-CDF draw; never returns a zero-weight atom.
std::size_t draw(const std::vector<double>& cdf, const Eigen::VectorXd& w, std::mt19937_64& rng) {
  const double u = uniform01(rng) * cdf.back();
  auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  if (k >= cdf.size()) k = cdf.size() - 1;
  while (w[static_cast<Eigen::Index>(k)] <= 0.0 && k > 0) --k;
  return k;
}

void check_distribution(const Eigen::VectorXd& v, const char* what) {
  if (v.size() == 0 || !v.allFinite() || v.minCoeff() < 0.0 || std::abs(v.sum() - 1.0) > kDerivedTolerance) {
    throw std::invalid_argument(std::string(what) + " is not a probability vector");
  }
}

}  // namespace

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(trial), hi(trial), lo(stream), hi(stream)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(const Eigen::VectorXd& weights, std::mt19937_64& rng) {
  if (weights.size() == 0 || !(weights.sum() > 0.0)) throw std::invalid_argument("nothing to sample from");
  return draw(cumulative(weights), weights, rng);
}

std::uint64_t codebook_size(double rate, int m, int L, std::uint64_t cap) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::invalid_argument("rate must be finite and >= 0");
  if (m < 1 || L < 1) throw std::invalid_argument("m and L must be >= 1");
  // The small allowance keeps m L rate = 3 from rounding up to 4 bits.
  const double bits = std::ceil(static_cast<double>(m) * L * rate - 1e-9);
  if (bits >= 63.0) throw CapExceeded("codebook needs " + std::to_string(bits) + " bits");
  const std::uint64_t size = std::uint64_t{1} << static_cast<int>(std::max(bits, 0.0));
  if (size > cap) {
    throw CapExceeded("codebook size " + std::to_string(size) + " exceeds cap " + std::to_string(cap));
  }
  return size;
}

Codebook generate_codebook(const Eigen::VectorXd& pj, double rate, int m, int L, std::uint64_t seed,
                           std::uint64_t trial, std::uint64_t cap) {
  check_distribution(pj, "pj");
  if (pj.size() > std::numeric_limits<std::uint32_t>::max()) throw CapExceeded("codetree set too large");
  Codebook book;
  book.rate = rate;
  book.m = m;
  book.seed = seed;
  book.trial = trial;
  book.pj = pj;
  book.messages = static_cast<std::size_t>(codebook_size(rate, m, L, cap));
  book.entries.resize(book.messages * static_cast<std::size_t>(m));
  const std::vector<double> cdf = cumulative(pj);
  for (std::size_t w = 0; w < book.messages; ++w) {
    auto rng = substream(seed, trial, w);
    for (int b = 0; b < m; ++b) {
      book.entries[w * static_cast<std::size_t>(m) + b] = static_cast<std::uint32_t>(draw(cdf, pj, rng));
    }
  }
  return book;
}

Simulator::Simulator(ProblemSpec spec, CodetreeSet set, PairMetrics pm)
    : spec_(std::move(spec)), set_(std::move(set)), pm_(std::move(pm)) {
  if (pm_.trees() != static_cast<Eigen::Index>(set_.size())) {
    throw std::invalid_argument("pair metrics do not match the codetree set");
  }
  row_.assign(spec_.alphabets.num_x(), -1);
  for (std::size_t r = 0; r < pm_.x_support.size(); ++r) row_[pm_.x_support[r]] = static_cast<std::ptrdiff_t>(r);
}

Simulator::Simulator(ProblemSpec spec, CodetreeSet set)
    : Simulator(spec, set, compute_pair_metrics(spec, set)) {}

std::size_t Simulator::row_of(std::size_t x) const {
  const std::ptrdiff_t r = row_.at(x);
  if (r < 0) throw std::invalid_argument("source block outside the support");
  return static_cast<std::size_t>(r);
}

std::size_t Simulator::encode(std::span<const std::size_t> x_blocks, const Codebook& book, double eta) const {
  if (static_cast<int>(x_blocks.size()) != book.m) throw std::invalid_argument("wrong number of source blocks");
  std::vector<Eigen::Index> rows(x_blocks.size());
  for (std::size_t b = 0; b < x_blocks.size(); ++b) rows[b] = static_cast<Eigen::Index>(row_of(x_blocks[b]));
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < book.messages; ++w) {
    double score = 0.0;
    for (int b = 0; b < book.m; ++b) {
      const auto j = static_cast<Eigen::Index>(book.tree(w, b));
      score += pm_.d_bar(rows[b], j);
      if (eta != 0.0) score += eta * pm_.g_bar(rows[b], j);
    }
    if (score < best_score) {
      best_score = score;
      best = w;
    }
  }
  return best;
}

TrialTrace Simulator::run_trial_traced(const Codebook& book, double eta) const {
  const BlockAlphabets& al = spec_.alphabets;
  const int L = al.L, m = book.m, n = L * m;
  TrialTrace t;

  auto src = substream(book.seed, book.trial, kSourceStream);
  if (spec_.is_functional()) {
    const FunctionalSideInfo& fs = spec_.functional();
    const MixedRadix xr = al.x_radix();
    std::vector<int> digits(static_cast<std::size_t>(L));
    for (int b = 0; b < m; ++b) {
      const int z = static_cast<int>(sample_index(fs.pz, src));
      for (int i = 0; i < L; ++i) digits[i] = fs.f[i][z];
      t.z_blocks.push_back(z);
      t.x_blocks.push_back(xr.encode(digits));
    }
  } else {
    const std::vector<double> cdf = cumulative(spec_.source.px);
    for (int b = 0; b < m; ++b) t.x_blocks.push_back(draw(cdf, spec_.source.px, src));
  }

  t.result.message = encode(t.x_blocks, book, eta);
  std::vector<JointCodetree> blocks;
  for (int b = 0; b < m; ++b) blocks.push_back(set_.tree(book.tree(t.result.message, b)));
  const ConcatenatedCodetree cc(std::move(blocks));

  auto side = substream(book.seed, book.trial, kSideInfoStream);
  t.actions.assign(n, 0);
  t.y.assign(n, 0);
  t.estimates.assign(n, 0);
  const std::size_t nx = al.num_x();
  double d_total = 0.0, g_total = 0.0;
  for (int b = 0; b < m; ++b) {
    const std::size_t x = t.x_blocks[b];
    std::size_t a_pref = 0, xhat_full = 0;
    for (int i = 0; i < L; ++i) {
      const int k = b * L + i;
      const int a = cc.action(k, t.y);
      t.actions[k] = a;
      a_pref = a_pref * al.sizes_a[i] + a;
      const int ny = al.sizes_y[i];
      if (spec_.is_functional()) {
        const FunctionalSideInfo& fs = spec_.functional();
        t.y[k] = fs.g[i][a_pref * fs.z_size + t.z_blocks[b]];
      } else {
        const Eigen::VectorXd& table = spec_.kernel().tables[i];
        const Eigen::VectorXd w = table.segment(static_cast<Eigen::Index>((a_pref * nx + x) * ny), ny);
        t.y[k] = static_cast<int>(sample_index(w, side));
      }
      t.estimates[k] = cc.estimate(k, t.y);
      xhat_full = xhat_full * al.sizes_xhat[i] + t.estimates[k];
    }
    d_total += spec_.distortion(x, xhat_full);
    g_total += spec_.cost(a_pref, x);
  }
  t.result.distortion = d_total / n;
  t.result.cost = g_total / n;
  return t;
}

TrialResult Simulator::run_trial(const Codebook& book, double eta) const {
  return run_trial_traced(book, eta).result;
}

TrialReport Simulator::simulate(const Eigen::VectorXd& pj, double rate, int m, int trials, double eta,
                                std::uint64_t seed, unsigned threads, std::uint64_t cap) const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
  if (pj.size() != static_cast<Eigen::Index>(set_.size())) throw std::invalid_argument("pj does not match the codetree set");
  check_distribution(pj, "pj");
  codebook_size(rate, m, spec_.alphabets.L, cap);

  std::vector<double> d(static_cast<std::size_t>(trials)), c(static_cast<std::size_t>(trials));
  detail::parallel_for(d.size(), threads, [&](std::size_t k) {
    const Codebook book = generate_codebook(pj, rate, m, spec_.alphabets.L, seed, k, cap);
    const TrialResult r = run_trial(book, eta);
    d[k] = r.distortion;
    c[k] = r.cost;
  });

  auto mean_and_stderr = [&](const std::vector<double>& v) {
    const double mean = pairwise_sum(v) / v.size();
    if (v.size() < 2) return std::pair{mean, 0.0};
    std::vector<double> sq(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) sq[k] = (v[k] - mean) * (v[k] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
    return std::pair{mean, std::sqrt(var / v.size())};
  };
  TrialReport rep;
  rep.trials = trials;
  std::tie(rep.empirical_distortion, rep.stderr_d) = mean_and_stderr(d);
  std::tie(rep.empirical_cost, rep.stderr_c) = mean_and_stderr(c);
  return rep;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace vmrd
