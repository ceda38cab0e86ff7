#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "random_specs.hpp"
#include "vmrd/closed_forms.hpp"
#include "vmrd/errors.hpp"
#include "vmrd/simulator.hpp"

using namespace vmrd;

namespace {

Eigen::VectorXd point_mass(Eigen::Index n, Eigen::Index at) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[at] = 1.0;
  return v;
}

// One tree per message, entries given directly.
Codebook handmade(std::vector<std::uint32_t> entries, int m) {
  Codebook b;
  b.m = m;
  b.entries = std::move(entries);
  b.messages = b.entries.size() / static_cast<std::size_t>(m);
  return b;
}

}  // namespace

TEST_CASE("codebook sizes") {
  CHECK(codebook_size(0.0, 8, 2) == 1);
  CHECK(codebook_size(0.5, 8, 1) == 16);
  CHECK(codebook_size(0.375, 8, 1) == 8);  // exactly 3 bits
  CHECK(codebook_size(0.376, 8, 1) == 16);
  CHECK_THROWS_AS(codebook_size(3.0, 8, 1), CapExceeded);
  CHECK(codebook_size(3.0, 8, 1, std::uint64_t{1} << 24) == (std::uint64_t{1} << 24));
  CHECK_THROWS_AS(codebook_size(-1.0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(codebook_size(1.0, 0, 1), std::invalid_argument);
}

TEST_CASE("codebook generation") {
  SUBCASE("zero rate gives one message") {
    const Codebook b = generate_codebook(Eigen::Vector2d(0.5, 0.5), 0.0, 4, 1, 7);
    CHECK(b.messages == 1);
    CHECK(b.entries.size() == 4);
  }
  SUBCASE("point mass") {
    const Codebook b = generate_codebook(point_mass(5, 3), 1.0, 4, 1, 7);
    for (auto e : b.entries) CHECK(e == 3);
  }
  SUBCASE("frequencies follow pj") {
    const Eigen::Vector3d pj(0.2, 0.3, 0.5);
    const Codebook b = generate_codebook(pj, 3.0, 4, 1, 11);
    REQUIRE(b.messages == 4096);
    std::vector<double> count(3, 0.0);
    for (auto e : b.entries) count[e] += 1.0;
    const double n = static_cast<double>(b.entries.size());
    for (int k = 0; k < 3; ++k) {
      const double sd = std::sqrt(n * pj[k] * (1 - pj[k]));
      CHECK(std::abs(count[k] - n * pj[k]) < 4 * sd);
    }
  }
  SUBCASE("pure function of its arguments") {
    const Eigen::Vector3d pj(0.2, 0.3, 0.5);
    CHECK(generate_codebook(pj, 1.0, 4, 1, 5, 2).entries == generate_codebook(pj, 1.0, 4, 1, 5, 2).entries);
    CHECK(generate_codebook(pj, 1.0, 4, 1, 5, 2).entries != generate_codebook(pj, 1.0, 4, 1, 5, 3).entries);
    CHECK(generate_codebook(pj, 1.0, 4, 1, 5, 2).entries != generate_codebook(pj, 1.0, 4, 1, 6, 2).entries);
  }
  SUBCASE("rejects a non-distribution") {
    CHECK_THROWS_AS(generate_codebook(Eigen::Vector2d(0.5, 0.6), 1.0, 1, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("sampling") {
  auto rng = substream(1, 2, 3);
  const Eigen::Vector4d w(0.0, 2.0, 0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t i = sample_index(w, rng);
    CHECK((i == 1 || i == 3));
  }
  CHECK_THROWS(sample_index(Eigen::Vector2d::Zero(), rng));
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  auto a = substream(9, 0, 0), b = substream(9, 0, 0), c = substream(9, 0, 1);
  CHECK(a() == b());
  CHECK(a() != c());
}

TEST_CASE("encoder") {
  const ProblemSpec s = binary_hamming_problem(0.5);
  const Simulator sim(s, full_codetree_set(s));
  const std::vector<std::size_t> x{1, 1, 0};
  CHECK(sim.encode(x, handmade({0, 0, 0}, 3), 0.0) == 0);
  // Message 2 matches every block; message 1 misses one.
  CHECK(sim.encode(x, handmade({0, 0, 0, 1, 1, 1, 1, 1, 0}, 3), 0.0) == 2);
  // Messages 1 and 2 tie; the smaller wins.
  CHECK(sim.encode(x, handmade({0, 0, 1, 1, 1, 0, 1, 1, 0}, 3), 0.0) == 1);
  CHECK_THROWS(sim.encode(std::vector<std::size_t>{1}, handmade({0, 0, 0}, 3), 0.0));
}

TEST_CASE("deterministic problems give exact results") {
  const ProblemSpec s = binary_hamming_problem(1.0);  // x = 1 always
  const Simulator sim(s, full_codetree_set(s));
  const TrialReport right = sim.simulate(point_mass(2, 1), 0.0, 4, 20, 0.0, 3);
  CHECK(right.empirical_distortion == 0.0);
  CHECK(right.stderr_d == 0.0);
  const TrialReport wrong = sim.simulate(point_mass(2, 0), 0.0, 4, 20, 0.0, 3);
  CHECK(wrong.empirical_distortion == 1.0);
  CHECK(wrong.empirical_cost == 0.0);
}

TEST_CASE("Monte Carlo matches induced metrics") {
  std::mt19937_64 rng(21);
  for (bool functional : {false, true}) {
    tools::RandomSpecOptions opt;
    opt.functional = functional;
    opt.max_codetrees = 4096;
    for (int k = 0; k < 4; ++k) {
      const ProblemSpec s = tools::random_spec(rng, opt);
      const CodetreeSet set = full_codetree_set(s);
      const Simulator sim(s, set);
      const PairMetrics& pm = sim.metrics();
      const auto j = static_cast<Eigen::Index>(rng() % set.size());
      // Rate zero: the single codeword repeats tree j in every block.
      const TrialReport r = sim.simulate(point_mass(pm.trees(), j), 0.0, 2, 4000, 0.0, 100 + k);
      const double L = s.alphabets.L;
      const double d = pm.px.dot(pm.d_bar.col(j)) / L;
      const double g = pm.px.dot(pm.g_bar.col(j)) / L;
      CHECK(std::abs(r.empirical_distortion - d) <= 4 * r.stderr_d + 1e-12);
      CHECK(std::abs(r.empirical_cost - g) <= 4 * r.stderr_c + 1e-12);
    }
  }
}

TEST_CASE("functional trials follow the push-forward") {
  // Z uniform on {0,1,2,3}; X = z / 2; the decoder sees z mod 2 and
  // estimates 0 whatever it sees.
  ProblemSpec s;
  s.alphabets = {1, {2}, {1}, {2}, {2}};
  s.side_info = FunctionalSideInfo{4, Eigen::VectorXd::Constant(4, 0.25), {{0, 0, 1, 1}}, {{0, 1, 0, 1}}};
  s.source.px = Eigen::Vector2d(0.5, 0.5);
  s.metrics.d = Eigen::Vector4d(0, 1, 1, 0);
  s.metrics.gamma = Eigen::Vector2d::Zero();
  require_valid(s);
  const CodetreeSet set = full_codetree_set(s);
  const Simulator sim(s, set);
  const TrialTrace t = sim.run_trial_traced(generate_codebook(point_mass(4, 0), 0.0, 3, 1, 8), 0.0);
  REQUIRE(t.z_blocks.size() == 3);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(t.x_blocks[b] == static_cast<std::size_t>(t.z_blocks[b] / 2));
    CHECK(t.y[b] == t.z_blocks[b] % 2);
  }
  double expected = 0.0;
  for (std::size_t b = 0; b < 3; ++b) expected += static_cast<double>(t.x_blocks[b]);
  CHECK(t.result.distortion == doctest::Approx(expected / 3));
}

TEST_CASE("simulation bookkeeping") {
  const ProblemSpec s = repeat_request_embedding(0.5);
  const CodetreeSet set = full_codetree_set(s);
  const Simulator sim(s, set);
  const RdcPoint p = ba_solve(sim.metrics(), 4.0, 1.0);
  const Eigen::VectorXd pj = tree_marginal(sim.metrics(), p.pj_given_x);

  SUBCASE("one trial is one run") {
    const TrialReport r = sim.simulate(pj, 0.25, 4, 1, 0.5, 77);
    const TrialResult t = sim.run_trial(generate_codebook(pj, 0.25, 4, 2, 77, 0), 0.5);
    CHECK(r.empirical_distortion == t.distortion);
    CHECK(r.empirical_cost == t.cost);
    CHECK(r.stderr_d == 0.0);
  }
  SUBCASE("repeatable and thread independent") {
    const TrialReport a = sim.simulate(pj, 0.25, 4, 40, 0.0, 5, 1);
    const TrialReport b = sim.simulate(pj, 0.25, 4, 40, 0.0, 5, 1);
    const TrialReport c = sim.simulate(pj, 0.25, 4, 40, 0.0, 5, 4);
    CHECK(a.empirical_distortion == b.empirical_distortion);
    CHECK(a.empirical_distortion == c.empirical_distortion);
    CHECK(a.stderr_d == c.stderr_d);
    CHECK(a.empirical_cost == c.empirical_cost);
  }
  SUBCASE("decoding never looks ahead") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const Codebook book = generate_codebook(pj, 0.25, 4, 2, 13, trial);
      const TrialTrace t = sim.run_trial_traced(book, 0.0);
      std::vector<JointCodetree> blocks;
      for (int b = 0; b < book.m; ++b) blocks.push_back(set.tree(book.tree(t.result.message, b)));
      const ConcatenatedCodetree cc(std::move(blocks));
      const int n = cc.length();
      for (int k = 0; k < n; ++k) {
        std::vector<int> y = t.y;
        for (int i = k; i < n; ++i) y[i] = (y[i] + 1) % 3;
        CHECK(cc.action(k, y) == t.actions[k]);
        std::vector<int> z = t.y;
        for (int i = k + 1; i < n; ++i) z[i] = (z[i] + 1) % 3;
        CHECK(cc.estimate(k, z) == t.estimates[k]);
      }
    }
  }
  SUBCASE("zero rate sits at the zero-rate distortion") {
    const RdcPoint zero = ba_solve(sim.metrics(), 0.0, 0.0);
    const Eigen::VectorXd q = tree_marginal(sim.metrics(), zero.pj_given_x);
    const TrialReport r = sim.simulate(q, 0.0, 4, 2000, 0.0, 9);
    CHECK(std::abs(r.empirical_distortion - zero.distortion) <= 4 * r.stderr_d);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(sim.simulate(pj, 0.25, 4, 0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sim.simulate(pj, 0.25, 4, 1, -1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sim.simulate(Eigen::Vector2d(0.5, 0.5), 0.25, 4, 1, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sim.simulate(pj, 8.0, 4, 1, 0.0, 1), CapExceeded);
  }
}

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
  // 1 + many tiny terms: plain left-to-right addition loses them all.
  std::vector<double> w(1 << 16, 1e-16);
  w[0] = 1.0;
  CHECK(pairwise_sum(w) == doctest::Approx(1.0 + 65535e-16).epsilon(1e-15));
}
