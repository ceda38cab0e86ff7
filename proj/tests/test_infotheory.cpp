#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "random_specs.hpp"
#include "vmrd/infotheory.hpp"
#include "vmrd/mixed_radix.hpp"

using namespace vmrd;

namespace {

// Entropy of the marginal on `axes`, tallied with a std::map keyed by the
// kept digits.
double oracle_entropy(const JointTable& j, const std::vector<int>& axes) {
  const MixedRadix r(j.dims);
  std::map<std::vector<int>, double> marg;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const auto digits = r.decode(k);
    std::vector<int> key;
    for (int a : axes) key.push_back(digits[a]);
    marg[key] += j.p[static_cast<Eigen::Index>(k)];
  }
  double h = 0.0;
  for (const auto& [key, p] : marg) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int k = lo; k < hi; ++k) v.push_back(k);
  return v;
}

// sum_i H(X_i | X^{i-1}) - H(X_i | X^{i-1}, Xhat^i)
double oracle_directed(const JointTable& j, int L) {
  double di = 0.0;
  for (int i = 0; i < L; ++i) {
    const auto past = range(0, i);
    auto with = range(0, i + 1);
    auto cond = past;
    for (int k = 0; k <= i; ++k) cond.push_back(L + k);
    auto full = cond;
    full.push_back(i);
    di += oracle_entropy(j, with) - oracle_entropy(j, past);
    di -= oracle_entropy(j, full) - oracle_entropy(j, cond);
  }
  return di;
}

}  // namespace

TEST_CASE("entropy examples") {
  CHECK(entropy(Eigen::Vector2d(0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(entropy(Eigen::Vector4d::Constant(0.25)) == doctest::Approx(2.0));
  CHECK(entropy(Eigen::Vector3d(1.0, 0.0, 0.0)) == 0.0);
  CHECK(entropy(Eigen::Vector3d(0.5, 0.25, 0.25)) == doctest::Approx(1.5));
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(binary_entropy(0.25) - 0.811278) < 1e-6);
  CHECK(std::abs(binary_entropy(0.4) - 0.970951) < 1e-6);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.1) == doctest::Approx(binary_entropy(0.9)));
  CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.5), std::domain_error);
}

TEST_CASE("mutual information") {
  Eigen::Matrix2d indep;
  indep << 0.06, 0.14, 0.24, 0.56;
  CHECK(std::abs(mutual_information(indep)) < 1e-12);

  Eigen::Matrix2d copy;
  copy << 0.5, 0.0, 0.0, 0.5;
  CHECK(mutual_information(copy) == doctest::Approx(1.0));

  // Binary symmetric channel with crossover 0.2 on a uniform input.
  Eigen::Matrix2d bsc;
  bsc << 0.4, 0.1, 0.1, 0.4;
  CHECK(mutual_information(bsc) == doctest::Approx(1.0 - binary_entropy(0.2)));
  CHECK(std::abs(mutual_information(bsc) - 0.278072) < 1e-6);

  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    Eigen::MatrixXd j = tools::random_distribution(12, rng).reshaped(3, 4);
    const double mi = mutual_information(j);
    CHECK(mi >= 0.0);
    CHECK(mi == doctest::Approx(mutual_information(Eigen::MatrixXd(j.transpose()))).epsilon(1e-12));
    CHECK(mi <= std::log2(3.0) + 1e-12);
  }
}

TEST_CASE("joint tables") {
  JointTable bad{{2, 2}, Eigen::Vector3d(0.2, 0.3, 0.5)};
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
  JointTable unnormalized{{2}, Eigen::Vector2d(0.2, 0.3)};
  CHECK_THROWS_AS(unnormalized.check(), std::invalid_argument);

  std::mt19937_64 rng(4);
  const JointTable j = tools::random_joint(rng, {2, 3}, {2, 2});
  const std::vector<int> keep{2, 0};
  const JointTable m = marginalize(j, keep);
  CHECK(m.dims == std::vector<int>{2, 2});
  CHECK(m.p.sum() == doctest::Approx(1.0));
  CHECK(entropy(j, std::vector<int>{}) == 0.0);
  CHECK(entropy(j, keep) == doctest::Approx(oracle_entropy(j, {2, 0})).epsilon(1e-12));
  CHECK(entropy(j, range(0, 4)) == doctest::Approx(entropy(j.p)).epsilon(1e-12));
}

TEST_CASE("directed information examples") {
  SUBCASE("independent estimates carry nothing") {
    // X^2 uniform on 4 values, Xhat^2 uniform and independent of it.
    JointTable j{{2, 2, 2, 2}, Eigen::VectorXd::Constant(16, 1.0 / 16)};
    CHECK(std::abs(directed_information(j, 2)) < 1e-12);
  }
  SUBCASE("exact copy of two fair bits") {
    JointTable j{{2, 2, 2, 2}, Eigen::VectorXd::Zero(16)};
    for (int x = 0; x < 4; ++x) j.p[x * 4 + x] = 0.25;
    CHECK(directed_information(j, 2) == doctest::Approx(2.0));
  }
  SUBCASE("estimate that looks ahead") {
    // Xhat_1 = X_2, Xhat_2 = 0, X_1 and X_2 independent fair bits. Only the
    // second summand sees the dependence, through Xhat_1.
    JointTable j{{2, 2, 2, 2}, Eigen::VectorXd::Zero(16)};
    for (int x1 = 0; x1 < 2; ++x1)
      for (int x2 = 0; x2 < 2; ++x2) j.p[((x1 * 2 + x2) * 2 + x2) * 2] = 0.25;
    CHECK(directed_information(j, 2) == doctest::Approx(1.0));
    Eigen::MatrixXd pair = j.p.reshaped(4, 4).transpose();
    CHECK(mutual_information(pair) == doctest::Approx(1.0));
  }
}

TEST_CASE("directed information matches the chain rule oracle") {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 200; ++k) {
    const int L = 1 + static_cast<int>(rng() % 3);
    std::vector<int> xs, xh;
    for (int i = 0; i < L; ++i) {
      xs.push_back(2 + static_cast<int>(rng() % 2));
      xh.push_back(1 + static_cast<int>(rng() % 2));
    }
    const JointTable j = tools::random_joint(rng, xs, xh);
    const double di = directed_information(j, L);
    CHECK(di == doctest::Approx(oracle_directed(j, L)).epsilon(1e-10));

    // Splitting mutual information into the forward and the delayed
    // backward directed informations.
    double backward = 0.0;
    for (int i = 1; i < L; ++i) {
      const std::vector<int> a = range(0, i), b{L + i};
      backward += conditional_mutual_information(j, a, b, range(L, L + i));
    }
    const double mi = conditional_mutual_information(j, range(0, L), range(L, 2 * L), {});
    CHECK(mi == doctest::Approx(di + backward).epsilon(1e-10));
    CHECK(di <= mi + 1e-10);
    if (L == 1) CHECK(std::abs(di - mi) < 1e-12);
  }
}

TEST_CASE("conditional mutual information is symmetric and nonnegative") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 50; ++k) {
    const JointTable j = tools::random_joint(rng, {2, 3}, {2});
    const std::vector<int> a{0}, b{1}, c{2};
    const double v = conditional_mutual_information(j, a, b, c);
    CHECK(v >= -1e-12);
    CHECK(v == doctest::Approx(conditional_mutual_information(j, b, a, c)).epsilon(1e-12));
  }
}
