#include "wsm/numerics/tridiagonal.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace wsm;

namespace {

SymTridiagonal random_tridiagonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> d(n), e(n - 1);
  for (auto &x : d)
    x = 3.0 * u(rng);
  for (auto &x : e)
    x = u(rng);
  return {d, e};
}

Eigen::VectorXd dense_eigenvalues(const SymTridiagonal &t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = t.diag()[i];
    if (i + 1 < n)
      a(i, i + 1) = a(i + 1, i) = t.off()[i];
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

double residual(const SymTridiagonal &t, const TridiagonalEigenpair &p) {
  std::vector<double> y(t.size());
  t.multiply(p.vector, y);
  double r = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    r += (y[i] - p.value * p.vector[i]) * (y[i] - p.value * p.vector[i]);
  return std::sqrt(r);
}

} // namespace

class RandomMatrix : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomMatrix, AllEigenvaluesMatchDenseSolver) {
  const auto t = random_tridiagonal(150, GetParam());
  const auto ref = dense_eigenvalues(t);
  const auto got = eigenvalues_by_index(t, 0, t.size());
  ASSERT_EQ(got.size(), t.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    EXPECT_NEAR(got[i], ref(static_cast<Eigen::Index>(i)), 1e-12 * t.norm_bound());
}

TEST_P(RandomMatrix, SturmCountsAgreeWithDenseSpectrum) {
  const auto t = random_tridiagonal(80, GetParam());
  const auto ref = dense_eigenvalues(t);
  std::mt19937_64 rng(GetParam() + 1);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  std::vector<double> xs(37);
  for (auto &x : xs)
    x = u(rng);
  std::vector<std::size_t> batched(xs.size());
  t.count_below(xs, batched);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    std::size_t expect = 0;
    for (Eigen::Index i = 0; i < ref.size(); ++i)
      expect += ref(i) < xs[k] ? 1 : 0;
    EXPECT_EQ(batched[k], expect);
    EXPECT_EQ(t.count_below(xs[k]), expect);
  }
}

TEST_P(RandomMatrix, EigenpairsAreOrthonormalWithSmallResidual) {
  const auto t = random_tridiagonal(300, GetParam());
  const auto vals = eigenvalues_by_index(t, 100, 40);
  const auto pairs = eigenpairs_for(t, vals);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_LT(residual(t, pairs[i]), 1e-10 * t.norm_bound());
    for (std::size_t j = 0; j <= i; ++j) {
      const double d = detail::dot(pairs[i].vector, pairs[j].vector);
      EXPECT_NEAR(d, i == j ? 1.0 : 0.0, 1e-10);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomMatrix, ::testing::Values(1u, 2u, 3u, 42u, 1234u));

TEST(Tridiagonal, WindowAndIndexSelectionsAgree) {
  const auto t = random_tridiagonal(400, 99);
  const auto by_index = eigenvalues_by_index(t, 0, t.size());
  const auto window = eigenvalues_in_window(t, -0.5, 0.75);
  std::vector<double> expect;
  for (double v : by_index)
    if (v >= -0.5 && v < 0.75)
      expect.push_back(v);
  ASSERT_EQ(window.size(), expect.size());
  for (std::size_t i = 0; i < window.size(); ++i)
    EXPECT_NEAR(window[i], expect[i], 1e-13 * t.norm_bound());
}

TEST(Tridiagonal, ExactDegeneracyIsFlaggedAndOrthogonalized) {
  // Two decoupled copies of the same 2x2 block.
  SymTridiagonal t({1.0, 2.0, 1.0, 2.0}, {0.5, 0.0, 0.5});
  const auto vals = eigenvalues_by_index(t, 0, 4);
  EXPECT_NEAR(vals[0], vals[1], 1e-14);
  const auto pairs = eigenpairs_for(t, vals);
  EXPECT_TRUE(pairs[0].clustered);
  EXPECT_TRUE(pairs[1].clustered);
  EXPECT_NEAR(detail::dot(pairs[0].vector, pairs[1].vector), 0.0, 1e-12);
  for (const auto &p : pairs)
    EXPECT_LT(residual(t, p), 1e-12);
}

TEST(Tridiagonal, TinyMatrices) {
  SymTridiagonal one({2.5}, {});
  EXPECT_DOUBLE_EQ(eigenvalues_by_index(one, 0, 1)[0], 2.5);
  const auto p1 = eigenpairs_for(one, std::vector<double>{2.5});
  EXPECT_NEAR(std::abs(p1[0].vector[0]), 1.0, 1e-15);
  SymTridiagonal two({0.0, 0.0}, {1.0});
  const auto v = eigenvalues_by_index(two, 0, 2);
  EXPECT_NEAR(v[0], -1.0, 1e-14);
  EXPECT_NEAR(v[1], 1.0, 1e-14);
  const auto p2 = eigenpairs_for(two, v);
  EXPECT_LT(residual(two, p2[1]), 1e-13);
}

TEST(Tridiagonal, RejectsBadInput) {
  EXPECT_THROW(SymTridiagonal({}, {}), ValidationError);
  EXPECT_THROW(SymTridiagonal({1.0, 2.0}, {}), ValidationError);
  const auto t = random_tridiagonal(10, 5);
  EXPECT_THROW(eigenvalues_by_index(t, 0, 0), ValidationError);
  EXPECT_THROW(eigenvalues_by_index(t, 5, 6), ValidationError);
  EXPECT_THROW(eigenvalues_in_window(t, 1.0, 1.0), ValidationError);
  EXPECT_TRUE(eigenvalues_in_window(t, 100.0, 200.0).empty());
}

TEST(Tridiagonal, ResultIndependentOfThreadCount) {
  const auto t = random_tridiagonal(2000, 17);
  set_thread_count(1);
  const auto a = eigenpairs_for(t, eigenvalues_by_index(t, 500, 12));
  set_thread_count(4);
  const auto b = eigenpairs_for(t, eigenvalues_by_index(t, 500, 12));
  set_thread_count(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].value, b[i].value);
    EXPECT_EQ(a[i].vector, b[i].vector);
  }
}
