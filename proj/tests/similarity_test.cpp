// Similarity calculus tests: grid oracle against closed-form Bayes error,
// Bhattacharyya bound dominance and isotropic reduction, pair counting,
// and the acoustic log-likelihood.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ane/rng.hpp"
#include "ane/similarity.hpp"

namespace {

// Independent oracle: standard normal CDF via erfc, no shared code with
// the grid integrator.
double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

ane::GaussianSpec RandomGaussian1D(ane::Rng &rng) {
  return ane::GaussianSpec::Full({rng.Uniform(-3.0, 3.0)},
                                 {rng.Uniform(0.2, 2.5)});
}

ane::GaussianSpec RandomGaussian2D(ane::Rng &rng) {
  // A^T A + eps*I is positive-definite for any A.
  double a = rng.Uniform(-1.5, 1.5), b = rng.Uniform(-1.5, 1.5);
  double c = rng.Uniform(-1.5, 1.5), d = rng.Uniform(-1.5, 1.5);
  std::vector<double> cov = {a * a + c * c + 0.15, a * b + c * d,
                             a * b + c * d, b * b + d * d + 0.15};
  return ane::GaussianSpec::Full({rng.Uniform(-2.0, 2.0), rng.Uniform(-2.0, 2.0)},
                                 std::move(cov));
}

}  // namespace

TEST_CASE("grid oracle matches closed-form Bayes error in 1-D") {
  auto std_normal = ane::GaussianSpec::Isotropic({0.0}, 1.0);
  CHECK(ane::BayesErrorGrid(std_normal, std_normal) == doctest::Approx(0.5).epsilon(2e-4));

  // Equal variances: overlap = Phi(-|dm| / (2 sigma)).
  auto shifted = ane::GaussianSpec::Isotropic({2.0}, 1.0);
  const double got = ane::BayesErrorGrid(std_normal, shifted);
  CHECK(std::fabs(got - NormalCdf(-1.0)) < 1e-4);

  ane::Rng rng(5150);
  for (int t = 0; t < 10; ++t) {
    const double m = rng.Uniform(-2.0, 2.0), dm = rng.Uniform(0.1, 4.0);
    const double sigma = rng.Uniform(0.3, 2.0);
    auto g1 = ane::GaussianSpec::Isotropic({m}, sigma * sigma);
    auto g2 = ane::GaussianSpec::Isotropic({m + dm}, sigma * sigma);
    const double want = NormalCdf(-dm / (2.0 * sigma));
    CHECK(std::fabs(ane::BayesErrorGrid(g1, g2) - want) < 1e-4);
  }
}

TEST_CASE("grid oracle handles degenerate priors and bad input") {
  auto g = ane::GaussianSpec::Isotropic({0.0}, 1.0);
  CHECK(ane::BayesErrorGrid(g, g, 1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(ane::BayesErrorGrid(g, g, 0.7, 0.7), std::invalid_argument);

  auto g3 = ane::GaussianSpec::Isotropic({0.0, 0.0, 0.0}, 1.0);
  CHECK_THROWS_AS(ane::BayesErrorGrid(g3, g3), std::invalid_argument);

  auto g2d = ane::GaussianSpec::Isotropic({0.0, 0.0}, 1.0);
  CHECK_THROWS_AS(ane::BayesErrorGrid(g, g2d), std::invalid_argument);
}

TEST_CASE("grid oracle respects prior weighting") {
  // Unequal priors cap the overlap at min(p1, p2).
  auto g = ane::GaussianSpec::Isotropic({0.0}, 1.0);
  const double v = ane::BayesErrorGrid(g, g, 0.25, 0.75);
  CHECK(v == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(v <= 0.25 + 1e-6);
}

TEST_CASE("2-D grid oracle agrees with product closed form") {
  // Independent axes: min of products is not separable in general, but for
  // identical distributions the overlap is exactly 1/2.
  auto g = ane::GaussianSpec::Full({0.0, 0.0}, {1.0, 0.0, 0.0, 1.0});
  CHECK(ane::BayesErrorGrid(g, g) == doctest::Approx(0.5).epsilon(2e-4));

  // Shift along one axis only: the orthogonal axis integrates out, so the
  // 1-D closed form still applies.
  auto h = ane::GaussianSpec::Full({2.0, 0.0}, {1.0, 0.0, 0.0, 1.0});
  CHECK(std::fabs(ane::BayesErrorGrid(g, h) - NormalCdf(-1.0)) < 1e-4);
}

TEST_CASE("pair counting reproduces the 4-in-20 construction") {
  // 9 vs 11 quantized points with exactly 4 overlapping pairs.
  using Pt = std::vector<std::int64_t>;
  std::vector<Pt> s1 = {{0}, {0}, {0}, {1}, {2}, {3}, {4}, {5}, {6}};
  std::vector<Pt> s2 = {{0}, {0}, {1}, {2}, {9}, {9}, {9}, {9}, {9}, {9}, {9}};
  REQUIRE(s1.size() == 9);
  REQUIRE(s2.size() == 11);
  CHECK(ane::PairCountingSimilarity(s1, s2) == doctest::Approx(0.2));

  std::vector<Pt> disjoint = {{100}, {101}};
  CHECK(ane::PairCountingSimilarity(s1, disjoint) == 0.0);

  CHECK(ane::PairCountingSimilarity(s1, s1) == 0.5);
  CHECK_THROWS_AS(ane::PairCountingSimilarity({}, s1), std::invalid_argument);
}

TEST_CASE("quantization uses floor semantics") {
  std::vector<double> p = {0.49, -0.01, 1.0};
  auto q = ane::QuantizePoint(p, 0.5);
  CHECK(q == std::vector<std::int64_t>{0, -1, 2});
  CHECK_THROWS_AS(ane::QuantizePoint(p, 0.0), std::invalid_argument);
}

TEST_CASE("bhattacharyya equals 1/2 for identical gaussians") {
  auto g = ane::GaussianSpec::Full({1.0, -2.0}, {2.0, 0.3, 0.3, 1.0});
  CHECK(ane::BhattacharyyaGaussian(g, g) == doctest::Approx(0.5).epsilon(1e-12));

  auto bad = ane::GaussianSpec::Full({0.0, 0.0}, {1.0, 2.0, 2.0, 1.0});
  CHECK_THROWS_AS(ane::BhattacharyyaGaussian(bad, bad), std::invalid_argument);
}

TEST_CASE("bhattacharyya reduces to the isotropic form when C = sigma^2 I") {
  ane::Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.UniformInt(0, 1));
    const double sigma = rng.Uniform(0.2, 3.0);
    ane::EmbeddingVec m1(d), m2(d);
    for (auto &x : m1) x = rng.Uniform(-4.0, 4.0);
    for (auto &x : m2) x = rng.Uniform(-4.0, 4.0);
    auto g1 = ane::GaussianSpec::Isotropic(m1, sigma * sigma);
    auto g2 = ane::GaussianSpec::Isotropic(m2, sigma * sigma);
    const double full = ane::BhattacharyyaGaussian(g1, g2);
    const double iso = ane::IsotropicSimilarity(m1, m2, sigma);
    CHECK(std::fabs(full - iso) < 1e-10);
  }
}

TEST_CASE("bhattacharyya dominates the grid oracle") {
  // Spot check here; the full 200-pair sweep lives in the acceptance suite.
  ane::Rng rng(2024);
  for (int t = 0; t < 10; ++t) {
    auto g1 = RandomGaussian1D(rng);
    auto g2 = RandomGaussian1D(rng);
    CHECK(ane::BhattacharyyaGaussian(g1, g2) >= ane::BayesErrorGrid(g1, g2) - 1e-6);
  }
  for (int t = 0; t < 5; ++t) {
    auto g1 = RandomGaussian2D(rng);
    auto g2 = RandomGaussian2D(rng);
    CHECK(ane::BhattacharyyaGaussian(g1, g2) >= ane::BayesErrorGrid(g1, g2) - 1e-6);
  }
}

TEST_CASE("similarity operations are symmetric") {
  ane::Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    auto g1 = RandomGaussian2D(rng);
    auto g2 = RandomGaussian2D(rng);
    CHECK(std::fabs(ane::BhattacharyyaGaussian(g1, g2) -
                    ane::BhattacharyyaGaussian(g2, g1)) < 1e-12);
    CHECK(std::fabs(ane::IsotropicSimilarity(g1.mean, g2.mean, 1.3) -
                    ane::IsotropicSimilarity(g2.mean, g1.mean, 1.3)) < 1e-12);
  }
  auto a = RandomGaussian1D(rng);
  auto b = RandomGaussian1D(rng);
  CHECK(std::fabs(ane::BayesErrorGrid(a, b) - ane::BayesErrorGrid(b, a)) < 1e-9);
}

TEST_CASE("isotropic similarity closed form") {
  ane::EmbeddingVec m = {0.7, -0.2};
  CHECK(ane::IsotropicSimilarity(m, m, 2.0) == doctest::Approx(0.5));

  // ||dm||^2 = 8 sigma^2 puts the similarity at e^-1 / 2.
  const double sigma = 1.5;
  ane::EmbeddingVec m2 = {0.7 + std::sqrt(8.0) * sigma, -0.2};
  CHECK(ane::IsotropicSimilarity(m, m2, sigma) ==
        doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));

  // Monotone decay in separation.
  double prev = 1.0;
  for (double sep = 0.0; sep < 10.0; sep += 0.5) {
    ane::EmbeddingVec far = {0.7 + sep, -0.2};
    const double s = ane::IsotropicSimilarity(m, far, sigma);
    CHECK(s > 0.0);
    CHECK(s <= 0.5);
    CHECK(s <= prev);
    prev = s;
  }
  CHECK_THROWS_AS(ane::IsotropicSimilarity(m, m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ane::IsotropicSimilarity(m, {1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("acoustic log-likelihood closed form and ranking") {
  ane::EmbeddingVec f = {0.3};
  CHECK(ane::AcousticLogLikelihood(f, f, 1.0) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));

  // For fixed sigma, likelihood ranking is distance ranking.
  ane::Rng rng(17);
  ane::EmbeddingVec query(4), g1(4), g2(4);
  for (int t = 0; t < 50; ++t) {
    for (auto &x : query) x = rng.Normal();
    for (auto &x : g1) x = rng.Normal();
    for (auto &x : g2) x = rng.Normal();
    double d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < 4; ++i) {
      d1 += (query[i] - g1[i]) * (query[i] - g1[i]);
      d2 += (query[i] - g2[i]) * (query[i] - g2[i]);
    }
    const bool closer = d1 < d2;
    const bool likelier = ane::AcousticLogLikelihood(query, g1, 0.8) >
                          ane::AcousticLogLikelihood(query, g2, 0.8);
    CHECK(closer == likelier);
  }

  // Doubling sigma divides the quadratic term by 4.
  ane::EmbeddingVec g = {1.3};
  const double base = ane::AcousticLogLikelihood(f, g, 1.0);
  const double wide = ane::AcousticLogLikelihood(f, g, 2.0);
  const double quad1 = base + 0.5 * std::log(2.0 * M_PI);
  const double quad2 = wide + 0.5 * std::log(2.0 * M_PI) + std::log(2.0);
  CHECK(quad2 == doctest::Approx(quad1 / 4.0).epsilon(1e-12));

  CHECK_THROWS_AS(ane::AcousticLogLikelihood(f, g, -1.0), std::invalid_argument);
}
