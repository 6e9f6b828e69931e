// Diagnostics tests: IsoScore closed forms and invariances, cluster
// statistics conventions, uniformity ratios, and the CSV report.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ane/diagnostics.hpp"
#include "ane/rng.hpp"

namespace {

// Independent route: evaluate the score formula directly on an analytic
// variance spectrum, bypassing the covariance/eigen machinery.
double ScoreFromSpectrum(std::vector<double> var) {
  const double d = static_cast<double>(var.size());
  double norm = 0.0;
  for (double v : var) norm += v * v;
  norm = std::sqrt(norm);
  double dist2 = 0.0;
  for (double v : var) {
    const double s = v * std::sqrt(d) / norm - 1.0;
    dist2 += s * s;
  }
  const double delta = std::sqrt(dist2 / (2.0 * (d - std::sqrt(d))));
  const double phi_num = d - delta * delta * (d - std::sqrt(d));
  const double phi = phi_num * phi_num / (d * d);
  return (d * phi - 1.0) / (d - 1.0);
}

std::vector<ane::EmbeddingVec> GaussianPoints(ane::Rng &rng, std::size_t n,
                                              const std::vector<double> &stds) {
  std::vector<ane::EmbeddingVec> points;
  for (std::size_t i = 0; i < n; ++i) {
    ane::EmbeddingVec p(stds.size());
    for (std::size_t j = 0; j < stds.size(); ++j) p[j] = stds[j] * rng.Normal();
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace

TEST_CASE("isoscore approaches 1 for isotropic samples") {
  ane::Rng rng(101);
  const auto points = GaussianPoints(rng, 5000, std::vector<double>(8, 1.0));
  CHECK(ane::IsoScore(points) > 0.9);
  CHECK(ane::IsoScore(points) <= 1.0 + 1e-12);
}

TEST_CASE("isoscore is exactly 0 with all variance on one axis") {
  std::vector<ane::EmbeddingVec> points;
  ane::Rng rng(102);
  for (int i = 0; i < 40; ++i) points.push_back({rng.Normal(), 0.0, 0.0});
  CHECK(std::fabs(ane::IsoScore(points)) <= 1e-12);
}

TEST_CASE("isoscore matches direct spectrum evaluation on anisotropic data") {
  ane::Rng rng(103);
  const auto points = GaussianPoints(rng, 5000, {5.0, 1.0});
  const double got = ane::IsoScore(points);
  CHECK(got < 0.3);
  // Analytic spectrum 25:1; sampling noise only perturbs it slightly.
  CHECK(got == doctest::Approx(ScoreFromSpectrum({25.0, 1.0})).epsilon(0.15));

  // Exact agreement when the empirical spectrum is fed to both routes.
  std::vector<ane::EmbeddingVec> tiny = {
      {1.0, 0.0}, {-1.0, 0.0}, {0.0, 0.25}, {0.0, -0.25}};
  CHECK(ane::IsoScore(tiny) ==
        doctest::Approx(ScoreFromSpectrum({0.5, 0.03125})).epsilon(1e-12));
}

TEST_CASE("isoscore is invariant under rotation and uniform scaling") {
  ane::Rng rng(104);
  const auto points = GaussianPoints(rng, 200, {3.0, 1.0, 0.5});
  const double base = ane::IsoScore(points);

  Eigen::MatrixXd m(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = rng.Normal();
  Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();

  std::vector<ane::EmbeddingVec> moved;
  for (const auto &p : points) {
    Eigen::Vector3d v(p[0], p[1], p[2]);
    Eigen::Vector3d r = 10.0 * (rot * v);
    moved.push_back({r[0], r[1], r[2]});
  }
  CHECK(std::fabs(ane::IsoScore(moved) - base) < 1e-8);
}

TEST_CASE("isoscore rejects degenerate input and flags zero variance") {
  CHECK_THROWS_AS(ane::IsoScore({{1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ane::IsoScore({{1.0}, {2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(ane::IsoScore({{1.0, 2.0}, {1.0, 2.0, 3.0}}),
                  std::invalid_argument);

  std::vector<std::string> warnings;
  const double score =
      ane::IsoScore({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}, &warnings);
  CHECK(score == 0.0);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("zero total variance") != std::string::npos);
}

TEST_CASE("cluster stats use population variance and mean-of-stds sigma") {
  std::vector<std::pair<std::string, ane::EmbeddingVec>> labeled = {
      {"a", {0.0, 0.0}}, {"a", {2.0, 0.0}}};
  const auto result = ane::ComputeClusterStats(labeled);
  REQUIRE(result.clusters.size() == 1);
  const auto &c = result.clusters[0];
  CHECK(c.count == 2);
  CHECK(c.mean[0] == doctest::Approx(1.0));
  CHECK(c.mean[1] == doctest::Approx(0.0));
  CHECK(c.variance[0] == doctest::Approx(1.0));
  CHECK(c.variance[1] == doctest::Approx(0.0));
  CHECK(c.sigma_hat == doctest::Approx(0.5));
  CHECK(c.mean_abs == doctest::Approx(0.5));
  CHECK(result.global_sigma == doctest::Approx(0.5));
}

TEST_CASE("cluster stats flag singletons and weight global sigma by count") {
  std::vector<std::pair<std::string, ane::EmbeddingVec>> labeled = {
      {"a", {0.0, 0.0}}, {"a", {2.0, 0.0}},  // sigma_hat 0.5, count 2
      {"b", {0.0, -4.0}}, {"b", {0.0, 4.0}},
      {"b", {0.0, -4.0}}, {"b", {0.0, 4.0}},  // sigma_hat 2.0, count 4
      {"lone", {7.0, 7.0}}};
  const auto result = ane::ComputeClusterStats(labeled);
  REQUIRE(result.clusters.size() == 3);
  CHECK(result.clusters[2].count == 1);
  CHECK(result.clusters[2].variance[0] == 0.0);
  CHECK(result.global_sigma == doctest::Approx((2 * 0.5 + 4 * 2.0) / 6.0));
  REQUIRE(result.warnings.size() == 1);
  CHECK(result.warnings[0].find("lone") != std::string::npos);

  // Shifting every member of a cluster leaves its spread unchanged.
  for (auto &[label, vec] : labeled)
    if (label == "b")
      for (double &v : vec) v += 13.0;
  const auto shifted = ane::ComputeClusterStats(labeled);
  CHECK(shifted.clusters[1].sigma_hat ==
        doctest::Approx(result.clusters[1].sigma_hat));
  CHECK_THROWS_AS(ane::ComputeClusterStats({}), std::invalid_argument);
}

TEST_CASE("uniformity ratios match hand computation and scale invariance") {
  std::vector<std::pair<std::string, ane::EmbeddingVec>> labeled = {
      {"a", {-1.0}}, {"a", {1.0}},   // sigma_hat 1, |f| mean 1
      {"b", {-3.0}}, {"b", {3.0}}};  // sigma_hat 3, |f| mean 3
  const auto stats = ane::ComputeClusterStats(labeled).clusters;
  const auto [ratio_a, ratio_b] = ane::UniformityRatios(stats);
  CHECK(ratio_a == doctest::Approx(0.5));
  CHECK(ratio_b == doctest::Approx(0.5));

  for (auto &[label, vec] : labeled)
    for (double &v : vec) v *= 10.0;
  const auto scaled = ane::ComputeClusterStats(labeled).clusters;
  const auto [sa, sb] = ane::UniformityRatios(scaled);
  CHECK(sa == doctest::Approx(ratio_a));
  CHECK(sb == doctest::Approx(ratio_b));

  // Identical spreads give (0, 0).
  std::vector<std::pair<std::string, ane::EmbeddingVec>> same = {
      {"a", {-1.0}}, {"a", {1.0}}, {"b", {4.0}}, {"b", {6.0}}};
  const auto [za, zb] =
      ane::UniformityRatios(ane::ComputeClusterStats(same).clusters);
  CHECK(za == 0.0);
  CHECK(zb == 0.0);
}

TEST_CASE("uniformity ratios reject degenerate input") {
  std::vector<std::pair<std::string, ane::EmbeddingVec>> one_cluster = {
      {"a", {-1.0}}, {"a", {1.0}}, {"lone", {5.0}}};
  CHECK_THROWS_AS(
      ane::UniformityRatios(ane::ComputeClusterStats(one_cluster).clusters),
      std::invalid_argument);

  std::vector<std::pair<std::string, ane::EmbeddingVec>> flat = {
      {"a", {0.0}}, {"a", {0.0}}, {"b", {0.0}}, {"b", {0.0}}};
  CHECK_THROWS_AS(
      ane::UniformityRatios(ane::ComputeClusterStats(flat).clusters),
      std::invalid_argument);
}

TEST_CASE("mean cluster isoscore averages over non-singleton clusters") {
  ane::Rng rng(105);
  std::vector<std::pair<std::string, ane::EmbeddingVec>> labeled;
  for (int i = 0; i < 60; ++i)
    labeled.emplace_back("iso", ane::EmbeddingVec{rng.Normal(), rng.Normal()});
  for (int i = 0; i < 60; ++i)
    labeled.emplace_back("flat",
                         ane::EmbeddingVec{5.0 * rng.Normal(), rng.Normal()});
  labeled.emplace_back("lone", ane::EmbeddingVec{9.0, 9.0});

  std::vector<ane::EmbeddingVec> iso, flat;
  for (const auto &[label, vec] : labeled) {
    if (label == "iso") iso.push_back(vec);
    if (label == "flat") flat.push_back(vec);
  }
  const double want = (ane::IsoScore(iso) + ane::IsoScore(flat)) / 2.0;
  CHECK(ane::MeanClusterIsoScore(labeled) == doctest::Approx(want));
}

TEST_CASE("diagnostics report writes the expected CSV") {
  std::ostringstream out;
  ane::WriteDiagnosticsReport(out, {{1, 0.25, 0.5, 0.75, 1.5},
                                    {2, 0.5, 0.25, 0.5, 1.25}});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,mean_isoscore,ratio_a,ratio_b,sigma_hat");
  std::getline(in, line);
  CHECK(line == "1,0.25,0.5,0.75,1.5");
  std::getline(in, line);
  CHECK(line == "2,0.5,0.25,0.5,1.25");
}
