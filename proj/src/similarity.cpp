// similarity.cpp
//
// The grid oracle deliberately avoids the Eigen-backed code path used by
// BhattacharyyaGaussian: 1-D/2-D density evaluation is hand-rolled so the
// two routes stay independent checks of each other.

#include "ane/similarity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "ane/kernels.hpp"

namespace ane {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;
// exp(x) below this bound contributes < 1e-19 per unit area; skipping the
// exp keeps the 2-D oracle fast without moving the 1e-4 tolerance.
constexpr double kNegligibleLog = -45.0;

void CheckPriors(double p1, double p2) {
  if (p1 < 0.0 || p2 < 0.0 || std::fabs(p1 + p2 - 1.0) > 1e-9)
    throw std::invalid_argument("priors must be non-negative and sum to 1");
}

// log N(x; m, C) for 1-D/2-D with precomputed inverse and log-determinant.
struct DensityEval {
  std::size_t dim;
  double m0 = 0.0, m1 = 0.0;
  double i00 = 0.0, i01 = 0.0, i11 = 0.0;  // inverse covariance
  double log_norm = 0.0;                   // -d/2 log(2pi) - 1/2 log|C|
  double sigma_max = 0.0;                  // sqrt of largest eigenvalue

  explicit DensityEval(const GaussianSpec &g) : dim(g.Dim()) {
    if (dim == 1) {
      const double v = g.Cov(0, 0);
      if (!(v > 0.0)) throw std::invalid_argument("grid oracle: variance must be positive");
      m0 = g.mean[0];
      i00 = 1.0 / v;
      log_norm = -0.5 * (kLogTwoPi + std::log(v));
      sigma_max = std::sqrt(v);
    } else if (dim == 2) {
      const double a = g.Cov(0, 0), b = g.Cov(0, 1), c = g.Cov(1, 1);
      const double det = a * c - b * b;
      if (!(a > 0.0) || !(det > 0.0))
        throw std::invalid_argument("grid oracle: covariance not positive-definite");
      m0 = g.mean[0];
      m1 = g.mean[1];
      i00 = c / det;
      i01 = -b / det;
      i11 = a / det;
      log_norm = -kLogTwoPi - 0.5 * std::log(det);
      const double half_tr = 0.5 * (a + c);
      const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      sigma_max = std::sqrt(half_tr + disc);
    } else {
      throw std::invalid_argument("grid oracle supports only 1-D and 2-D");
    }
  }

  double LogDensity1(double x) const {
    const double d = x - m0;
    return log_norm - 0.5 * d * d * i00;
  }
  double LogDensity2(double x, double y) const {
    const double dx = x - m0, dy = y - m1;
    return log_norm - 0.5 * (dx * dx * i00 + 2.0 * dx * dy * i01 + dy * dy * i11);
  }
};

double TrapezoidWeight(std::size_t i, std::size_t n) {
  return (i == 0 || i + 1 == n) ? 0.5 : 1.0;
}

}  // namespace

double BayesErrorGrid(const GaussianSpec &g1, const GaussianSpec &g2,
                      double prior1, double prior2, const GridConfig &grid) {
  CheckPriors(prior1, prior2);
  if (g1.Dim() != g2.Dim())
    throw std::invalid_argument("grid oracle: dimension mismatch");
  if (grid.points_per_axis < 2)
    throw std::invalid_argument("grid oracle: need at least 2 points per axis");
  if (prior1 == 0.0 || prior2 == 0.0) return 0.0;

  const DensityEval d1(g1), d2(g2);
  const double log_p1 = std::log(prior1), log_p2 = std::log(prior2);
  const double reach = grid.sigma_span * std::max(d1.sigma_max, d2.sigma_max);
  const std::size_t n = grid.points_per_axis;

  double total = 0.0;
  if (g1.Dim() == 1) {
    const double lo = std::min(g1.mean[0], g2.mean[0]) - reach;
    const double hi = std::max(g1.mean[0], g2.mean[0]) + reach;
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo + h * static_cast<double>(i);
      const double l = std::min(log_p1 + d1.LogDensity1(x), log_p2 + d2.LogDensity1(x));
      if (l > kNegligibleLog) total += TrapezoidWeight(i, n) * std::exp(l);
    }
    total *= h;
  } else {
    const double lo0 = std::min(g1.mean[0], g2.mean[0]) - reach;
    const double hi0 = std::max(g1.mean[0], g2.mean[0]) + reach;
    const double lo1 = std::min(g1.mean[1], g2.mean[1]) - reach;
    const double hi1 = std::max(g1.mean[1], g2.mean[1]) + reach;
    const double h0 = (hi0 - lo0) / static_cast<double>(n - 1);
    const double h1 = (hi1 - lo1) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo0 + h0 * static_cast<double>(i);
      const double wi = TrapezoidWeight(i, n);
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double y = lo1 + h1 * static_cast<double>(j);
        const double l =
            std::min(log_p1 + d1.LogDensity2(x, y), log_p2 + d2.LogDensity2(x, y));
        if (l > kNegligibleLog) row += TrapezoidWeight(j, n) * std::exp(l);
      }
      total += wi * row;
    }
    total *= h0 * h1;
  }
  if (!std::isfinite(total))
    throw std::runtime_error("grid oracle: non-finite integral");
  return total;
}

double PairCountingSimilarity(const std::vector<std::vector<std::int64_t>> &samples1,
                              const std::vector<std::vector<std::int64_t>> &samples2) {
  if (samples1.empty() || samples2.empty())
    throw std::invalid_argument("pair counting: empty sample set");
  std::map<std::vector<std::int64_t>, std::pair<std::size_t, std::size_t>> bins;
  for (const auto &pt : samples1) ++bins[pt].first;
  for (const auto &pt : samples2) ++bins[pt].second;
  std::size_t p = 0;
  for (const auto &kv : bins) p += std::min(kv.second.first, kv.second.second);
  return static_cast<double>(p) /
         static_cast<double>(samples1.size() + samples2.size());
}

std::vector<std::int64_t> QuantizePoint(std::span<const double> point, double cell) {
  if (!(cell > 0.0)) throw std::invalid_argument("quantize: cell size must be positive");
  std::vector<std::int64_t> out(point.size());
  for (std::size_t i = 0; i < point.size(); ++i)
    out[i] = static_cast<std::int64_t>(std::floor(point[i] / cell));
  return out;
}

double BhattacharyyaGaussian(const GaussianSpec &g1, const GaussianSpec &g2,
                             double prior1, double prior2) {
  CheckPriors(prior1, prior2);
  const std::size_t d = g1.Dim();
  if (d != g2.Dim())
    throw std::invalid_argument("bhattacharyya: dimension mismatch");

  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd c1(n, n), c2(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      c1(i, j) = g1.Cov(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      c2(i, j) = g2.Cov(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  const Eigen::MatrixXd cbar = 0.5 * (c1 + c2);

  auto log_det_pd = [](const Eigen::MatrixXd &m, const char *which) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument(std::string("bhattacharyya: ") + which +
                                  " covariance not positive-definite");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  };
  const double log_det1 = log_det_pd(c1, "first");
  const double log_det2 = log_det_pd(c2, "second");

  Eigen::LLT<Eigen::MatrixXd> llt_bar(cbar);
  if (llt_bar.info() != Eigen::Success)
    throw std::invalid_argument("bhattacharyya: averaged covariance not positive-definite");
  const double log_det_bar =
      2.0 * llt_bar.matrixL().toDenseMatrix().diagonal().array().log().sum();

  Eigen::VectorXd dm(n);
  for (Eigen::Index i = 0; i < n; ++i)
    dm(i) = g1.mean[static_cast<std::size_t>(i)] - g2.mean[static_cast<std::size_t>(i)];
  const double quad = dm.dot(llt_bar.solve(dm));

  const double distance = 0.125 * quad + 0.5 * (log_det_bar - 0.5 * (log_det1 + log_det2));
  return std::sqrt(prior1 * prior2) * std::exp(-distance);
}

double IsotropicSimilarity(const EmbeddingVec &m1, const EmbeddingVec &m2,
                           double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("isotropic similarity: sigma must be positive");
  if (m1.size() != m2.size() || m1.empty())
    throw std::invalid_argument("isotropic similarity: dimension mismatch");
  const double d2 = kernels::SquaredDistance(m1.data(), m2.data(), m1.size());
  return 0.5 * std::exp(-d2 / (8.0 * sigma * sigma));
}

double AcousticLogLikelihood(const EmbeddingVec &f, const EmbeddingVec &g,
                             double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("acoustic likelihood: sigma must be positive");
  if (f.size() != g.size() || f.empty())
    throw std::invalid_argument("acoustic likelihood: dimension mismatch");
  const double d2 = kernels::SquaredDistance(f.data(), g.data(), f.size());
  const double d = static_cast<double>(f.size());
  return -d * (0.5 * kLogTwoPi + std::log(sigma)) - d2 / (2.0 * sigma * sigma);
}

}  // namespace ane
