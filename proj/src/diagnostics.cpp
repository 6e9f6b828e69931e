// diagnostics.cpp: IsoScore, cluster statistics, uniformity ratios.

#include "ane/diagnostics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace ane {
namespace {

void Warn(std::vector<std::string>* warnings, const std::string& message) {
  if (warnings != nullptr) warnings->push_back(message);
}

}  // namespace

double IsoScore(const std::vector<EmbeddingVec>& points,
                std::vector<std::string>* warnings) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("isoscore: need at least 2 points");
  const std::size_t d = points[0].size();
  if (d < 2) throw std::invalid_argument("isoscore: need dimension >= 2");
  for (const EmbeddingVec& p : points) {
    if (p.size() != d)
      throw std::invalid_argument("isoscore: inconsistent dimensions");
  }

  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = points[i][j];
  x.rowwise() -= x.colwise().mean();

  // Population covariance; its eigenvalues are the per-dimension
  // variances after rotating to the PCA basis.
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("isoscore: eigendecomposition failed");
  Eigen::VectorXd var = eig.eigenvalues().reverse();
  var = var.cwiseMax(0.0);

  const double norm = var.norm();
  if (norm == 0.0) {
    Warn(warnings, "isoscore: zero total variance, score defined as 0");
    return 0.0;
  }
  const double dd = static_cast<double>(d);
  var *= std::sqrt(dd) / norm;

  const double delta =
      (var.array() - 1.0).matrix().norm() / std::sqrt(2.0 * (dd - std::sqrt(dd)));
  const double phi_num = dd - delta * delta * (dd - std::sqrt(dd));
  const double phi = (phi_num * phi_num) / (dd * dd);
  return (dd * phi - 1.0) / (dd - 1.0);
}

ClusterStatsResult ComputeClusterStats(
    const std::vector<std::pair<std::string, EmbeddingVec>>& labeled) {
  if (labeled.empty())
    throw std::invalid_argument("cluster stats: empty input");
  const std::size_t d = labeled[0].second.size();
  if (d == 0) throw std::invalid_argument("cluster stats: zero dimension");

  std::vector<std::string> order;
  std::vector<std::vector<const EmbeddingVec*>> groups;
  for (const auto& [label, vec] : labeled) {
    if (vec.size() != d)
      throw std::invalid_argument("cluster stats: inconsistent dimensions");
    auto it = std::find(order.begin(), order.end(), label);
    if (it == order.end()) {
      order.push_back(label);
      groups.emplace_back();
      it = order.end() - 1;
    }
    groups[static_cast<std::size_t>(it - order.begin())].push_back(&vec);
  }

  ClusterStatsResult result;
  double sigma_sum = 0.0;
  std::size_t sigma_count = 0;
  for (std::size_t c = 0; c < order.size(); ++c) {
    const auto& members = groups[c];
    ClusterStats stats;
    stats.label = order[c];
    stats.count = members.size();
    stats.mean.assign(d, 0.0);
    stats.variance.assign(d, 0.0);
    for (const EmbeddingVec* m : members) {
      for (std::size_t j = 0; j < d; ++j) {
        stats.mean[j] += (*m)[j];
        stats.mean_abs += std::abs((*m)[j]);
      }
    }
    const double inv_n = 1.0 / static_cast<double>(stats.count);
    for (std::size_t j = 0; j < d; ++j) stats.mean[j] *= inv_n;
    stats.mean_abs *= inv_n / static_cast<double>(d);
    if (stats.count >= 2) {
      for (const EmbeddingVec* m : members) {
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = (*m)[j] - stats.mean[j];
          stats.variance[j] += diff * diff;
        }
      }
      for (std::size_t j = 0; j < d; ++j) {
        stats.variance[j] *= inv_n;
        stats.sigma_hat += std::sqrt(stats.variance[j]);
      }
      stats.sigma_hat /= static_cast<double>(d);
      sigma_sum += static_cast<double>(stats.count) * stats.sigma_hat;
      sigma_count += stats.count;
    } else {
      result.warnings.push_back("cluster stats: singleton cluster '" +
                                stats.label + "' excluded from sigma estimate");
    }
    result.clusters.push_back(std::move(stats));
  }
  if (sigma_count > 0)
    result.global_sigma = sigma_sum / static_cast<double>(sigma_count);
  return result;
}

double MeanClusterIsoScore(
    const std::vector<std::pair<std::string, EmbeddingVec>>& labeled,
    std::vector<std::string>* warnings) {
  ClusterStatsResult grouped = ComputeClusterStats(labeled);
  double sum = 0.0;
  std::size_t count = 0;
  for (const ClusterStats& stats : grouped.clusters) {
    if (stats.count < 2) continue;
    std::vector<EmbeddingVec> members;
    for (const auto& [label, vec] : labeled)
      if (label == stats.label) members.push_back(vec);
    sum += IsoScore(members, warnings);
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("mean isoscore: no cluster has >= 2 members");
  return sum / static_cast<double>(count);
}

std::pair<double, double> UniformityRatios(
    const std::vector<ClusterStats>& stats) {
  double sigma_mean = 0.0;
  double abs_sum = 0.0;
  std::size_t member_count = 0;
  std::size_t eligible = 0;
  for (const ClusterStats& s : stats) {
    if (s.count < 2) continue;
    ++eligible;
    sigma_mean += s.sigma_hat;
    abs_sum += s.mean_abs * static_cast<double>(s.count);
    member_count += s.count;
  }
  if (eligible < 2)
    throw std::invalid_argument(
        "uniformity ratios: need >= 2 clusters with >= 2 members");
  sigma_mean /= static_cast<double>(eligible);
  double var = 0.0;
  for (const ClusterStats& s : stats) {
    if (s.count < 2) continue;
    const double diff = s.sigma_hat - sigma_mean;
    var += diff * diff;
  }
  const double sigma_std = std::sqrt(var / static_cast<double>(eligible));
  const double mean_abs = abs_sum / static_cast<double>(member_count);
  if (mean_abs == 0.0)
    throw std::invalid_argument("uniformity ratios: zero mean |f|");
  if (sigma_mean == 0.0)
    throw std::invalid_argument("uniformity ratios: zero mean sigma_hat");
  return {sigma_std / mean_abs, sigma_std / sigma_mean};
}

void WriteDiagnosticsReport(std::ostream& out,
                            const std::vector<DiagnosticsRow>& rows) {
  out << "epoch,mean_isoscore,ratio_a,ratio_b,sigma_hat\n";
  char buf[192];
  for (const DiagnosticsRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g\n", row.epoch,
                  row.mean_isoscore, row.ratio_a, row.ratio_b, row.sigma_hat);
    out << buf;
  }
}

}  // namespace ane
