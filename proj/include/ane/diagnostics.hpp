// ane/diagnostics.hpp
//
// Cluster statistics and isotropy measurement: cluster-wise IsoScore and
// the variance-uniformity ratios used to track how evenly embedding
// clusters spread across dimensions during training.

#ifndef ANE_DIAGNOSTICS_HPP
#define ANE_DIAGNOSTICS_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ane/types.hpp"

namespace ane {

// Per-cluster summary. Variances use the population (divide-by-n)
// convention throughout. sigma_hat is the mean of per-dimension standard
// deviations; mean_abs is the mean of |f| over all elements of all members.
struct ClusterStats {
  std::string label;
  std::size_t count = 0;
  EmbeddingVec mean;
  std::vector<double> variance;
  double sigma_hat = 0.0;
  double mean_abs = 0.0;
};

struct ClusterStatsResult {
  std::vector<ClusterStats> clusters;
  // Count-weighted mean of sigma_hat over clusters with >= 2 members.
  double global_sigma = 0.0;
  std::vector<std::string> warnings;
};

// IsoScore of a point set: eigenvalues of the population covariance are
// rescaled so the variance vector has norm sqrt(d), and the distance of
// that vector from the all-ones vector is mapped to [0, 1]. 1 means
// perfectly isotropic, 0 means all variance on one axis. Requires >= 2
// points and d >= 2; a set with zero total variance scores 0 with a
// warning appended to `warnings` when given.
double IsoScore(const std::vector<EmbeddingVec>& points,
                std::vector<std::string>* warnings = nullptr);

// Groups labeled embeddings by label (first-seen order) and summarizes
// each cluster. Singleton clusters get zero variance, a warning, and are
// excluded from the global sigma estimate.
ClusterStatsResult ComputeClusterStats(
    const std::vector<std::pair<std::string, EmbeddingVec>>& labeled);

// Mean IsoScore over clusters with >= 2 members; clusters are formed as
// in ComputeClusterStats. Requires at least one such cluster.
double MeanClusterIsoScore(
    const std::vector<std::pair<std::string, EmbeddingVec>>& labeled,
    std::vector<std::string>* warnings = nullptr);

// Spread-uniformity ratios over clusters with >= 2 members:
//   ratio_a = std(sigma_hat) / mean(|f| elements over those clusters' members)
//   ratio_b = std(sigma_hat) / mean(sigma_hat)
// Both use population std across clusters. Requires >= 2 eligible
// clusters and nonzero denominators.
std::pair<double, double> UniformityRatios(
    const std::vector<ClusterStats>& stats);

// One row of the per-epoch diagnostics report.
struct DiagnosticsRow {
  std::size_t epoch = 0;
  double mean_isoscore = 0.0;
  double ratio_a = 0.0;
  double ratio_b = 0.0;
  double sigma_hat = 0.0;
};

// CSV with header epoch,mean_isoscore,ratio_a,ratio_b,sigma_hat.
void WriteDiagnosticsReport(std::ostream& out,
                            const std::vector<DiagnosticsRow>& rows);

}  // namespace ane

#endif  // ANE_DIAGNOSTICS_HPP
