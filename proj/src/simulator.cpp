// simulator.cpp: synchronous gradient dynamics on a labeled point cloud.

#include "ane/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ane/kernels.hpp"

namespace ane {
namespace {

// Full induced-probability matrix; row i is the softmax of the negated
// squared distances from pivot i over all other points.
std::vector<std::vector<double>> FullQ(const PointCloud& cloud) {
  const std::size_t n = cloud.points.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = kernels::SquaredDistance(cloud.points[i].position,
                                       cloud.points[j].position);
      dist[i][j] = d;
      dist[j][i] = d;
    }
  }
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) best = std::max(best, -dist[i][j]);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      q[i][j] = std::exp(-dist[i][j] - best);
      total += q[i][j];
    }
    for (std::size_t j = 0; j < n; ++j) q[i][j] /= total;
  }
  return q;
}

std::size_t SameClusterCount(const PointCloud& cloud, std::size_t i) {
  std::size_t c = 0;
  for (std::size_t j = 0; j < cloud.points.size(); ++j)
    if (j != i && cloud.points[j].cluster == cloud.points[i].cluster) ++c;
  return c;
}

EmbeddingVec PositiveFromQ(const PointCloud& cloud, std::size_t i,
                           const std::vector<std::vector<double>>& q,
                           std::vector<std::string>* warnings) {
  const std::size_t d = cloud.Dim();
  EmbeddingVec grad(d, 0.0);
  const std::size_t c = SameClusterCount(cloud, i);
  if (c == 0) {
    if (warnings != nullptr)
      warnings->push_back("simulator: point " + std::to_string(i) +
                          " is a singleton cluster, zero positive gradient");
    return grad;
  }
  const double inv_c = 2.0 / static_cast<double>(c);
  for (std::size_t j = 0; j < cloud.points.size(); ++j) {
    if (j == i || cloud.points[j].cluster != cloud.points[i].cluster) continue;
    const double w = 2.0 * (inv_c - q[i][j] - q[j][i]);
    for (std::size_t k = 0; k < d; ++k)
      grad[k] += w * (cloud.points[i].position[k] - cloud.points[j].position[k]);
  }
  return grad;
}

EmbeddingVec NegativeFromQ(const PointCloud& cloud, std::size_t i,
                           const std::vector<std::vector<double>>& q) {
  const std::size_t d = cloud.Dim();
  EmbeddingVec grad(d, 0.0);
  for (std::size_t j = 0; j < cloud.points.size(); ++j) {
    if (j == i || cloud.points[j].cluster == cloud.points[i].cluster) continue;
    const double w = -2.0 * (q[i][j] + q[j][i]);
    for (std::size_t k = 0; k < d; ++k)
      grad[k] += w * (cloud.points[i].position[k] - cloud.points[j].position[k]);
  }
  return grad;
}

}  // namespace

std::size_t PointCloud::Dim() const {
  return points.empty() ? 0 : points[0].position.size();
}

void PointCloud::Validate() const {
  if (points.size() < 2)
    throw std::invalid_argument("point cloud: need at least 2 points");
  const std::size_t d = points[0].position.size();
  if (d == 0) throw std::invalid_argument("point cloud: zero dimension");
  for (const SimPoint& p : points) {
    if (p.position.size() != d)
      throw std::invalid_argument("point cloud: inconsistent dimensions");
    for (double v : p.position)
      if (!std::isfinite(v))
        throw std::invalid_argument("point cloud: non-finite coordinate");
  }
}

std::vector<double> NeighborProbabilities(const PointCloud& cloud,
                                          std::size_t i) {
  cloud.Validate();
  if (i >= cloud.points.size())
    throw std::invalid_argument("neighbor probabilities: index out of range");
  const std::size_t n = cloud.points.size();
  std::vector<double> neg_dist(n, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    neg_dist[j] =
        -kernels::SquaredDistance(cloud.points[i].position, cloud.points[j].position);
    best = std::max(best, neg_dist[j]);
  }
  std::vector<double> q(n, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    q[j] = std::exp(neg_dist[j] - best);
    total += q[j];
  }
  for (std::size_t j = 0; j < n; ++j) q[j] /= total;
  return q;
}

EmbeddingVec PositiveGradient(const PointCloud& cloud, std::size_t i,
                              std::vector<std::string>* warnings) {
  cloud.Validate();
  if (i >= cloud.points.size())
    throw std::invalid_argument("positive gradient: index out of range");
  return PositiveFromQ(cloud, i, FullQ(cloud), warnings);
}

EmbeddingVec NegativeGradient(const PointCloud& cloud, std::size_t i) {
  cloud.Validate();
  if (i >= cloud.points.size())
    throw std::invalid_argument("negative gradient: index out of range");
  return NegativeFromQ(cloud, i, FullQ(cloud));
}

double CloudLoss(const PointCloud& cloud) {
  cloud.Validate();
  const std::vector<std::vector<double>> q = FullQ(cloud);
  double loss = 0.0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const std::size_t c = SameClusterCount(cloud, i);
    if (c == 0) continue;
    const double p = 1.0 / static_cast<double>(c);
    for (std::size_t j = 0; j < cloud.points.size(); ++j) {
      if (j == i || cloud.points[j].cluster != cloud.points[i].cluster)
        continue;
      loss += p * std::log(p / q[i][j]);
    }
  }
  return loss;
}

PointCloud Step(const PointCloud& cloud, double gamma, bool include_negative,
                std::vector<std::string>* warnings) {
  cloud.Validate();
  if (gamma < 0.0)
    throw std::invalid_argument("step: learning rate must be nonnegative");
  const std::vector<std::vector<double>> q = FullQ(cloud);
  PointCloud next = cloud;
  next.iteration = cloud.iteration + 1;
  const std::size_t d = cloud.Dim();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    EmbeddingVec grad = PositiveFromQ(cloud, i, q, warnings);
    if (include_negative) {
      const EmbeddingVec neg = NegativeFromQ(cloud, i, q);
      for (std::size_t k = 0; k < d; ++k) grad[k] += neg[k];
    }
    for (std::size_t k = 0; k < d; ++k)
      next.points[i].position[k] -= gamma * grad[k];
  }
  return next;
}

PointCloud MakeTwoClusterCloud(Rng& rng) {
  PointCloud cloud;
  // Wide flat cluster along x, narrow tall cluster along y; each has a
  // 5:1 axis ratio.
  const double centers[2][2] = {{0.0, 0.0}, {6.0, 0.0}};
  const double stds[2][2] = {{2.5, 0.5}, {0.4, 2.0}};
  for (int c = 0; c < 2; ++c) {
    for (int p = 0; p < 100; ++p) {
      SimPoint point;
      point.cluster = c;
      point.position = {centers[c][0] + stds[c][0] * rng.Normal(),
                        centers[c][1] + stds[c][1] * rng.Normal()};
      cloud.points.push_back(std::move(point));
    }
  }
  return cloud;
}

void WriteTrajectoryHeader(std::ostream& out, std::size_t dim) {
  out << "iter,point_id,cluster";
  for (std::size_t k = 0; k < dim; ++k) out << ",x" << k;
  out << "\n";
}

void AppendTrajectoryRows(std::ostream& out, const PointCloud& cloud) {
  char buf[32];
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const SimPoint& p = cloud.points[i];
    out << cloud.iteration << ',' << i << ',' << p.cluster;
    for (double v : p.position) {
      std::snprintf(buf, sizeof(buf), ",%.12g", v);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace ane
