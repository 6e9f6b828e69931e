// ane/simulator.hpp
//
// Free-embedding gradient dynamics: evolve raw labeled points (no
// encoder) under the split positive/negative gradient of the neighbor
// KL loss, with every point acting as a pivot over the full cloud.

#ifndef ANE_SIMULATOR_HPP
#define ANE_SIMULATOR_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ane/rng.hpp"
#include "ane/types.hpp"

namespace ane {

struct SimPoint {
  EmbeddingVec position;
  int cluster = 0;
};

struct PointCloud {
  std::vector<SimPoint> points;
  std::size_t iteration = 0;

  std::size_t Dim() const;
  // Throws unless points are nonempty with uniform, finite dimensions.
  void Validate() const;
};

// q[j] = exp(-||f_i - f_j||^2) normalized over all j != i (max-subtracted
// softmax); q[i] = 0. This is the induced neighbor distribution with the
// whole cloud as the pivot's batch.
std::vector<double> NeighborProbabilities(const PointCloud& cloud,
                                          std::size_t i);

// Attraction term of the loss gradient at point i, summed over the
// points sharing i's cluster:
//   2 sum_j (f_i - f_j) (2/c_i - q_ij - q_ji),  c_i = |cluster(i)| - 1.
// A singleton cluster yields the zero vector plus a warning.
EmbeddingVec PositiveGradient(const PointCloud& cloud, std::size_t i,
                              std::vector<std::string>* warnings = nullptr);

// Repulsion term, summed over points in other clusters:
//   -2 sum_j (f_i - f_j) (q_ij + q_ji).
EmbeddingVec NegativeGradient(const PointCloud& cloud, std::size_t i);

// Total KL loss with every point as pivot: sum_i sum_{j in cluster(i)\{i}}
// (1/c_i) log((1/c_i) / q_ij). Its exact gradient at point i is
// PositiveGradient + NegativeGradient.
double CloudLoss(const PointCloud& cloud);

// One synchronous gradient-descent step: every point moves by
// -gamma * gradient evaluated on the pre-step snapshot; the iteration
// counter advances. Requires gamma > 0 unless gamma == 0 (identity).
PointCloud Step(const PointCloud& cloud, double gamma, bool include_negative,
                std::vector<std::string>* warnings = nullptr);

// Two 100-point 2-D Gaussian clusters with 5:1 axis ratios at
// perpendicular orientations and different sizes, the configuration used
// to demonstrate sphere formation.
PointCloud MakeTwoClusterCloud(Rng& rng);

// Trajectory CSV: header iter,point_id,cluster,x0,x1,... then one row per
// point per recorded iteration.
void WriteTrajectoryHeader(std::ostream& out, std::size_t dim);
void AppendTrajectoryRows(std::ostream& out, const PointCloud& cloud);

}  // namespace ane

#endif  // ANE_SIMULATOR_HPP
