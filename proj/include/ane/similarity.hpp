// ane/similarity.hpp
//
// Phonetic-similarity calculus over Gaussian word clusters: the Bayes-error
// overlap integral (brute-force grid oracle, 1-D/2-D), the pair-counting
// definition on quantized samples, the Bhattacharyya closed form, its
// isotropic simplification, and the Gaussian acoustic log-likelihood.

#ifndef ANE_SIMILARITY_HPP
#define ANE_SIMILARITY_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ane/types.hpp"

namespace ane {

// Trapezoidal-quadrature settings for the Bayes-error oracle. The grid
// spans [min(means) - sigma_span*sigma_max, max(means) + sigma_span*sigma_max]
// on each axis.
struct GridConfig {
  std::size_t points_per_axis = 2000;
  double sigma_span = 8.0;
};

// Overlap integral  ∫ min(p1*N(x;g1), p2*N(x;g2)) dx  for 1-D and 2-D
// Gaussians. This is the similarity oracle every closed form is checked
// against; value lies in [0, min(p1, p2)].
double BayesErrorGrid(const GaussianSpec &g1, const GaussianSpec &g2,
                      double prior1 = 0.5, double prior2 = 0.5,
                      const GridConfig &grid = {});

// Pair-counting similarity p/(n+m) over two multisets of grid-quantized
// points: p sums min(count1, count2) per occupied cell. Result in [0, 0.5].
double PairCountingSimilarity(const std::vector<std::vector<std::int64_t>> &samples1,
                              const std::vector<std::vector<std::int64_t>> &samples2);

// Quantizes a real point onto a grid with the given cell size (floor).
std::vector<std::int64_t> QuantizePoint(std::span<const double> point, double cell);

// Closed-form Bhattacharyya-bound similarity for full-covariance Gaussians,
// generalized to priors:
//   sqrt(p1*p2) * exp(-1/8 dm^T Cbar^-1 dm - 1/2 ln(|Cbar| / sqrt(|C1||C2|)))
// with Cbar = (C1+C2)/2. Equal priors give the familiar 1/2*exp(...) form.
double BhattacharyyaGaussian(const GaussianSpec &g1, const GaussianSpec &g2,
                             double prior1 = 0.5, double prior2 = 0.5);

// Isotropic special case: 1/2 * exp(-||m1-m2||^2 / (8 sigma^2)).
double IsotropicSimilarity(const EmbeddingVec &m1, const EmbeddingVec &m2,
                           double sigma);

// Gaussian acoustic log-likelihood of an audio embedding given a word's
// text embedding: -d*log(sqrt(2*pi)*sigma) - ||f-g||^2 / (2 sigma^2).
double AcousticLogLikelihood(const EmbeddingVec &f, const EmbeddingVec &g,
                             double sigma);

}  // namespace ane

#endif  // ANE_SIMILARITY_HPP
