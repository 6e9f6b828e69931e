// acceptance_test.cpp
//
// Release gate: eleven end-to-end checks spanning the similarity
// calculus, the training gradients, cluster dynamics, isotropy trends,
// and the four application pipelines, each against an independent oracle
// (grid integration, finite differences, hand-computed values, or a
// published reference table). Prints one PASS/FAIL line per check and
// exits nonzero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ane/diagnostics.hpp"
#include "ane/encoder.hpp"
#include "ane/kernels.hpp"
#include "ane/lexicon.hpp"
#include "ane/lexicon_analysis.hpp"
#include "ane/rng.hpp"
#include "ane/search.hpp"
#include "ane/similarity.hpp"
#include "ane/simulator.hpp"
#include "ane/synthdata.hpp"
#include "ane/trainer.hpp"
#include "ane/types.hpp"

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string Fmt(double v, int precision = 4) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double Dist2(const ane::EmbeddingVec& a, const ane::EmbeddingVec& b) {
  return ane::kernels::SquaredDistance(a.data(), b.data(), a.size());
}

// ----------------------------------------------------------------------
// 1. Bhattacharyya bound dominates the Bayes-error grid oracle.

ane::GaussianSpec RandomGaussian(ane::Rng& rng, std::size_t dim) {
  ane::EmbeddingVec mean(dim);
  for (double& m : mean) m = rng.Uniform(-2.5, 2.5);
  if (dim == 1)
    return ane::GaussianSpec::Isotropic(mean, rng.Uniform(0.3, 2.5));
  // Random SPD covariance: rotation times positive eigenvalues.
  const double theta = rng.Uniform(0.0, 2.0 * 3.14159265358979323846);
  const double l1 = rng.Uniform(0.3, 2.5), l2 = rng.Uniform(0.3, 2.5);
  const double c = std::cos(theta), s = std::sin(theta);
  std::vector<double> cov = {c * c * l1 + s * s * l2, c * s * (l1 - l2),
                             c * s * (l1 - l2), s * s * l1 + c * c * l2};
  return ane::GaussianSpec::Full(mean, cov);
}

Outcome CheckBoundDominance() {
  Stopwatch timer;
  ane::Rng rng(0xb0551);
  double worst_gap = 1.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = trial < 100 ? 1 : 2;
    const ane::GaussianSpec g1 = RandomGaussian(rng, dim);
    const ane::GaussianSpec g2 = RandomGaussian(rng, dim);
    ane::GridConfig grid;
    grid.points_per_axis = dim == 1 ? 2000 : 800;
    const double bayes = ane::BayesErrorGrid(g1, g2, 0.5, 0.5, grid);
    const double bound = ane::BhattacharyyaGaussian(g1, g2);
    worst_gap = std::min(worst_gap, bound - bayes);
  }
  const double elapsed = timer.Seconds();
  return {worst_gap >= -1e-6 && elapsed < 30.0,
          "min(bound - oracle) " + Fmt(worst_gap) + " over 200 pairs, " +
              Fmt(elapsed, 3) + "s"};
}

// ----------------------------------------------------------------------
// 2. Closed-form consistency: the full-covariance similarity collapses
//    to the isotropic form at sigma^2*I, and the 1-D equal-variance
//    oracle matches the normal-CDF closed form.

Outcome CheckClosedForms() {
  ane::Rng rng(0xc105ed);
  double worst_iso = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 5);
    const double sigma2 = rng.Uniform(0.2, 3.0);
    ane::EmbeddingVec m1(dim), m2(dim);
    for (double& m : m1) m = rng.Uniform(-3.0, 3.0);
    for (double& m : m2) m = rng.Uniform(-3.0, 3.0);
    std::vector<double> cov(dim * dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) cov[k * dim + k] = sigma2;
    const double full = ane::BhattacharyyaGaussian(
        ane::GaussianSpec::Full(m1, cov), ane::GaussianSpec::Full(m2, cov));
    const double iso = ane::IsotropicSimilarity(m1, m2, std::sqrt(sigma2));
    worst_iso = std::max(worst_iso, std::fabs(full - iso));
  }

  double worst_cdf = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double sigma = rng.Uniform(0.4, 2.0);
    const ane::EmbeddingVec m1 = {rng.Uniform(-2.0, 2.0)};
    const ane::EmbeddingVec m2 = {rng.Uniform(-2.0, 2.0)};
    const double grid = ane::BayesErrorGrid(
        ane::GaussianSpec::Isotropic(m1, sigma * sigma),
        ane::GaussianSpec::Isotropic(m2, sigma * sigma));
    const double closed = NormalCdf(-std::fabs(m1[0] - m2[0]) / (2.0 * sigma));
    worst_cdf = std::max(worst_cdf, std::fabs(grid - closed));
  }
  return {worst_iso < 1e-10 && worst_cdf < 1e-4,
          "isotropic collapse max " + Fmt(worst_iso, 3) +
              ", 1-D CDF max " + Fmt(worst_cdf, 3)};
}

// ----------------------------------------------------------------------
// 3. Gradient fidelity against central finite differences: the pivot
//    KL loss, the cloud-loss split (attraction and repulsion terms,
//    each re-derived brute force, their sum against the loss), and full
//    encoder backprop.

double RelErr(const ane::EmbeddingVec& got, const ane::EmbeddingVec& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    num += (got[k] - want[k]) * (got[k] - want[k]);
    den += want[k] * want[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

double PivotLoss(const std::vector<double>& p,
                 const std::vector<ane::EmbeddingVec>& embeds) {
  const std::vector<double> q = ane::InducedQ(embeds, 0);
  return ane::MicrobatchLoss(p, {q.begin() + 1, q.end()});
}

double CheckPivotLossGradients(ane::Rng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 3 + static_cast<std::size_t>(rng.UniformInt(0, 4));
    const std::size_t dim = 2 + static_cast<std::size_t>(rng.UniformInt(0, 2));
    std::vector<ane::EmbeddingVec> embeds(m, ane::EmbeddingVec(dim));
    for (auto& e : embeds)
      for (double& x : e) x = 1.2 * rng.Normal();
    const std::size_t n0 = 1 + static_cast<std::size_t>(
                                   rng.UniformInt(0, static_cast<std::int64_t>(m) - 2));
    std::vector<double> p(m - 1, 0.0);
    for (std::size_t j = 0; j < n0; ++j) p[j] = 1.0 / static_cast<double>(n0);

    const auto grads = ane::LossGradientWrtEmbeddings(p, embeds);
    const double h = 1e-5;
    // One concatenated vector per instance so vanishing member
    // gradients cannot inflate the relative error with FD noise.
    ane::EmbeddingVec flat_got, flat_fd;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < dim; ++k) {
        auto hi = embeds, lo = embeds;
        hi[i][k] += h;
        lo[i][k] -= h;
        flat_fd.push_back((PivotLoss(p, hi) - PivotLoss(p, lo)) / (2.0 * h));
        flat_got.push_back(grads[i][k]);
      }
    }
    worst = std::max(worst, RelErr(flat_got, flat_fd));
  }
  return worst;
}

ane::PointCloud RandomCloud(ane::Rng& rng) {
  ane::PointCloud cloud;
  const std::size_t dim = 2 + static_cast<std::size_t>(rng.UniformInt(0, 1));
  for (int cluster = 0; cluster < 3; ++cluster) {
    const std::size_t size =
        2 + static_cast<std::size_t>(rng.UniformInt(0, 2));
    for (std::size_t s = 0; s < size; ++s) {
      ane::SimPoint point;
      point.cluster = cluster;
      point.position.resize(dim);
      for (double& x : point.position) x = 1.5 * rng.Normal();
      cloud.points.push_back(std::move(point));
    }
  }
  return cloud;
}

// Direct transcription of the printed split formulas, independent of the
// library implementation.
void BruteForceSplit(const ane::PointCloud& cloud, std::size_t i,
                     ane::EmbeddingVec* pos, ane::EmbeddingVec* neg) {
  const std::size_t n = cloud.points.size();
  const std::size_t dim = cloud.points[0].position.size();
  const auto q_of = [&](std::size_t a, std::size_t b) {
    double maxv = -1e300;
    for (std::size_t j = 0; j < n; ++j)
      if (j != a)
        maxv = std::max(
            maxv, -Dist2(cloud.points[a].position, cloud.points[j].position));
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != a)
        denom += std::exp(
            -Dist2(cloud.points[a].position, cloud.points[j].position) - maxv);
    return std::exp(-Dist2(cloud.points[a].position,
                           cloud.points[b].position) -
                    maxv) /
           denom;
  };
  std::size_t same = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != i && cloud.points[j].cluster == cloud.points[i].cluster) ++same;
  pos->assign(dim, 0.0);
  neg->assign(dim, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double qq = q_of(i, j) + q_of(j, i);
    for (std::size_t k = 0; k < dim; ++k) {
      const double diff =
          cloud.points[i].position[k] - cloud.points[j].position[k];
      if (cloud.points[j].cluster == cloud.points[i].cluster)
        (*pos)[k] += 2.0 * diff * (2.0 / static_cast<double>(same) - qq);
      else
        (*neg)[k] -= 2.0 * diff * qq;
    }
  }
}

void CheckCloudGradients(ane::Rng& rng, double* worst_split,
                         double* worst_fd) {
  *worst_split = 0.0;
  *worst_fd = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ane::PointCloud cloud = RandomCloud(rng);
    const std::size_t i = static_cast<std::size_t>(rng.UniformInt(
        0, static_cast<std::int64_t>(cloud.points.size()) - 1));
    const ane::EmbeddingVec pos = ane::PositiveGradient(cloud, i);
    const ane::EmbeddingVec neg = ane::NegativeGradient(cloud, i);
    ane::EmbeddingVec brute_pos, brute_neg;
    BruteForceSplit(cloud, i, &brute_pos, &brute_neg);
    *worst_split = std::max(*worst_split, RelErr(pos, brute_pos));
    *worst_split = std::max(*worst_split, RelErr(neg, brute_neg));

    const std::size_t dim = cloud.points[0].position.size();
    ane::EmbeddingVec total(dim), fd(dim);
    for (std::size_t k = 0; k < dim; ++k) total[k] = pos[k] + neg[k];
    const double h = 1e-5;
    for (std::size_t k = 0; k < dim; ++k) {
      ane::PointCloud hi = cloud, lo = cloud;
      hi.points[i].position[k] += h;
      lo.points[i].position[k] -= h;
      fd[k] = (ane::CloudLoss(hi) - ane::CloudLoss(lo)) / (2.0 * h);
    }
    *worst_fd = std::max(*worst_fd, RelErr(total, fd));
  }
}

double CheckEncoderBackprop(ane::Rng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const bool audio = trial % 2 == 0;
    const std::size_t width =
        2 + static_cast<std::size_t>(rng.UniformInt(0, 4));
    const std::size_t hidden =
        3 + static_cast<std::size_t>(rng.UniformInt(0, 7));
    const std::size_t embed =
        2 + static_cast<std::size_t>(rng.UniformInt(0, 4));
    const std::size_t steps =
        1 + static_cast<std::size_t>(rng.UniformInt(0, 8));
    ane::EncoderParams params = ane::InitEncoder(
        audio ? ane::EncoderKind::kAudio : ane::EncoderKind::kPhone, width,
        hidden, embed, rng);

    ane::Utterance utt;
    std::vector<ane::SymbolId> symbols;
    if (audio) {
      utt.frame_count = steps;
      utt.frame_dim = width;
      utt.frames.resize(steps * width);
      for (double& x : utt.frames) x = rng.Normal();
    } else {
      symbols.resize(steps);
      for (auto& s : symbols)
        s = static_cast<ane::SymbolId>(
            rng.UniformInt(0, static_cast<std::int64_t>(width) - 1));
    }
    ane::EmbeddingVec upstream(embed);
    for (double& u : upstream) u = rng.Normal();

    const auto scalar = [&](const ane::EncoderParams& theta) {
      const ane::EmbeddingVec f =
          audio ? ane::EncodeAudio(theta, utt)
                : ane::EncodeText(theta, std::span<const ane::SymbolId>(
                                             symbols.data(), symbols.size()));
      double phi = 0.0;
      for (std::size_t k = 0; k < embed; ++k) phi += upstream[k] * f[k];
      return phi;
    };

    ane::ForwardTape tape;
    if (audio)
      ane::EncodeAudio(params, utt, &tape);
    else
      ane::EncodeText(params,
                      std::span<const ane::SymbolId>(symbols.data(),
                                                     symbols.size()),
                      &tape);
    const std::vector<double> grad = ane::Backward(params, tape, upstream);

    const double h = 1e-5;
    ane::EmbeddingVec fd(params.Size()), got(params.Size());
    for (std::size_t k = 0; k < params.Size(); ++k) {
      ane::EncoderParams hi = params, lo = params;
      hi.theta[k] += h;
      lo.theta[k] -= h;
      fd[k] = (scalar(hi) - scalar(lo)) / (2.0 * h);
      got[k] = grad[k];
    }
    worst = std::max(worst, RelErr(got, fd));
  }
  return worst;
}

Outcome CheckGradientFidelity() {
  ane::Rng rng(0x9ead);
  const double worst_pivot = CheckPivotLossGradients(rng);
  double worst_split = 0.0, worst_cloud_fd = 0.0;
  CheckCloudGradients(rng, &worst_split, &worst_cloud_fd);
  const double worst_encoder = CheckEncoderBackprop(rng);
  const bool pass = worst_pivot < 1e-4 && worst_split < 1e-10 &&
                    worst_cloud_fd < 1e-4 && worst_encoder < 1e-4;
  return {pass, "rel err: pivot " + Fmt(worst_pivot, 3) + ", split terms " +
                    Fmt(worst_split, 3) + ", cloud FD " +
                    Fmt(worst_cloud_fd, 3) + ", encoder " +
                    Fmt(worst_encoder, 3) + ", 50 instances each"};
}

// ----------------------------------------------------------------------
// 4. The ten-utterance reference corpus: worked probability rows
//    reproduce exactly and singleton-label utterances never pivot.

ane::Utterance FixtureUtt(std::vector<ane::SymbolId> phones) {
  ane::Utterance u;
  u.frame_count = 1;
  u.frame_dim = 2;
  u.frames = {0.5, 0.5};
  u.phones.symbols = std::move(phones);
  u.graphemes.symbols = {0};
  return u;
}

Outcome CheckReferenceFixture() {
  // abet, crab x3, fact, sack (two stress variants), wait, weight, zebra.
  std::vector<ane::Utterance> corpus;
  corpus.push_back(FixtureUtt({0, 1, 2, 3}));
  corpus.push_back(FixtureUtt({4, 5, 6, 1}));
  corpus.push_back(FixtureUtt({4, 5, 6, 1}));
  corpus.push_back(FixtureUtt({4, 5, 6, 1}));
  corpus.push_back(FixtureUtt({7, 6, 4, 3}));
  corpus.push_back(FixtureUtt({8, 9, 4}));
  corpus.push_back(FixtureUtt({8, 6, 4}));
  corpus.push_back(FixtureUtt({10, 11, 3}));
  corpus.push_back(FixtureUtt({10, 11, 3}));
  corpus.push_back(FixtureUtt({12, 13, 1, 5, 0}));

  const bool rows_ok =
      ane::MicrobatchProbabilities(corpus, 1, {2, 4, 7}) ==
          std::vector<double>{1.0, 0.0, 0.0} &&
      ane::MicrobatchProbabilities(corpus, 7, {8, 1, 2}) ==
          std::vector<double>{1.0, 0.0, 0.0} &&
      ane::MicrobatchProbabilities(corpus, 2, {1, 3, 6}) ==
          std::vector<double>{0.5, 0.5, 0.0};

  const std::set<std::size_t> forbidden = {0, 4, 5, 6, 9};
  std::set<std::size_t> seen;
  ane::Rng rng(0xf1c);
  bool pivots_ok = true;
  for (int draw = 0; draw < 10000; ++draw) {
    const ane::Microbatch batch = ane::BuildMicrobatch(corpus, rng, 4);
    if (forbidden.count(batch.pivot) > 0) pivots_ok = false;
    seen.insert(batch.pivot);
  }
  const bool coverage_ok = seen == std::set<std::size_t>{1, 2, 3, 7, 8};
  return {rows_ok && pivots_ok && coverage_ok,
          std::string("worked rows ") + (rows_ok ? "exact" : "WRONG") +
              ", forbidden pivots " + (pivots_ok ? "never drawn" : "DRAWN") +
              " in 10k draws"};
}

// ----------------------------------------------------------------------
// 5. Sphere formation: the elongated two-cluster cloud rounds into
//    same-size spheres under the split-gradient dynamics.

Outcome CheckSphereFormation() {
  Stopwatch timer;
  ane::Rng rng(0x5e1f);
  ane::PointCloud cloud = ane::MakeTwoClusterCloud(rng);
  for (int it = 0; it < 200; ++it) cloud = ane::Step(cloud, 0.1, true);

  double cond[2] = {0.0, 0.0}, radius[2] = {0.0, 0.0};
  for (int cluster = 0; cluster < 2; ++cluster) {
    std::vector<const ane::SimPoint*> members;
    for (const ane::SimPoint& p : cloud.points)
      if (p.cluster == cluster) members.push_back(&p);
    double mx = 0.0, my = 0.0;
    for (const auto* p : members) {
      mx += p->position[0];
      my += p->position[1];
    }
    mx /= static_cast<double>(members.size());
    my /= static_cast<double>(members.size());
    double a = 0.0, b = 0.0, c = 0.0, r2 = 0.0;
    for (const auto* p : members) {
      const double dx = p->position[0] - mx, dy = p->position[1] - my;
      a += dx * dx;
      b += dx * dy;
      c += dy * dy;
      r2 += dx * dx + dy * dy;
    }
    const double n = static_cast<double>(members.size());
    a /= n;
    b /= n;
    c /= n;
    const double mid = 0.5 * (a + c);
    const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    cond[cluster] = (mid + disc) / (mid - disc);
    radius[cluster] = std::sqrt(r2 / n);
  }
  const double ratio = radius[0] / radius[1];
  const double elapsed = timer.Seconds();
  const bool pass = cond[0] < 1.5 && cond[1] < 1.5 && ratio >= 0.8 &&
                    ratio <= 1.25 && elapsed < 60.0;
  return {pass, "condition numbers " + Fmt(cond[0]) + "/" + Fmt(cond[1]) +
                    ", radius ratio " + Fmt(ratio) + ", " + Fmt(elapsed, 3) +
                    "s"};
}

// ----------------------------------------------------------------------
// Shared trained state for checks 6-8: a 50-word corpus at default
// noise, its audio encoder (with first/final isotropy stats), and a
// phone text encoder.

struct TrainedStack {
  ane::Lexicon lexicon;
  std::vector<ane::Utterance> corpus;
  ane::EncoderParams audio;
  ane::EncoderParams text;
  double iso_first = 0.0, iso_final = 0.0;
  double ratio_a_first = 0.0, ratio_a_final = 0.0;
  double ratio_b_first = 0.0, ratio_b_final = 0.0;
};

std::vector<std::pair<std::string, ane::EmbeddingVec>> WordEmbeddings(
    const std::vector<ane::Utterance>& corpus,
    const ane::EncoderParams& audio) {
  std::vector<std::pair<std::string, ane::EmbeddingVec>> labeled;
  labeled.reserve(corpus.size());
  for (const ane::Utterance& utt : corpus)
    labeled.emplace_back(utt.word, ane::EncodeAudio(audio, utt));
  return labeled;
}

TrainedStack TrainDefaultStack() {
  ane::SynthConfig sc;
  sc.word_count = 50;
  sc.samples_per_word = 20;
  sc.seed = 101;
  ane::SynthCorpus synth = ane::GenerateCorpus(sc);

  TrainedStack stack;
  stack.lexicon = std::move(synth.lexicon);
  stack.corpus = std::move(synth.utterances);

  ane::TrainConfig tc;
  tc.optimizer = ane::OptimizerKind::kAdam;
  tc.learning_rate = 0.002;
  tc.max_epochs = 800;
  tc.patience = 800;
  tc.hidden = 32;
  tc.embed_dim = 8;
  tc.seed = 7;
  bool first = true;
  tc.epoch_hook = [&stack, &first](std::size_t,
                                   const ane::EncoderParams& params) {
    const auto labeled = WordEmbeddings(stack.corpus, params);
    const double iso = ane::MeanClusterIsoScore(labeled);
    const ane::ClusterStatsResult stats = ane::ComputeClusterStats(labeled);
    const auto [ratio_a, ratio_b] = ane::UniformityRatios(stats.clusters);
    if (first) {
      stack.iso_first = iso;
      stack.ratio_a_first = ratio_a;
      stack.ratio_b_first = ratio_b;
      first = false;
    }
    stack.iso_final = iso;
    stack.ratio_a_final = ratio_a;
    stack.ratio_b_final = ratio_b;
  };
  stack.audio = ane::TrainAudioEncoder(stack.corpus, tc).params;

  ane::TrainConfig text_tc;
  text_tc.optimizer = ane::OptimizerKind::kAdam;
  text_tc.learning_rate = 0.005;
  text_tc.max_epochs = 1500;
  text_tc.patience = 1500;
  text_tc.hidden = 48;
  text_tc.embed_dim = 8;
  text_tc.seed = 8;
  stack.text = ane::TrainTextEncoder(stack.corpus, stack.audio,
                                     ane::EncoderKind::kPhone,
                                     sc.phone_count, text_tc)
                   .params;
  return stack;
}

// A smaller, longer-trained stack for the text-to-mean bound: fewer words
// leave the text encoder enough capacity to interpolate every cluster mean.
TrainedStack TrainConvergenceStack() {
  ane::SynthConfig sc;
  sc.word_count = 16;
  sc.samples_per_word = 25;
  sc.seed = 101;
  ane::SynthCorpus synth = ane::GenerateCorpus(sc);

  TrainedStack stack;
  stack.lexicon = std::move(synth.lexicon);
  stack.corpus = std::move(synth.utterances);

  ane::TrainConfig tc;
  tc.optimizer = ane::OptimizerKind::kAdam;
  tc.learning_rate = 0.002;
  tc.max_epochs = 400;
  tc.patience = 400;
  tc.hidden = 32;
  tc.embed_dim = 8;
  tc.seed = 7;
  stack.audio = ane::TrainAudioEncoder(stack.corpus, tc).params;

  ane::TrainConfig text_tc;
  text_tc.optimizer = ane::OptimizerKind::kAdam;
  text_tc.learning_rate = 0.001;
  text_tc.max_epochs = 8000;
  text_tc.patience = 8000;
  text_tc.hidden = 96;
  text_tc.embed_dim = 8;
  text_tc.seed = 8;
  stack.text = ane::TrainTextEncoder(stack.corpus, stack.audio,
                                     ane::EncoderKind::kPhone,
                                     sc.phone_count, text_tc)
                   .params;
  return stack;
}

// 6. Isotropy trend over training.
Outcome CheckIsotropyTrend(const TrainedStack& stack) {
  const bool pass = stack.iso_final > stack.iso_first &&
                    stack.ratio_a_final < stack.ratio_a_first;
  return {pass, "isoscore " + Fmt(stack.iso_first) + " -> " +
                    Fmt(stack.iso_final) + ", ratio_a " +
                    Fmt(stack.ratio_a_first) + " -> " +
                    Fmt(stack.ratio_a_final) + ", ratio_b " +
                    Fmt(stack.ratio_b_first) + " -> " +
                    Fmt(stack.ratio_b_final) + " (recorded)"};
}

// 7. Text embeddings land on the audio cluster means.
Outcome CheckTextMeanConvergence(const TrainedStack& stack) {
  std::unordered_map<std::string, std::pair<ane::EmbeddingVec, std::size_t>>
      sums;
  for (const ane::Utterance& utt : stack.corpus) {
    auto& slot = sums[utt.word];
    const ane::EmbeddingVec f = ane::EncodeAudio(stack.audio, utt);
    if (slot.second == 0) slot.first.assign(f.size(), 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) slot.first[k] += f[k];
    ++slot.second;
  }
  std::unordered_map<std::string, ane::EmbeddingVec> means;
  for (auto& [word, slot] : sums) {
    ane::EmbeddingVec mean = slot.first;
    for (double& x : mean) x /= static_cast<double>(slot.second);
    means.emplace(word, std::move(mean));
  }
  double radius_sum = 0.0;
  std::unordered_map<std::string, std::pair<double, std::size_t>> spread;
  for (const ane::Utterance& utt : stack.corpus) {
    const ane::EmbeddingVec f = ane::EncodeAudio(stack.audio, utt);
    auto& s = spread[utt.word];
    s.first += std::sqrt(Dist2(f, means.at(utt.word)));
    ++s.second;
  }
  for (const auto& [word, s] : spread)
    radius_sum += s.first / static_cast<double>(s.second);
  const double mean_radius = radius_sum / static_cast<double>(spread.size());

  std::size_t within = 0;
  for (const ane::LexiconEntry& entry : stack.lexicon.Entries()) {
    const ane::EmbeddingVec g = ane::EncodeText(stack.text, entry.phones);
    if (std::sqrt(Dist2(g, means.at(entry.word))) < 0.1 * mean_radius)
      ++within;
  }
  return {within >= 10, Fmt(static_cast<double>(within), 3) + "/" +
                            std::to_string(stack.lexicon.Size()) +
                            " clusters within 0.1x mean radius " +
                            Fmt(mean_radius)};
}

// 8. Classification accuracy at default noise, then the vocabulary-size
//    trend on confusable entries.

double AccuracyOn(const std::vector<ane::Utterance>& corpus,
                  const ane::Lexicon& lexicon,
                  const ane::EncoderParams& audio,
                  const ane::EncoderParams& text, std::size_t vocab_limit) {
  ane::EmbeddingIndex index;
  std::unordered_set<std::string> vocab_words;
  for (std::size_t e = 0; e < vocab_limit; ++e) {
    const ane::LexiconEntry& entry = lexicon.Entries()[e];
    index.push_back({ane::PronunciationString(entry.phones, lexicon.Phones()),
                     ane::EncodeText(text, entry.phones)});
    vocab_words.insert(entry.word);
  }
  std::vector<std::pair<ane::Utterance, std::string>> tests;
  for (const ane::Utterance& utt : corpus)
    if (vocab_words.count(utt.word) > 0) tests.emplace_back(utt, utt.word);
  return ane::EvaluateClassification(tests, audio, index,
                                     ane::MatchMode::kPronunciation, lexicon);
}

struct ConfusableStack {
  ane::Lexicon lexicon;
  std::vector<ane::Utterance> corpus;
  ane::EncoderParams audio;
  ane::EncoderParams text;
};

ConfusableStack TrainConfusableStack() {
  ane::SynthConfig sc;
  sc.samples_per_word = 6;
  sc.seed = 202;
  ConfusableStack stack;
  stack.lexicon = ane::ConfusablePairVocabulary(sc, 250);
  stack.corpus = ane::RenderCorpus(sc, stack.lexicon);

  ane::TrainConfig tc;
  tc.optimizer = ane::OptimizerKind::kAdam;
  tc.learning_rate = 0.002;
  tc.max_epochs = 600;
  tc.patience = 600;
  tc.hidden = 32;
  tc.embed_dim = 8;
  tc.seed = 17;
  stack.audio = ane::TrainAudioEncoder(stack.corpus, tc).params;

  ane::TrainConfig text_tc = tc;
  text_tc.hidden = 64;
  text_tc.max_epochs = 2000;
  text_tc.patience = 2000;
  text_tc.seed = 18;
  stack.text = ane::TrainTextEncoder(stack.corpus, stack.audio,
                                     ane::EncoderKind::kPhone, sc.phone_count,
                                     text_tc)
                   .params;
  return stack;
}

// The recovery experiment needs sparse one-edit neighborhoods: with the
// default 8-phone inventory most variants sit one edit from several
// in-vocabulary words, so no recovery method can reach 50%. A 20-phone
// inventory with slightly longer words keeps pairs confusable while making
// the paired base the unique one-edit neighbor for 99 of 100 variants.
ConfusableStack TrainOovStack() {
  ane::SynthConfig sc;
  sc.phone_count = 20;
  sc.min_word_length = 3;
  sc.max_word_length = 6;
  sc.samples_per_word = 10;
  sc.seed = 202;
  ConfusableStack stack;
  stack.lexicon = ane::ConfusablePairVocabulary(sc, 100);
  stack.corpus = ane::RenderCorpus(sc, stack.lexicon);

  ane::TrainConfig tc;
  tc.optimizer = ane::OptimizerKind::kAdam;
  tc.learning_rate = 0.002;
  tc.max_epochs = 800;
  tc.patience = 800;
  tc.hidden = 32;
  tc.embed_dim = 16;
  tc.seed = 17;
  stack.audio = ane::TrainAudioEncoder(stack.corpus, tc).params;

  ane::TrainConfig text_tc = tc;
  text_tc.hidden = 64;
  text_tc.max_epochs = 3000;
  text_tc.patience = 3000;
  text_tc.seed = 18;
  stack.text = ane::TrainTextEncoder(stack.corpus, stack.audio,
                                     ane::EncoderKind::kPhone, sc.phone_count,
                                     text_tc)
                   .params;
  return stack;
}

Outcome CheckClassification(const TrainedStack& stack,
                            const ConfusableStack& confusable) {
  const double base_acc =
      AccuracyOn(stack.corpus, stack.lexicon, stack.audio, stack.text,
                 stack.lexicon.Size());
  const double acc125 = AccuracyOn(confusable.corpus, confusable.lexicon,
                                   confusable.audio, confusable.text, 125);
  const double acc250 = AccuracyOn(confusable.corpus, confusable.lexicon,
                                   confusable.audio, confusable.text, 250);
  const double acc500 = AccuracyOn(confusable.corpus, confusable.lexicon,
                                   confusable.audio, confusable.text, 500);
  const bool monotone =
      acc125 >= acc250 - 1e-12 && acc250 >= acc500 - 1e-12;
  return {base_acc >= 0.90 && monotone,
          "50-word accuracy " + Fmt(base_acc) + "; confusable vocab " +
              Fmt(acc125) + " (125) >= " + Fmt(acc250) + " (250) >= " +
              Fmt(acc500) + " (500)"};
}

// 9. OOV recovery on 100 one-edit pairs: embedding and edit-distance
//    recovery agree within 5 points and both beat 50%.
Outcome CheckOovRecovery(const ConfusableStack& stack) {
  const double sigma =
      ane::ComputeClusterStats(WordEmbeddings(stack.corpus, stack.audio))
          .global_sigma;

  ane::EmbeddingIndex in_vocab;
  std::unordered_map<std::string, const ane::PhoneSeq*> base_pron;
  std::vector<ane::OovCandidate> candidates;
  std::unordered_set<std::string> oov_words;
  for (std::size_t e = 0; e < 200; ++e) {
    const ane::LexiconEntry& entry = stack.lexicon.Entries()[e];
    if (e % 2 == 0) {
      in_vocab.push_back(
          {entry.word, ane::EncodeText(stack.text, entry.phones)});
      base_pron.emplace(entry.word, &entry.phones);
    } else {
      candidates.push_back({entry.word, entry.phones});
      oov_words.insert(entry.word);
    }
  }
  std::vector<ane::EmbeddingVec> phone_table(stack.lexicon.Phones().Size());
  for (std::size_t p = 0; p < phone_table.size(); ++p) {
    ane::PhoneSeq one;
    one.symbols = {static_cast<ane::SymbolId>(p)};
    phone_table[p] = ane::EncodeText(stack.text, one);
  }
  const ane::CostMatrix costs = ane::SubstitutionCosts(phone_table, sigma);

  std::size_t total = 0, embed_got = 0, edit_got = 0;
  for (const ane::Utterance& utt : stack.corpus) {
    if (oov_words.count(utt.word) == 0) continue;
    ++total;
    const ane::EmbeddingVec f = ane::EncodeAudio(stack.audio, utt);
    const ane::PhoneSeq& asr =
        *base_pron.at(ane::Classify(f, in_vocab).label);
    if (ane::OovRecover(asr, candidates, ane::RecoveryMethod::kEmbed,
                        stack.text, costs) == utt.word)
      ++embed_got;
    if (ane::OovRecover(asr, candidates, ane::RecoveryMethod::kEdit,
                        stack.text, costs) == utt.word)
      ++edit_got;
  }
  const double embed_rate =
      static_cast<double>(embed_got) / static_cast<double>(total);
  const double edit_rate =
      static_cast<double>(edit_got) / static_cast<double>(total);
  const bool pass = embed_rate > 0.5 && edit_rate > 0.5 &&
                    std::fabs(embed_rate - edit_rate) <= 0.05;
  return {pass, "embed " + Fmt(embed_rate) + ", edit " + Fmt(edit_rate) +
                    " over " + std::to_string(total) +
                    " utterances of 100 held-out variants"};
}

// ----------------------------------------------------------------------
// 10. Tree recovery: exact topology on random additive trees and the
//     longest-terminal-branch property on the published dialect table.

std::set<std::vector<std::size_t>> Bipartitions(const ane::AdditiveTree& t) {
  const std::size_t n = t.leaf_labels.size();
  std::set<std::vector<std::size_t>> splits;
  for (std::size_t cut = 0; cut < t.edges.size(); ++cut) {
    std::vector<bool> seen(t.node_count, false);
    std::vector<std::size_t> stack = {t.edges[cut].a};
    seen[t.edges[cut].a] = true;
    while (!stack.empty()) {
      const std::size_t at = stack.back();
      stack.pop_back();
      for (std::size_t e = 0; e < t.edges.size(); ++e) {
        if (e == cut) continue;
        std::size_t next;
        if (t.edges[e].a == at)
          next = t.edges[e].b;
        else if (t.edges[e].b == at)
          next = t.edges[e].a;
        else
          continue;
        if (!seen[next]) {
          seen[next] = true;
          stack.push_back(next);
        }
      }
    }
    std::vector<std::size_t> side;
    for (std::size_t leaf = 0; leaf < n; ++leaf)
      if (seen[leaf]) side.push_back(leaf);
    if (side.size() < 2 || side.size() > n - 2) continue;
    if (std::find(side.begin(), side.end(), std::size_t{0}) != side.end()) {
      std::vector<std::size_t> other;
      for (std::size_t leaf = 0; leaf < n; ++leaf)
        if (!seen[leaf]) other.push_back(leaf);
      side = other;
    }
    splits.insert(side);
  }
  return splits;
}

ane::AdditiveTree RandomTree(ane::Rng& rng, std::size_t leaves) {
  ane::AdditiveTree t;
  for (std::size_t i = 0; i < leaves; ++i)
    t.leaf_labels.push_back("L" + std::to_string(i));
  t.node_count = leaves + 1;
  const std::size_t hub = leaves;
  const auto len = [&rng]() { return rng.Uniform(0.2, 1.5); };
  t.edges.push_back({0, hub, len()});
  t.edges.push_back({1, hub, len()});
  t.edges.push_back({2, hub, len()});
  for (std::size_t leaf = 3; leaf < leaves; ++leaf) {
    auto& split = t.edges[static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<std::int64_t>(t.edges.size()) - 1))];
    const std::size_t mid = t.node_count++;
    const std::size_t far = split.b;
    split.b = mid;
    t.edges.push_back({mid, far, len()});
    t.edges.push_back({leaf, mid, len()});
  }
  return t;
}

ane::DissimilarityMatrix MatrixFromTree(const ane::AdditiveTree& t) {
  ane::DissimilarityMatrix m;
  m.labels = t.leaf_labels;
  const std::size_t n = m.labels.size();
  m.d.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      m.d[i * n + j] = t.PathDistance(i, j);
      m.d[j * n + i] = m.d[i * n + j];
    }
  return m;
}

// Lower-triangular rows of the published 6-dialect table.
ane::DissimilarityMatrix PublishedDialectMatrix() {
  ane::DissimilarityMatrix m;
  m.labels = {"dr1", "dr2", "dr3", "dr4", "dr5", "dr7"};
  const double lower[5][5] = {
      {0.61572, 0, 0, 0, 0},
      {0.58936, 0.13495, 0, 0, 0},
      {0.65666, 0.33050, 0.26793, 0, 0},
      {0.60411, 0.37564, 0.34027, 0.18538, 0},
      {0.63036, 0.14484, 0.10431, 0.30236, 0.36269}};
  m.d.assign(36, 0.0);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c <= r; ++c) {
      m.d[(r + 1) * 6 + c] = lower[r][c];
      m.d[c * 6 + (r + 1)] = lower[r][c];
    }
  return m;
}

Outcome CheckTreeRecovery() {
  ane::Rng rng(0x7ee);
  std::size_t recovered = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const ane::AdditiveTree truth = RandomTree(rng, 6);
    const ane::TreeFit fit = ane::FitAdditiveTree(MatrixFromTree(truth));
    if (Bipartitions(fit.tree) == Bipartitions(truth)) ++recovered;
  }

  const ane::TreeFit fit = ane::FitAdditiveTree(PublishedDialectMatrix());
  std::size_t longest = 0;
  for (std::size_t leaf = 1; leaf < 6; ++leaf)
    if (fit.tree.TerminalBranch(leaf) > fit.tree.TerminalBranch(longest))
      longest = leaf;
  const bool dr1_longest = fit.tree.leaf_labels[longest] == "dr1";
  return {recovered == 20 && dr1_longest,
          std::to_string(recovered) +
              "/20 topologies exact; published table longest terminal = " +
              fit.tree.leaf_labels[longest]};
}

// ----------------------------------------------------------------------
// 11. Wake-word confusion: the alpha=1 identity, a hand-computed 2-word
//     ordering, and a NaN-free sweep.

Outcome CheckWakeword() {
  ane::Rng rng(0xa1fa);
  const double sigma = 0.8;

  ane::EmbeddingIndex vocab;
  ane::UnigramLM lm;
  const std::vector<double> probs = {0.4, 0.3, 0.15, 0.1, 0.05};
  for (std::size_t w = 0; w < probs.size(); ++w) {
    ane::EmbeddingVec g(4);
    for (double& x : g) x = rng.Normal();
    vocab.push_back({"w" + std::to_string(w), g});
    lm.Add("w" + std::to_string(w), probs[w]);
  }
  lm.Finalize();

  double worst_identity = 0.0;
  for (std::size_t t = 0; t < probs.size(); ++t) {
    const double got =
        ane::WakewordConfusion("w" + std::to_string(t), vocab, lm, sigma, 1.0);
    const double want = std::log(1.0 - probs[t]);
    worst_identity = std::max(worst_identity, std::fabs(got - want));
  }

  // Two-word LM: one competitor, so the log expected confusion is the
  // single term (alpha-1)(d^2/(8 sigma^2) + log 2) + alpha log P(other).
  ane::EmbeddingIndex two;
  ane::UnigramLM two_lm;
  two.push_back({"kitt", {0.3, -0.2, 1.1}});
  two.push_back({"mitt", {-0.5, 0.4, 0.9}});
  two_lm.Add("kitt", 0.55);
  two_lm.Add("mitt", 0.45);
  two_lm.Finalize();
  const double alpha = 0.9;
  const double d2 = Dist2(two[0].vec, two[1].vec);
  const double hand = (alpha - 1.0) * (d2 / (8.0 * sigma * sigma) +
                                       std::log(2.0)) +
                      alpha * std::log(0.45);
  const double got2 =
      ane::WakewordConfusion("kitt", two, two_lm, sigma, alpha);
  const double hand_err = std::fabs(got2 - hand);

  bool sweep_finite = true;
  for (int s = 0; s <= 10; ++s) {
    const double a = 0.85 + 0.01 * s;
    for (std::size_t t = 0; t < probs.size(); ++t)
      if (!std::isfinite(ane::WakewordConfusion("w" + std::to_string(t),
                                                vocab, lm, sigma, a)))
        sweep_finite = false;
  }
  const bool pass =
      worst_identity < 1e-12 && hand_err < 1e-12 && sweep_finite;
  return {pass, "alpha=1 identity err " + Fmt(worst_identity, 3) +
                    ", 2-word hand err " + Fmt(hand_err, 3) + ", sweep " +
                    (sweep_finite ? "finite" : "NOT FINITE")};
}

void Report(int id, const std::string& name, const Outcome& outcome,
            int* failures) {
  std::cout << "[" << std::setw(2) << id << "] "
            << (outcome.pass ? "PASS" : "FAIL") << " " << name << " ("
            << outcome.detail << ")\n"
            << std::flush;
  if (!outcome.pass) ++*failures;
}

}  // namespace

int main() {
  int failures = 0;
  Report(1, "bhattacharyya bound dominates the bayes-error oracle",
         CheckBoundDominance(), &failures);
  Report(2, "closed forms agree with the oracle and each other",
         CheckClosedForms(), &failures);
  Report(3, "analytic gradients match finite differences",
         CheckGradientFidelity(), &failures);
  Report(4, "reference corpus rows and pivot eligibility",
         CheckReferenceFixture(), &failures);
  Report(5, "elongated clusters round into same-size spheres",
         CheckSphereFormation(), &failures);

  const TrainedStack stack = TrainDefaultStack();
  Report(6, "cluster isotropy rises and spread uniformity tightens",
         CheckIsotropyTrend(stack), &failures);
  const TrainedStack convergence = TrainConvergenceStack();
  Report(7, "text embeddings converge to audio cluster means",
         CheckTextMeanConvergence(convergence), &failures);

  const ConfusableStack confusable = TrainConfusableStack();
  Report(8, "classification accuracy and vocabulary-size trend",
         CheckClassification(stack, confusable), &failures);
  const ConfusableStack oov = TrainOovStack();
  Report(9, "oov recovery via embeddings matches edit distance",
         CheckOovRecovery(oov), &failures);

  Report(10, "neighbor joining recovers additive trees and the dialect table",
         CheckTreeRecovery(), &failures);
  Report(11, "wake-word confusion identities and sweep", CheckWakeword(),
         &failures);

  if (failures > 0) {
    std::cout << failures << " check(s) failed\n";
    return 1;
  }
  std::cout << "all checks passed\n";
  return 0;
}
