// trainer.cpp
//
// The audio objective is KL(p || q) restricted to pivot pairs: with
// d_j = ||f_0 - f_j||^2 and q_j = softmax_j(-d_j),
//   L = sum_j p_j d_j + log sum_j exp(-d_j) + const, so
//   dL/df_0 = 2 sum_j (p_j - q_j)(f_0 - f_j)
//   dL/df_j = -2 (p_j - q_j)(f_0 - f_j).
// Note that with a single member q = (1) identically and the gradient
// vanishes; attraction toward same-label members needs M >= 3.

#include "ane/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ane/kernels.hpp"

namespace ane {
namespace {

namespace nk = ane::kernels;

const std::vector<SymbolId> &LabelOf(const Utterance &utt, bool grapheme_labels) {
  return grapheme_labels ? utt.graphemes.symbols : utt.phones.symbols;
}

// Adam state; plain SGD when config asks for it.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, std::size_t dim)
      : kind_(kind), lr_(lr) {
    if (kind_ == OptimizerKind::kAdam) {
      m_.assign(dim, 0.0);
      v_.assign(dim, 0.0);
    }
  }

  void Step(std::vector<double> &theta, const std::vector<double> &grad) {
    if (kind_ == OptimizerKind::kSgd) {
      nk::Axpy(-lr_, grad.data(), theta.data(), theta.size());
      return;
    }
    ++t_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      theta[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps);
    }
  }

 private:
  OptimizerKind kind_;
  double lr_;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

// Label-stratified split; a label's utterances stay in training when
// removing any would leave fewer than two (the pivot requirement).
void SplitCv(const std::vector<Utterance> &corpus, const TrainConfig &config,
             std::vector<std::size_t> *train, std::vector<std::size_t> *cv) {
  std::map<std::vector<SymbolId>, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    by_label[LabelOf(corpus[i], config.grapheme_labels)].push_back(i);
  Rng rng = Rng(config.seed).Spawn(0x5717);
  for (auto &[label, indices] : by_label) {
    for (std::size_t i = indices.size(); i > 1; --i)
      std::swap(indices[i - 1],
                indices[static_cast<std::size_t>(rng.UniformInt(0, static_cast<std::int64_t>(i) - 1))]);
    auto take = static_cast<std::size_t>(
        config.cv_fraction * static_cast<double>(indices.size()));
    if (indices.size() - take < 2) take = 0;
    for (std::size_t i = 0; i < indices.size(); ++i)
      (i < take ? cv : train)->push_back(indices[i]);
  }
  std::sort(train->begin(), train->end());
  std::sort(cv->begin(), cv->end());
}

void CheckConfig(const TrainConfig &config) {
  if (config.microbatch_size < 2)
    throw std::invalid_argument("train: microbatch size must be at least 2");
  if (!(config.learning_rate > 0.0))
    throw std::invalid_argument("train: learning rate must be positive");
  if (config.microbatches_per_minibatch == 0)
    throw std::invalid_argument("train: need at least one microbatch per minibatch");
  if (config.hidden == 0 || config.embed_dim == 0)
    throw std::invalid_argument("train: zero model dimension");
  if (config.cv_fraction < 0.0 || config.cv_fraction >= 1.0)
    throw std::invalid_argument("train: cv fraction must lie in [0, 1)");
}

// Mean microbatch loss and accumulated parameter gradient for one batch.
double AudioMicrobatchGrad(const std::vector<Utterance> &corpus,
                           const EncoderParams &params, const Microbatch &batch,
                           std::vector<double> *grad_theta) {
  const std::size_t m = batch.members.size() + 1;
  std::vector<EmbeddingVec> embeds(m);
  std::vector<ForwardTape> tapes(m);
  embeds[0] = EncodeAudio(params, corpus[batch.pivot], &tapes[0]);
  for (std::size_t j = 0; j < batch.members.size(); ++j)
    embeds[j + 1] = EncodeAudio(params, corpus[batch.members[j]], &tapes[j + 1]);

  auto q = InducedQ(embeds, 0);
  std::vector<double> q_members(q.begin() + 1, q.end());
  const double loss = MicrobatchLoss(batch.p, q_members);

  if (grad_theta != nullptr) {
    auto grads = LossGradientWrtEmbeddings(batch.p, embeds);
    for (std::size_t j = 0; j < m; ++j)
      BackwardAccum(params, tapes[j], grads[j], *grad_theta);
  }
  return loss;
}

// CV loss from deterministic microbatches; the stream is re-seeded every
// epoch so successive values are comparable.
double CvLoss(const std::vector<Utterance> &corpus, const LabelIndex &cv_index,
              const EncoderParams &params, const TrainConfig &config) {
  if (cv_index.pivotable.empty()) return std::numeric_limits<double>::quiet_NaN();
  Rng rng = Rng(config.seed).Spawn(0xc511);
  std::size_t cv_count = 0;
  for (const auto &g : cv_index.groups) cv_count += g.size();
  if (cv_count < config.microbatch_size)
    return std::numeric_limits<double>::quiet_NaN();
  const std::size_t batches = std::max<std::size_t>(1, cv_count / config.microbatch_size);
  double total = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    auto batch = BuildMicrobatch(cv_index, rng, config.microbatch_size);
    total += AudioMicrobatchGrad(corpus, params, batch, nullptr);
  }
  return total / static_cast<double>(batches);
}

}  // namespace

LabelIndex BuildLabelIndex(const std::vector<Utterance> &corpus,
                           const std::vector<std::size_t> &subset,
                           bool grapheme_labels) {
  LabelIndex index;
  index.group_of.assign(corpus.size(), static_cast<std::size_t>(-1));
  std::map<std::vector<SymbolId>, std::size_t> ids;
  for (std::size_t i : subset) {
    if (i >= corpus.size()) throw std::invalid_argument("label index: utterance out of range");
    const auto &label = LabelOf(corpus[i], grapheme_labels);
    auto [it, fresh] = ids.emplace(label, index.groups.size());
    if (fresh) index.groups.emplace_back();
    index.groups[it->second].push_back(i);
    index.group_of[i] = it->second;
  }
  for (const auto &group : index.groups)
    if (group.size() >= 2)
      for (std::size_t i : group) index.pivotable.push_back(i);
  std::sort(index.pivotable.begin(), index.pivotable.end());
  return index;
}

std::vector<double> MicrobatchProbabilities(const std::vector<Utterance> &corpus,
                                            std::size_t pivot,
                                            const std::vector<std::size_t> &members,
                                            bool grapheme_labels) {
  if (pivot >= corpus.size()) throw std::invalid_argument("microbatch: pivot out of range");
  if (members.empty()) throw std::invalid_argument("microbatch: no members");
  const auto &pivot_label = LabelOf(corpus[pivot], grapheme_labels);
  std::size_t n0 = 0;
  for (std::size_t j : members) {
    if (j >= corpus.size() || j == pivot)
      throw std::invalid_argument("microbatch: bad member index");
    if (LabelOf(corpus[j], grapheme_labels) == pivot_label) ++n0;
  }
  if (n0 == 0)
    throw std::invalid_argument("microbatch: pivot has no same-label member");
  std::vector<double> p(members.size(), 0.0);
  for (std::size_t j = 0; j < members.size(); ++j)
    if (LabelOf(corpus[members[j]], grapheme_labels) == pivot_label)
      p[j] = 1.0 / static_cast<double>(n0);
  return p;
}

Microbatch BuildMicrobatch(const LabelIndex &index, Rng &rng,
                           std::size_t batch_size) {
  if (batch_size < 2) throw std::invalid_argument("microbatch: size must be at least 2");
  if (index.pivotable.empty())
    throw std::invalid_argument("microbatch: no label occurs twice");
  std::size_t subset_size = 0;
  for (const auto &g : index.groups) subset_size += g.size();
  if (subset_size < batch_size)
    throw std::invalid_argument("microbatch: corpus smaller than batch size");

  Microbatch batch;
  batch.pivot = index.pivotable[static_cast<std::size_t>(
      rng.UniformInt(0, static_cast<std::int64_t>(index.pivotable.size()) - 1))];

  // One guaranteed same-label member.
  const auto &group = index.groups[index.group_of[batch.pivot]];
  std::size_t same;
  do {
    same = group[static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<std::int64_t>(group.size()) - 1))];
  } while (same == batch.pivot);
  batch.members.push_back(same);

  // Remaining slots drawn without replacement from everything else.
  std::vector<std::size_t> pool;
  pool.reserve(subset_size);
  for (const auto &g : index.groups)
    for (std::size_t i : g)
      if (i != batch.pivot && i != same) pool.push_back(i);
  for (std::size_t k = 0; k + 2 < batch_size; ++k) {
    const auto pick = static_cast<std::size_t>(
        rng.UniformInt(0, static_cast<std::int64_t>(pool.size()) - 1));
    batch.members.push_back(pool[pick]);
    pool[pick] = pool.back();
    pool.pop_back();
  }
  for (std::size_t i = batch.members.size(); i > 1; --i)
    std::swap(batch.members[i - 1],
              batch.members[static_cast<std::size_t>(
                  rng.UniformInt(0, static_cast<std::int64_t>(i) - 1))]);

  // p follows the index's grouping, whichever label kind built it.
  std::size_t n0 = 0;
  for (std::size_t j : batch.members)
    if (index.group_of[j] == index.group_of[batch.pivot]) ++n0;
  batch.p.assign(batch.members.size(), 0.0);
  for (std::size_t j = 0; j < batch.members.size(); ++j)
    if (index.group_of[batch.members[j]] == index.group_of[batch.pivot])
      batch.p[j] = 1.0 / static_cast<double>(n0);
  return batch;
}

Microbatch BuildMicrobatch(const std::vector<Utterance> &corpus, Rng &rng,
                           std::size_t batch_size, bool grapheme_labels) {
  std::vector<std::size_t> all(corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const LabelIndex index = BuildLabelIndex(corpus, all, grapheme_labels);
  return BuildMicrobatch(index, rng, batch_size);
}

std::vector<double> InducedQ(const std::vector<EmbeddingVec> &embeddings,
                             std::size_t i) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw std::invalid_argument("induced q: need at least 2 embeddings");
  if (i >= n) throw std::invalid_argument("induced q: index out of range");
  std::vector<double> neg_d2(n, 0.0);
  double max_exp = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    neg_d2[j] = -nk::SquaredDistance(embeddings[i].data(), embeddings[j].data(),
                                     embeddings[i].size());
    max_exp = std::max(max_exp, neg_d2[j]);
  }
  std::vector<double> q(n, 0.0);
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    q[j] = std::exp(neg_d2[j] - max_exp);
    z += q[j];
  }
  for (std::size_t j = 0; j < n; ++j) q[j] /= z;
  return q;
}

double MicrobatchLoss(const std::vector<double> &p, const std::vector<double> &q) {
  if (p.size() != q.size() || p.empty())
    throw std::invalid_argument("microbatch loss: length mismatch");
  double loss = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    if (!(q[j] > 0.0))
      throw std::invalid_argument("microbatch loss: q vanishes on the support of p");
    loss += p[j] * std::log(p[j] / q[j]);
  }
  return loss;
}

std::vector<EmbeddingVec> LossGradientWrtEmbeddings(
    const std::vector<double> &p, const std::vector<EmbeddingVec> &embeddings) {
  const std::size_t n = embeddings.size();
  if (n < 2 || p.size() != n - 1)
    throw std::invalid_argument("loss gradient: p must cover the members");
  const std::size_t d = embeddings[0].size();
  auto q = InducedQ(embeddings, 0);

  std::vector<EmbeddingVec> grads(n, EmbeddingVec(d, 0.0));
  std::vector<double> diff(d);
  for (std::size_t j = 1; j < n; ++j) {
    const double coeff = 2.0 * (p[j - 1] - q[j]);
    for (std::size_t k = 0; k < d; ++k)
      diff[k] = embeddings[0][k] - embeddings[j][k];
    nk::Axpy(coeff, diff.data(), grads[0].data(), d);
    nk::Axpy(-coeff, diff.data(), grads[j].data(), d);
  }
  return grads;
}

TrainResult TrainAudioEncoder(const std::vector<Utterance> &corpus,
                              const TrainConfig &config) {
  CheckConfig(config);
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  const std::size_t frame_dim = corpus[0].frame_dim;
  for (const auto &utt : corpus)
    if (utt.frame_dim != frame_dim)
      throw std::invalid_argument("train: inconsistent frame dimensions");

  TrainResult result;
  Rng init_rng = Rng(config.seed).Spawn(0x171);
  result.params = InitEncoder(EncoderKind::kAudio, frame_dim, config.hidden,
                              config.embed_dim, init_rng);

  std::vector<std::size_t> train_set, cv_set;
  SplitCv(corpus, config, &train_set, &cv_set);
  const LabelIndex train_index =
      BuildLabelIndex(corpus, train_set, config.grapheme_labels);
  const LabelIndex cv_index = BuildLabelIndex(corpus, cv_set, config.grapheme_labels);
  if (train_index.pivotable.empty())
    throw std::invalid_argument("train: no label occurs twice in the training split");
  if (train_index.groups.size() < 2)
    result.warnings.push_back(
        "degenerate corpus: single label, no negative samples in any microbatch");

  const std::size_t batches_per_epoch =
      std::max<std::size_t>(1, train_set.size() / config.microbatch_size);
  Optimizer opt(config.optimizer, config.learning_rate, result.params.Size());
  std::vector<double> grad(result.params.Size());

  double best_cv = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng epoch_rng = Rng(config.seed).Spawn(1000 + epoch);
    double epoch_loss = 0.0;
    std::size_t batches_done = 0;
    while (batches_done < batches_per_epoch) {
      const std::size_t in_minibatch = std::min(config.microbatches_per_minibatch,
                                                batches_per_epoch - batches_done);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = 0; b < in_minibatch; ++b) {
        auto batch =
            BuildMicrobatch(train_index, epoch_rng, config.microbatch_size);
        epoch_loss += AudioMicrobatchGrad(corpus, result.params, batch, &grad);
      }
      nk::Scale(grad.data(), 1.0 / static_cast<double>(in_minibatch), grad.size());
      opt.Step(result.params.theta, grad);
      batches_done += in_minibatch;
    }
    EpochLoss entry;
    entry.train = epoch_loss / static_cast<double>(batches_per_epoch);
    entry.cv = CvLoss(corpus, cv_index, result.params, config);
    result.history.push_back(entry);
    if (config.epoch_hook) config.epoch_hook(epoch + 1, result.params);

    if (std::isnan(entry.cv)) continue;  // no usable CV split; run to max epochs
    if (entry.cv < best_cv - 1e-12) {
      best_cv = entry.cv;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

TrainResult TrainTextEncoder(const std::vector<Utterance> &corpus,
                             const EncoderParams &audio_params, EncoderKind which,
                             std::size_t vocab_size, const TrainConfig &config) {
  CheckConfig(config);
  if (which != EncoderKind::kPhone && which != EncoderKind::kGrapheme)
    throw std::invalid_argument("train: text encoder kind must be phone or grapheme");
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");

  // Frozen targets: one audio embedding per utterance.
  std::vector<EmbeddingVec> targets(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    targets[i] = EncodeAudio(audio_params, corpus[i]);

  TrainResult result;
  Rng init_rng = Rng(config.seed).Spawn(0x7e27);
  result.params = InitEncoder(which, vocab_size, config.hidden,
                              audio_params.embed_dim, init_rng);

  std::vector<std::size_t> train_set, cv_set;
  SplitCv(corpus, config, &train_set, &cv_set);

  auto label_span = [&](std::size_t i) {
    const auto &s = which == EncoderKind::kPhone ? corpus[i].phones.symbols
                                                 : corpus[i].graphemes.symbols;
    return std::span<const SymbolId>(s);
  };
  auto mse_of = [&](const std::vector<std::size_t> &set) {
    if (set.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (std::size_t i : set) {
      auto g = EncodeText(result.params, label_span(i));
      total += nk::SquaredDistance(g.data(), targets[i].data(), g.size());
    }
    return total / static_cast<double>(set.size());
  };

  const std::size_t minibatch =
      std::max<std::size_t>(1, config.microbatch_size * config.microbatches_per_minibatch);
  Optimizer opt(config.optimizer, config.learning_rate, result.params.Size());
  std::vector<double> grad(result.params.Size());
  std::vector<std::size_t> order = train_set;

  double best_cv = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng epoch_rng = Rng(config.seed).Spawn(5000 + epoch);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(
                    epoch_rng.UniformInt(0, static_cast<std::int64_t>(i) - 1))]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += minibatch) {
      const std::size_t stop = std::min(order.size(), start + minibatch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        ForwardTape tape;
        auto g = EncodeText(result.params, label_span(i), &tape);
        EmbeddingVec upstream(g.size());
        double sample_loss = 0.0;
        for (std::size_t c = 0; c < g.size(); ++c) {
          const double diff = g[c] - targets[i][c];
          upstream[c] = 2.0 * diff;
          sample_loss += diff * diff;
        }
        epoch_loss += sample_loss;
        BackwardAccum(result.params, tape, upstream, grad);
      }
      nk::Scale(grad.data(), 1.0 / static_cast<double>(stop - start), grad.size());
      opt.Step(result.params.theta, grad);
    }
    EpochLoss entry;
    entry.train = order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size());
    entry.cv = mse_of(cv_set);
    result.history.push_back(entry);
    if (config.epoch_hook) config.epoch_hook(epoch + 1, result.params);

    if (std::isnan(entry.cv)) continue;
    if (entry.cv < best_cv - 1e-12) {
      best_cv = entry.cv;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

LengthBalancedSampler::LengthBalancedSampler(const std::vector<Utterance> &corpus,
                                             const LengthDistribution &target) {
  target.Validate();
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    by_length[corpus[i].phones.symbols.size()].push_back(i);

  for (const auto &[len, prob] : target.probs) {
    auto it = by_length.find(len);
    if (it == by_length.end()) {
      warnings_.push_back("length " + std::to_string(len) +
                          " requested but absent from corpus; bin skipped");
      continue;
    }
    lengths_.push_back(len);
    target_.push_back(prob);
    by_length_.push_back(it->second);
  }
  if (lengths_.empty())
    throw std::invalid_argument("length sampler: no target length exists in corpus");
  drawn_.assign(lengths_.size(), 0);
}

std::size_t LengthBalancedSampler::Next(Rng &rng) {
  // Most deficient bin: argmax of target - empirical share.
  std::size_t best = 0;
  double best_deficit = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < lengths_.size(); ++b) {
    const double empirical =
        total_drawn_ == 0
            ? 0.0
            : static_cast<double>(drawn_[b]) / static_cast<double>(total_drawn_);
    const double deficit = target_[b] - empirical;
    if (deficit > best_deficit) {
      best_deficit = deficit;
      best = b;
    }
  }
  ++drawn_[best];
  ++total_drawn_;
  const auto &bin = by_length_[best];
  return bin[static_cast<std::size_t>(
      rng.UniformInt(0, static_cast<std::int64_t>(bin.size()) - 1))];
}

void WriteTrainingLog(std::ostream &out, const std::vector<EpochLoss> &history) {
  for (std::size_t e = 0; e < history.size(); ++e)
    out << e + 1 << '\t' << history[e].train << '\t' << history[e].cv << '\n';
}

}  // namespace ane
