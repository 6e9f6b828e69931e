// ane/trainer.hpp
//
// Microbatch construction and the two training objectives: a
// neighbor-embedding KL loss over pivot pairs for the audio encoder, and
// a mean-squared-error loss that pulls text embeddings onto the audio
// cluster means.

#ifndef ANE_TRAINER_HPP
#define ANE_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ane/encoder.hpp"
#include "ane/rng.hpp"
#include "ane/types.hpp"

namespace ane {

// One pivot plus members compared only against the pivot. p holds the
// binary-derived input probabilities aligned with `members`:
// 1/n_0 for members sharing the pivot's label, 0 otherwise.
struct Microbatch {
  std::size_t pivot = 0;
  std::vector<std::size_t> members;
  std::vector<double> p;
};

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  std::size_t microbatch_size = 16;  // M, pivot included
  std::size_t microbatches_per_minibatch = 8;
  double learning_rate = 0.001;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  std::size_t max_epochs = 50;
  std::size_t patience = 10;  // epochs without CV improvement before stopping
  double cv_fraction = 0.1;
  std::size_t hidden = 24;
  std::size_t embed_dim = 8;
  bool grapheme_labels = false;  // judge microbatch "same" by grapheme sequence
  std::uint64_t seed = 0;
  // Called after every epoch (1-based) with the current parameters;
  // observation only, must not mutate training state.
  std::function<void(std::size_t, const EncoderParams &)> epoch_hook;
};

struct EpochLoss {
  double train = 0.0;
  double cv = 0.0;
};

struct TrainResult {
  EncoderParams params;
  std::vector<EpochLoss> history;
  std::vector<std::string> warnings;
};

// Utterance indices grouped by label (phone sequence by default). Built
// once per training set; `pivotable` lists utterances whose label occurs
// at least twice within the subset.
struct LabelIndex {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> group_of;  // keyed by utterance index
  std::vector<std::size_t> pivotable;
};

LabelIndex BuildLabelIndex(const std::vector<Utterance> &corpus,
                           const std::vector<std::size_t> &subset,
                           bool grapheme_labels = false);

// Input probabilities for an explicit pivot/member choice.
std::vector<double> MicrobatchProbabilities(const std::vector<Utterance> &corpus,
                                            std::size_t pivot,
                                            const std::vector<std::size_t> &members,
                                            bool grapheme_labels = false);

// Samples a microbatch: pivot uniform over pivotable utterances, one
// same-label member guaranteed, remaining slots uniform without
// replacement, member order shuffled.
Microbatch BuildMicrobatch(const std::vector<Utterance> &corpus, Rng &rng,
                           std::size_t batch_size, bool grapheme_labels = false);
Microbatch BuildMicrobatch(const LabelIndex &index, Rng &rng,
                           std::size_t batch_size);

// q_{ij} = softmax_j(-||f_i - f_j||^2) over j != i, computed with
// max-subtraction; entry i is 0 and the rest sum to 1.
std::vector<double> InducedQ(const std::vector<EmbeddingVec> &embeddings,
                             std::size_t i);

// KL divergence sum_j p_j log(p_j / q_j) with 0 log 0 = 0.
double MicrobatchLoss(const std::vector<double> &p, const std::vector<double> &q);

// Gradient of the pivot-pair KL loss with respect to every embedding in
// the batch (index 0 = pivot, 1.. = members aligned with p).
std::vector<EmbeddingVec> LossGradientWrtEmbeddings(
    const std::vector<double> &p, const std::vector<EmbeddingVec> &embeddings);

// Trains the audio encoder on the corpus; deterministic under config.seed.
TrainResult TrainAudioEncoder(const std::vector<Utterance> &corpus,
                              const TrainConfig &config);

// Trains a text encoder against frozen audio embeddings. `vocab_size`
// bounds the symbol ids of the chosen label kind.
TrainResult TrainTextEncoder(const std::vector<Utterance> &corpus,
                             const EncoderParams &audio_params,
                             EncoderKind which, std::size_t vocab_size,
                             const TrainConfig &config);

// Greedy length-balanced sampling: each draw fills the most
// sample-deficient pronunciation-length bin of the target distribution.
class LengthBalancedSampler {
 public:
  LengthBalancedSampler(const std::vector<Utterance> &corpus,
                        const LengthDistribution &target);

  std::size_t Next(Rng &rng);
  const std::vector<std::string> &Warnings() const { return warnings_; }

 private:
  std::vector<std::size_t> lengths_;                  // candidate bin lengths
  std::vector<double> target_;                        // aligned with lengths_
  std::vector<std::vector<std::size_t>> by_length_;   // utterances per bin
  std::vector<std::size_t> drawn_;
  std::size_t total_drawn_ = 0;
  std::vector<std::string> warnings_;
};

// One line per epoch: epoch<TAB>train_loss<TAB>cv_loss.
void WriteTrainingLog(std::ostream &out, const std::vector<EpochLoss> &history);

}  // namespace ane

#endif  // ANE_TRAINER_HPP
