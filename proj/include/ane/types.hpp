// ane/types.hpp
//
// Shared domain types: interned symbol sequences (phones, graphemes),
// utterances carrying posterior-like feature frames, and the embedding
// vector that is the common currency between modules.

#ifndef ANE_TYPES_HPP
#define ANE_TYPES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace ane {

using SymbolId = std::int32_t;

// Bijective name <-> id registry. Used for both phone and grapheme
// inventories; ids are dense and assigned in first-seen order.
class SymbolInventory {
 public:
  // Returns the existing id for `name` or registers a fresh one.
  // Empty names are rejected.
  SymbolId Intern(const std::string &name);

  // Id for a name that must already be registered.
  SymbolId Lookup(const std::string &name) const;
  bool Contains(const std::string &name) const;

  const std::string &Name(SymbolId id) const;
  std::size_t Size() const { return names_.size(); }

 private:
  std::unordered_map<std::string, SymbolId> ids_;
  std::vector<std::string> names_;
};

// Phone sequence (a pronunciation). Stress markers are part of the phone
// name, so "ae0" and "ae1" intern to distinct ids unless the caller folds
// them before interning (see FoldStress).
struct PhoneSeq {
  std::vector<SymbolId> symbols;

  bool operator==(const PhoneSeq &) const = default;
};

// Grapheme sequence; the space character is an ordinary symbol.
struct GraphemeSeq {
  std::vector<SymbolId> symbols;

  bool operator==(const GraphemeSeq &) const = default;
};

// Strips a trailing digit stress marker ("ae1" -> "ae"). Names without a
// trailing digit are unchanged.
std::string FoldStress(const std::string &phone_name);

// One training/test sample: feature frames plus its phone and grapheme
// labels. Frames are row-major, frame_count x frame_dim.
struct Utterance {
  std::vector<double> frames;
  std::size_t frame_count = 0;
  std::size_t frame_dim = 0;
  PhoneSeq phones;
  GraphemeSeq graphemes;
  std::string word;
  std::int32_t dialect = 0;

  const double *Frame(std::size_t t) const { return frames.data() + t * frame_dim; }
};

// Fixed-dimension embedding; f and g vectors throughout.
using EmbeddingVec = std::vector<double>;

// Gaussian over embedding space: either a full covariance (row-major
// dim x dim, symmetric positive-definite) or an isotropic sigma^2 * I.
// PD-ness of full covariances is checked where they are factorized.
struct GaussianSpec {
  EmbeddingVec mean;
  std::vector<double> covariance;  // empty when isotropic
  double sigma2 = 1.0;

  static GaussianSpec Isotropic(EmbeddingVec mean, double sigma2);
  static GaussianSpec Full(EmbeddingVec mean, std::vector<double> covariance);

  bool IsIsotropic() const { return covariance.empty(); }
  std::size_t Dim() const { return mean.size(); }
  // Covariance entry (i, j) regardless of representation.
  double Cov(std::size_t i, std::size_t j) const;
};

// Distribution over pronunciation lengths; probabilities sum to 1.
struct LengthDistribution {
  std::map<std::size_t, double> probs;

  // Throws unless probabilities are positive and sum to 1 within 1e-9.
  void Validate() const;
};

// Throws std::invalid_argument on empty/NaN/Inf content.
void ValidateEmbedding(const EmbeddingVec &v);

// Throws if the utterance violates its invariants (non-empty frames,
// consistent dimension, posterior-like entries when `posterior_like`).
void ValidateUtterance(const Utterance &utt, bool posterior_like = false);

// Canonical text form of a phone sequence: names joined by single spaces.
std::string PronunciationString(const PhoneSeq &seq, const SymbolInventory &inv);

}  // namespace ane

#endif  // ANE_TYPES_HPP
