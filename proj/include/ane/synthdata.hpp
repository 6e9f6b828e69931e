// ane/synthdata.hpp
//
// Deterministic synthetic corpus generator. Utterance frames look like
// per-phone posterior vectors: each phone holds a softmax-sharpened
// one-hot for a random number of frames, blurred by Gaussian logit
// jitter. Dialect groups add a fixed logit shift before the softmax, so
// shifted frames remain valid posteriors.

#ifndef ANE_SYNTHDATA_HPP
#define ANE_SYNTHDATA_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ane/lexicon.hpp"
#include "ane/types.hpp"

namespace ane {

struct SynthConfig {
  // Phone inventory size; also the frame dimension (posterior-like).
  std::size_t phone_count = 8;
  // Frames emitted per phone, drawn uniformly from this inclusive range.
  std::size_t min_duration = 2;
  std::size_t max_duration = 4;
  // Softmax temperature; smaller is sharper. Must be positive.
  double temperature = 0.25;
  // Stddev of the Gaussian logit jitter; zero disables the noise.
  double jitter_sigma = 1.0;
  // Vocabulary: this many distinct pronunciations, lengths drawn either
  // uniformly from [min_word_length, max_word_length] or from
  // `target_lengths` when it is non-empty.
  std::size_t word_count = 10;
  std::size_t min_word_length = 2;
  std::size_t max_word_length = 5;
  LengthDistribution target_lengths;
  // Utterances generated per word, spread round-robin over the dialect
  // groups. At least 2, so every utterance has a same-word neighbor.
  std::size_t samples_per_word = 4;
  // One logit-space shift vector per dialect group (dimension
  // phone_count). Empty means a single unshifted group.
  std::vector<EmbeddingVec> dialect_shifts;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on any broken invariant.
  void Validate() const;
};

struct SynthCorpus {
  Lexicon lexicon;
  std::vector<Utterance> utterances;
};

// Number of grapheme symbols a synthetic word can use: the lowercase
// letters. Grapheme ids are fixed (id = letter - 'a') so corpora built
// from different configs share one alphabet.
inline constexpr std::size_t kGraphemeAlphabet = 26;

// Grapheme ids of a synthetic word's spelling. Throws on characters
// outside the alphabet.
GraphemeSeq GraphemesOf(const std::string& word);

// Builds the vocabulary and renders every utterance. The word list is a
// pure function of the vocabulary settings (word count and lengths), so
// two corpora that differ only in `seed` carry identical labels over
// different frames. Per-utterance RNG substreams are derived from
// (seed, utterance index), making generation order-independent.
SynthCorpus GenerateCorpus(const SynthConfig& config);

// Renders samples_per_word utterances for every entry of an existing
// synthetic-style lexicon (lowercase words, phone ids < phone_count).
// Entry e, sample s uses RNG substream e * samples_per_word + s.
std::vector<Utterance> RenderCorpus(const SynthConfig& config,
                                    const Lexicon& lexicon);

// Vocabulary of `pairs` two-word groups whose pronunciations differ by
// exactly one substitution, insertion, or deletion. Entry order is
// base, variant, base, variant, ... Throws when the inventory cannot
// supply enough distinct pronunciations.
Lexicon ConfusablePairVocabulary(const SynthConfig& config, std::size_t pairs);

// Corpus container: magic "ANECORP1", utterance count, then per
// utterance a label block (word, phone ids, grapheme ids, dialect id)
// and a frame block (frame count, frame dim, little-endian f32 data).
void WriteCorpus(std::ostream& out, const std::vector<Utterance>& utterances);
std::vector<Utterance> ReadCorpus(std::istream& in, const std::string& source);
void WriteCorpusFile(const std::string& path,
                     const std::vector<Utterance>& utterances);
std::vector<Utterance> ReadCorpusFile(const std::string& path);

}  // namespace ane

#endif  // ANE_SYNTHDATA_HPP
