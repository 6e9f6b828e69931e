// ane/search.hpp
//
// Nearest-neighbor word classification between audio embeddings and a
// labeled text-embedding index: exact exhaustive search, top-k, batch
// accuracy evaluation, and the embedding-table file format.

#ifndef ANE_SEARCH_HPP
#define ANE_SEARCH_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ane/encoder.hpp"
#include "ane/lexicon.hpp"
#include "ane/types.hpp"

namespace ane {

struct IndexEntry {
  std::string label;
  EmbeddingVec vec;
};

using EmbeddingIndex = std::vector<IndexEntry>;

struct Match {
  std::size_t entry = 0;
  std::string label;
  double distance2 = 0.0;
};

// Exhaustive argmin of squared distance; ties broken by lowest insertion
// index. Throws on an empty index or dimension mismatch.
Match Classify(const EmbeddingVec& f, const EmbeddingIndex& index);

// The k nearest entries in ascending distance order, insertion order on
// ties. Requires 1 <= k <= index size.
std::vector<Match> TopK(const EmbeddingVec& f, const EmbeddingIndex& index,
                        std::size_t k);

enum class MatchMode {
  kPronunciation,  // correct if best label names one of the truth word's
                   // pronunciations
  kOrthography,    // correct iff best label equals the truth word
};

// Classifies each test utterance's audio embedding against the index and
// returns the accuracy. Index labels are pronunciation strings (as
// produced by PronunciationString over lexicon.Phones()) in
// pronunciation mode and word strings in orthography mode. Throws when a
// truth word is missing from the lexicon (pronunciation mode) or from
// the index labels (orthography mode).
double EvaluateClassification(
    const std::vector<std::pair<Utterance, std::string>>& tests,
    const EncoderParams& audio, const EmbeddingIndex& index, MatchMode mode,
    const Lexicon& lexicon);

// Embedding-table file: magic ANEIDX1, count and dimension as 32-bit
// little-endian, then per entry a length-prefixed UTF-8 label and the
// vector as little-endian 32-bit floats.
void WriteIndex(std::ostream& out, const EmbeddingIndex& index);
EmbeddingIndex ReadIndex(std::istream& in, const std::string& source);
void WriteIndexFile(const std::string& path, const EmbeddingIndex& index);
EmbeddingIndex ReadIndexFile(const std::string& path);

}  // namespace ane

#endif  // ANE_SEARCH_HPP
