// search.cpp: exhaustive nearest-neighbor classification and index I/O.

#include "ane/search.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "ane/kernels.hpp"
#include "binio.hpp"

namespace ane {
namespace {

void CheckIndex(const EmbeddingVec& f, const EmbeddingIndex& index) {
  if (index.empty()) throw std::invalid_argument("classify: empty index");
  for (const IndexEntry& e : index)
    if (e.vec.size() != f.size())
      throw std::invalid_argument("classify: dimension mismatch for label '" +
                                  e.label + "'");
}

}  // namespace

Match Classify(const EmbeddingVec& f, const EmbeddingIndex& index) {
  CheckIndex(f, index);
  Match best;
  best.distance2 = kernels::SquaredDistance(f, index[0].vec);
  for (std::size_t j = 1; j < index.size(); ++j) {
    const double d = kernels::SquaredDistance(f, index[j].vec);
    if (d < best.distance2) {
      best.distance2 = d;
      best.entry = j;
    }
  }
  best.label = index[best.entry].label;
  return best;
}

std::vector<Match> TopK(const EmbeddingVec& f, const EmbeddingIndex& index,
                        std::size_t k) {
  CheckIndex(f, index);
  if (k < 1 || k > index.size())
    throw std::invalid_argument("top-k: k out of range");
  std::vector<double> dist(index.size());
  for (std::size_t j = 0; j < index.size(); ++j)
    dist[j] = kernels::SquaredDistance(f, index[j].vec);
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Sorting by (distance, index) keeps ties in insertion order.
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k),
                    order.end(), [&dist](std::size_t a, std::size_t b) {
                      return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                    });
  std::vector<Match> result(k);
  for (std::size_t r = 0; r < k; ++r) {
    result[r].entry = order[r];
    result[r].label = index[order[r]].label;
    result[r].distance2 = dist[order[r]];
  }
  return result;
}

double EvaluateClassification(
    const std::vector<std::pair<Utterance, std::string>>& tests,
    const EncoderParams& audio, const EmbeddingIndex& index, MatchMode mode,
    const Lexicon& lexicon) {
  if (tests.empty())
    throw std::invalid_argument("evaluate: empty test set");
  std::size_t correct = 0;
  for (const auto& [utt, truth] : tests) {
    std::vector<std::string> accepted;
    if (mode == MatchMode::kPronunciation) {
      if (!lexicon.ContainsWord(truth))
        throw std::invalid_argument("evaluate: truth word '" + truth +
                                    "' missing from lexicon");
      for (std::size_t idx : lexicon.PronunciationsOf(truth))
        accepted.push_back(PronunciationString(lexicon.Entries()[idx].phones,
                                               lexicon.Phones()));
    } else {
      bool indexed = false;
      for (const IndexEntry& e : index) indexed = indexed || e.label == truth;
      if (!indexed)
        throw std::invalid_argument("evaluate: truth word '" + truth +
                                    "' missing from index");
      accepted.push_back(truth);
    }
    const Match best = Classify(EncodeAudio(audio, utt), index);
    if (std::find(accepted.begin(), accepted.end(), best.label) !=
        accepted.end())
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(tests.size());
}

void WriteIndex(std::ostream& out, const EmbeddingIndex& index) {
  if (index.empty()) throw std::invalid_argument("index write: empty index");
  const std::size_t dim = index[0].vec.size();
  binio::WriteMagic(out, "ANEIDX1");
  binio::WriteU32(out, static_cast<std::uint32_t>(index.size()));
  binio::WriteU32(out, static_cast<std::uint32_t>(dim));
  for (const IndexEntry& e : index) {
    if (e.vec.size() != dim)
      throw std::invalid_argument("index write: inconsistent dimensions");
    binio::WriteString(out, e.label);
    for (double v : e.vec) binio::WriteF32(out, static_cast<float>(v));
  }
  if (!out) throw std::runtime_error("index write: stream failure");
}

EmbeddingIndex ReadIndex(std::istream& in, const std::string& source) {
  binio::ExpectMagic(in, "ANEIDX1", source);
  const std::uint32_t count = binio::ReadU32(in, source, "entry count");
  const std::uint32_t dim = binio::ReadU32(in, source, "dimension");
  if (count == 0) throw std::runtime_error(source + ": empty index");
  if (dim == 0) throw std::runtime_error(source + ": zero dimension");
  EmbeddingIndex index(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    index[i].label = binio::ReadString(in, source, "label");
    index[i].vec.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j)
      index[i].vec[j] = binio::ReadF32(in, source, "vector element");
  }
  return index;
}

void WriteIndexFile(const std::string& path, const EmbeddingIndex& index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  WriteIndex(out, index);
}

EmbeddingIndex ReadIndexFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return ReadIndex(in, path);
}

}  // namespace ane
