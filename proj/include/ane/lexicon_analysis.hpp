// ane/lexicon_analysis.hpp
//
// Application math on top of the embedding calculus: substitution-cost
// edit distance and OOV recovery, dialect dissimilarity with additive
// tree fitting, wake-word expected confusion, and the pronunciation
// length distribution.

#ifndef ANE_LEXICON_ANALYSIS_HPP
#define ANE_LEXICON_ANALYSIS_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ane/encoder.hpp"
#include "ane/lexicon.hpp"
#include "ane/search.hpp"
#include "ane/types.hpp"

namespace ane {

// Symmetric substitution costs over a phone inventory plus uniform
// insertion and deletion costs. Substitution costs lie in [0, 1) with a
// zero diagonal.
struct CostMatrix {
  std::size_t size = 0;
  std::vector<double> sub;  // size x size, row-major
  double insertion = 1.0;
  double deletion = 1.0;

  double At(SymbolId i, SymbolId j) const { return sub[i * size + j]; }
};

// cost(i, j) = 1 - 2 * similarity of the two phones' text embeddings
// under the isotropic-Gaussian overlap with spread sigma. One embedding
// per inventory phone, in symbol-id order.
CostMatrix SubstitutionCosts(const std::vector<EmbeddingVec>& phone_embeddings,
                             double sigma);

// All-or-nothing costs (0 on the diagonal, 1 elsewhere): the classic
// Levenshtein setting used as a baseline.
CostMatrix BinaryCosts(std::size_t inventory_size);

// Standard dynamic program with the given substitution, insertion, and
// deletion costs. Symmetric whenever the matrix is symmetric and
// insertion == deletion.
double MinEditDistance(const PhoneSeq& a, const PhoneSeq& b,
                       const CostMatrix& costs);

struct OovCandidate {
  std::string word;
  PhoneSeq phones;
};

enum class RecoveryMethod {
  kEmbed,  // nearest text embedding of the candidate pronunciations
  kEdit,   // minimum substitution-cost edit distance
};

// Maps a recognizer's phone output to the most phonetically similar
// candidate. Ties break toward the lowest candidate index. The phone
// encoder is used in embed mode, the cost matrix in edit mode.
std::string OovRecover(const PhoneSeq& asr_output,
                       const std::vector<OovCandidate>& candidates,
                       RecoveryMethod method,
                       const EncoderParams& phone_encoder,
                       const CostMatrix& costs);

// Square symmetric dissimilarity with zero diagonal, entries in [0, 1].
struct DissimilarityMatrix {
  std::vector<std::string> labels;
  std::vector<double> d;  // n x n, row-major

  std::size_t Size() const { return labels.size(); }
  double At(std::size_t i, std::size_t j) const {
    return d[i * labels.size() + j];
  }
};

// One row per dialect: a label and per-word centroid embeddings, aligned
// by word position across dialects. d(i, j) is the mean over words of
// 1 - exp(-||g_c_i - g_c_j||^2 / (8 sigma^2)).
DissimilarityMatrix DialectDissimilarity(
    const std::vector<std::pair<std::string, std::vector<EmbeddingVec>>>&
        dialect_centroids,
    double sigma);

// CSV with a header row of labels; each body row starts with its label.
void WriteDissimilarityCsv(std::ostream& out, const DissimilarityMatrix& m);
DissimilarityMatrix ReadDissimilarityCsv(std::istream& in,
                                         const std::string& source);

// Unrooted leaf-labeled tree with nonnegative branch lengths. Nodes
// 0..n-1 are the leaves in label order; internal nodes follow.
struct AdditiveTree {
  struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    double length = 0.0;
  };
  std::vector<std::string> leaf_labels;
  std::size_t node_count = 0;
  std::vector<Edge> edges;

  // Sum of branch lengths along the unique path between two leaves.
  double PathDistance(std::size_t leaf_a, std::size_t leaf_b) const;
  // Length of the single edge incident to a leaf.
  double TerminalBranch(std::size_t leaf) const;
};

struct TreeFit {
  AdditiveTree tree;
  double rmse = 0.0;  // path metric vs input, over unordered leaf pairs
};

// Neighbor-joining topology with least-squares branch lengths; negative
// lengths are clamped to zero and the residual reflects the clamping.
// Requires n >= 3.
TreeFit FitAdditiveTree(const DissimilarityMatrix& d);

// Newick serialization rooted at the last internal node (or the star
// center for 3 leaves), with branch lengths.
std::string NewickString(const AdditiveTree& tree);

// Log of the expected similarity between the target word and the rest of
// the vocabulary, LM-scaled:
//   LSE over w != target of
//     (alpha - 1) (||g_t - g_w||^2 / (8 sigma^2) + log 2) + alpha log P(w)
// computed with max-subtraction. LM probabilities are used as-is, with
// no renormalization after excluding the target.
double WakewordConfusion(const std::string& target,
                         const EmbeddingIndex& vocabulary, const UnigramLM& lm,
                         double sigma, double alpha);

struct WakewordRow {
  std::string word;
  double alpha = 0.0;
  double log_expected_confusion = 0.0;
};

// CSV with header word,alpha,log_expected_confusion.
void WriteWakewordReport(std::ostream& out,
                         const std::vector<WakewordRow>& rows);

// P(h) = sum over words w and pronunciations r of w with |r| = h of
// P(w) / n_w, with uniform pronunciation probability 1/n_w. Every LM
// word must appear in the lexicon; offenders are listed in the error.
LengthDistribution PronunciationLengthDistribution(const Lexicon& lexicon,
                                                   const UnigramLM& lm);

// CSV with header length,probability, ascending by length.
void WriteLengthDistributionCsv(std::ostream& out,
                                const LengthDistribution& dist);

}  // namespace ane

#endif  // ANE_LEXICON_ANALYSIS_HPP
