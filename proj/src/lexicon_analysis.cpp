// lexicon_analysis.cpp: edit-distance OOV recovery, dialect trees,
// wake-word confusion, and the pronunciation length distribution.

#include "ane/lexicon_analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ane/kernels.hpp"
#include "ane/similarity.hpp"

namespace ane {

CostMatrix SubstitutionCosts(const std::vector<EmbeddingVec>& phone_embeddings,
                             double sigma) {
  if (phone_embeddings.empty())
    throw std::invalid_argument("substitution costs: empty embedding table");
  if (sigma <= 0.0)
    throw std::invalid_argument("substitution costs: sigma must be positive");
  const std::size_t dim = phone_embeddings[0].size();
  for (std::size_t i = 0; i < phone_embeddings.size(); ++i)
    if (phone_embeddings[i].empty() || phone_embeddings[i].size() != dim)
      throw std::invalid_argument(
          "substitution costs: missing embedding for phone " +
          std::to_string(i));
  CostMatrix costs;
  costs.size = phone_embeddings.size();
  costs.sub.assign(costs.size * costs.size, 0.0);
  for (std::size_t i = 0; i < costs.size; ++i) {
    for (std::size_t j = i + 1; j < costs.size; ++j) {
      const double c =
          1.0 -
          2.0 * IsotropicSimilarity(phone_embeddings[i], phone_embeddings[j],
                                    sigma);
      costs.sub[i * costs.size + j] = c;
      costs.sub[j * costs.size + i] = c;
    }
  }
  return costs;
}

CostMatrix BinaryCosts(std::size_t inventory_size) {
  if (inventory_size == 0)
    throw std::invalid_argument("binary costs: empty inventory");
  CostMatrix costs;
  costs.size = inventory_size;
  costs.sub.assign(inventory_size * inventory_size, 1.0);
  for (std::size_t i = 0; i < inventory_size; ++i)
    costs.sub[i * inventory_size + i] = 0.0;
  return costs;
}

double MinEditDistance(const PhoneSeq& a, const PhoneSeq& b,
                       const CostMatrix& costs) {
  for (SymbolId s : a.symbols)
    if (s < 0 || static_cast<std::size_t>(s) >= costs.size)
      throw std::invalid_argument("edit distance: phone id outside matrix");
  for (SymbolId s : b.symbols)
    if (s < 0 || static_cast<std::size_t>(s) >= costs.size)
      throw std::invalid_argument("edit distance: phone id outside matrix");
  const std::size_t n = a.symbols.size(), m = b.symbols.size();
  std::vector<double> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j)
    prev[j] = static_cast<double>(j) * costs.insertion;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<double>(i) * costs.deletion;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = std::min({prev[j] + costs.deletion, cur[j - 1] + costs.insertion,
                         prev[j - 1] + costs.At(a.symbols[i - 1], b.symbols[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::string OovRecover(const PhoneSeq& asr_output,
                       const std::vector<OovCandidate>& candidates,
                       RecoveryMethod method,
                       const EncoderParams& phone_encoder,
                       const CostMatrix& costs) {
  if (candidates.empty())
    throw std::invalid_argument("oov recovery: empty candidate set");
  if (method == RecoveryMethod::kEmbed) {
    EmbeddingIndex index(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      index[i].label = candidates[i].word;
      index[i].vec = EncodeText(phone_encoder, candidates[i].phones);
    }
    const Match best = Classify(EncodeText(phone_encoder, asr_output), index);
    return candidates[best.entry].word;
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double d = MinEditDistance(asr_output, candidates[i].phones, costs);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return candidates[best].word;
}

DissimilarityMatrix DialectDissimilarity(
    const std::vector<std::pair<std::string, std::vector<EmbeddingVec>>>&
        dialect_centroids,
    double sigma) {
  if (dialect_centroids.size() < 2)
    throw std::invalid_argument("dissimilarity: need at least 2 dialects");
  if (sigma <= 0.0)
    throw std::invalid_argument("dissimilarity: sigma must be positive");
  const std::size_t words = dialect_centroids[0].second.size();
  if (words == 0)
    throw std::invalid_argument("dissimilarity: empty word list");
  for (const auto& [label, centroids] : dialect_centroids) {
    if (centroids.size() != words)
      throw std::invalid_argument("dissimilarity: dialect '" + label +
                                  "' is missing centroids");
    for (const EmbeddingVec& c : centroids)
      if (c.empty() || c.size() != dialect_centroids[0].second[0].size())
        throw std::invalid_argument("dissimilarity: dialect '" + label +
                                    "' has a malformed centroid");
  }
  const std::size_t n = dialect_centroids.size();
  DissimilarityMatrix m;
  m.d.assign(n * n, 0.0);
  for (const auto& [label, centroids] : dialect_centroids)
    m.labels.push_back(label);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t c = 0; c < words; ++c)
        sum += 1.0 - 2.0 * IsotropicSimilarity(dialect_centroids[i].second[c],
                                               dialect_centroids[j].second[c],
                                               sigma);
      m.d[i * n + j] = sum / static_cast<double>(words);
      m.d[j * n + i] = m.d[i * n + j];
    }
  }
  return m;
}

void WriteDissimilarityCsv(std::ostream& out, const DissimilarityMatrix& m) {
  out << "label";
  for (const std::string& l : m.labels) out << ',' << l;
  out << "\n";
  char buf[32];
  for (std::size_t i = 0; i < m.Size(); ++i) {
    out << m.labels[i];
    for (std::size_t j = 0; j < m.Size(); ++j) {
      std::snprintf(buf, sizeof(buf), ",%.17g", m.At(i, j));
      out << buf;
    }
    out << "\n";
  }
}

DissimilarityMatrix ReadDissimilarityCsv(std::istream& in,
                                         const std::string& source) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(source + ": empty dissimilarity file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  DissimilarityMatrix m;
  std::stringstream header(line);
  std::string cell;
  std::getline(header, cell, ',');  // corner cell
  while (std::getline(header, cell, ',')) m.labels.push_back(cell);
  const std::size_t n = m.labels.size();
  if (n < 2) throw std::runtime_error(source + ": need at least 2 labels");
  m.d.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error(source + ": truncated matrix");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream row(line);
    std::getline(row, cell, ',');
    if (cell != m.labels[i])
      throw std::runtime_error(source + ": row label '" + cell +
                               "' does not match header");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::getline(row, cell, ','))
        throw std::runtime_error(source + ": short row for " + m.labels[i]);
      std::size_t used = 0;
      m.d[i * n + j] = std::stod(cell, &used);
      if (used != cell.size())
        throw std::runtime_error(source + ": bad number '" + cell + "'");
    }
  }
  return m;
}

namespace {

// Adjacency walk collecting the edge indices on the unique a-to-b path.
bool CollectPath(const AdditiveTree& tree, std::size_t from, std::size_t to,
                 std::size_t parent_edge, std::vector<std::size_t>& path) {
  if (from == to) return true;
  for (std::size_t e = 0; e < tree.edges.size(); ++e) {
    if (e == parent_edge) continue;
    const auto& edge = tree.edges[e];
    std::size_t next;
    if (edge.a == from)
      next = edge.b;
    else if (edge.b == from)
      next = edge.a;
    else
      continue;
    path.push_back(e);
    if (CollectPath(tree, next, to, e, path)) return true;
    path.pop_back();
  }
  return false;
}

std::vector<std::size_t> LeafPath(const AdditiveTree& tree, std::size_t a,
                                  std::size_t b) {
  std::vector<std::size_t> path;
  if (!CollectPath(tree, a, b, tree.edges.size(), path))
    throw std::logic_error("additive tree: disconnected");
  return path;
}

}  // namespace

double AdditiveTree::PathDistance(std::size_t leaf_a, std::size_t leaf_b) const {
  double total = 0.0;
  for (std::size_t e : LeafPath(*this, leaf_a, leaf_b))
    total += edges[e].length;
  return total;
}

double AdditiveTree::TerminalBranch(std::size_t leaf) const {
  for (const Edge& e : edges)
    if (e.a == leaf || e.b == leaf) return e.length;
  throw std::invalid_argument("additive tree: no edge at leaf");
}

TreeFit FitAdditiveTree(const DissimilarityMatrix& d) {
  const std::size_t n = d.Size();
  if (n < 3)
    throw std::invalid_argument("tree fit: need at least 3 leaves");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (std::fabs(d.At(i, j) - d.At(j, i)) > 1e-12 ||
          (i == j && d.At(i, j) != 0.0))
        throw std::invalid_argument("tree fit: matrix not symmetric with zero "
                                    "diagonal");

  AdditiveTree tree;
  tree.leaf_labels = d.labels;
  tree.node_count = n;

  // Neighbor joining over the active node set; ties resolve to the
  // first minimal pair in activation order for determinism.
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = d.At(i, j);
  const auto get = [&dist](std::size_t a, std::size_t b) { return dist[a][b]; };

  while (active.size() > 3) {
    const std::size_t r = active.size();
    std::vector<double> row_sum(r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        row_sum[i] += get(active[i], active[j]);
    double best_q = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i + 1; j < r; ++j) {
        const double q = (static_cast<double>(r) - 2.0) *
                             get(active[i], active[j]) -
                         row_sum[i] - row_sum[j];
        if (q < best_q) {
          best_q = q;
          bi = i;
          bj = j;
        }
      }
    }
    const std::size_t u = tree.node_count++;
    const std::size_t a = active[bi], b = active[bj];
    tree.edges.push_back({a, u, 0.0});
    tree.edges.push_back({b, u, 0.0});
    for (auto& row : dist) row.push_back(0.0);
    dist.emplace_back(tree.node_count, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      if (k == bi || k == bj) continue;
      const std::size_t c = active[k];
      const double duc =
          0.5 * (get(a, c) + get(b, c) - get(a, b));
      dist[u][c] = duc;
      dist[c][u] = duc;
    }
    active.erase(active.begin() + static_cast<long>(bj));
    active.erase(active.begin() + static_cast<long>(bi));
    active.push_back(u);
  }

  // Final three nodes join at one hub.
  const std::size_t hub = tree.node_count++;
  for (std::size_t k = 0; k < 3; ++k)
    tree.edges.push_back({active[k], hub, 0.0});

  // Least-squares branch lengths over all leaf pairs, clamped to zero.
  const std::size_t pairs = n * (n - 1) / 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<long>(pairs),
                                            static_cast<long>(tree.edges.size()));
  Eigen::VectorXd rhs(static_cast<long>(pairs));
  std::size_t row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++row) {
      for (std::size_t e : LeafPath(tree, i, j))
        a(static_cast<long>(row), static_cast<long>(e)) = 1.0;
      rhs(static_cast<long>(row)) = d.At(i, j);
    }
  }
  Eigen::VectorXd lengths = a.colPivHouseholderQr().solve(rhs);
  for (std::size_t e = 0; e < tree.edges.size(); ++e)
    tree.edges[e].length = std::max(0.0, lengths(static_cast<long>(e)));

  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = tree.PathDistance(i, j) - d.At(i, j);
      sq += diff * diff;
    }
  }
  TreeFit fit;
  fit.tree = std::move(tree);
  fit.rmse = std::sqrt(sq / static_cast<double>(pairs));
  return fit;
}

namespace {

void NewickNode(const AdditiveTree& tree, std::size_t node,
                std::size_t parent_edge, std::ostream& out) {
  std::vector<std::pair<std::size_t, std::size_t>> children;  // (edge, node)
  for (std::size_t e = 0; e < tree.edges.size(); ++e) {
    if (e == parent_edge) continue;
    const auto& edge = tree.edges[e];
    if (edge.a == node)
      children.emplace_back(e, edge.b);
    else if (edge.b == node)
      children.emplace_back(e, edge.a);
  }
  if (children.empty()) {
    out << tree.leaf_labels[node];
    return;
  }
  out << '(';
  for (std::size_t c = 0; c < children.size(); ++c) {
    if (c > 0) out << ',';
    NewickNode(tree, children[c].second, children[c].first, out);
    char buf[32];
    std::snprintf(buf, sizeof(buf), ":%.10g",
                  tree.edges[children[c].first].length);
    out << buf;
  }
  out << ')';
}

}  // namespace

std::string NewickString(const AdditiveTree& tree) {
  std::ostringstream out;
  NewickNode(tree, tree.node_count - 1, tree.edges.size(), out);
  out << ';';
  return out.str();
}

double WakewordConfusion(const std::string& target,
                         const EmbeddingIndex& vocabulary, const UnigramLM& lm,
                         double sigma, double alpha) {
  if (sigma <= 0.0)
    throw std::invalid_argument("wakeword: sigma must be positive");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("wakeword: alpha must lie in [0, 1]");
  const IndexEntry* target_entry = nullptr;
  for (const IndexEntry& e : vocabulary)
    if (e.label == target) {
      target_entry = &e;
      break;
    }
  if (target_entry == nullptr)
    throw std::invalid_argument("wakeword: target '" + target +
                                "' not in embedding table");
  std::vector<double> terms;
  for (const IndexEntry& e : vocabulary) {
    if (e.label == target) continue;
    if (!lm.Contains(e.label))
      throw std::invalid_argument("wakeword: word '" + e.label +
                                  "' missing from language model");
    const double dist2 = kernels::SquaredDistance(target_entry->vec, e.vec);
    terms.push_back((alpha - 1.0) *
                        (dist2 / (8.0 * sigma * sigma) + std::log(2.0)) +
                    alpha * std::log(lm.Probability(e.label)));
  }
  if (terms.empty())
    throw std::invalid_argument(
        "wakeword: vocabulary empty after excluding target");
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

void WriteWakewordReport(std::ostream& out,
                         const std::vector<WakewordRow>& rows) {
  out << "word,alpha,log_expected_confusion\n";
  char buf[64];
  for (const WakewordRow& row : rows) {
    std::snprintf(buf, sizeof(buf), ",%.12g,%.12g\n", row.alpha,
                  row.log_expected_confusion);
    out << row.word << buf;
  }
}

LengthDistribution PronunciationLengthDistribution(const Lexicon& lexicon,
                                                   const UnigramLM& lm) {
  if (!lm.Finalized())
    throw std::invalid_argument("length distribution: LM not finalized");
  std::string missing;
  for (const std::string& word : lm.Words())
    if (!lexicon.ContainsWord(word)) missing += " " + word;
  if (!missing.empty())
    throw std::invalid_argument(
        "length distribution: LM words missing from lexicon:" + missing);
  LengthDistribution dist;
  for (const std::string& word : lm.Words()) {
    const auto& prons = lexicon.PronunciationsOf(word);
    const double per_pron =
        lm.Probability(word) / static_cast<double>(prons.size());
    for (std::size_t idx : prons)
      dist.probs[lexicon.Entries()[idx].phones.symbols.size()] += per_pron;
  }
  dist.Validate();
  return dist;
}

void WriteLengthDistributionCsv(std::ostream& out,
                                const LengthDistribution& dist) {
  out << "length,probability\n";
  char buf[48];
  for (const auto& [length, prob] : dist.probs) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", length, prob);
    out << buf;
  }
}

}  // namespace ane
