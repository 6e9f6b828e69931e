// types.cpp

#include "ane/types.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ane {

SymbolId SymbolInventory::Intern(const std::string &name) {
  if (name.empty()) throw std::invalid_argument("SymbolInventory: empty symbol name");
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  SymbolId id = static_cast<SymbolId>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  return id;
}

SymbolId SymbolInventory::Lookup(const std::string &name) const {
  auto it = ids_.find(name);
  if (it == ids_.end())
    throw std::invalid_argument("SymbolInventory: unknown symbol '" + name + "'");
  return it->second;
}

bool SymbolInventory::Contains(const std::string &name) const {
  return ids_.find(name) != ids_.end();
}

const std::string &SymbolInventory::Name(SymbolId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size())
    throw std::invalid_argument("SymbolInventory: id out of range");
  return names_[static_cast<std::size_t>(id)];
}

std::string FoldStress(const std::string &phone_name) {
  if (phone_name.size() >= 2 &&
      std::isdigit(static_cast<unsigned char>(phone_name.back())))
    return phone_name.substr(0, phone_name.size() - 1);
  return phone_name;
}

GaussianSpec GaussianSpec::Isotropic(EmbeddingVec mean, double sigma2) {
  if (mean.empty()) throw std::invalid_argument("GaussianSpec: empty mean");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("GaussianSpec: sigma^2 must be positive");
  GaussianSpec g;
  g.mean = std::move(mean);
  g.sigma2 = sigma2;
  return g;
}

GaussianSpec GaussianSpec::Full(EmbeddingVec mean, std::vector<double> covariance) {
  if (mean.empty()) throw std::invalid_argument("GaussianSpec: empty mean");
  const std::size_t d = mean.size();
  if (covariance.size() != d * d)
    throw std::invalid_argument("GaussianSpec: covariance shape mismatch");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::fabs(covariance[i * d + j] - covariance[j * d + i]) > 1e-12)
        throw std::invalid_argument("GaussianSpec: covariance not symmetric");
  GaussianSpec g;
  g.mean = std::move(mean);
  g.covariance = std::move(covariance);
  return g;
}

double GaussianSpec::Cov(std::size_t i, std::size_t j) const {
  const std::size_t d = Dim();
  if (i >= d || j >= d) throw std::invalid_argument("GaussianSpec: index out of range");
  if (IsIsotropic()) return i == j ? sigma2 : 0.0;
  return covariance[i * d + j];
}

void LengthDistribution::Validate() const {
  if (probs.empty()) throw std::invalid_argument("length distribution: empty");
  double total = 0.0;
  for (const auto &[len, p] : probs) {
    if (len == 0) throw std::invalid_argument("length distribution: zero length");
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("length distribution: probabilities must be positive");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("length distribution: probabilities must sum to 1");
}

void ValidateEmbedding(const EmbeddingVec &v) {
  if (v.empty()) throw std::invalid_argument("embedding: empty vector");
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument("embedding: non-finite entry");
}

void ValidateUtterance(const Utterance &utt, bool posterior_like) {
  if (utt.frame_count == 0 || utt.frame_dim == 0)
    throw std::invalid_argument("utterance: empty frames");
  if (utt.frames.size() != utt.frame_count * utt.frame_dim)
    throw std::invalid_argument("utterance: frame buffer size mismatch");
  if (utt.phones.symbols.empty())
    throw std::invalid_argument("utterance: empty phone sequence");
  for (double x : utt.frames)
    if (!std::isfinite(x)) throw std::invalid_argument("utterance: non-finite frame entry");
  if (posterior_like) {
    for (std::size_t t = 0; t < utt.frame_count; ++t) {
      const double *row = utt.Frame(t);
      double sum = 0.0;
      for (std::size_t k = 0; k < utt.frame_dim; ++k) {
        if (row[k] < 0.0 || row[k] > 1.0)
          throw std::invalid_argument("utterance: frame entry outside [0,1]");
        sum += row[k];
      }
      if (std::fabs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("utterance: frame does not sum to 1");
    }
  }
}

std::string PronunciationString(const PhoneSeq &seq, const SymbolInventory &inv) {
  std::ostringstream out;
  for (std::size_t i = 0; i < seq.symbols.size(); ++i) {
    if (i) out << ' ';
    out << inv.Name(seq.symbols[i]);
  }
  return out.str();
}

}  // namespace ane
