// lexicon.cpp

#include "ane/lexicon.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace ane {
namespace {

std::runtime_error ParseError(const std::string &source, std::size_t line_no,
                              const std::string &what) {
  std::ostringstream msg;
  msg << source << ":" << line_no << ": " << what;
  return std::runtime_error(msg.str());
}

// Splits on the first tab only; the payload may itself contain spaces.
bool SplitTab(const std::string &line, std::string *key, std::string *payload) {
  auto tab = line.find('\t');
  if (tab == std::string::npos) return false;
  *key = line.substr(0, tab);
  *payload = line.substr(tab + 1);
  return true;
}

std::vector<std::string> SplitSpaces(const std::string &s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

void Lexicon::Add(const std::string &word, const std::vector<std::string> &phone_names,
                  bool fold_stress) {
  if (word.empty()) throw std::invalid_argument("lexicon: empty word");
  if (phone_names.empty())
    throw std::invalid_argument("lexicon: empty pronunciation for '" + word + "'");
  PhoneSeq seq;
  seq.symbols.reserve(phone_names.size());
  for (const auto &name : phone_names)
    seq.symbols.push_back(phones_.Intern(fold_stress ? FoldStress(name) : name));
  auto it = by_word_.find(word);
  if (it != by_word_.end()) {
    for (std::size_t idx : it->second)
      if (entries_[idx].phones == seq)
        throw std::invalid_argument("lexicon: duplicate pronunciation for '" + word + "'");
  } else {
    word_order_.push_back(word);
  }
  by_word_[word].push_back(entries_.size());
  entries_.push_back(LexiconEntry{word, std::move(seq)});
}

bool Lexicon::ContainsWord(const std::string &word) const {
  return by_word_.find(word) != by_word_.end();
}

const std::vector<std::size_t> &Lexicon::PronunciationsOf(const std::string &word) const {
  auto it = by_word_.find(word);
  if (it == by_word_.end())
    throw std::invalid_argument("lexicon: unknown word '" + word + "'");
  return it->second;
}

std::vector<std::string> Lexicon::Words() const { return word_order_; }

void UnigramLM::Add(const std::string &word, double probability) {
  if (finalized_) throw std::logic_error("unigram: add after finalize");
  if (word.empty()) throw std::invalid_argument("unigram: empty word");
  if (!(probability > 0.0) || !std::isfinite(probability))
    throw std::invalid_argument("unigram: probability for '" + word + "' must be positive");
  if (probs_.count(word))
    throw std::invalid_argument("unigram: duplicate word '" + word + "'");
  probs_.emplace(word, probability);
  word_order_.push_back(word);
}

void UnigramLM::Finalize() {
  if (word_order_.empty()) throw std::logic_error("unigram: empty distribution");
  double total = 0.0;
  for (const auto &w : word_order_) total += probs_[w];
  for (auto &kv : probs_) kv.second /= total;
  finalized_ = true;
}

bool UnigramLM::Contains(const std::string &word) const { return probs_.count(word) > 0; }

double UnigramLM::Probability(const std::string &word) const {
  if (!finalized_) throw std::logic_error("unigram: query before finalize");
  auto it = probs_.find(word);
  if (it == probs_.end())
    throw std::invalid_argument("unigram: unknown word '" + word + "'");
  return it->second;
}

Lexicon ReadLexicon(std::istream &in, const std::string &source_name, bool fold_stress) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string word, payload;
    if (!SplitTab(line, &word, &payload))
      throw ParseError(source_name, line_no, "expected word<TAB>phones");
    if (word.empty()) throw ParseError(source_name, line_no, "empty word field");
    auto names = SplitSpaces(payload);
    if (names.empty()) throw ParseError(source_name, line_no, "empty pronunciation");
    try {
      lex.Add(word, names, fold_stress);
    } catch (const std::invalid_argument &e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  if (lex.Size() == 0) throw std::runtime_error(source_name + ": no lexicon entries");
  return lex;
}

Lexicon ReadLexiconFile(const std::string &path, bool fold_stress) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  return ReadLexicon(in, path, fold_stress);
}

UnigramLM ReadUnigramLM(std::istream &in, const std::string &source_name) {
  UnigramLM lm;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string word, payload;
    if (!SplitTab(line, &word, &payload))
      throw ParseError(source_name, line_no, "expected word<TAB>probability");
    std::size_t pos = 0;
    double p = 0.0;
    try {
      p = std::stod(payload, &pos);
    } catch (const std::exception &) {
      throw ParseError(source_name, line_no, "bad probability '" + payload + "'");
    }
    while (pos < payload.size() &&
           std::isspace(static_cast<unsigned char>(payload[pos])))
      ++pos;
    if (pos != payload.size())
      throw ParseError(source_name, line_no, "trailing junk after probability");
    try {
      lm.Add(word, p);
    } catch (const std::invalid_argument &e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  lm.Finalize();
  return lm;
}

UnigramLM ReadUnigramLMFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open unigram file: " + path);
  return ReadUnigramLM(in, path);
}

void WriteLexicon(std::ostream &out, const Lexicon &lex) {
  for (const LexiconEntry &entry : lex.Entries())
    out << entry.word << '\t'
        << PronunciationString(entry.phones, lex.Phones()) << '\n';
  if (!out) throw std::runtime_error("lexicon write: stream failure");
}

void WriteLexiconFile(const std::string &path, const Lexicon &lex) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open lexicon file: " + path);
  WriteLexicon(out, lex);
}

void WriteUnigramLM(std::ostream &out, const UnigramLM &lm) {
  if (!lm.Finalized()) throw std::invalid_argument("unigram write: not finalized");
  char buf[64];
  for (const std::string &word : lm.Words()) {
    std::snprintf(buf, sizeof buf, "%.17g", lm.Probability(word));
    out << word << '\t' << buf << '\n';
  }
  if (!out) throw std::runtime_error("unigram write: stream failure");
}

void WriteUnigramLMFile(const std::string &path, const UnigramLM &lm) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open unigram file: " + path);
  WriteUnigramLM(out, lm);
}

}  // namespace ane

