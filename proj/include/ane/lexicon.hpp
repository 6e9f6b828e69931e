// ane/lexicon.hpp
//
// Pronunciation lexicon and unigram word distribution, plus the TSV
// readers for both. A word may carry several pronunciations (one line
// each in the file).

#ifndef ANE_LEXICON_HPP
#define ANE_LEXICON_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "ane/types.hpp"

namespace ane {

struct LexiconEntry {
  std::string word;
  PhoneSeq phones;
};

// Ordered list of (word, pronunciation) pairs with a word index. Entry
// order follows the source file; duplicate exact (word, pronunciation)
// lines are rejected.
class Lexicon {
 public:
  // `fold_stress` merges stress-marked phone variants at intern time.
  void Add(const std::string &word, const std::vector<std::string> &phone_names,
           bool fold_stress = false);

  const std::vector<LexiconEntry> &Entries() const { return entries_; }
  std::size_t Size() const { return entries_.size(); }

  bool ContainsWord(const std::string &word) const;
  // Indices into Entries() for one word, in file order.
  const std::vector<std::size_t> &PronunciationsOf(const std::string &word) const;
  std::vector<std::string> Words() const;  // first-seen order

  SymbolInventory &Phones() { return phones_; }
  const SymbolInventory &Phones() const { return phones_; }

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_word_;
  std::vector<std::string> word_order_;
  SymbolInventory phones_;
};

// Unigram distribution over words. Probabilities must be positive and
// are renormalized to sum to 1 on Finalize().
class UnigramLM {
 public:
  void Add(const std::string &word, double probability);
  void Finalize();

  bool Contains(const std::string &word) const;
  double Probability(const std::string &word) const;
  const std::vector<std::string> &Words() const { return word_order_; }
  bool Finalized() const { return finalized_; }

 private:
  std::unordered_map<std::string, double> probs_;
  std::vector<std::string> word_order_;
  bool finalized_ = false;
};

// Readers parse "word<TAB>payload" lines; '#' lines and blank lines are
// skipped. Malformed lines raise std::runtime_error naming the line.
Lexicon ReadLexicon(std::istream &in, const std::string &source_name,
                    bool fold_stress = false);
Lexicon ReadLexiconFile(const std::string &path, bool fold_stress = false);

UnigramLM ReadUnigramLM(std::istream &in, const std::string &source_name);
UnigramLM ReadUnigramLMFile(const std::string &path);

// Writers emit the same TSV the readers parse, one entry per line in
// entry order (lexicon) or first-seen order (LM).
void WriteLexicon(std::ostream &out, const Lexicon &lex);
void WriteLexiconFile(const std::string &path, const Lexicon &lex);
void WriteUnigramLM(std::ostream &out, const UnigramLM &lm);
void WriteUnigramLMFile(const std::string &path, const UnigramLM &lm);

}  // namespace ane

#endif  // ANE_LEXICON_HPP
