// synthdata.cpp
//
// Synthetic corpus generation and the ANECORP1 container.

#include "ane/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "binio.hpp"
#include "ane/rng.hpp"

namespace ane {
namespace {

// Fixed stream for vocabulary sampling. Decoupled from SynthConfig::seed
// so corpora that differ only in seed share the same word list.
constexpr std::uint64_t kVocabStream = 0x5ca1ab1e0c0ffee5ULL;

constexpr int kMaxSampleRetries = 1000;

// Phone names double as spelling units: one lowercase letter for small
// inventories, two for anything up to 26^2.
std::string PhoneName(std::size_t id, std::size_t inventory) {
  if (inventory <= kGraphemeAlphabet)
    return std::string(1, static_cast<char>('a' + id));
  std::string name(2, 'a');
  name[0] = static_cast<char>('a' + id / kGraphemeAlphabet);
  name[1] = static_cast<char>('a' + id % kGraphemeAlphabet);
  return name;
}

std::string SpellWord(const std::vector<SymbolId>& pron,
                      std::size_t inventory) {
  std::string word;
  for (const SymbolId p : pron)
    word += PhoneName(static_cast<std::size_t>(p), inventory);
  return word;
}

// Draws one pronunciation length: from the target distribution when one
// is configured, else uniformly from the configured range.
std::size_t SampleLength(const SynthConfig& config, Rng& rng) {
  if (config.target_lengths.probs.empty())
    return static_cast<std::size_t>(
        rng.UniformInt(static_cast<std::int64_t>(config.min_word_length),
                       static_cast<std::int64_t>(config.max_word_length)));
  const double u = rng.Uniform();
  double cum = 0.0;
  for (const auto& [len, p] : config.target_lengths.probs) {
    cum += p;
    if (u < cum) return len;
  }
  return config.target_lengths.probs.rbegin()->first;
}

std::vector<SymbolId> SamplePron(std::size_t length, std::size_t inventory,
                                 Rng& rng) {
  std::vector<SymbolId> pron(length);
  for (auto& p : pron)
    p = static_cast<SymbolId>(
        rng.UniformInt(0, static_cast<std::int64_t>(inventory) - 1));
  return pron;
}

// Samples `count` distinct pronunciations. Collisions are resampled at
// the same length so deduplication cannot skew the length histogram.
std::vector<std::vector<SymbolId>> SampleVocabulary(const SynthConfig& config,
                                                    std::size_t count,
                                                    Rng& rng) {
  std::set<std::vector<SymbolId>> seen;
  std::vector<std::vector<SymbolId>> prons;
  prons.reserve(count);
  while (prons.size() < count) {
    const std::size_t length = SampleLength(config, rng);
    int tries = 0;
    for (;;) {
      std::vector<SymbolId> pron =
          SamplePron(length, config.phone_count, rng);
      if (seen.insert(pron).second) {
        prons.push_back(std::move(pron));
        break;
      }
      if (++tries >= kMaxSampleRetries)
        throw std::invalid_argument(
            "synth: inventory too small for the requested number of "
            "distinct pronunciations");
    }
  }
  return prons;
}

// One phone segment: softmax((one-hot + shift logits) / jitter blend).
void EmitPhoneFrames(const SynthConfig& config, SymbolId phone,
                     const EmbeddingVec* shift, Rng& rng,
                     Utterance* utt) {
  const std::size_t dim = config.phone_count;
  const std::size_t frames = static_cast<std::size_t>(
      rng.UniformInt(static_cast<std::int64_t>(config.min_duration),
                     static_cast<std::int64_t>(config.max_duration)));
  std::vector<double> logits(dim);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < dim; ++k) {
      logits[k] = (static_cast<std::size_t>(phone) == k ? 1.0 : 0.0) /
                  config.temperature;
      if (config.jitter_sigma > 0.0)
        logits[k] += config.jitter_sigma * rng.Normal();
      if (shift != nullptr) logits[k] += (*shift)[k];
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    const std::size_t at = utt->frames.size();
    for (std::size_t k = 0; k < dim; ++k) {
      const double e = std::exp(logits[k] - peak);
      utt->frames.push_back(e);
      total += e;
    }
    for (std::size_t k = 0; k < dim; ++k) utt->frames[at + k] /= total;
    ++utt->frame_count;
  }
}

}  // namespace

void SynthConfig::Validate() const {
  if (phone_count < 2)
    throw std::invalid_argument("synth: phone_count must be at least 2");
  if (phone_count > kGraphemeAlphabet * kGraphemeAlphabet)
    throw std::invalid_argument("synth: phone_count exceeds the alphabet");
  if (min_duration < 1 || min_duration > max_duration)
    throw std::invalid_argument("synth: bad duration range");
  if (!(temperature > 0.0))
    throw std::invalid_argument("synth: temperature must be positive");
  if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma))
    throw std::invalid_argument("synth: jitter_sigma must be finite and >= 0");
  if (word_count == 0)
    throw std::invalid_argument("synth: word_count must be positive");
  if (target_lengths.probs.empty()) {
    if (min_word_length < 1 || min_word_length > max_word_length)
      throw std::invalid_argument("synth: bad word length range");
  } else {
    target_lengths.Validate();
    if (target_lengths.probs.begin()->first < 1)
      throw std::invalid_argument("synth: target lengths must be >= 1");
  }
  if (samples_per_word < 2)
    throw std::invalid_argument("synth: samples_per_word must be at least 2");
  for (const EmbeddingVec& shift : dialect_shifts) {
    if (shift.size() != phone_count)
      throw std::invalid_argument(
          "synth: dialect shift dimension must equal phone_count");
    for (const double x : shift)
      if (!std::isfinite(x))
        throw std::invalid_argument("synth: dialect shift must be finite");
  }
}

GraphemeSeq GraphemesOf(const std::string& word) {
  GraphemeSeq seq;
  seq.symbols.reserve(word.size());
  for (const char c : word) {
    if (c < 'a' || c > 'z')
      throw std::invalid_argument("graphemes: character outside a-z in '" +
                                  word + "'");
    seq.symbols.push_back(static_cast<SymbolId>(c - 'a'));
  }
  return seq;
}

SynthCorpus GenerateCorpus(const SynthConfig& config) {
  config.Validate();

  SynthCorpus corpus;
  // Intern the full inventory up front so phone id == one-hot index.
  for (std::size_t p = 0; p < config.phone_count; ++p)
    corpus.lexicon.Phones().Intern(PhoneName(p, config.phone_count));

  Rng vocab_rng(kVocabStream);
  const auto prons = SampleVocabulary(config, config.word_count, vocab_rng);
  for (const auto& pron : prons) {
    std::vector<std::string> names;
    names.reserve(pron.size());
    for (const SymbolId p : pron)
      names.push_back(PhoneName(static_cast<std::size_t>(p),
                                config.phone_count));
    corpus.lexicon.Add(SpellWord(pron, config.phone_count), names);
  }

  corpus.utterances = RenderCorpus(config, corpus.lexicon);
  return corpus;
}

std::vector<Utterance> RenderCorpus(const SynthConfig& config,
                                    const Lexicon& lexicon) {
  config.Validate();
  if (lexicon.Size() == 0)
    throw std::invalid_argument("synth: empty lexicon");
  if (lexicon.Phones().Size() > config.phone_count)
    throw std::invalid_argument(
        "synth: lexicon inventory exceeds phone_count");

  const std::size_t groups =
      config.dialect_shifts.empty() ? 1 : config.dialect_shifts.size();
  const Rng master(config.seed);
  std::vector<Utterance> utterances;
  utterances.reserve(lexicon.Size() * config.samples_per_word);
  for (std::size_t e = 0; e < lexicon.Size(); ++e) {
    const LexiconEntry& entry = lexicon.Entries()[e];
    for (std::size_t s = 0; s < config.samples_per_word; ++s) {
      const std::size_t index = e * config.samples_per_word + s;
      Rng sub = master.Spawn(index);
      Utterance utt;
      utt.word = entry.word;
      utt.phones = entry.phones;
      utt.graphemes = GraphemesOf(entry.word);
      utt.frame_dim = config.phone_count;
      const std::size_t group = s % groups;
      utt.dialect = static_cast<std::int32_t>(group);
      const EmbeddingVec* shift =
          config.dialect_shifts.empty() ? nullptr
                                        : &config.dialect_shifts[group];
      for (const SymbolId phone : entry.phones.symbols)
        EmitPhoneFrames(config, phone, shift, sub, &utt);
      utterances.push_back(std::move(utt));
    }
  }
  return utterances;
}

Lexicon ConfusablePairVocabulary(const SynthConfig& config,
                                 std::size_t pairs) {
  config.Validate();
  if (pairs == 0)
    throw std::invalid_argument("synth: pair count must be positive");

  Rng rng(kVocabStream);
  std::set<std::vector<SymbolId>> seen;
  Lexicon lex;
  for (std::size_t p = 0; p < config.phone_count; ++p)
    lex.Phones().Intern(PhoneName(p, config.phone_count));

  const auto random_phone = [&rng, &config]() {
    return static_cast<SymbolId>(
        rng.UniformInt(0, static_cast<std::int64_t>(config.phone_count) - 1));
  };
  for (std::size_t made = 0; made < pairs;) {
    int tries = 0;
    for (;;) {
      const std::size_t length = SampleLength(config, rng);
      std::vector<SymbolId> base =
          SamplePron(length, config.phone_count, rng);
      std::vector<SymbolId> variant = base;
      // Deletion needs length >= 2 to keep the variant non-empty.
      const std::int64_t ops = base.size() >= 2 ? 3 : 2;
      switch (rng.UniformInt(0, ops - 1)) {
        case 0: {  // substitution
          const std::size_t at = static_cast<std::size_t>(
              rng.UniformInt(0, static_cast<std::int64_t>(base.size()) - 1));
          SymbolId other = random_phone();
          while (other == base[at]) other = random_phone();
          variant[at] = other;
          break;
        }
        case 1: {  // insertion
          const std::size_t at = static_cast<std::size_t>(
              rng.UniformInt(0, static_cast<std::int64_t>(base.size())));
          variant.insert(variant.begin() + static_cast<std::ptrdiff_t>(at),
                         random_phone());
          break;
        }
        default: {  // deletion
          const std::size_t at = static_cast<std::size_t>(
              rng.UniformInt(0, static_cast<std::int64_t>(base.size()) - 1));
          variant.erase(variant.begin() + static_cast<std::ptrdiff_t>(at));
          break;
        }
      }
      if (seen.count(base) == 0 && seen.count(variant) == 0) {
        seen.insert(base);
        seen.insert(variant);
        for (const auto& pron : {base, variant}) {
          std::vector<std::string> names;
          for (const SymbolId s : pron)
            names.push_back(PhoneName(static_cast<std::size_t>(s),
                                      config.phone_count));
          lex.Add(SpellWord(pron, config.phone_count), names);
        }
        ++made;
        break;
      }
      if (++tries >= kMaxSampleRetries)
        throw std::invalid_argument(
            "synth: inventory too small for the requested pair count");
    }
  }
  return lex;
}

void WriteCorpus(std::ostream& out,
                 const std::vector<Utterance>& utterances) {
  if (utterances.empty())
    throw std::invalid_argument("corpus write: no utterances");
  binio::WriteMagic(out, "ANECORP1");
  binio::WriteU32(out, static_cast<std::uint32_t>(utterances.size()));
  for (const Utterance& utt : utterances) {
    ValidateUtterance(utt);
    binio::WriteString(out, utt.word);
    binio::WriteU32(out, static_cast<std::uint32_t>(utt.phones.symbols.size()));
    for (const SymbolId s : utt.phones.symbols)
      binio::WriteU32(out, static_cast<std::uint32_t>(s));
    binio::WriteU32(out,
                    static_cast<std::uint32_t>(utt.graphemes.symbols.size()));
    for (const SymbolId s : utt.graphemes.symbols)
      binio::WriteU32(out, static_cast<std::uint32_t>(s));
    binio::WriteU32(out, static_cast<std::uint32_t>(utt.dialect));
    binio::WriteU32(out, static_cast<std::uint32_t>(utt.frame_count));
    binio::WriteU32(out, static_cast<std::uint32_t>(utt.frame_dim));
    for (const double x : utt.frames)
      binio::WriteF32(out, static_cast<float>(x));
  }
  if (!out) throw std::runtime_error("corpus write: stream failure");
}

std::vector<Utterance> ReadCorpus(std::istream& in,
                                  const std::string& source) {
  binio::ExpectMagic(in, "ANECORP1", source);
  const std::uint32_t count = binio::ReadU32(in, source, "utterance count");
  if (count == 0) throw std::runtime_error(source + ": empty corpus");
  std::vector<Utterance> utterances;
  utterances.reserve(count);
  for (std::uint32_t u = 0; u < count; ++u) {
    Utterance utt;
    utt.word = binio::ReadString(in, source, "word");
    const std::uint32_t phones = binio::ReadU32(in, source, "phone count");
    utt.phones.symbols.resize(phones);
    for (auto& s : utt.phones.symbols)
      s = static_cast<SymbolId>(binio::ReadU32(in, source, "phone id"));
    const std::uint32_t graphemes =
        binio::ReadU32(in, source, "grapheme count");
    utt.graphemes.symbols.resize(graphemes);
    for (auto& s : utt.graphemes.symbols)
      s = static_cast<SymbolId>(binio::ReadU32(in, source, "grapheme id"));
    utt.dialect =
        static_cast<std::int32_t>(binio::ReadU32(in, source, "dialect id"));
    utt.frame_count = binio::ReadU32(in, source, "frame count");
    utt.frame_dim = binio::ReadU32(in, source, "frame dim");
    utt.frames.resize(utt.frame_count * utt.frame_dim);
    for (auto& x : utt.frames)
      x = static_cast<double>(binio::ReadF32(in, source, "frame value"));
    ValidateUtterance(utt);
    utterances.push_back(std::move(utt));
  }
  return utterances;
}

void WriteCorpusFile(const std::string& path,
                     const std::vector<Utterance>& utterances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open corpus file: " + path);
  WriteCorpus(out, utterances);
}

std::vector<Utterance> ReadCorpusFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return ReadCorpus(in, path);
}

}  // namespace ane
