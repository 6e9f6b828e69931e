// ane.cpp
//
// Command-line driver for the embedding toolkit. Subcommands cover
// synthetic-corpus generation, audio/text encoder training, word
// classification, OOV recovery, dialect clustering, wake-word confusion
// sweeps, the cluster-dynamics simulator, per-epoch isotropy
// diagnostics, and pronunciation-length reports. Every subcommand reads
// an optional flat config file plus flags and writes its artifacts into
// --out-dir; any failure exits nonzero with a single "ERROR: ..." line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ane/diagnostics.hpp"
#include "ane/encoder.hpp"
#include "ane/lexicon.hpp"
#include "ane/lexicon_analysis.hpp"
#include "ane/rng.hpp"
#include "ane/search.hpp"
#include "ane/simulator.hpp"
#include "ane/synthdata.hpp"
#include "ane/trainer.hpp"
#include "ane/types.hpp"

#include "config.hpp"

namespace fs = std::filesystem;
using anecli::Config;

namespace {

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Flag wins over config key; config key wins over the fallback.
double PickNum(const CLI::Option* opt, double flag_value, const Config& cfg,
               const std::string& key, double fallback) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  return cfg.Num(key, fallback);
}

std::size_t PickCount(const CLI::Option* opt, std::size_t flag_value,
                      const Config& cfg, const std::string& key,
                      std::size_t fallback) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  return cfg.Count(key, fallback);
}

std::string PickStr(const CLI::Option* opt, const std::string& flag_value,
                    const Config& cfg, const std::string& key,
                    const std::string& fallback) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  return cfg.Str(key, fallback);
}

std::vector<std::string> SplitWords(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

// Writes through `body`, then verifies the file landed non-empty.
template <typename Body>
void WriteTextFile(const std::string& path, Body body) {
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output: " + path);
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
  }
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec || size == 0)
    throw std::runtime_error("output missing or empty: " + path);
}

std::vector<std::pair<std::string, ane::EmbeddingVec>> LabeledEmbeddings(
    const std::vector<ane::Utterance>& corpus,
    const ane::EncoderParams& audio) {
  std::vector<std::pair<std::string, ane::EmbeddingVec>> labeled;
  labeled.reserve(corpus.size());
  for (const ane::Utterance& utt : corpus)
    labeled.emplace_back(utt.word, ane::EncodeAudio(audio, utt));
  return labeled;
}

// Word-cluster spread estimate used wherever a similarity sigma is
// needed and the user did not pin one.
double EstimateSigma(const std::vector<ane::Utterance>& corpus,
                     const ane::EncoderParams& audio) {
  const ane::ClusterStatsResult stats =
      ane::ComputeClusterStats(LabeledEmbeddings(corpus, audio));
  if (!(stats.global_sigma > 0.0))
    throw std::runtime_error("sigma estimate is degenerate; pass --sigma");
  return stats.global_sigma;
}

ane::EmbeddingVec EmbedEntry(const ane::EncoderParams& text,
                             const ane::LexiconEntry& entry) {
  if (text.kind == ane::EncoderKind::kGrapheme)
    return ane::EncodeText(text, ane::GraphemesOf(entry.word));
  return ane::EncodeText(text, entry.phones);
}

ane::TrainConfig BaseTrainConfig(const Config& cfg, std::uint64_t seed) {
  ane::TrainConfig tc;
  tc.microbatch_size = cfg.Count("microbatch", tc.microbatch_size);
  tc.microbatches_per_minibatch =
      cfg.Count("minibatch", tc.microbatches_per_minibatch);
  tc.learning_rate = cfg.Num("learning_rate", 0.005);
  const std::string opt = cfg.Str("optimizer", "adam");
  if (opt == "adam")
    tc.optimizer = ane::OptimizerKind::kAdam;
  else if (opt == "sgd")
    tc.optimizer = ane::OptimizerKind::kSgd;
  else
    throw std::runtime_error("optimizer must be adam or sgd, got '" + opt +
                             "'");
  tc.max_epochs = cfg.Count("epochs", 30);
  tc.patience = cfg.Count("patience", tc.patience);
  tc.cv_fraction = cfg.Num("cv_fraction", tc.cv_fraction);
  tc.hidden = cfg.Count("hidden", tc.hidden);
  tc.embed_dim = cfg.Count("embed_dim", tc.embed_dim);
  tc.seed = seed;
  return tc;
}

void PrintWarnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "note: " << w << "\n";
}

// ---------------------------------------------------------------------
// synth-gen

struct SynthGenArgs {
  CLI::Option *words = nullptr, *phones = nullptr, *samples = nullptr,
              *pairs = nullptr, *dialects = nullptr, *dialect_scale = nullptr,
              *jitter = nullptr, *temperature = nullptr;
  std::size_t words_v = 0, phones_v = 0, samples_v = 0, pairs_v = 0,
              dialects_v = 0;
  double dialect_scale_v = 0.0, jitter_v = 0.0, temperature_v = 0.0;
};

void RunSynthGen(const Config& cfg, const SynthGenArgs& a,
                 const std::string& out_dir, std::uint64_t seed) {
  ane::SynthConfig sc;
  sc.phone_count = PickCount(a.phones, a.phones_v, cfg, "phones", 8);
  sc.min_duration = cfg.Count("min_duration", 2);
  sc.max_duration = cfg.Count("max_duration", 4);
  sc.temperature =
      PickNum(a.temperature, a.temperature_v, cfg, "temperature", 0.25);
  sc.jitter_sigma = PickNum(a.jitter, a.jitter_v, cfg, "jitter_sigma", 1.0);
  sc.word_count = PickCount(a.words, a.words_v, cfg, "words", 50);
  sc.min_word_length = cfg.Count("min_word_length", 2);
  sc.max_word_length = cfg.Count("max_word_length", 5);
  sc.samples_per_word =
      PickCount(a.samples, a.samples_v, cfg, "samples_per_word", 10);
  sc.seed = seed;

  const std::size_t groups =
      PickCount(a.dialects, a.dialects_v, cfg, "dialect_groups", 0);
  const double shift_scale = PickNum(a.dialect_scale, a.dialect_scale_v, cfg,
                                     "dialect_shift_scale", 1.0);
  if (groups > 0) {
    // Group 0 is the unshifted reference; later groups get a fixed
    // random logit offset so corpora agree across runs.
    sc.dialect_shifts.assign(groups,
                             ane::EmbeddingVec(sc.phone_count, 0.0));
    for (std::size_t g = 1; g < groups; ++g) {
      ane::Rng shift_rng(0xd1a1ec70ULL + g);
      for (double& x : sc.dialect_shifts[g])
        x = shift_scale * shift_rng.Normal();
    }
  }

  const std::size_t pairs = PickCount(a.pairs, a.pairs_v, cfg, "pairs", 0);
  ane::Lexicon lexicon;
  std::vector<ane::Utterance> utterances;
  if (pairs > 0) {
    lexicon = ane::ConfusablePairVocabulary(sc, pairs);
    utterances = ane::RenderCorpus(sc, lexicon);
  } else {
    ane::SynthCorpus corpus = ane::GenerateCorpus(sc);
    lexicon = std::move(corpus.lexicon);
    utterances = std::move(corpus.utterances);
  }

  ane::UnigramLM lm;
  const std::string lm_kind = cfg.Str("lm", "uniform");
  const std::vector<std::string> words = lexicon.Words();
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (lm_kind == "uniform")
      lm.Add(words[i], 1.0);
    else if (lm_kind == "zipf")
      lm.Add(words[i], 1.0 / static_cast<double>(i + 1));
    else
      throw std::runtime_error("lm must be uniform or zipf, got '" + lm_kind +
                               "'");
  }
  lm.Finalize();

  const std::string corpus_path = Join(out_dir, "corpus.anecorp");
  const std::string lexicon_path = Join(out_dir, "lexicon.tsv");
  const std::string unigram_path = Join(out_dir, "unigram.tsv");
  ane::WriteCorpusFile(corpus_path, utterances);
  ane::ReadCorpusFile(corpus_path);  // validate
  ane::WriteLexiconFile(lexicon_path, lexicon);
  ane::ReadLexiconFile(lexicon_path);
  ane::WriteUnigramLMFile(unigram_path, lm);
  ane::ReadUnigramLMFile(unigram_path);
  std::cout << "wrote " << corpus_path << " (" << utterances.size()
            << " utterances, " << lexicon.Size() << " entries)\n"
            << "wrote " << lexicon_path << "\n"
            << "wrote " << unigram_path << "\n";
}

// ---------------------------------------------------------------------
// train-audio / train-text / diagnose

struct TrainArgs {
  CLI::Option *corpus = nullptr, *epochs = nullptr, *lr = nullptr,
              *embed_dim = nullptr, *hidden = nullptr;
  std::string corpus_v;
  std::size_t epochs_v = 0, embed_dim_v = 0, hidden_v = 0;
  double lr_v = 0.0;
};

ane::TrainConfig ResolveTrainConfig(const Config& cfg, const TrainArgs& a,
                                    std::uint64_t seed) {
  ane::TrainConfig tc = BaseTrainConfig(cfg, seed);
  if (a.epochs != nullptr && a.epochs->count() > 0) tc.max_epochs = a.epochs_v;
  if (a.lr != nullptr && a.lr->count() > 0) tc.learning_rate = a.lr_v;
  if (a.embed_dim != nullptr && a.embed_dim->count() > 0)
    tc.embed_dim = a.embed_dim_v;
  if (a.hidden != nullptr && a.hidden->count() > 0) tc.hidden = a.hidden_v;
  return tc;
}

void RunTrainAudio(const Config& cfg, const TrainArgs& a,
                   const std::string& out_dir, std::uint64_t seed) {
  const std::string corpus_path = PickStr(a.corpus, a.corpus_v, cfg, "corpus",
                                          Join(out_dir, "corpus.anecorp"));
  const std::vector<ane::Utterance> corpus = ane::ReadCorpusFile(corpus_path);
  const ane::TrainConfig tc = ResolveTrainConfig(cfg, a, seed);
  const ane::TrainResult result = ane::TrainAudioEncoder(corpus, tc);
  PrintWarnings(result.warnings);

  const std::string model_path = Join(out_dir, "audio_encoder.anemdl");
  ane::WriteEncoderFile(model_path, result.params);
  ane::ReadEncoderFile(model_path);
  const std::string log_path = Join(out_dir, "train_audio_log.tsv");
  WriteTextFile(log_path, [&result](std::ostream& out) {
    ane::WriteTrainingLog(out, result.history);
  });
  std::cout << "wrote " << model_path << "\n"
            << "wrote " << log_path << "\n"
            << "epochs " << result.history.size() << " final train loss "
            << result.history.back().train << " cv loss "
            << result.history.back().cv << "\n";
}

void RunTrainText(const Config& cfg, const TrainArgs& a,
                  const std::string& kind_flag, const CLI::Option* kind_opt,
                  const std::string& audio_flag,
                  const CLI::Option* audio_opt, const std::string& out_dir,
                  std::uint64_t seed) {
  const std::string corpus_path = PickStr(a.corpus, a.corpus_v, cfg, "corpus",
                                          Join(out_dir, "corpus.anecorp"));
  const std::string audio_path =
      PickStr(audio_opt, audio_flag, cfg, "audio_model",
              Join(out_dir, "audio_encoder.anemdl"));
  const std::string kind = PickStr(kind_opt, kind_flag, cfg, "kind", "phone");

  const std::vector<ane::Utterance> corpus = ane::ReadCorpusFile(corpus_path);
  const ane::EncoderParams audio = ane::ReadEncoderFile(audio_path);

  ane::EncoderKind which;
  std::size_t vocab = 0;
  if (kind == "phone") {
    which = ane::EncoderKind::kPhone;
    vocab = corpus.front().frame_dim;  // phone ids index the posterior axis
  } else if (kind == "grapheme") {
    which = ane::EncoderKind::kGrapheme;
    vocab = ane::kGraphemeAlphabet;
  } else {
    throw std::runtime_error("kind must be phone or grapheme, got '" + kind +
                             "'");
  }
  ane::TrainConfig tc = ResolveTrainConfig(cfg, a, seed);
  tc.grapheme_labels = which == ane::EncoderKind::kGrapheme;
  const ane::TrainResult result =
      ane::TrainTextEncoder(corpus, audio, which, vocab, tc);
  PrintWarnings(result.warnings);

  const std::string model_path = Join(out_dir, "text_encoder.anemdl");
  ane::WriteEncoderFile(model_path, result.params);
  ane::ReadEncoderFile(model_path);
  const std::string log_path = Join(out_dir, "train_text_log.tsv");
  WriteTextFile(log_path, [&result](std::ostream& out) {
    ane::WriteTrainingLog(out, result.history);
  });
  std::cout << "wrote " << model_path << "\n"
            << "wrote " << log_path << "\n"
            << "epochs " << result.history.size() << " final train loss "
            << result.history.back().train << " cv loss "
            << result.history.back().cv << "\n";
}

void RunDiagnose(const Config& cfg, const TrainArgs& a, std::size_t every_v,
                 const CLI::Option* every_opt, const std::string& out_dir,
                 std::uint64_t seed) {
  const std::string corpus_path = PickStr(a.corpus, a.corpus_v, cfg, "corpus",
                                          Join(out_dir, "corpus.anecorp"));
  const std::vector<ane::Utterance> corpus = ane::ReadCorpusFile(corpus_path);
  const std::size_t every =
      std::max<std::size_t>(1, PickCount(every_opt, every_v, cfg, "every", 1));

  std::vector<ane::DiagnosticsRow> rows;
  ane::DiagnosticsRow last;
  ane::TrainConfig tc = ResolveTrainConfig(cfg, a, seed);
  tc.epoch_hook = [&corpus, &rows, &last, every](
                      std::size_t epoch, const ane::EncoderParams& params) {
    const auto labeled = LabeledEmbeddings(corpus, params);
    ane::DiagnosticsRow row;
    row.epoch = epoch;
    row.mean_isoscore = ane::MeanClusterIsoScore(labeled);
    const ane::ClusterStatsResult stats = ane::ComputeClusterStats(labeled);
    const auto [ratio_a, ratio_b] = ane::UniformityRatios(stats.clusters);
    row.ratio_a = ratio_a;
    row.ratio_b = ratio_b;
    row.sigma_hat = stats.global_sigma;
    last = row;
    if ((epoch - 1) % every == 0) rows.push_back(row);
  };
  const ane::TrainResult result = ane::TrainAudioEncoder(corpus, tc);
  PrintWarnings(result.warnings);
  if (rows.empty() || rows.back().epoch != last.epoch) rows.push_back(last);

  const std::string report_path = Join(out_dir, "diagnostics.csv");
  WriteTextFile(report_path, [&rows](std::ostream& out) {
    ane::WriteDiagnosticsReport(out, rows);
  });
  std::cout << "wrote " << report_path << " (" << rows.size() << " rows)\n"
            << "isoscore first " << rows.front().mean_isoscore << " final "
            << rows.back().mean_isoscore << "\n";
}

// ---------------------------------------------------------------------
// classify-eval

void RunClassifyEval(const Config& cfg, const std::string& corpus_flag,
                     const CLI::Option* corpus_opt,
                     const std::string& audio_flag,
                     const CLI::Option* audio_opt,
                     const std::string& text_flag,
                     const CLI::Option* text_opt,
                     const std::string& lexicon_flag,
                     const CLI::Option* lexicon_opt,
                     const std::string& mode_flag,
                     const CLI::Option* mode_opt,
                     const std::string& out_dir) {
  const std::string corpus_path = PickStr(corpus_opt, corpus_flag, cfg,
                                          "corpus",
                                          Join(out_dir, "corpus.anecorp"));
  const std::string audio_path =
      PickStr(audio_opt, audio_flag, cfg, "audio_model",
              Join(out_dir, "audio_encoder.anemdl"));
  const std::string text_path =
      PickStr(text_opt, text_flag, cfg, "text_model",
              Join(out_dir, "text_encoder.anemdl"));
  const std::string lexicon_path = PickStr(
      lexicon_opt, lexicon_flag, cfg, "lexicon", Join(out_dir, "lexicon.tsv"));
  const std::string mode_name =
      PickStr(mode_opt, mode_flag, cfg, "mode", "pronunciation");

  ane::MatchMode mode;
  if (mode_name == "pronunciation")
    mode = ane::MatchMode::kPronunciation;
  else if (mode_name == "orthography")
    mode = ane::MatchMode::kOrthography;
  else
    throw std::runtime_error(
        "mode must be pronunciation or orthography, got '" + mode_name + "'");

  const std::vector<ane::Utterance> corpus = ane::ReadCorpusFile(corpus_path);
  const ane::EncoderParams audio = ane::ReadEncoderFile(audio_path);
  const ane::EncoderParams text = ane::ReadEncoderFile(text_path);
  const ane::Lexicon lexicon = ane::ReadLexiconFile(lexicon_path);

  ane::EmbeddingIndex index;
  index.reserve(lexicon.Size());
  for (const ane::LexiconEntry& entry : lexicon.Entries()) {
    const std::string label =
        mode == ane::MatchMode::kOrthography
            ? entry.word
            : ane::PronunciationString(entry.phones, lexicon.Phones());
    index.push_back({label, EmbedEntry(text, entry)});
  }

  std::vector<std::pair<ane::Utterance, std::string>> tests;
  tests.reserve(corpus.size());
  for (const ane::Utterance& utt : corpus) tests.emplace_back(utt, utt.word);
  const double accuracy =
      ane::EvaluateClassification(tests, audio, index, mode, lexicon);

  const std::string metrics_path = Join(out_dir, "classify_metrics.csv");
  WriteTextFile(metrics_path, [&](std::ostream& out) {
    out << "mode,total,accuracy\n"
        << mode_name << "," << tests.size() << "," << accuracy << "\n";
  });
  std::cout << "wrote " << metrics_path << "\n"
            << "accuracy " << accuracy << " over " << tests.size()
            << " utterances\n";
}

// ---------------------------------------------------------------------
// oov-recover

void RunOovRecover(const Config& cfg, const std::string& corpus_flag,
                   const CLI::Option* corpus_opt,
                   const std::string& audio_flag,
                   const CLI::Option* audio_opt, const std::string& text_flag,
                   const CLI::Option* text_opt,
                   const std::string& lexicon_flag,
                   const CLI::Option* lexicon_opt, double sigma_flag,
                   const CLI::Option* sigma_opt, const std::string& out_dir) {
  const std::string corpus_path = PickStr(corpus_opt, corpus_flag, cfg,
                                          "corpus",
                                          Join(out_dir, "corpus.anecorp"));
  const std::string audio_path =
      PickStr(audio_opt, audio_flag, cfg, "audio_model",
              Join(out_dir, "audio_encoder.anemdl"));
  const std::string text_path =
      PickStr(text_opt, text_flag, cfg, "text_model",
              Join(out_dir, "text_encoder.anemdl"));
  const std::string lexicon_path = PickStr(
      lexicon_opt, lexicon_flag, cfg, "lexicon", Join(out_dir, "lexicon.tsv"));

  const std::vector<ane::Utterance> corpus = ane::ReadCorpusFile(corpus_path);
  const ane::EncoderParams audio = ane::ReadEncoderFile(audio_path);
  const ane::EncoderParams text = ane::ReadEncoderFile(text_path);
  if (text.kind != ane::EncoderKind::kPhone)
    throw std::runtime_error("oov-recover needs a phone-kind text model");
  const ane::Lexicon lexicon = ane::ReadLexiconFile(lexicon_path);
  if (lexicon.Size() < 2 || lexicon.Size() % 2 != 0)
    throw std::runtime_error(
        "oov-recover expects a lexicon of base/variant entry pairs");

  const double sigma = sigma_opt->count() > 0
                           ? sigma_flag
                           : (cfg.Has("sigma")
                                  ? cfg.Num("sigma", 0.0)
                                  : EstimateSigma(corpus, audio));

  // Even entries form the recognizer vocabulary; odd entries are the
  // out-of-vocabulary candidates the recognizer has never seen.
  ane::EmbeddingIndex in_vocab;
  std::unordered_map<std::string, const ane::PhoneSeq*> base_pron;
  std::vector<ane::OovCandidate> candidates;
  std::unordered_set<std::string> oov_words;
  for (std::size_t e = 0; e < lexicon.Size(); ++e) {
    const ane::LexiconEntry& entry = lexicon.Entries()[e];
    if (e % 2 == 0) {
      in_vocab.push_back({entry.word, EmbedEntry(text, entry)});
      base_pron.emplace(entry.word, &entry.phones);
    } else {
      candidates.push_back({entry.word, entry.phones});
      oov_words.insert(entry.word);
    }
  }

  // Phone substitution costs from the text encoder's phone table.
  std::vector<ane::EmbeddingVec> phone_table(lexicon.Phones().Size());
  for (std::size_t p = 0; p < phone_table.size(); ++p) {
    ane::PhoneSeq one;
    one.symbols = {static_cast<ane::SymbolId>(p)};
    phone_table[p] = ane::EncodeText(text, one);
  }
  const ane::CostMatrix costs = ane::SubstitutionCosts(phone_table, sigma);

  std::size_t total = 0, embed_got = 0, edit_got = 0;
  for (const ane::Utterance& utt : corpus) {
    if (oov_words.count(utt.word) == 0) continue;
    ++total;
    const ane::EmbeddingVec f = ane::EncodeAudio(audio, utt);
    const std::string asr_word = ane::Classify(f, in_vocab).label;
    const ane::PhoneSeq& asr_pron = *base_pron.at(asr_word);
    if (ane::OovRecover(asr_pron, candidates, ane::RecoveryMethod::kEmbed,
                        text, costs) == utt.word)
      ++embed_got;
    if (ane::OovRecover(asr_pron, candidates, ane::RecoveryMethod::kEdit,
                        text, costs) == utt.word)
      ++edit_got;
  }
  if (total == 0)
    throw std::runtime_error("oov-recover: no utterances of candidate words");

  const double embed_rate = static_cast<double>(embed_got) /
                            static_cast<double>(total);
  const double edit_rate = static_cast<double>(edit_got) /
                           static_cast<double>(total);
  const std::string metrics_path = Join(out_dir, "oov_metrics.csv");
  WriteTextFile(metrics_path, [&](std::ostream& out) {
    out << "method,total,correct,rate\n"
        << "embed," << total << "," << embed_got << "," << embed_rate << "\n"
        << "edit," << total << "," << edit_got << "," << edit_rate << "\n";
  });
  std::cout << "wrote " << metrics_path << "\n"
            << "embed recovery " << embed_rate << " edit recovery "
            << edit_rate << " over " << total << " utterances\n";
}

// ---------------------------------------------------------------------
// dialect-cluster

void RunDialectCluster(const Config& cfg, const std::string& corpus_flag,
                       const CLI::Option* corpus_opt,
                       const std::string& audio_flag,
                       const CLI::Option* audio_opt, double sigma_flag,
                       const CLI::Option* sigma_opt,
                       const std::string& names_flag,
                       const CLI::Option* names_opt,
                       const std::string& out_dir) {
  const std::string corpus_path = PickStr(corpus_opt, corpus_flag, cfg,
                                          "corpus",
                                          Join(out_dir, "corpus.anecorp"));
  const std::string audio_path =
      PickStr(audio_opt, audio_flag, cfg, "audio_model",
              Join(out_dir, "audio_encoder.anemdl"));
  const std::vector<ane::Utterance> corpus = ane::ReadCorpusFile(corpus_path);
  const ane::EncoderParams audio = ane::ReadEncoderFile(audio_path);

  // Per-(dialect, word) centroids in corpus word order.
  std::set<std::int32_t> dialect_ids;
  std::vector<std::string> word_order;
  std::map<std::int32_t,
           std::unordered_map<std::string, std::pair<ane::EmbeddingVec,
                                                     std::size_t>>>
      sums;
  for (const ane::Utterance& utt : corpus) {
    dialect_ids.insert(utt.dialect);
    const ane::EmbeddingVec f = ane::EncodeAudio(audio, utt);
    auto& slot = sums[utt.dialect][utt.word];
    if (slot.second == 0) slot.first.assign(f.size(), 0.0);
    for (std::size_t k = 0; k < f.size(); ++k) slot.first[k] += f[k];
    ++slot.second;
    if (sums.size() == 1 && slot.second == 1 &&
        sums.begin()->first == utt.dialect)
      word_order.push_back(utt.word);
    else if (std::find(word_order.begin(), word_order.end(), utt.word) ==
             word_order.end())
      word_order.push_back(utt.word);
  }
  if (dialect_ids.size() < 3)
    throw std::runtime_error(
        "dialect-cluster needs at least 3 dialect groups in the corpus");

  // Keep only words every dialect has spoken.
  std::vector<std::string> kept;
  for (const std::string& word : word_order) {
    bool everywhere = true;
    for (const std::int32_t d : dialect_ids)
      if (sums[d].count(word) == 0) everywhere = false;
    if (everywhere)
      kept.push_back(word);
    else
      std::cerr << "note: word '" << word
                << "' missing from some dialect, skipped\n";
  }
  if (kept.empty())
    throw std::runtime_error("dialect-cluster: no word common to all groups");

  const std::vector<std::string> names = SplitWords(
      PickStr(names_opt, names_flag, cfg, "dialect_names", ""));
  if (!names.empty() && names.size() != dialect_ids.size())
    throw std::runtime_error("dialect_names count does not match groups");

  std::vector<std::pair<std::string, std::vector<ane::EmbeddingVec>>> table;
  std::size_t at = 0;
  for (const std::int32_t d : dialect_ids) {
    std::vector<ane::EmbeddingVec> centroids;
    centroids.reserve(kept.size());
    for (const std::string& word : kept) {
      auto& slot = sums[d][word];
      ane::EmbeddingVec mean = slot.first;
      for (double& x : mean) x /= static_cast<double>(slot.second);
      centroids.push_back(std::move(mean));
    }
    const std::string label =
        names.empty() ? "g" + std::to_string(d) : names[at];
    table.emplace_back(label, std::move(centroids));
    ++at;
  }

  const double sigma = sigma_opt->count() > 0
                           ? sigma_flag
                           : (cfg.Has("sigma")
                                  ? cfg.Num("sigma", 0.0)
                                  : EstimateSigma(corpus, audio));
  const ane::DissimilarityMatrix m = ane::DialectDissimilarity(table, sigma);
  const ane::TreeFit fit = ane::FitAdditiveTree(m);

  const std::string matrix_path = Join(out_dir, "dissimilarity.csv");
  WriteTextFile(matrix_path, [&m](std::ostream& out) {
    ane::WriteDissimilarityCsv(out, m);
  });
  const std::string tree_path = Join(out_dir, "tree.newick");
  WriteTextFile(tree_path, [&fit](std::ostream& out) {
    out << ane::NewickString(fit.tree) << "\n";
  });

  std::size_t longest = 0;
  for (std::size_t leaf = 1; leaf < m.Size(); ++leaf)
    if (fit.tree.TerminalBranch(leaf) > fit.tree.TerminalBranch(longest))
      longest = leaf;
  std::cout << "wrote " << matrix_path << "\n"
            << "wrote " << tree_path << "\n"
            << "fit rmse " << fit.rmse << " longest terminal branch "
            << m.labels[longest] << " (" << kept.size() << " shared words)\n";
}

// ---------------------------------------------------------------------
// wakeword

void RunWakeword(const Config& cfg, const std::string& lexicon_flag,
                 const CLI::Option* lexicon_opt,
                 const std::string& unigram_flag,
                 const CLI::Option* unigram_opt, const std::string& text_flag,
                 const CLI::Option* text_opt, double sigma_flag,
                 const CLI::Option* sigma_opt, const std::string& targets_flag,
                 const CLI::Option* targets_opt, double alpha_min,
                 double alpha_max, std::size_t alpha_steps,
                 const CLI::Option* amin_opt, const CLI::Option* amax_opt,
                 const CLI::Option* asteps_opt, const std::string& out_dir) {
  const std::string lexicon_path = PickStr(
      lexicon_opt, lexicon_flag, cfg, "lexicon", Join(out_dir, "lexicon.tsv"));
  const std::string unigram_path =
      PickStr(unigram_opt, unigram_flag, cfg, "unigram",
              Join(out_dir, "unigram.tsv"));
  const std::string text_path =
      PickStr(text_opt, text_flag, cfg, "text_model",
              Join(out_dir, "text_encoder.anemdl"));
  const double amin = PickNum(amin_opt, alpha_min, cfg, "alpha_min", 0.85);
  const double amax = PickNum(amax_opt, alpha_max, cfg, "alpha_max", 0.95);
  const std::size_t steps =
      std::max<std::size_t>(1, PickCount(asteps_opt, alpha_steps, cfg,
                                         "alpha_steps", 11));
  if (amax < amin) throw std::runtime_error("alpha_max below alpha_min");

  const ane::Lexicon lexicon = ane::ReadLexiconFile(lexicon_path);
  const ane::UnigramLM lm = ane::ReadUnigramLMFile(unigram_path);
  const ane::EncoderParams text = ane::ReadEncoderFile(text_path);

  double sigma = 0.0;
  if (sigma_opt->count() > 0)
    sigma = sigma_flag;
  else if (cfg.Has("sigma"))
    sigma = cfg.Num("sigma", 0.0);
  else {
    const std::string corpus_path =
        cfg.Str("corpus", Join(out_dir, "corpus.anecorp"));
    const std::string audio_path =
        cfg.Str("audio_model", Join(out_dir, "audio_encoder.anemdl"));
    sigma = EstimateSigma(ane::ReadCorpusFile(corpus_path),
                          ane::ReadEncoderFile(audio_path));
  }

  // One vocabulary entry per LM word, via its first pronunciation.
  ane::EmbeddingIndex vocabulary;
  for (const std::string& word : lm.Words()) {
    if (!lexicon.ContainsWord(word))
      throw std::runtime_error("wakeword: LM word '" + word +
                               "' missing from lexicon");
    const std::size_t entry = lexicon.PronunciationsOf(word).front();
    vocabulary.push_back(
        {word, EmbedEntry(text, lexicon.Entries()[entry])});
  }

  std::vector<std::string> targets = SplitWords(
      PickStr(targets_opt, targets_flag, cfg, "targets", ""));
  if (targets.empty()) targets = lm.Words();

  std::vector<ane::WakewordRow> rows;
  for (const std::string& target : targets)
    for (std::size_t s = 0; s < steps; ++s) {
      const double alpha =
          steps == 1 ? amin
                     : amin + (amax - amin) * static_cast<double>(s) /
                           static_cast<double>(steps - 1);
      rows.push_back({target, alpha,
                      ane::WakewordConfusion(target, vocabulary, lm, sigma,
                                             alpha)});
    }

  const std::string report_path = Join(out_dir, "wakeword.csv");
  WriteTextFile(report_path, [&rows](std::ostream& out) {
    ane::WriteWakewordReport(out, rows);
  });
  std::cout << "wrote " << report_path << " (" << rows.size() << " rows, "
            << targets.size() << " targets, sigma " << sigma << ")\n";
}

// ---------------------------------------------------------------------
// simulate

void RunSimulate(const Config& cfg, double gamma_flag,
                 const CLI::Option* gamma_opt, std::size_t iters_flag,
                 const CLI::Option* iters_opt, std::size_t every_flag,
                 const CLI::Option* every_opt, bool positive_only,
                 const std::string& out_dir, std::uint64_t seed) {
  const double gamma = PickNum(gamma_opt, gamma_flag, cfg, "gamma", 0.1);
  const std::size_t iters = PickCount(iters_opt, iters_flag, cfg, "iters", 200);
  const std::size_t every = std::max<std::size_t>(
      1, PickCount(every_opt, every_flag, cfg, "snapshot_every", 10));
  const bool include_negative =
      positive_only ? false : cfg.Str("negative", "on") != "off";

  ane::Rng rng(seed);
  ane::PointCloud cloud = ane::MakeTwoClusterCloud(rng);

  const std::string trajectory_path = Join(out_dir, "trajectory.csv");
  std::vector<std::string> warnings;
  {
    std::ofstream out(trajectory_path);
    if (!out) throw std::runtime_error("cannot open output: " +
                                       trajectory_path);
    ane::WriteTrajectoryHeader(out, cloud.Dim());
    ane::AppendTrajectoryRows(out, cloud);
    for (std::size_t it = 1; it <= iters; ++it) {
      cloud = ane::Step(cloud, gamma, include_negative, &warnings);
      if (it % every == 0 || it == iters) ane::AppendTrajectoryRows(out, cloud);
    }
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + trajectory_path);
  }
  PrintWarnings(warnings);

  // Final isotropy per cluster.
  std::map<int, std::vector<ane::EmbeddingVec>> clusters;
  for (const ane::SimPoint& point : cloud.points)
    clusters[point.cluster].push_back(point.position);
  const std::string summary_path = Join(out_dir, "isotropy.csv");
  WriteTextFile(summary_path, [&clusters](std::ostream& out) {
    out << "cluster,points,isoscore\n";
    for (const auto& [cluster, points] : clusters)
      out << cluster << "," << points.size() << ","
          << ane::IsoScore(points) << "\n";
  });
  std::cout << "wrote " << trajectory_path << "\n"
            << "wrote " << summary_path << "\n"
            << "final loss " << ane::CloudLoss(cloud) << " after " << iters
            << " iterations\n";
}

// ---------------------------------------------------------------------
// length-dist

void RunLengthDist(const Config& cfg, const std::string& lexicon_flag,
                   const CLI::Option* lexicon_opt,
                   const std::string& unigram_flag,
                   const CLI::Option* unigram_opt,
                   const std::string& out_dir) {
  const std::string lexicon_path = PickStr(
      lexicon_opt, lexicon_flag, cfg, "lexicon", Join(out_dir, "lexicon.tsv"));
  const std::string unigram_path =
      PickStr(unigram_opt, unigram_flag, cfg, "unigram",
              Join(out_dir, "unigram.tsv"));
  const ane::Lexicon lexicon = ane::ReadLexiconFile(lexicon_path);
  const ane::UnigramLM lm = ane::ReadUnigramLMFile(unigram_path);
  const ane::LengthDistribution dist =
      ane::PronunciationLengthDistribution(lexicon, lm);

  const std::string report_path = Join(out_dir, "length_dist.csv");
  WriteTextFile(report_path, [&dist](std::ostream& out) {
    ane::WriteLengthDistributionCsv(out, dist);
  });
  std::cout << "wrote " << report_path << " (" << dist.probs.size()
            << " lengths)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acoustic neighbor embedding toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path,
                 "flat key = value config file shared by all subcommands");
  const CLI::Option* seed_opt =
      app.add_option("--seed", seed, "master RNG seed (default 0)");
  app.add_option("--out-dir", out_dir,
                 "directory for outputs and default input paths");

  // synth-gen
  auto* synth = app.add_subcommand(
      "synth-gen", "generate a synthetic corpus, lexicon, and unigram LM");
  synth->fallthrough();
  SynthGenArgs sg;
  sg.words = synth->add_option("--words", sg.words_v, "vocabulary size");
  sg.phones = synth->add_option("--phones", sg.phones_v, "inventory size");
  sg.samples =
      synth->add_option("--samples", sg.samples_v, "utterances per word");
  sg.pairs = synth->add_option(
      "--pairs", sg.pairs_v, "emit this many one-edit confusable word pairs");
  sg.dialects =
      synth->add_option("--dialects", sg.dialects_v, "dialect group count");
  sg.dialect_scale = synth->add_option("--dialect-scale", sg.dialect_scale_v,
                                       "dialect logit shift scale");
  sg.jitter =
      synth->add_option("--jitter", sg.jitter_v, "logit noise stddev");
  sg.temperature = synth->add_option("--temperature", sg.temperature_v,
                                     "softmax temperature");

  // train-audio
  auto* train_audio = app.add_subcommand(
      "train-audio", "train the audio encoder on a corpus");
  train_audio->fallthrough();
  TrainArgs ta;
  ta.corpus = train_audio->add_option("--corpus", ta.corpus_v, "corpus file");
  ta.epochs = train_audio->add_option("--epochs", ta.epochs_v, "epoch cap");
  ta.lr = train_audio->add_option("--lr", ta.lr_v, "learning rate");
  ta.embed_dim =
      train_audio->add_option("--embed-dim", ta.embed_dim_v, "embedding dim");
  ta.hidden = train_audio->add_option("--hidden", ta.hidden_v, "hidden width");

  // train-text
  auto* train_text = app.add_subcommand(
      "train-text", "train a text encoder against a frozen audio encoder");
  train_text->fallthrough();
  TrainArgs tt;
  tt.corpus = train_text->add_option("--corpus", tt.corpus_v, "corpus file");
  tt.epochs = train_text->add_option("--epochs", tt.epochs_v, "epoch cap");
  tt.lr = train_text->add_option("--lr", tt.lr_v, "learning rate");
  tt.embed_dim =
      train_text->add_option("--embed-dim", tt.embed_dim_v, "embedding dim");
  tt.hidden = train_text->add_option("--hidden", tt.hidden_v, "hidden width");
  std::string tt_kind, tt_audio;
  const CLI::Option* tt_kind_opt =
      train_text->add_option("--kind", tt_kind, "phone or grapheme");
  const CLI::Option* tt_audio_opt =
      train_text->add_option("--audio-model", tt_audio, "audio encoder file");

  // classify-eval
  auto* classify = app.add_subcommand(
      "classify-eval", "nearest-neighbor word classification accuracy");
  classify->fallthrough();
  std::string ce_corpus, ce_audio, ce_text, ce_lexicon, ce_mode;
  const CLI::Option* ce_corpus_opt =
      classify->add_option("--corpus", ce_corpus, "corpus file");
  const CLI::Option* ce_audio_opt =
      classify->add_option("--audio-model", ce_audio, "audio encoder file");
  const CLI::Option* ce_text_opt =
      classify->add_option("--text-model", ce_text, "text encoder file");
  const CLI::Option* ce_lexicon_opt =
      classify->add_option("--lexicon", ce_lexicon, "lexicon file");
  const CLI::Option* ce_mode_opt = classify->add_option(
      "--mode", ce_mode, "pronunciation or orthography matching");

  // oov-recover
  auto* oov = app.add_subcommand(
      "oov-recover",
      "recover out-of-vocabulary words from recognizer output");
  oov->fallthrough();
  std::string ov_corpus, ov_audio, ov_text, ov_lexicon;
  double ov_sigma = 0.0;
  const CLI::Option* ov_corpus_opt =
      oov->add_option("--corpus", ov_corpus, "corpus file");
  const CLI::Option* ov_audio_opt =
      oov->add_option("--audio-model", ov_audio, "audio encoder file");
  const CLI::Option* ov_text_opt =
      oov->add_option("--text-model", ov_text, "phone text encoder file");
  const CLI::Option* ov_lexicon_opt =
      oov->add_option("--lexicon", ov_lexicon, "base/variant pair lexicon");
  const CLI::Option* ov_sigma_opt =
      oov->add_option("--sigma", ov_sigma, "similarity sigma override");

  // dialect-cluster
  auto* dialect = app.add_subcommand(
      "dialect-cluster", "dialect dissimilarity matrix and additive tree");
  dialect->fallthrough();
  std::string dc_corpus, dc_audio, dc_names;
  double dc_sigma = 0.0;
  const CLI::Option* dc_corpus_opt =
      dialect->add_option("--corpus", dc_corpus, "corpus file");
  const CLI::Option* dc_audio_opt =
      dialect->add_option("--audio-model", dc_audio, "audio encoder file");
  const CLI::Option* dc_sigma_opt =
      dialect->add_option("--sigma", dc_sigma, "similarity sigma override");
  const CLI::Option* dc_names_opt = dialect->add_option(
      "--names", dc_names, "space-separated dialect labels");

  // wakeword
  auto* wake = app.add_subcommand(
      "wakeword", "expected-confusion sweep over the LM scale");
  wake->fallthrough();
  std::string wk_lexicon, wk_unigram, wk_text, wk_targets;
  double wk_sigma = 0.0, wk_amin = 0.85, wk_amax = 0.95;
  std::size_t wk_steps = 11;
  const CLI::Option* wk_lexicon_opt =
      wake->add_option("--lexicon", wk_lexicon, "lexicon file");
  const CLI::Option* wk_unigram_opt =
      wake->add_option("--unigram", wk_unigram, "unigram LM file");
  const CLI::Option* wk_text_opt =
      wake->add_option("--text-model", wk_text, "text encoder file");
  const CLI::Option* wk_sigma_opt =
      wake->add_option("--sigma", wk_sigma, "similarity sigma override");
  const CLI::Option* wk_targets_opt = wake->add_option(
      "--targets", wk_targets, "space-separated target words (default all)");
  const CLI::Option* wk_amin_opt =
      wake->add_option("--alpha-min", wk_amin, "sweep start");
  const CLI::Option* wk_amax_opt =
      wake->add_option("--alpha-max", wk_amax, "sweep end");
  const CLI::Option* wk_steps_opt =
      wake->add_option("--alpha-steps", wk_steps, "sweep point count");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "two-cluster gradient dynamics with trajectory output");
  simulate->fallthrough();
  double sm_gamma = 0.1;
  std::size_t sm_iters = 200, sm_every = 10;
  bool sm_positive_only = false;
  const CLI::Option* sm_gamma_opt =
      simulate->add_option("--gamma", sm_gamma, "step size");
  const CLI::Option* sm_iters_opt =
      simulate->add_option("--iters", sm_iters, "iteration count");
  const CLI::Option* sm_every_opt = simulate->add_option(
      "--snapshot-every", sm_every, "iterations between trajectory rows");
  simulate->add_flag("--positive-only", sm_positive_only,
                     "drop the repulsive between-cluster term");

  // diagnose
  auto* diagnose = app.add_subcommand(
      "diagnose", "train while recording per-epoch isotropy diagnostics");
  diagnose->fallthrough();
  TrainArgs dg;
  dg.corpus = diagnose->add_option("--corpus", dg.corpus_v, "corpus file");
  dg.epochs = diagnose->add_option("--epochs", dg.epochs_v, "epoch cap");
  dg.lr = diagnose->add_option("--lr", dg.lr_v, "learning rate");
  dg.embed_dim =
      diagnose->add_option("--embed-dim", dg.embed_dim_v, "embedding dim");
  dg.hidden = diagnose->add_option("--hidden", dg.hidden_v, "hidden width");
  std::size_t dg_every = 1;
  const CLI::Option* dg_every_opt = diagnose->add_option(
      "--every", dg_every, "epochs between report rows");

  // length-dist
  auto* length = app.add_subcommand(
      "length-dist", "pronunciation length distribution of a lexicon + LM");
  length->fallthrough();
  std::string ld_lexicon, ld_unigram;
  const CLI::Option* ld_lexicon_opt =
      length->add_option("--lexicon", ld_lexicon, "lexicon file");
  const CLI::Option* ld_unigram_opt =
      length->add_option("--unigram", ld_unigram, "unigram LM file");

  try {
    app.parse(argc, argv);

    const Config cfg = Config::Load(config_path);
    if (seed_opt->count() == 0 && cfg.Has("seed")) seed = cfg.Count("seed", 0);
    fs::create_directories(out_dir);

    if (synth->parsed())
      RunSynthGen(cfg, sg, out_dir, seed);
    else if (train_audio->parsed())
      RunTrainAudio(cfg, ta, out_dir, seed);
    else if (train_text->parsed())
      RunTrainText(cfg, tt, tt_kind, tt_kind_opt, tt_audio, tt_audio_opt,
                   out_dir, seed);
    else if (classify->parsed())
      RunClassifyEval(cfg, ce_corpus, ce_corpus_opt, ce_audio, ce_audio_opt,
                      ce_text, ce_text_opt, ce_lexicon, ce_lexicon_opt,
                      ce_mode, ce_mode_opt, out_dir);
    else if (oov->parsed())
      RunOovRecover(cfg, ov_corpus, ov_corpus_opt, ov_audio, ov_audio_opt,
                    ov_text, ov_text_opt, ov_lexicon, ov_lexicon_opt,
                    ov_sigma, ov_sigma_opt, out_dir);
    else if (dialect->parsed())
      RunDialectCluster(cfg, dc_corpus, dc_corpus_opt, dc_audio, dc_audio_opt,
                        dc_sigma, dc_sigma_opt, dc_names, dc_names_opt,
                        out_dir);
    else if (wake->parsed())
      RunWakeword(cfg, wk_lexicon, wk_lexicon_opt, wk_unigram, wk_unigram_opt,
                  wk_text, wk_text_opt, wk_sigma, wk_sigma_opt, wk_targets,
                  wk_targets_opt, wk_amin, wk_amax, wk_steps, wk_amin_opt,
                  wk_amax_opt, wk_steps_opt, out_dir);
    else if (simulate->parsed())
      RunSimulate(cfg, sm_gamma, sm_gamma_opt, sm_iters, sm_iters_opt,
                  sm_every, sm_every_opt, sm_positive_only, out_dir, seed);
    else if (diagnose->parsed())
      RunDiagnose(cfg, dg, dg_every, dg_every_opt, out_dir, seed);
    else if (length->parsed())
      RunLengthDist(cfg, ld_lexicon, ld_lexicon_opt, ld_unigram,
                    ld_unigram_opt, out_dir);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "ERROR: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
