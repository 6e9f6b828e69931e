// encoder.cpp
//
// Recurrence: h_t = tanh(in_t + W_rec h_{t-1} + b_rec), h_0 = 0, with
// in_t = W_in x_t (audio) or a symbol-table row (text); output
// f = W_out h_T + b_out. Backward walks the tape in reverse using
// tanh' = 1 - h^2.

#include "ane/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ane/kernels.hpp"
#include "binio.hpp"

namespace ane {
namespace {

namespace nk = ane::kernels;

void CheckShapes(const EncoderParams &p) {
  if (p.hidden == 0 || p.embed_dim == 0 || p.input_rows == 0 || p.input_cols == 0)
    throw std::invalid_argument("encoder: zero dimension");
  if (p.kind == EncoderKind::kAudio) {
    if (p.input_rows != p.hidden)
      throw std::invalid_argument("encoder: audio input projection must have `hidden` rows");
  } else {
    if (p.input_cols != p.hidden)
      throw std::invalid_argument("encoder: symbol table width must equal `hidden`");
  }
  if (p.theta.size() != p.Size())
    throw std::invalid_argument("encoder: parameter buffer size mismatch");
}

// Runs the recurrence given a per-step input loader and optionally fills
// the tape's hidden-state rows.
EmbeddingVec RunForward(const EncoderParams &p, std::size_t steps,
                        const double *audio, const SymbolId *symbols,
                        ForwardTape *tape) {
  CheckShapes(p);
  if (steps == 0) throw std::invalid_argument("encoder: empty input sequence");
  const std::size_t h = p.hidden;

  std::vector<double> states;
  states.assign((steps + 1) * h, 0.0);
  std::vector<double> pre(h);

  for (std::size_t t = 0; t < steps; ++t) {
    const double *prev = states.data() + t * h;
    double *cur = states.data() + (t + 1) * h;
    if (audio != nullptr) {
      nk::MatVec(p.WIn(), h, p.input_cols, audio + t * p.input_cols, pre.data());
    } else {
      const SymbolId s = symbols[t];
      if (s < 0 || static_cast<std::size_t>(s) >= p.input_rows)
        throw std::invalid_argument("encoder: symbol id outside table");
      std::memcpy(pre.data(), p.WIn() + static_cast<std::size_t>(s) * h,
                  h * sizeof(double));
    }
    nk::Axpy(1.0, p.BRec(), pre.data(), h);
    nk::MatVec(p.WRec(), h, h, prev, cur);
    for (std::size_t k = 0; k < h; ++k) cur[k] = std::tanh(pre[k] + cur[k]);
  }

  EmbeddingVec f(p.embed_dim);
  nk::MatVec(p.WOut(), p.embed_dim, h, states.data() + steps * h, f.data());
  nk::Axpy(1.0, p.BOut(), f.data(), p.embed_dim);

  if (tape != nullptr) {
    tape->kind = p.kind;
    tape->steps = steps;
    tape->hidden = h;
    tape->input_cols = p.input_cols;
    if (audio != nullptr) {
      tape->audio_frames.assign(audio, audio + steps * p.input_cols);
      tape->symbols.clear();
    } else {
      tape->symbols.assign(symbols, symbols + steps);
      tape->audio_frames.clear();
    }
    tape->hidden_states = std::move(states);
  }
  return f;
}

}  // namespace

const char *EncoderKindName(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kAudio:
      return "audio";
    case EncoderKind::kPhone:
      return "phone";
    case EncoderKind::kGrapheme:
      return "grapheme";
  }
  return "unknown";
}

std::size_t EncoderParams::Size() const {
  return InputSize() + hidden * hidden + hidden + embed_dim * hidden + embed_dim;
}

EncoderParams InitEncoder(EncoderKind kind, std::size_t input_width,
                          std::size_t hidden, std::size_t embed_dim, Rng &rng) {
  if (input_width == 0 || hidden == 0 || embed_dim == 0)
    throw std::invalid_argument("encoder init: zero dimension");
  EncoderParams p;
  p.kind = kind;
  p.hidden = hidden;
  p.embed_dim = embed_dim;
  if (kind == EncoderKind::kAudio) {
    p.input_rows = hidden;
    p.input_cols = input_width;
  } else {
    p.input_rows = input_width;
    p.input_cols = hidden;
  }
  p.theta.assign(p.Size(), 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  // Weights only; the two bias blocks stay zero.
  for (std::size_t i = 0; i < p.InputSize(); ++i)
    p.theta[i] = rng.Uniform(-bound, bound);
  for (std::size_t i = p.OffWRec(); i < p.OffBRec(); ++i)
    p.theta[i] = rng.Uniform(-bound, bound);
  for (std::size_t i = p.OffWOut(); i < p.OffBOut(); ++i)
    p.theta[i] = rng.Uniform(-bound, bound);
  return p;
}

EmbeddingVec EncodeAudio(const EncoderParams &params, const Utterance &utt,
                         ForwardTape *tape) {
  if (params.kind != EncoderKind::kAudio)
    throw std::invalid_argument("encoder: audio input fed to a text encoder");
  if (utt.frame_dim != params.input_cols)
    throw std::invalid_argument("encoder: frame dimension mismatch");
  if (utt.frame_count == 0) throw std::invalid_argument("encoder: empty utterance");
  return RunForward(params, utt.frame_count, utt.frames.data(), nullptr, tape);
}

EmbeddingVec EncodeText(const EncoderParams &params,
                        std::span<const SymbolId> symbols, ForwardTape *tape) {
  if (params.kind == EncoderKind::kAudio)
    throw std::invalid_argument("encoder: symbols fed to the audio encoder");
  if (symbols.empty()) throw std::invalid_argument("encoder: empty symbol sequence");
  return RunForward(params, symbols.size(), nullptr, symbols.data(), tape);
}

EmbeddingVec EncodeText(const EncoderParams &params, const PhoneSeq &seq,
                        ForwardTape *tape) {
  return EncodeText(params, std::span<const SymbolId>(seq.symbols), tape);
}

EmbeddingVec EncodeText(const EncoderParams &params, const GraphemeSeq &seq,
                        ForwardTape *tape) {
  return EncodeText(params, std::span<const SymbolId>(seq.symbols), tape);
}

void BackwardAccum(const EncoderParams &params, const ForwardTape &tape,
                   const EmbeddingVec &grad_embedding, std::span<double> grad_theta) {
  CheckShapes(params);
  const std::size_t h = params.hidden, d = params.embed_dim;
  if (tape.kind != params.kind || tape.hidden != h ||
      tape.input_cols != params.input_cols || tape.steps == 0 ||
      tape.hidden_states.size() != (tape.steps + 1) * h)
    throw std::invalid_argument("encoder backward: tape does not match parameters");
  if (grad_embedding.size() != d)
    throw std::invalid_argument("encoder backward: embedding gradient dimension mismatch");
  if (grad_theta.size() != params.Size())
    throw std::invalid_argument("encoder backward: gradient buffer size mismatch");

  double *g_in = grad_theta.data();
  double *g_wrec = grad_theta.data() + params.OffWRec();
  double *g_brec = grad_theta.data() + params.OffBRec();
  double *g_wout = grad_theta.data() + params.OffWOut();
  double *g_bout = grad_theta.data() + params.OffBOut();

  const double *h_last = tape.hidden_states.data() + tape.steps * h;
  nk::Axpy(1.0, grad_embedding.data(), g_bout, d);
  for (std::size_t r = 0; r < d; ++r)
    nk::Axpy(grad_embedding[r], h_last, g_wout + r * h, h);

  std::vector<double> dh(h, 0.0), dz(h), dh_prev(h);
  nk::MatTVecAccum(params.WOut(), d, h, grad_embedding.data(), dh.data());

  for (std::size_t t = tape.steps; t > 0; --t) {
    const double *cur = tape.hidden_states.data() + t * h;
    const double *prev = tape.hidden_states.data() + (t - 1) * h;
    for (std::size_t k = 0; k < h; ++k) dz[k] = dh[k] * (1.0 - cur[k] * cur[k]);

    nk::Axpy(1.0, dz.data(), g_brec, h);
    for (std::size_t r = 0; r < h; ++r)
      nk::Axpy(dz[r], prev, g_wrec + r * h, h);

    if (params.kind == EncoderKind::kAudio) {
      const double *x = tape.audio_frames.data() + (t - 1) * params.input_cols;
      for (std::size_t r = 0; r < h; ++r)
        nk::Axpy(dz[r], x, g_in + r * params.input_cols, params.input_cols);
    } else {
      const auto row = static_cast<std::size_t>(tape.symbols[t - 1]);
      nk::Axpy(1.0, dz.data(), g_in + row * h, h);
    }

    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    nk::MatTVecAccum(params.WRec(), h, h, dz.data(), dh_prev.data());
    dh.swap(dh_prev);
  }
}

std::vector<double> Backward(const EncoderParams &params, const ForwardTape &tape,
                             const EmbeddingVec &grad_embedding) {
  std::vector<double> grad(params.Size(), 0.0);
  BackwardAccum(params, tape, grad_embedding, grad);
  return grad;
}

void WriteEncoder(std::ostream &out, const EncoderParams &params) {
  CheckShapes(params);
  binio::WriteMagic(out, "ANE1");
  binio::WriteU32(out, static_cast<std::uint32_t>(params.kind));
  binio::WriteU32(out, static_cast<std::uint32_t>(params.input_rows));
  binio::WriteU32(out, static_cast<std::uint32_t>(params.input_cols));
  binio::WriteU32(out, static_cast<std::uint32_t>(params.hidden));
  binio::WriteU32(out, static_cast<std::uint32_t>(params.embed_dim));
  for (double v : params.theta) binio::WriteF64(out, v);
  if (!out) throw std::runtime_error("encoder: write failed");
}

EncoderParams ReadEncoder(std::istream &in, const std::string &source_name) {
  binio::ExpectMagic(in, "ANE1", source_name);
  EncoderParams p;
  const std::uint32_t kind = binio::ReadU32(in, source_name, "kind");
  if (kind > 2) throw std::runtime_error(source_name + ": unknown encoder kind");
  p.kind = static_cast<EncoderKind>(kind);
  p.input_rows = binio::ReadU32(in, source_name, "input_rows");
  p.input_cols = binio::ReadU32(in, source_name, "input_cols");
  p.hidden = binio::ReadU32(in, source_name, "hidden");
  p.embed_dim = binio::ReadU32(in, source_name, "embed_dim");
  p.theta.resize(p.Size());
  for (auto &v : p.theta) {
    v = binio::ReadF64(in, source_name, "theta");
    if (!std::isfinite(v)) throw std::runtime_error(source_name + ": non-finite parameter");
  }
  CheckShapes(p);
  return p;
}

void WriteEncoderFile(const std::string &path, const EncoderParams &params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  WriteEncoder(out, params);
}

EncoderParams ReadEncoderFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return ReadEncoder(in, path);
}

}  // namespace ane
