// ane/encoder.hpp
//
// Trainable sequence encoders: a recurrent tanh cell consuming either
// audio frames or symbol ids, followed by a linear head on the final
// hidden state. Parameters live in one flat buffer so the optimizer and
// finite-difference checks can treat them uniformly.

#ifndef ANE_ENCODER_HPP
#define ANE_ENCODER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ane/rng.hpp"
#include "ane/types.hpp"

namespace ane {

enum class EncoderKind : std::uint32_t {
  kAudio = 0,
  kPhone = 1,
  kGrapheme = 2,
};

const char *EncoderKindName(EncoderKind kind);

// Parameter layout inside `theta`, in order:
//   audio: W_in (hidden x input_dim), text: symbol table (vocab x hidden)
//   W_rec (hidden x hidden), b_rec (hidden)
//   W_out (embed_dim x hidden), b_out (embed_dim)
struct EncoderParams {
  EncoderKind kind = EncoderKind::kAudio;
  std::size_t input_rows = 0;  // hidden (audio) or vocab size (text)
  std::size_t input_cols = 0;  // input_dim (audio) or hidden (text)
  std::size_t hidden = 0;
  std::size_t embed_dim = 0;
  std::vector<double> theta;

  std::size_t InputSize() const { return input_rows * input_cols; }
  std::size_t Size() const;
  std::size_t OffWRec() const { return InputSize(); }
  std::size_t OffBRec() const { return OffWRec() + hidden * hidden; }
  std::size_t OffWOut() const { return OffBRec() + hidden; }
  std::size_t OffBOut() const { return OffWOut() + embed_dim * hidden; }

  const double *WIn() const { return theta.data(); }
  const double *WRec() const { return theta.data() + OffWRec(); }
  const double *BRec() const { return theta.data() + OffBRec(); }
  const double *WOut() const { return theta.data() + OffWOut(); }
  const double *BOut() const { return theta.data() + OffBOut(); }
};

// `input_width` is the frame dimension for audio encoders and the symbol
// vocabulary size for text encoders. Weights start uniform in
// (-1/sqrt(hidden), 1/sqrt(hidden)); biases start at zero.
EncoderParams InitEncoder(EncoderKind kind, std::size_t input_width,
                          std::size_t hidden, std::size_t embed_dim, Rng &rng);

// Activations retained by a forward pass; consumed by Backward. Holds a
// copy of the inputs so gradients never depend on caller-owned memory.
struct ForwardTape {
  EncoderKind kind = EncoderKind::kAudio;
  std::size_t steps = 0;
  std::size_t hidden = 0;
  std::size_t input_cols = 0;
  std::vector<double> audio_frames;   // steps x input_cols (audio only)
  std::vector<SymbolId> symbols;      // steps (text only)
  std::vector<double> hidden_states;  // (steps + 1) x hidden, row 0 = zeros
};

// Forward passes. Passing a tape pointer records activations for Backward.
EmbeddingVec EncodeAudio(const EncoderParams &params, const Utterance &utt,
                         ForwardTape *tape = nullptr);
EmbeddingVec EncodeText(const EncoderParams &params,
                        std::span<const SymbolId> symbols,
                        ForwardTape *tape = nullptr);
EmbeddingVec EncodeText(const EncoderParams &params, const PhoneSeq &seq,
                        ForwardTape *tape = nullptr);
EmbeddingVec EncodeText(const EncoderParams &params, const GraphemeSeq &seq,
                        ForwardTape *tape = nullptr);

// Accumulates d(loss)/d(theta) into `grad_theta` (layout of params.theta)
// given d(loss)/d(embedding). The tape must come from a forward pass with
// identically-shaped parameters.
void BackwardAccum(const EncoderParams &params, const ForwardTape &tape,
                   const EmbeddingVec &grad_embedding,
                   std::span<double> grad_theta);
std::vector<double> Backward(const EncoderParams &params, const ForwardTape &tape,
                             const EmbeddingVec &grad_embedding);

// Versioned binary model container; round-trips bit-exactly.
void WriteEncoder(std::ostream &out, const EncoderParams &params);
EncoderParams ReadEncoder(std::istream &in, const std::string &source_name);
void WriteEncoderFile(const std::string &path, const EncoderParams &params);
EncoderParams ReadEncoderFile(const std::string &path);

}  // namespace ane

#endif  // ANE_ENCODER_HPP
