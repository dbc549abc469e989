#pragma once

// Arithmetic coder over any sequential predictor, plus the VOMC container.
//
// The coder is the classic carry-free binary arithmetic coder (32-bit low /
// high registers, pending-bit renormalization).  Predictive vectors are
// quantized to 16-bit cumulative frequencies with a floor of one count per
// symbol, identically on both sides, so streams are bit-exact across runs
// and platforms.
//
// Container layout (little-endian):
//   magic "VOMC" | u8 version=1 | u8 A | u8 predictor id | u8 D |
//   f64 lambda | f64 alpha[A] | u32 N | u8 padding[D] | payload bytes

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vomc/predictor.hpp"

namespace vomc {

inline constexpr std::uint32_t kFreqScaleBits = 16;
inline constexpr std::uint32_t kFreqScale = 1u << kFreqScaleBits;

// Integer frequencies summing to exactly kFreqScale, each >= 1; requires a
// nonnegative vector summing to 1 within 1e-9.
std::vector<std::uint32_t> quantize_distribution(std::span<const double> p);

struct CodeHeader {
  std::uint8_t version = 1;
  std::uint8_t alphabet = 0;
  PredictorId predictor = PredictorId::uniform;
  std::uint8_t depth = 0;
  double lambda = 0.0;
  std::vector<double> alpha;
  std::uint32_t length = 0;
  std::vector<Symbol> padding;  // chronological, `depth` symbols
};

struct CodeStream {
  CodeHeader header;
  std::vector<std::uint8_t> payload;
  std::uint64_t payload_bits = 0;
  // sum over symbols of -log2(quantized probability); the payload is bounded
  // by ceil(.) + 32 of this
  double ideal_quantized_bits = 0.0;
};

// Resets the predictor with the sequence's padding and codes x_1..x_N.
CodeStream encode(const SourceSequence& seq, SequentialPredictor& predictor,
                  const CodeHeader& header_template);

// Convenience: build header from the predictor config and encode.
CodeStream encode(const SourceSequence& seq, const PredictorConfig& config);

// Rebuilds the predictor from the header and inverts encode().
SourceSequence decode(const CodeStream& stream);
SourceSequence decode(const CodeStream& stream, SequentialPredictor& predictor);

std::vector<std::uint8_t> stream_to_bytes(const CodeStream& stream);
CodeStream stream_from_bytes(std::span<const std::uint8_t> bytes);

// nats of model log-probability -> ideal bits.
double ideal_code_length(double logprob_nats);

}  // namespace vomc
