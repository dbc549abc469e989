#include "vomc/coder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace vomc {

namespace {

constexpr std::uint64_t kCodeMax = 0xFFFFFFFFull;
constexpr std::uint64_t kHalf = 0x80000000ull;
constexpr std::uint64_t kQuarter = 0x40000000ull;
constexpr std::uint64_t kThreeQuarters = 0xC0000000ull;

class BitWriter {
 public:
  void put(std::uint32_t bit) {
    if (pos_ == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= std::uint8_t(1u << (7 - pos_));
    pos_ = (pos_ + 1) & 7;
    ++bits_;
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }
  std::uint64_t bit_count() const { return bits_; }

 private:
  std::vector<std::uint8_t> bytes_;
  unsigned pos_ = 0;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t get() {
    const std::uint64_t byte = bit_ >> 3;
    std::uint32_t out = 0;
    if (byte < bytes_.size())
      out = (bytes_[byte] >> (7 - (bit_ & 7))) & 1u;
    else
      ++overrun_;
    ++bit_;
    return out;
  }
  std::uint64_t overrun() const { return overrun_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t bit_ = 0;
  std::uint64_t overrun_ = 0;
};

class ArithmeticEncoder {
 public:
  explicit ArithmeticEncoder(BitWriter& out) : out_(out) {}

  void encode(std::uint32_t cum_lo, std::uint32_t cum_hi) {
    const std::uint64_t width = high_ - low_ + 1;
    high_ = low_ + (width * cum_hi >> kFreqScaleBits) - 1;
    low_ = low_ + (width * cum_lo >> kFreqScaleBits);
    for (;;) {
      if (high_ < kHalf) {
        emit(0);
      } else if (low_ >= kHalf) {
        emit(1);
        low_ -= kHalf;
        high_ -= kHalf;
      } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
        ++pending_;
        low_ -= kQuarter;
        high_ -= kQuarter;
      } else {
        break;
      }
      low_ <<= 1;
      high_ = (high_ << 1) | 1;
    }
  }

  void finish() {
    // two final bits pin the interval
    ++pending_;
    emit(low_ >= kQuarter ? 1 : 0);
  }

 private:
  void emit(std::uint32_t bit) {
    out_.put(bit);
    for (; pending_; --pending_) out_.put(bit ^ 1u);
  }

  BitWriter& out_;
  std::uint64_t low_ = 0;
  std::uint64_t high_ = kCodeMax;
  std::uint64_t pending_ = 0;
};

class ArithmeticDecoder {
 public:
  explicit ArithmeticDecoder(BitReader& in) : in_(in) {
    for (int i = 0; i < 32; ++i) value_ = (value_ << 1) | in_.get();
  }

  // cumulative target used to locate the symbol within the 16-bit scale
  std::uint32_t decode_target() const {
    const std::uint64_t width = high_ - low_ + 1;
    return std::uint32_t((((value_ - low_ + 1) << kFreqScaleBits) - 1) / width);
  }

  void consume(std::uint32_t cum_lo, std::uint32_t cum_hi) {
    const std::uint64_t width = high_ - low_ + 1;
    high_ = low_ + (width * cum_hi >> kFreqScaleBits) - 1;
    low_ = low_ + (width * cum_lo >> kFreqScaleBits);
    for (;;) {
      if (high_ < kHalf) {
        // nothing
      } else if (low_ >= kHalf) {
        low_ -= kHalf;
        high_ -= kHalf;
        value_ -= kHalf;
      } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
        low_ -= kQuarter;
        high_ -= kQuarter;
        value_ -= kQuarter;
      } else {
        break;
      }
      low_ <<= 1;
      high_ = (high_ << 1) | 1;
      value_ = (value_ << 1) | in_.get();
    }
  }

 private:
  BitReader& in_;
  std::uint64_t low_ = 0;
  std::uint64_t high_ = kCodeMax;
  std::uint64_t value_ = 0;
};

void validate_distribution(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::runtime_error("coder: negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::runtime_error("coder: predictive vector does not sum to 1");
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void append_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(bits >> (8 * i)));
}

std::uint32_t read_u32(std::span<const std::uint8_t> in, std::size_t& at) {
  if (at + 4 > in.size()) throw std::runtime_error("container: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(in[at + std::size_t(i)]) << (8 * i);
  at += 4;
  return v;
}

double read_f64(std::span<const std::uint8_t> in, std::size_t& at) {
  if (at + 8 > in.size()) throw std::runtime_error("container: truncated header");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(in[at + std::size_t(i)]) << (8 * i);
  at += 8;
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

std::vector<std::uint32_t> quantize_distribution(std::span<const double> p) {
  validate_distribution(p);
  const std::size_t a = p.size();
  if (a < 2 || a > 256) throw std::runtime_error("quantize: bad alphabet size");
  std::vector<std::uint32_t> f(a);
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < a; ++i) {
    f[i] = std::uint32_t(std::max<std::int64_t>(1, std::llround(p[i] * double(kFreqScale))));
    sum += f[i];
  }
  std::int64_t diff = std::int64_t(kFreqScale) - sum;
  while (diff != 0) {
    // push the correction onto the most probable symbol, respecting the floor
    std::size_t pick = 0;
    for (std::size_t i = 1; i < a; ++i)
      if (f[i] > f[pick]) pick = i;
    if (diff > 0) {
      f[pick] += std::uint32_t(diff);
      diff = 0;
    } else {
      const std::int64_t cut = std::min<std::int64_t>(-diff, std::int64_t(f[pick]) - 1);
      f[pick] -= std::uint32_t(cut);
      diff += cut;
      if (cut == 0) throw std::runtime_error("quantize: cannot satisfy frequency floor");
    }
  }
  return f;
}

double ideal_code_length(double logprob_nats) {
  if (logprob_nats > 0.0) throw std::invalid_argument("ideal_code_length: logprob must be <= 0");
  return -logprob_nats / std::numbers::ln2;
}

CodeStream encode(const SourceSequence& seq, SequentialPredictor& predictor,
                  const CodeHeader& header_template) {
  if (seq.alphabet > 255)
    throw std::invalid_argument("encode: the u8 header field limits alphabets to 255");
  CodeStream stream;
  stream.header = header_template;
  stream.header.alphabet = std::uint8_t(seq.alphabet);
  stream.header.length = std::uint32_t(seq.length());
  if (stream.header.padding.size() != std::size_t(stream.header.depth))
    throw std::invalid_argument("encode: header padding length must equal depth");

  predictor.reset(stream.header.padding);
  BitWriter writer;
  ArithmeticEncoder enc(writer);
  std::vector<double> p(std::size_t(seq.alphabet), 0.0);
  for (Symbol x : seq.symbols) {
    predictor.predict(p);
    const auto f = quantize_distribution(p);
    std::uint32_t cum = 0;
    for (int s = 0; s < int(x); ++s) cum += f[std::size_t(s)];
    enc.encode(cum, cum + f[x]);
    stream.ideal_quantized_bits += std::log2(double(kFreqScale) / double(f[x]));
    predictor.update(x);
  }
  enc.finish();
  stream.payload_bits = writer.bit_count();
  stream.payload = writer.take();
  return stream;
}

CodeStream encode(const SourceSequence& seq, const PredictorConfig& config) {
  auto predictor = make_predictor(config);
  CodeHeader header;
  // syntf feature variants share the id range 4..7
  header.predictor = config.id == PredictorId::syntf
                         ? PredictorId(4 + config.syntf_variant)
                         : config.id;
  header.depth = std::uint8_t(config.prior.depth);
  header.lambda = config.prior.lambda;
  header.alpha = config.prior.alpha;
  if (int(seq.initial_context.size()) < config.prior.depth)
    throw std::invalid_argument("encode: sequence padding shorter than predictor depth");
  header.padding.assign(seq.initial_context.end() - config.prior.depth,
                        seq.initial_context.end());
  return encode(seq, *predictor, header);
}

SourceSequence decode(const CodeStream& stream, SequentialPredictor& predictor) {
  const int a = stream.header.alphabet;
  if (a < 2) throw std::runtime_error("decode: bad alphabet");
  predictor.reset(stream.header.padding);

  SourceSequence seq;
  seq.alphabet = a;
  seq.initial_context = stream.header.padding;
  seq.symbols.reserve(stream.header.length);

  BitReader reader(stream.payload);
  ArithmeticDecoder dec(reader);
  std::vector<double> p(std::size_t(a), 0.0);
  for (std::uint32_t i = 0; i < stream.header.length; ++i) {
    predictor.predict(p);
    const auto f = quantize_distribution(p);
    const std::uint32_t target = dec.decode_target();
    std::uint32_t cum = 0;
    int sym = a - 1;
    for (int s = 0; s < a; ++s) {
      if (target < cum + f[std::size_t(s)]) {
        sym = s;
        break;
      }
      cum += f[std::size_t(s)];
    }
    dec.consume(cum, cum + f[std::size_t(sym)]);
    seq.symbols.push_back(Symbol(sym));
    predictor.update(Symbol(sym));
    if (reader.overrun() > 64) throw std::runtime_error("decode: truncated payload");
  }
  return seq;
}

SourceSequence decode(const CodeStream& stream) {
  PredictorConfig config;
  const std::uint8_t raw = std::uint8_t(stream.header.predictor);
  if (raw >= 4 && raw <= 7) {
    config.id = PredictorId::syntf;
    config.syntf_variant = raw - 4;
  } else if (raw <= 3) {
    config.id = PredictorId(raw);
  } else {
    throw std::runtime_error("decode: unknown predictor id");
  }
  config.prior.alphabet = stream.header.alphabet;
  config.prior.depth = stream.header.depth;
  config.prior.lambda = stream.header.lambda;
  config.prior.alpha = stream.header.alpha;
  auto predictor = make_predictor(config);
  return decode(stream, *predictor);
}

std::vector<std::uint8_t> stream_to_bytes(const CodeStream& stream) {
  const CodeHeader& h = stream.header;
  std::vector<std::uint8_t> out{'V', 'O', 'M', 'C'};
  out.push_back(h.version);
  out.push_back(h.alphabet);
  out.push_back(std::uint8_t(h.predictor));
  out.push_back(h.depth);
  append_f64(out, h.lambda);
  if (h.alpha.size() != std::size_t(h.alphabet))
    throw std::runtime_error("container: alpha arity mismatch");
  for (double v : h.alpha) append_f64(out, v);
  append_u32(out, h.length);
  if (h.padding.size() != std::size_t(h.depth))
    throw std::runtime_error("container: padding arity mismatch");
  for (Symbol s : h.padding) out.push_back(s);
  out.insert(out.end(), stream.payload.begin(), stream.payload.end());
  return out;
}

CodeStream stream_from_bytes(std::span<const std::uint8_t> bytes) {
  std::size_t at = 0;
  if (bytes.size() < 8 || bytes[0] != 'V' || bytes[1] != 'O' || bytes[2] != 'M' ||
      bytes[3] != 'C')
    throw std::runtime_error("container: bad magic");
  at = 4;
  CodeStream stream;
  CodeHeader& h = stream.header;
  h.version = bytes[at++];
  if (h.version != 1) throw std::runtime_error("container: unsupported version");
  h.alphabet = bytes[at++];
  h.predictor = PredictorId(bytes[at++]);
  h.depth = bytes[at++];
  h.lambda = read_f64(bytes, at);
  h.alpha.resize(h.alphabet);
  for (double& v : h.alpha) v = read_f64(bytes, at);
  h.length = read_u32(bytes, at);
  if (at + h.depth > bytes.size()) throw std::runtime_error("container: truncated header");
  h.padding.assign(bytes.begin() + std::ptrdiff_t(at),
                   bytes.begin() + std::ptrdiff_t(at + h.depth));
  at += h.depth;
  stream.payload.assign(bytes.begin() + std::ptrdiff_t(at), bytes.end());
  stream.payload_bits = std::uint64_t(stream.payload.size()) * 8;
  return stream;
}

}  // namespace vomc
