#pragma once

// Sequential predictors: reset to a fresh window, emit a next-symbol
// distribution, consume the observed symbol.  The coder and the experiment
// harness drive everything through this interface.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vomc/model.hpp"

namespace vomc {

class SequentialPredictor {
 public:
  virtual ~SequentialPredictor() = default;

  virtual int alphabet() const = 0;
  // Starts a new window; `padding` is a chronological fragment supplying the
  // initial context (length requirements depend on the predictor's depth).
  virtual void reset(std::span<const Symbol> padding) = 0;
  // Fills a strictly positive probability vector over the alphabet.
  virtual void predict(std::span<double> out) const = 0;
  virtual void update(Symbol x) = 0;
  virtual std::string name() const = 0;

  std::vector<double> predict_vector() const {
    std::vector<double> out(std::size_t(alphabet()), 0.0);
    predict(out);
    return out;
  }
};

// Wire ids for the code stream header.
enum class PredictorId : std::uint8_t {
  uniform = 0,
  ctw = 1,
  blend = 2,
  ppm = 3,
  syntf = 4,
};

const char* predictor_id_name(PredictorId id);

struct PredictorConfig {
  PredictorId id = PredictorId::ctw;
  CtwPrior prior;      // D doubles as the PPM order; lambda/alpha unused there
  int syntf_variant = 0;
};

std::unique_ptr<SequentialPredictor> make_predictor(const PredictorConfig& config);

}  // namespace vomc
