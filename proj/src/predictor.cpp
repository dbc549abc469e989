#include "vomc/predictor.hpp"

#include <optional>
#include <stdexcept>

#include "vomc/ctw.hpp"
#include "vomc/pathblend.hpp"
#include "vomc/ppm.hpp"
#include "vomc/syntf.hpp"

namespace vomc {

namespace {

class UniformPredictor final : public SequentialPredictor {
 public:
  explicit UniformPredictor(int alphabet) : alphabet_(alphabet) {
    if (alphabet < 2 || alphabet > 256) throw std::invalid_argument("UniformPredictor: bad alphabet");
  }
  int alphabet() const override { return alphabet_; }
  void reset(std::span<const Symbol>) override {}
  void predict(std::span<double> out) const override {
    for (auto& v : out) v = 1.0 / double(alphabet_);
  }
  void update(Symbol) override {}
  std::string name() const override { return "uniform"; }

 private:
  int alphabet_;
};

std::vector<Symbol> fit_padding(std::span<const Symbol> padding, int depth) {
  std::vector<Symbol> pad(padding.begin(), padding.end());
  while (int(pad.size()) < depth) pad.insert(pad.begin(), Symbol(0));
  return pad;
}

class CtwPredictor final : public SequentialPredictor {
 public:
  explicit CtwPredictor(CtwPrior prior) : prior_(std::move(prior)) { prior_.validate(); }
  int alphabet() const override { return prior_.alphabet; }
  void reset(std::span<const Symbol> padding) override {
    state_.emplace(prior_, fit_padding(padding, prior_.depth));
  }
  void predict(std::span<double> out) const override {
    if (!state_) throw std::logic_error("CtwPredictor: reset() not called");
    state_->predict(out);
  }
  void update(Symbol x) override {
    if (!state_) throw std::logic_error("CtwPredictor: reset() not called");
    state_->update(x);
  }
  std::string name() const override { return "ctw"; }

 private:
  CtwPrior prior_;
  std::optional<CtwState> state_;
};

// Path-blending route: same CTW node state, prediction assembled from the
// path-blending weights instead of hypothetical updates.
class BlendPredictor final : public SequentialPredictor {
 public:
  explicit BlendPredictor(CtwPrior prior) : prior_(std::move(prior)) { prior_.validate(); }
  int alphabet() const override { return prior_.alphabet; }
  void reset(std::span<const Symbol> padding) override {
    state_.emplace(prior_, fit_padding(padding, prior_.depth));
  }
  void predict(std::span<double> out) const override {
    if (!state_) throw std::logic_error("BlendPredictor: reset() not called");
    const auto p = blend_predict(*state_);
    std::copy(p.begin(), p.end(), out.begin());
  }
  void update(Symbol x) override {
    if (!state_) throw std::logic_error("BlendPredictor: reset() not called");
    state_->update(x);
  }
  std::string name() const override { return "blend"; }

 private:
  CtwPrior prior_;
  std::optional<CtwState> state_;
};

class PpmPredictor final : public SequentialPredictor {
 public:
  PpmPredictor(int alphabet, int max_order) : alphabet_(alphabet), max_order_(max_order) {}
  int alphabet() const override { return alphabet_; }
  void reset(std::span<const Symbol> padding) override {
    model_.emplace(alphabet_, max_order_, fit_padding(padding, max_order_));
  }
  void predict(std::span<double> out) const override {
    if (!model_) throw std::logic_error("PpmPredictor: reset() not called");
    const auto p = model_->predict_vector();
    std::copy(p.begin(), p.end(), out.begin());
  }
  void update(Symbol x) override {
    if (!model_) throw std::logic_error("PpmPredictor: reset() not called");
    model_->update(x);
  }
  std::string name() const override { return "ppm:" + std::to_string(max_order_); }

 private:
  int alphabet_;
  int max_order_;
  std::optional<PpmModel> model_;
};

}  // namespace

const char* predictor_id_name(PredictorId id) {
  switch (id) {
    case PredictorId::uniform: return "uniform";
    case PredictorId::ctw: return "ctw";
    case PredictorId::blend: return "blend";
    case PredictorId::ppm: return "ppm";
    case PredictorId::syntf: return "syntf";
  }
  return "?";
}

std::unique_ptr<SequentialPredictor> make_predictor(const PredictorConfig& config) {
  switch (config.id) {
    case PredictorId::uniform:
      return std::make_unique<UniformPredictor>(config.prior.alphabet);
    case PredictorId::ctw:
      return std::make_unique<CtwPredictor>(config.prior);
    case PredictorId::blend:
      return std::make_unique<BlendPredictor>(config.prior);
    case PredictorId::ppm:
      return std::make_unique<PpmPredictor>(config.prior.alphabet, config.prior.depth);
    case PredictorId::syntf: {
      SynTfConfig cfg;
      cfg.prior = config.prior;
      cfg.variant = FeatureVariant(config.syntf_variant);
      return std::make_unique<SynTfPredictor>(std::move(cfg));
    }
  }
  throw std::invalid_argument("make_predictor: unknown id");
}

}  // namespace vomc
