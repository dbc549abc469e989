#include "vomc/ppm.hpp"

#include <stdexcept>

#include "vomc/stats.hpp"

namespace vomc {

PpmModel::PpmModel(int alphabet, int max_order) : alphabet_(alphabet), max_order_(max_order) {
  if (alphabet < 2 || alphabet > 256) throw std::invalid_argument("PpmModel: bad alphabet");
  if (max_order < 0) throw std::invalid_argument("PpmModel: bad max order");
  std::vector<Symbol> probe(std::size_t(max_order), Symbol(alphabet - 1));
  pack_suffix(probe, alphabet);
  recent_.assign(std::size_t(max_order), 0);
}

PpmModel::PpmModel(int alphabet, int max_order, std::span<const Symbol> padding)
    : PpmModel(alphabet, max_order) {
  if (int(padding.size()) < max_order)
    throw std::invalid_argument("PpmModel: padding shorter than max order");
  for (int k = 0; k < max_order; ++k)
    recent_[std::size_t(k)] = padding[padding.size() - 1 - std::size_t(k)];
  available_ = max_order;
}

const std::uint32_t* PpmModel::find(ContextView suffix) const {
  const auto it = slots_.find(pack_suffix(suffix, alphabet_));
  if (it == slots_.end()) return nullptr;
  return storage_.data() + it->second;
}

void PpmModel::update(Symbol x) {
  if (int(x) >= alphabet_) throw std::invalid_argument("PpmModel::update: bad symbol");
  for (int k = 0; k <= available_; ++k) {
    const std::uint64_t key = pack_suffix(ContextView(recent_.data(), std::size_t(k)), alphabet_);
    auto it = slots_.find(key);
    if (it == slots_.end()) {
      it = slots_.emplace(key, std::uint32_t(storage_.size())).first;
      storage_.resize(storage_.size() + std::size_t(alphabet_), 0);
    }
    storage_[it->second + x] += 1;
  }
  if (max_order_ > 0) {
    for (int k = max_order_ - 1; k > 0; --k) recent_[std::size_t(k)] = recent_[std::size_t(k - 1)];
    recent_[0] = x;
  }
  if (available_ < max_order_) ++available_;
  ++position_;
}

double PpmModel::predict_symbol(Symbol x) const {
  if (int(x) >= alphabet_) throw std::invalid_argument("PpmModel::predict_symbol: bad symbol");
  double p = 1.0;
  // longest order with any observation; higher orders are skipped unescaped
  int k = available_;
  while (k >= 0 && find(ContextView(recent_.data(), std::size_t(k))) == nullptr) --k;
  for (; k >= 0; --k) {
    const std::uint32_t* c = find(ContextView(recent_.data(), std::size_t(k)));
    std::uint64_t total = 0;
    for (int a = 0; a < alphabet_; ++a) total += c[std::size_t(a)];
    if (c[std::size_t(x)] > 0) return p * double(c[std::size_t(x)]) / double(total + 1);
    p *= 1.0 / double(total + 1);
  }
  return p / double(alphabet_);
}

std::vector<double> PpmModel::effective_vector() const {
  std::vector<double> out(std::size_t(alphabet_), 0.0);
  for (int a = 0; a < alphabet_; ++a) out[std::size_t(a)] = predict_symbol(Symbol(a));
  return out;
}

std::vector<double> PpmModel::predict_vector() const {
  std::vector<double> out = effective_vector();
  double z = 0.0;
  for (double p : out) z += p;
  for (double& p : out) p /= z;
  return out;
}

std::vector<std::uint32_t> PpmModel::context_counts(ContextView suffix) const {
  const std::uint32_t* c = find(suffix);
  if (!c) return std::vector<std::uint32_t>(std::size_t(alphabet_), 0);
  return std::vector<std::uint32_t>(c, c + alphabet_);
}

std::uint64_t PpmModel::context_total(ContextView suffix) const {
  const std::uint32_t* c = find(suffix);
  if (!c) return 0;
  std::uint64_t t = 0;
  for (int a = 0; a < alphabet_; ++a) t += c[std::size_t(a)];
  return t;
}

}  // namespace vomc
