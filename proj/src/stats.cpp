#include "vomc/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace vomc {

std::uint64_t pack_suffix(ContextView suffix, int alphabet) {
  std::uint64_t key = 1;
  for (Symbol s : suffix) {
    if (int(s) >= alphabet) throw std::invalid_argument("pack_suffix: symbol out of range");
    if (key > (~std::uint64_t{0} >> 1) / std::uint64_t(alphabet))
      throw std::invalid_argument("pack_suffix: suffix too long for 63-bit key");
    key = key * std::uint64_t(alphabet) + s;
  }
  return key;
}

CountTable::CountTable(int alphabet, int max_order, std::span<const Symbol> padding)
    : alphabet_(alphabet), max_order_(max_order) {
  if (alphabet < 2 || alphabet > 256) throw std::invalid_argument("CountTable: bad alphabet");
  if (max_order < 0) throw std::invalid_argument("CountTable: bad max order");
  if (int(padding.size()) < max_order)
    throw std::invalid_argument("CountTable: padding shorter than max order");
  // key-width guard for the deepest suffix
  std::vector<Symbol> probe(std::size_t(max_order), Symbol(alphabet - 1));
  pack_suffix(probe, alphabet);
  recent_.assign(padding.rbegin(), padding.rbegin() + max_order);  // newest first
}

const std::uint32_t* CountTable::find(ContextView suffix) const {
  const auto it = slots_.find(pack_suffix(suffix, alphabet_));
  if (it == slots_.end()) return nullptr;
  return storage_.data() + it->second;
}

std::uint32_t* CountTable::find_or_insert(ContextView suffix) {
  const std::uint64_t key = pack_suffix(suffix, alphabet_);
  const auto it = slots_.find(key);
  if (it != slots_.end()) return storage_.data() + it->second;
  const std::uint32_t at = std::uint32_t(storage_.size());
  slots_.emplace(key, at);
  storage_.resize(storage_.size() + std::size_t(alphabet_), 0);
  return storage_.data() + at;
}

void CountTable::update(Symbol x) {
  if (int(x) >= alphabet_) throw std::invalid_argument("CountTable::update: symbol out of range");
  for (int l = 0; l <= max_order_; ++l) {
    std::uint32_t* c = find_or_insert(ContextView(recent_.data(), std::size_t(l)));
    c[x] += 1;
  }
  if (max_order_ > 0) {
    for (int k = max_order_ - 1; k > 0; --k) recent_[std::size_t(k)] = recent_[std::size_t(k - 1)];
    recent_[0] = x;
  }
  ++position_;
}

std::vector<std::uint32_t> CountTable::counts(ContextView suffix) const {
  const std::uint32_t* c = find(suffix);
  if (!c) return std::vector<std::uint32_t>(std::size_t(alphabet_), 0);
  return std::vector<std::uint32_t>(c, c + alphabet_);
}

std::uint64_t CountTable::total(ContextView suffix) const {
  const std::uint32_t* c = find(suffix);
  if (!c) return 0;
  std::uint64_t t = 0;
  for (int a = 0; a < alphabet_; ++a) t += c[std::size_t(a)];
  return t;
}

std::vector<double> CountTable::forward_stats(ContextView suffix) const {
  std::vector<double> g(std::size_t(alphabet_), 1.0 / double(alphabet_));
  const std::uint32_t* c = find(suffix);
  if (!c) return g;
  std::uint64_t t = 0;
  for (int a = 0; a < alphabet_; ++a) t += c[std::size_t(a)];
  if (t == 0) return g;
  for (int a = 0; a < alphabet_; ++a) g[std::size_t(a)] = double(c[std::size_t(a)]) / double(t);
  return g;
}

std::vector<double> CountTable::backward_stats(ContextView suffix) const {
  if (int(suffix.size()) >= max_order_)
    throw std::invalid_argument("backward_stats: extension exceeds max order");
  std::vector<double> g(std::size_t(alphabet_), 1.0 / double(alphabet_));
  const std::uint64_t denom = total(suffix);
  if (denom == 0) return g;
  std::vector<Symbol> extended(suffix.begin(), suffix.end());
  extended.push_back(0);
  for (int a = 0; a < alphabet_; ++a) {
    extended.back() = Symbol(a);  // older symbol goes at the back
    g[std::size_t(a)] = double(total(extended)) / double(denom);
  }
  return g;
}

void CountTable::current_context(std::span<Symbol> out) const {
  if (out.size() > recent_.size())
    throw std::invalid_argument("current_context: request longer than window");
  std::copy(recent_.begin(), recent_.begin() + std::ptrdiff_t(out.size()), out.begin());
}

std::string CountTable::dump_csv() const {
  struct Row {
    std::uint64_t key;
    std::vector<Symbol> suffix;
    const std::uint32_t* counts;
  };
  std::vector<Row> rows;
  rows.reserve(slots_.size());
  for (const auto& [key, at] : slots_) {
    // unpack: strip base-A digits below the sentinel
    std::vector<Symbol> sfx;
    std::uint64_t k = key;
    while (k > 1) {
      sfx.push_back(Symbol(k % std::uint64_t(alphabet_)));
      k /= std::uint64_t(alphabet_);
    }
    std::reverse(sfx.begin(), sfx.end());  // back to most-recent-first
    rows.push_back({key, std::move(sfx), storage_.data() + at});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.key < b.key; });

  std::string out;
  char buf[16];
  for (const Row& row : rows) {
    // render oldest-first for readability
    for (auto it = row.suffix.rbegin(); it != row.suffix.rend(); ++it) {
      if (it != row.suffix.rbegin()) out += '-';
      std::snprintf(buf, sizeof buf, "%d", int(*it));
      out += buf;
    }
    for (int a = 0; a < alphabet_; ++a) {
      std::snprintf(buf, sizeof buf, ",%u", row.counts[std::size_t(a)]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

CountReconstruction reconstruct_counts(const CountTable& table, int max_depth) {
  if (max_depth > table.max_order())
    throw std::invalid_argument("reconstruct_counts: depth exceeds table order");
  const int a = table.alphabet();
  std::vector<Symbol> context(std::size_t(max_depth), Symbol(0));
  table.current_context(context);

  CountReconstruction out;
  out.counts.reserve(std::size_t(max_depth) + 1);
  out.path_seen.reserve(std::size_t(max_depth) + 1);

  double factor_product = 1.0;
  bool seen = true;
  for (int l = 0; l <= max_depth; ++l) {
    const ContextView path_suffix(context.data(), std::size_t(l));
    seen = seen && table.total(path_suffix) > 0;
    out.path_seen.push_back(seen);

    const std::vector<double> g = table.forward_stats(path_suffix);
    std::vector<double> n(std::size_t(a), 0.0);
    for (int q = 0; q < a; ++q)
      n[std::size_t(q)] = g[std::size_t(q)] * factor_product * double(table.position());
    out.counts.push_back(std::move(n));

    if (l < max_depth) {
      // g_back at depth l evaluated at the (l+1)-th newest symbol
      const std::vector<double> back = table.backward_stats(path_suffix);
      factor_product *= back[context[std::size_t(l)]];
    }
  }
  return out;
}

std::vector<double> reconstruct_at_depth(std::span<const double> forward,
                                         std::span<const double> backward_factors,
                                         std::uint64_t position) {
  double prod = double(position);
  for (double f : backward_factors) prod *= f;
  std::vector<double> n(forward.size());
  for (std::size_t q = 0; q < forward.size(); ++q) n[q] = forward[q] * prod;
  return n;
}

}  // namespace vomc
