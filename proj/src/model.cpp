#include "vomc/model.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace vomc {

namespace {

constexpr double kSimplexTol = 1e-12;

void check_alphabet(int a) {
  if (a < 2 || a > 256) throw std::invalid_argument("alphabet size must be in [2, 256]");
}

std::string format_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

}  // namespace

CtwPrior CtwPrior::jeffreys(int alphabet, int depth, double lambda) {
  CtwPrior prior;
  prior.alphabet = alphabet;
  prior.depth = depth;
  prior.lambda = lambda;
  prior.alpha.assign(std::size_t(alphabet), 0.5);
  prior.validate();
  return prior;
}

double CtwPrior::alpha_sum() const {
  double s = 0.0;
  for (double a : alpha) s += a;
  return s;
}

void CtwPrior::validate() const {
  check_alphabet(alphabet);
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw std::invalid_argument("lambda must be in (0, 1)");
  if (int(alpha.size()) != alphabet)
    throw std::invalid_argument("alpha size must equal alphabet size");
  for (double a : alpha)
    if (!(a > 0.0)) throw std::invalid_argument("alpha entries must be > 0");
}

ContextTree::ContextTree(int alphabet, int depth_bound)
    : alphabet_(alphabet), depth_bound_(depth_bound) {
  check_alphabet(alphabet);
  if (depth_bound < 0) throw std::invalid_argument("depth bound must be >= 0");
  nodes_.emplace_back();
}

int ContextTree::branch(int id) {
  Node& n = nodes_[std::size_t(id)];
  if (n.first_child >= 0) throw std::logic_error("branch: node already internal");
  if (n.depth >= depth_bound_) throw std::logic_error("branch: node at depth bound");
  const int first = int(nodes_.size());
  n.first_child = first;
  const std::int8_t child_depth = std::int8_t(n.depth + 1);
  for (int s = 0; s < alphabet_; ++s) {
    Node c;
    c.parent = id;
    c.branch_symbol = Symbol(s);
    c.depth = child_depth;
    nodes_.push_back(std::move(c));
  }
  return first;
}

int ContextTree::leaf_count() const {
  int n = 0;
  for (const Node& node : nodes_)
    if (node.first_child < 0) ++n;
  return n;
}

int ContextTree::leaf_count_at_depth_bound() const {
  int n = 0;
  for (const Node& node : nodes_)
    if (node.first_child < 0 && node.depth == depth_bound_) ++n;
  return n;
}

std::vector<int> ContextTree::leaves() const {
  std::vector<int> out;
  for (int i = 0; i < node_count(); ++i)
    if (is_leaf(i)) out.push_back(i);
  return out;
}

int ContextTree::classify(ContextView context) const {
  int cur = 0;
  int d = 0;
  while (nodes_[std::size_t(cur)].first_child >= 0) {
    if (std::size_t(d) >= context.size())
      throw std::invalid_argument("classify: context shorter than leaf depth");
    const Symbol s = context[std::size_t(d)];
    if (int(s) >= alphabet_) throw std::invalid_argument("classify: symbol out of range");
    cur = child(cur, s);
    ++d;
  }
  return cur;
}

std::vector<double>& ContextTree::leaf_dist(int id) {
  if (!is_leaf(id)) throw std::logic_error("leaf_dist: not a leaf");
  return nodes_[std::size_t(id)].dist;
}

const std::vector<double>& ContextTree::leaf_dist(int id) const {
  if (!is_leaf(id)) throw std::logic_error("leaf_dist: not a leaf");
  return nodes_[std::size_t(id)].dist;
}

std::vector<Symbol> ContextTree::suffix_of(int id) const {
  std::vector<Symbol> out;
  int cur = id;
  while (cur != 0) {
    out.push_back(nodes_[std::size_t(cur)].branch_symbol);
    cur = nodes_[std::size_t(cur)].parent;
  }
  // the first edge from the root consumes the newest symbol, so the
  // leaf-to-root walk above must be reversed
  std::vector<Symbol> rev(out.rbegin(), out.rend());
  return rev;
}

void ContextTree::validate(bool require_dists) const {
  for (int i = 0; i < node_count(); ++i) {
    const Node& n = nodes_[std::size_t(i)];
    if (n.depth > depth_bound_) throw std::runtime_error("tree invariant: node below depth bound");
    if (n.first_child >= 0) {
      if (n.first_child + alphabet_ > node_count())
        throw std::runtime_error("tree invariant: truncated child block");
      for (int s = 0; s < alphabet_; ++s) {
        const Node& c = nodes_[std::size_t(n.first_child + s)];
        if (c.parent != i || int(c.branch_symbol) != s || c.depth != n.depth + 1)
          throw std::runtime_error("tree invariant: malformed child block");
      }
      if (!n.dist.empty()) throw std::runtime_error("tree invariant: internal node has distribution");
    } else if (require_dists) {
      if (int(n.dist.size()) != alphabet_)
        throw std::runtime_error("tree invariant: leaf distribution missing");
      double sum = 0.0;
      for (double p : n.dist) {
        if (p < 0.0 || p > 1.0) throw std::runtime_error("tree invariant: probability out of range");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kSimplexTol)
        throw std::runtime_error("tree invariant: leaf distribution does not sum to 1");
    }
  }
}

bool ContextTree::structure_equals(const ContextTree& other) const {
  if (alphabet_ != other.alphabet_ || node_count() != other.node_count()) return false;
  for (int i = 0; i < node_count(); ++i)
    if ((nodes_[std::size_t(i)].first_child < 0) != (other.nodes_[std::size_t(i)].first_child < 0))
      return false;
  return true;
}

void context_before(const SourceSequence& seq, std::size_t i, std::span<Symbol> out) {
  const std::size_t pad = seq.initial_context.size();
  for (std::size_t k = 0; k < out.size(); ++k) {
    // position i-1-k in 1-based body coordinates; <= 0 falls into the padding
    const std::int64_t pos = std::int64_t(i) - 1 - std::int64_t(k);
    if (pos >= 1) {
      out[k] = seq.symbols[std::size_t(pos - 1)];
    } else {
      const std::int64_t pad_index = std::int64_t(pad) - 1 + pos;  // x_0 = back()
      if (pad_index < 0) throw std::out_of_range("context_before: padding exhausted");
      out[k] = seq.initial_context[std::size_t(pad_index)];
    }
  }
}

ContextTree sample_tree_structure(const CtwPrior& prior, Rng& rng) {
  prior.validate();
  ContextTree tree(prior.alphabet, prior.depth);
  // preorder growth keeps the draw order deterministic
  std::function<void(int)> grow = [&](int id) {
    if (tree.node(id).depth >= prior.depth) return;
    if (rng.next_double() < prior.lambda) return;  // stop branching
    const int first = tree.branch(id);
    for (int s = 0; s < prior.alphabet; ++s) grow(first + s);
  };
  grow(0);
  return tree;
}

double tree_log_prior(const ContextTree& tree, double lambda) {
  const int a = tree.alphabet();
  const int leaves = tree.leaf_count();
  const int deep_leaves = tree.leaf_count_at_depth_bound();
  const int internal = (leaves - 1) / (a - 1);
  return internal * std::log1p(-lambda) + (leaves - deep_leaves) * std::log(lambda);
}

void sample_leaf_distributions(ContextTree& tree, std::span<const double> alpha, Rng& rng) {
  if (int(alpha.size()) != tree.alphabet())
    throw std::invalid_argument("sample_leaf_distributions: alpha size mismatch");
  for (double a : alpha)
    if (!(a > 0.0)) throw std::invalid_argument("sample_leaf_distributions: alpha must be > 0");
  for (int id = 0; id < tree.node_count(); ++id) {
    if (!tree.is_leaf(id)) continue;
    auto& dist = tree.leaf_dist(id);
    dist.assign(std::size_t(tree.alphabet()), 0.0);
    rng.next_dirichlet(alpha, dist);
  }
}

void sample_nonctw_leaf_distributions(ContextTree& tree, Rng& rng) {
  const int a = tree.alphabet();
  for (int id = 0; id < tree.node_count(); ++id) {
    if (!tree.is_leaf(id)) continue;
    auto& dist = tree.leaf_dist(id);
    dist.assign(std::size_t(a), 0.0);
    const std::uint32_t zeroed = rng.next_below(std::uint32_t(a));
    double total = 0.0;
    for (int s = 0; s < a; ++s) {
      if (std::uint32_t(s) == zeroed) continue;
      dist[std::size_t(s)] = rng.next_open_double();
      total += dist[std::size_t(s)];
    }
    for (int s = 0; s < a; ++s) dist[std::size_t(s)] /= total;
    dist[zeroed] = 0.0;
  }
}

std::vector<Symbol> sample_uniform_context(int alphabet, int length, Rng& rng) {
  check_alphabet(alphabet);
  std::vector<Symbol> out(std::size_t(length), Symbol(0));
  for (auto& s : out) s = Symbol(rng.next_below(std::uint32_t(alphabet)));
  return out;
}

SourceSequence generate_sequence(const ContextTree& tree, std::size_t n,
                                 std::span<const Symbol> initial_context, Rng& rng) {
  tree.validate();
  if (int(initial_context.size()) < tree.depth_bound())
    throw std::invalid_argument("generate_sequence: initial context shorter than tree depth");
  SourceSequence seq;
  seq.alphabet = tree.alphabet();
  seq.initial_context.assign(initial_context.begin(), initial_context.end());
  seq.symbols.reserve(n);

  const int d = tree.depth_bound();
  std::vector<Symbol> recent(seq.initial_context.rbegin(),
                             seq.initial_context.rbegin() + d);  // most-recent-first
  for (std::size_t i = 0; i < n; ++i) {
    const int leaf = tree.classify(recent);
    const auto& dist = tree.leaf_dist(leaf);
    const double u = rng.next_double();
    double acc = 0.0;
    Symbol drawn = Symbol(tree.alphabet() - 1);
    for (int s = 0; s < tree.alphabet(); ++s) {
      acc += dist[std::size_t(s)];
      if (u < acc) {
        drawn = Symbol(s);
        break;
      }
    }
    seq.symbols.push_back(drawn);
    if (d > 0) {
      for (int k = d - 1; k > 0; --k) recent[std::size_t(k)] = recent[std::size_t(k - 1)];
      recent[0] = drawn;
    }
  }
  return seq;
}

double true_model_logloss(const ContextTree& tree, const SourceSequence& seq) {
  if (seq.alphabet != tree.alphabet())
    throw std::invalid_argument("true_model_logloss: alphabet mismatch");
  const int d = tree.depth_bound();
  std::vector<Symbol> ctx(std::size_t(d), Symbol(0));
  double total = 0.0;
  for (std::size_t i = 1; i <= seq.length(); ++i) {
    context_before(seq, i, ctx);
    const auto& dist = tree.leaf_dist(tree.classify(ctx));
    const double p = dist[seq.symbols[i - 1]];
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    total -= std::log(p);
  }
  return seq.length() ? total / double(seq.length()) : 0.0;
}

double leaf_entropy(const ContextTree& tree, int leaf_id) {
  const auto& dist = tree.leaf_dist(leaf_id);
  double h = 0.0;
  for (double p : dist)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::string tree_to_json(const ContextTree& tree, double lambda_used) {
  tree.validate(false);
  nlohmann::json nodes = nlohmann::json::array();
  std::function<void(int)> emit = [&](int id) {
    const auto& n = tree.node(id);
    nlohmann::json j;
    j["leaf"] = tree.is_leaf(id);
    if (tree.is_leaf(id) && !n.dist.empty()) {
      nlohmann::json probs = nlohmann::json::array();
      for (double p : n.dist) probs.push_back(format_prob(p));
      j["p"] = std::move(probs);
    }
    nodes.push_back(std::move(j));
    if (!tree.is_leaf(id))
      for (int s = 0; s < tree.alphabet(); ++s) emit(tree.child(id, Symbol(s)));
  };
  emit(0);
  nlohmann::json root;
  root["D"] = tree.depth_bound();
  root["lambda_used"] = format_prob(lambda_used);
  root["alphabet"] = tree.alphabet();
  root["nodes"] = std::move(nodes);
  return root.dump();
}

TreeFile tree_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const int alphabet = j.at("alphabet").get<int>();
  const int depth = j.at("D").get<int>();
  const auto& nodes = j.at("nodes");
  TreeFile out{ContextTree(alphabet, depth),
               std::strtod(j.at("lambda_used").get<std::string>().c_str(), nullptr)};

  std::size_t cursor = 0;
  std::function<void(int)> build = [&](int id) {
    if (cursor >= nodes.size()) throw std::runtime_error("tree_from_json: preorder list truncated");
    const auto& jn = nodes[cursor++];
    if (jn.at("leaf").get<bool>()) {
      if (jn.contains("p")) {
        auto& dist = out.tree.leaf_dist(id);
        dist.clear();
        for (const auto& s : jn.at("p"))
          dist.push_back(std::strtod(s.get<std::string>().c_str(), nullptr));
        if (int(dist.size()) != alphabet)
          throw std::runtime_error("tree_from_json: leaf distribution arity mismatch");
      }
      return;
    }
    const int first = out.tree.branch(id);
    for (int s = 0; s < alphabet; ++s) build(first + s);
  };
  build(0);
  if (cursor != nodes.size()) throw std::runtime_error("tree_from_json: trailing nodes");
  out.tree.validate(false);
  return out;
}

std::string sequence_to_json(const SourceSequence& seq) {
  nlohmann::json j;
  j["alphabet"] = seq.alphabet;
  j["initial_context"] = nlohmann::json::array();
  for (Symbol s : seq.initial_context) j["initial_context"].push_back(int(s));
  j["symbols"] = nlohmann::json::array();
  for (Symbol s : seq.symbols) j["symbols"].push_back(int(s));
  j["tree_id"] = seq.tree_id;
  j["seed"] = seq.seed;
  return j.dump();
}

SourceSequence sequence_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  SourceSequence seq;
  seq.alphabet = j.at("alphabet").get<int>();
  check_alphabet(seq.alphabet);
  for (const auto& v : j.at("initial_context")) {
    const int s = v.get<int>();
    if (s < 0 || s >= seq.alphabet) throw std::runtime_error("sequence_from_json: symbol out of range");
    seq.initial_context.push_back(Symbol(s));
  }
  for (const auto& v : j.at("symbols")) {
    const int s = v.get<int>();
    if (s < 0 || s >= seq.alphabet) throw std::runtime_error("sequence_from_json: symbol out of range");
    seq.symbols.push_back(Symbol(s));
  }
  if (j.contains("tree_id")) seq.tree_id = j.at("tree_id").get<std::int64_t>();
  if (j.contains("seed")) seq.seed = j.at("seed").get<std::uint64_t>();
  return seq;
}

}  // namespace vomc
