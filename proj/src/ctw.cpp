#include "vomc/ctw.hpp"

#include <cmath>
#include <stdexcept>

#include "vomc/stats.hpp"

namespace vomc {

namespace {

double logsumexp2(double a, double b) {
  const double m = a > b ? a : b;
  const double s = a > b ? b : a;
  return m + std::log1p(std::exp(s - m));
}

}  // namespace

double log_dirichlet_evidence(std::span<const std::uint32_t> counts,
                              std::span<const double> alpha) {
  std::vector<double> c(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) c[i] = double(counts[i]);
  return log_dirichlet_evidence(std::span<const double>(c), alpha);
}

double log_dirichlet_evidence(std::span<const double> counts,
                              std::span<const double> alpha) {
  if (counts.size() != alpha.size())
    throw std::invalid_argument("log_dirichlet_evidence: size mismatch");
  double alpha_sum = 0.0, total = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    alpha_sum += alpha[i];
    total += counts[i];
    acc += std::lgamma(counts[i] + alpha[i]) - std::lgamma(alpha[i]);
  }
  return acc + std::lgamma(alpha_sum) - std::lgamma(alpha_sum + total);
}

CtwState::CtwState(CtwPrior prior, std::span<const Symbol> padding)
    : prior_(std::move(prior)) {
  prior_.validate();
  if (int(padding.size()) < prior_.depth)
    throw std::invalid_argument("CtwState: padding shorter than depth");
  ln_lambda_ = std::log(prior_.lambda);
  ln_one_minus_lambda_ = std::log1p(-prior_.lambda);
  alpha_sum_ = prior_.alpha_sum();
  recent_.assign(padding.rbegin(), padding.rbegin() + prior_.depth);
}

std::uint64_t CtwState::path_key(int len) const {
  return pack_suffix(ContextView(recent_.data(), std::size_t(len)), prior_.alphabet);
}

const CtwState::Node* CtwState::find(ContextView suffix) const {
  const auto it = nodes_.find(pack_suffix(suffix, prior_.alphabet));
  return it == nodes_.end() ? nullptr : &it->second;
}

void CtwState::update(Symbol x) {
  if (int(x) >= prior_.alphabet) throw std::invalid_argument("CtwState::update: bad symbol");
  const int d = prior_.depth;

  // materialize the context path; map nodes are pointer-stable under insert
  std::vector<Node*> path(std::size_t(d) + 1);
  for (int l = 0; l <= d; ++l) {
    Node& nd = nodes_[path_key(l)];
    if (nd.n.empty()) nd.n.assign(std::size_t(prior_.alphabet), 0);
    path[std::size_t(l)] = &nd;
  }

  for (int l = d; l >= 0; --l) {
    Node& nd = *path[std::size_t(l)];
    ++touches_;
    nd.log_pe += std::log((prior_.alpha[x] + double(nd.n[x])) / (alpha_sum_ + double(nd.total)));
    const double lw_new =
        (l == d) ? nd.log_pe
                 : logsumexp2(ln_lambda_ + nd.log_pe, ln_one_minus_lambda_ + nd.child_lw_sum);
    if (l > 0) path[std::size_t(l - 1)]->child_lw_sum += lw_new - nd.log_pw;
    nd.log_pw = lw_new;
    nd.n[x] += 1;
    nd.total += 1;
  }
  root_log_pw_ = path[0]->log_pw;

  for (int k = d - 1; k > 0; --k) recent_[std::size_t(k)] = recent_[std::size_t(k - 1)];
  if (d > 0) recent_[0] = x;
  ++position_;
}

void CtwState::predict(std::span<double> out) const {
  const int a = prior_.alphabet;
  const int d = prior_.depth;
  if (int(out.size()) != a) throw std::invalid_argument("CtwState::predict: bad output size");

  static const Node kEmpty{};
  std::vector<const Node*> path(std::size_t(d) + 1);
  for (int l = 0; l <= d; ++l) {
    const Node* nd = find(ContextView(recent_.data(), std::size_t(l)));
    path[std::size_t(l)] = nd ? nd : &kEmpty;
  }

  for (int x = 0; x < a; ++x) {
    double child_old = 0.0, child_new = 0.0;
    double lw_new = 0.0;
    for (int l = d; l >= 0; --l) {
      const Node& nd = *path[std::size_t(l)];
      ++touches_;
      const double cx = nd.n.empty() ? 0.0 : double(nd.n[std::size_t(x)]);
      const double le_new =
          nd.log_pe + std::log((prior_.alpha[std::size_t(x)] + cx) / (alpha_sum_ + double(nd.total)));
      if (l == d) {
        lw_new = le_new;
      } else {
        const double child_sum = nd.child_lw_sum + (child_new - child_old);
        lw_new = logsumexp2(ln_lambda_ + le_new, ln_one_minus_lambda_ + child_sum);
      }
      child_old = nd.log_pw;
      child_new = lw_new;
    }
    out[std::size_t(x)] = std::exp(lw_new - root_log_pw_);
  }
}

std::vector<double> CtwState::predict() const {
  std::vector<double> out(std::size_t(prior_.alphabet), 0.0);
  predict(out);
  return out;
}

PathSnapshot CtwState::path_snapshot() const {
  const int a = prior_.alphabet;
  const int d = prior_.depth;
  PathSnapshot snap;
  snap.depth = d;
  snap.position = position_;
  snap.context.assign(recent_.begin(), recent_.end());
  snap.log_pe.resize(std::size_t(d) + 1, 0.0);
  snap.log_pw.resize(std::size_t(d) + 1, 0.0);
  snap.counts.assign(std::size_t(d) + 1, std::vector<std::uint32_t>(std::size_t(a), 0));
  snap.child_log_pw.assign(std::size_t(d), std::vector<double>(std::size_t(a), 0.0));

  std::vector<Symbol> suffix;
  suffix.reserve(std::size_t(d) + 1);
  for (int l = 0; l <= d; ++l) {
    ++touches_;
    if (const Node* nd = find(suffix)) {
      snap.log_pe[std::size_t(l)] = nd->log_pe;
      snap.log_pw[std::size_t(l)] = nd->log_pw;
      if (!nd->n.empty()) snap.counts[std::size_t(l)] = nd->n;
    }
    if (l < d) {
      // children of the depth-l path node: extend by one older symbol
      suffix.push_back(0);
      for (int q = 0; q < a; ++q) {
        suffix.back() = Symbol(q);
        ++touches_;
        if (const Node* c = find(suffix))
          snap.child_log_pw[std::size_t(l)][std::size_t(q)] = c->log_pw;
      }
      suffix.back() = recent_[std::size_t(l)];
    }
  }
  return snap;
}

double ctw_sequence_logprob(const CtwPrior& prior, const SourceSequence& seq) {
  CtwState state(prior, seq.initial_context);
  for (Symbol x : seq.symbols) state.update(x);
  return state.sequence_log_prob();
}

std::uint64_t enumerate_tree_count(int alphabet, int depth) {
  std::uint64_t t = 1;
  for (int d = 1; d <= depth; ++d) {
    // t_next = 1 + t^A, with overflow saturation
    std::uint64_t p = 1;
    for (int k = 0; k < alphabet; ++k) {
      if (t != 0 && p > (~std::uint64_t{0}) / t) return ~std::uint64_t{0};
      p *= t;
    }
    t = p + 1;
  }
  return t;
}

namespace {

// preorder shapes: true = internal node (followed by A child shapes)
using Shape = std::vector<bool>;

std::vector<Shape> enumerate_shapes(int alphabet, int depth) {
  if (depth == 0) return {Shape{false}};
  const std::vector<Shape> sub = enumerate_shapes(alphabet, depth - 1);
  std::vector<Shape> out;
  out.push_back(Shape{false});
  std::vector<std::size_t> pick(std::size_t(alphabet), 0);
  for (;;) {
    Shape s{true};
    for (int c = 0; c < alphabet; ++c) {
      const Shape& child = sub[pick[std::size_t(c)]];
      s.insert(s.end(), child.begin(), child.end());
    }
    out.push_back(std::move(s));
    int c = alphabet - 1;
    while (c >= 0 && ++pick[std::size_t(c)] == sub.size()) pick[std::size_t(c--)] = 0;
    if (c < 0) break;
  }
  return out;
}

ContextTree tree_from_shape(int alphabet, int depth, const Shape& shape) {
  ContextTree tree(alphabet, depth);
  std::size_t cursor = 0;
  // iterative preorder: build children blocks as the shape dictates
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const bool internal = shape.at(cursor++);
    if (!internal) continue;
    const int first = tree.branch(id);
    for (int s = alphabet - 1; s >= 0; --s) stack.push_back(first + s);
  }
  return tree;
}

}  // namespace

std::vector<ContextTree> enumerate_trees(int alphabet, int depth) {
  if (enumerate_tree_count(alphabet, depth) > 1000000ull)
    throw std::invalid_argument("enumerate_trees: tree family too large");
  std::vector<ContextTree> out;
  for (const Shape& s : enumerate_shapes(alphabet, depth))
    out.push_back(tree_from_shape(alphabet, depth, s));
  return out;
}

namespace {

// per-tree log( pi_D(T) * prod_leaves p^e_leaf ) from one shared count table
std::vector<double> tree_log_joint(const CtwPrior& prior, const SourceSequence& seq,
                                   const std::vector<ContextTree>& trees) {
  if (int(seq.initial_context.size()) < prior.depth)
    throw std::invalid_argument("tree_log_joint: padding shorter than depth");
  CountTable table(prior.alphabet, prior.depth, seq.initial_context);
  for (Symbol x : seq.symbols) table.update(x);

  std::vector<double> out;
  out.reserve(trees.size());
  for (const ContextTree& t : trees) {
    double acc = tree_log_prior(t, prior.lambda);
    for (int leaf : t.leaves()) {
      const auto counts = table.counts(t.suffix_of(leaf));
      acc += log_dirichlet_evidence(counts, prior.alpha);
    }
    out.push_back(acc);
  }
  return out;
}

double logsumexp(std::span<const double> v) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace

double bayes_oracle_logprob(const CtwPrior& prior, const SourceSequence& seq) {
  const auto trees = enumerate_trees(prior.alphabet, prior.depth);
  const auto joint = tree_log_joint(prior, seq, trees);
  return logsumexp(joint);
}

std::vector<double> tree_log_posterior(const CtwPrior& prior, const SourceSequence& seq,
                                       const std::vector<ContextTree>& trees) {
  auto joint = tree_log_joint(prior, seq, trees);
  const double z = logsumexp(joint);
  for (double& v : joint) v -= z;
  return joint;
}

}  // namespace vomc
