#pragma once

#include "fmm/algorithm.hpp"
#include "fmm/catalog.hpp"

#include <array>
#include <cctype>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fmm {

class PlanError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PlanNode;
// A null pointer is a classical leaf.
using NodePtr = std::shared_ptr<const PlanNode>;

struct PlanNode {
  AlgorithmPtr alg;
  std::vector<NodePtr> children;
};

struct Stationary {
  AlgorithmPtr alg;
  std::size_t levels = 0;
};

struct UniformNonStationary {
  std::vector<AlgorithmPtr> algs;
};

struct TreePlan {
  NodePtr root;
};

using RecursionPlan = std::variant<Stationary, UniformNonStationary, TreePlan>;

inline NodePtr make_node(AlgorithmPtr alg, std::vector<NodePtr> children = {}) {
  if (!alg) throw PlanError("tree node without algorithm");
  if (children.empty()) children.resize(alg->rank());
  if (children.size() != alg->rank())
    throw PlanError("node '" + alg->name() + "' has " + std::to_string(children.size()) + " children, rank is " +
                    std::to_string(alg->rank()));
  return std::make_shared<const PlanNode>(PlanNode{std::move(alg), std::move(children)});
}

// Equivalent tree. Stationary and uniform plans share one node per level.
inline NodePtr to_tree(const RecursionPlan& plan) {
  std::vector<AlgorithmPtr> levels;
  if (auto* s = std::get_if<Stationary>(&plan)) levels.assign(s->levels, s->alg);
  else if (auto* u = std::get_if<UniformNonStationary>(&plan)) levels = u->algs;
  else return std::get<TreePlan>(plan).root;
  NodePtr node;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    if (!*it) throw PlanError("plan level without algorithm");
    node = make_node(*it, std::vector<NodePtr>((*it)->rank(), node));
  }
  return node;
}

struct LevelDims {
  std::size_t m0, k0, n0;
  bool operator==(const LevelDims&) const = default;
};

// Base dims per depth; throws if nodes at one depth disagree.
inline std::vector<LevelDims> level_dims(const NodePtr& root) {
  std::vector<LevelDims> dims;
  std::map<std::pair<const PlanNode*, std::size_t>, bool> seen;
  std::function<void(const NodePtr&, std::size_t)> walk = [&](const NodePtr& n, std::size_t depth) {
    if (!n) return;
    if (!seen.emplace(std::make_pair(n.get(), depth), true).second) return;
    LevelDims d{n->alg->m0(), n->alg->k0(), n->alg->n0()};
    if (depth == dims.size()) dims.push_back(d);
    else if (!(dims[depth] == d))
      throw PlanError("mismatched base dimensions at recursion level " + std::to_string(depth + 1));
    if (n->children.size() != n->alg->rank()) throw PlanError("child count differs from rank");
    for (const auto& c : n->children) walk(c, depth + 1);
  };
  walk(root, 0);
  return dims;
}

inline std::vector<LevelDims> level_dims(const RecursionPlan& plan) { return level_dims(to_tree(plan)); }

inline std::size_t plan_depth(const RecursionPlan& plan) { return level_dims(plan).size(); }

inline std::array<std::size_t, 3> dim_products(const std::vector<LevelDims>& dims) {
  std::array<std::size_t, 3> p{1, 1, 1};
  for (const auto& d : dims) {
    p[0] *= d.m0;
    p[1] *= d.k0;
    p[2] *= d.n0;
  }
  return p;
}

inline std::array<std::size_t, 3> pad_dims(std::size_t m, std::size_t k, std::size_t n, const RecursionPlan& plan) {
  const auto p = dim_products(level_dims(plan));
  auto up = [](std::size_t x, std::size_t q) { return (x + q - 1) / q * q; };
  return {up(m, p[0]), up(k, p[1]), up(n, p[2])};
}

// Stationary plan recursing while every block dimension stays >= cutoff.
inline Stationary stationary_from_threshold(AlgorithmPtr alg, std::size_t m, std::size_t k, std::size_t n,
                                            std::size_t cutoff) {
  std::size_t levels = 0;
  while (m / alg->m0() >= cutoff && k / alg->k0() >= cutoff && n / alg->n0() >= cutoff) {
    m /= alg->m0();
    k /= alg->k0();
    n /= alg->n0();
    ++levels;
  }
  return Stationary{std::move(alg), levels};
}

// ---- structural equality ----

inline bool same_algorithm(const AlgorithmPtr& a, const AlgorithmPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->name() == b->name() && a->triple().m0 == b->triple().m0 && a->triple().k0 == b->triple().k0 &&
         a->triple().n0 == b->triple().n0 && a->u() == b->u() && a->v() == b->v() && a->w() == b->w();
}

inline bool same_tree(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (!same_algorithm(a->alg, b->alg) || a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!same_tree(a->children[i], b->children[i])) return false;
  return true;
}

inline bool same_plan(const RecursionPlan& a, const RecursionPlan& b) {
  if (a.index() != b.index()) return false;
  if (auto* s = std::get_if<Stationary>(&a)) {
    const auto& t = std::get<Stationary>(b);
    return s->levels == t.levels && same_algorithm(s->alg, t.alg);
  }
  if (auto* u = std::get_if<UniformNonStationary>(&a)) {
    const auto& v = std::get<UniformNonStationary>(b);
    if (u->algs.size() != v.algs.size()) return false;
    for (std::size_t i = 0; i < u->algs.size(); ++i)
      if (!same_algorithm(u->algs[i], v.algs[i])) return false;
    return true;
  }
  return same_tree(std::get<TreePlan>(a).root, std::get<TreePlan>(b).root);
}

// ---- descriptor language ----
//   name:L=n                 stationary
//   seq(name,name,...)       uniform non-stationary, one name per level
//   tree(name,child,...)     child is classical, a bare name (all-classical
//                            children) or a nested tree(...)
//   classical                no recursion

using Resolver = std::function<AlgorithmPtr(const std::string&)>;

// Catalog names, plus algorithm files (paths ending in .fmm) registered under their own name.
class AlgorithmRegistry {
public:
  AlgorithmPtr operator()(const std::string& token) {
    if (auto it = extra_.find(token); it != extra_.end()) return it->second;
    if (token.size() > 4 && token.compare(token.size() - 4, 4, ".fmm") == 0) {
      auto alg = std::make_shared<const BilinearAlgorithm>(
          validated(load_algorithm_file(token), "algorithm file " + token + " is not a correct algorithm"));
      add(alg);
      extra_[token] = alg;
      return alg;
    }
    return catalog_lookup(token);
  }
  void add(AlgorithmPtr alg) { extra_[alg->name()] = std::move(alg); }

private:
  std::map<std::string, AlgorithmPtr> extra_;
};

namespace detail {

class PlanParser {
public:
  PlanParser(const std::string& text, const Resolver& resolve) : s_(text), resolve_(resolve) {}

  RecursionPlan parse() {
    skip();
    RecursionPlan plan;
    if (peek_word("seq(")) plan = parse_seq();
    else if (peek_word("tree(")) plan = TreePlan{parse_tree()};
    else {
      std::string tok = name();
      if (tok == "classical") plan = TreePlan{nullptr};
      else {
        std::size_t levels = 1;
        if (auto p = tok.rfind(":L="); p != std::string::npos) {
          const std::string num = tok.substr(p + 3);
          if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
            fail("bad level count '" + num + "'");
          levels = std::stoul(num);
          tok = tok.substr(0, p);
        }
        plan = Stationary{lookup(tok), levels};
      }
    }
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    level_dims(plan);
    return plan;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw PlanError("plan descriptor, column " + std::to_string(pos_ + 1) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek_word(const char* w) const { return s_.compare(pos_, std::strlen(w), w) == 0; }
  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string name() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '(' && s_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    if (pos_ == start) fail("expected algorithm name");
    return s_.substr(start, pos_ - start);
  }
  AlgorithmPtr lookup(const std::string& tok) {
    try {
      return resolve_(tok);
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  RecursionPlan parse_seq() {
    pos_ += 4;
    UniformNonStationary u;
    if (!accept(')')) {
      do u.algs.push_back(lookup(name()));
      while (accept(','));
      expect(')');
    }
    return u;
  }
  NodePtr parse_tree() {
    pos_ += 5;
    AlgorithmPtr alg = lookup(name());
    std::vector<NodePtr> children;
    while (accept(',')) {
      skip();
      if (peek_word("tree(")) children.push_back(parse_tree());
      else {
        std::string tok = name();
        children.push_back(tok == "classical" ? nullptr : make_node(lookup(tok)));
      }
    }
    expect(')');
    try {
      return make_node(std::move(alg), std::move(children));
    } catch (const PlanError& e) {
      fail(e.what());
    }
  }

  const std::string& s_;
  const Resolver& resolve_;
  std::size_t pos_ = 0;
};

inline bool all_classical(const NodePtr& n) {
  for (const auto& c : n->children)
    if (c) return false;
  return true;
}

inline void print_node(std::string& out, const NodePtr& n, bool root) {
  if (!n) {
    out += "classical";
    return;
  }
  if (!root && all_classical(n)) {
    out += n->alg->name();
    return;
  }
  out += "tree(" + n->alg->name();
  for (const auto& c : n->children) {
    out += ",";
    print_node(out, c, false);
  }
  out += ")";
}

} // namespace detail

inline RecursionPlan parse_plan(const std::string& text, const Resolver& resolve) {
  return detail::PlanParser(text, resolve).parse();
}

inline RecursionPlan parse_plan(const std::string& text) {
  static AlgorithmRegistry registry;
  return parse_plan(text, [](const std::string& t) { return registry(t); });
}

inline std::string print_plan(const RecursionPlan& plan) {
  if (auto* s = std::get_if<Stationary>(&plan)) return s->alg->name() + ":L=" + std::to_string(s->levels);
  if (auto* u = std::get_if<UniformNonStationary>(&plan)) {
    std::string out = "seq(";
    for (std::size_t i = 0; i < u->algs.size(); ++i) out += (i ? "," : "") + u->algs[i]->name();
    return out + ")";
  }
  std::string out;
  detail::print_node(out, std::get<TreePlan>(plan).root, true);
  return out;
}

} // namespace fmm
