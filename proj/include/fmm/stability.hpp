#pragma once

#include "fmm/algorithm.hpp"
#include "fmm/plan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fmm {

inline constexpr double unit_roundoff = 0x1p-53;

struct StabilityReport {
  std::string name;
  std::size_t m0 = 0, k0 = 0, n0 = 0, rank = 0;
  std::vector<long long> alpha, beta, gamma;
  std::vector<Rational> a, b;
  std::vector<long long> q;
  long long bigQ = 0;
  std::vector<Rational> e;
  Rational bigE;
  long long nnz = 0;
  Rational legacyE;
  std::optional<double> stab_exponent;
};

// Number of summation steps charged for c terms.
// Sequential: c. Divide and conquer: 1 + ceil(log2 c), with 0 and 1 unchanged.
inline long long summation_count(long long c, bool dnc) {
  if (!dnc || c <= 1) return c;
  long long bits = 0;
  while ((1LL << bits) < c) ++bits;
  return 1 + bits;
}

inline StabilityReport analyze(const BilinearAlgorithm& alg, bool dnc = false) {
  StabilityReport s;
  s.name = alg.name();
  s.m0 = alg.m0();
  s.k0 = alg.k0();
  s.n0 = alg.n0();
  s.rank = alg.rank();
  const std::size_t R = alg.rank(), nk = alg.m0() * alg.n0();
  s.alpha.assign(R, 0);
  s.beta.assign(R, 0);
  s.gamma.assign(nk, 0);
  s.a.assign(R, 0);
  s.b.assign(R, 0);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < alg.u().rows(); ++i)
      if (alg.u()(i, r) != 0) {
        ++s.alpha[r];
        s.a[r] += abs(alg.u()(i, r));
      }
    for (std::size_t j = 0; j < alg.v().rows(); ++j)
      if (alg.v()(j, r) != 0) {
        ++s.beta[r];
        s.b[r] += abs(alg.v()(j, r));
      }
  }
  s.q.assign(nk, 0);
  s.e.assign(nk, 0);
  std::vector<Rational> legacy(nk, 0);
  for (std::size_t k = 0; k < nk; ++k) {
    long long best = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const Rational& wk = alg.w()(k, r);
      if (wk == 0) continue;
      ++s.gamma[k];
      best = std::max(best, summation_count(s.alpha[r], dnc) + summation_count(s.beta[r], dnc));
      s.e[k] += abs(wk) * s.a[r] * s.b[r];
      legacy[k] += abs(wk) * s.alpha[r] * s.beta[r];
    }
    s.q[k] = summation_count(s.gamma[k], dnc) + best;
  }
  s.bigQ = *std::max_element(s.q.begin(), s.q.end());
  s.bigE = *std::max_element(s.e.begin(), s.e.end());
  s.legacyE = *std::max_element(legacy.begin(), legacy.end());
  s.nnz = 0;
  for (auto x : s.alpha) s.nnz += x;
  for (auto x : s.beta) s.nnz += x;
  for (auto x : s.gamma) s.nnz += x;
  if (s.m0 == s.k0 && s.k0 == s.n0 && s.n0 > 1)
    s.stab_exponent = std::log(to_double(s.bigE)) / std::log(static_cast<double>(s.n0));
  return s;
}

// ---- bounds ----

inline double bound_stationary(const StabilityReport& rep, std::size_t L, std::size_t K, double normA, double normB,
                               double eps = unit_roundoff, bool dnc = false) {
  std::size_t kl = K;
  for (std::size_t l = 0; l < L; ++l) {
    if (kl % rep.k0) throw std::invalid_argument("K is not divisible by K0^L");
    kl /= rep.k0;
  }
  const double base = static_cast<double>(kl);
  const double acc = static_cast<double>(summation_count(static_cast<long long>(kl), dnc)) +
                     static_cast<double>(rep.bigQ) * static_cast<double>(L);
  return acc * base * std::pow(to_double(rep.bigE), static_cast<double>(L)) * normA * normB * eps;
}

inline double bound_uniform_nonstationary(const std::vector<StabilityReport>& reps, std::size_t K, double normA,
                                          double normB, double eps = unit_roundoff, bool dnc = false) {
  std::size_t kl = K;
  double sumQ = 0.0, prodE = 1.0;
  for (const auto& r : reps) {
    if (kl % r.k0) throw std::invalid_argument("K is not divisible by the product of K0");
    kl /= r.k0;
    sumQ += static_cast<double>(r.bigQ);
    prodE *= to_double(r.bigE);
  }
  const double base = static_cast<double>(kl);
  return (static_cast<double>(summation_count(static_cast<long long>(kl), dnc)) + sumQ) * base * prodE * normA *
         normB * eps;
}

inline std::pair<Rational, Rational> tradeoff_point(const StabilityReport& rep, std::size_t L) {
  const Rational flops(BigInt(rep.rank), BigInt(rep.m0 * rep.k0 * rep.n0));
  const Rational rel = rep.bigE / Rational(BigInt(rep.k0 * rep.k0));
  Rational f = 1, s = 1;
  for (std::size_t l = 0; l < L; ++l) {
    f *= flops;
    s *= rel;
  }
  return {f, s};
}

inline std::vector<Rational> kron_stability_vector(const std::vector<Rational>& e1, const std::vector<Rational>& e2) {
  std::vector<Rational> out;
  out.reserve(e1.size() * e2.size());
  for (const auto& x : e1)
    for (const auto& y : e2) out.push_back(x * y);
  return out;
}

// ---- whole plans ----

struct PlanStabilityReport {
  BigInt delta_max;
  Rational xi_max;
  // Largest classical leaf inner dimension.
  BigInt leaf_k;
  // (delta_max) * (leaf_k) * (xi_max), the factor multiplying ||A|| ||B|| eps.
  Rational bound_coefficient;
};

namespace detail {

struct NodeValues {
  std::vector<BigInt> delta;
  std::vector<Rational> xi;
};

class PlanAnalyzer {
public:
  PlanAnalyzer(const std::vector<LevelDims>& dims, std::size_t K, bool dnc) : dims_(dims), dnc_(dnc) {
    k_at_.push_back(K);
    for (const auto& d : dims) {
      if (k_at_.back() % d.k0) throw std::invalid_argument("K is not divisible by the plan's K0 product");
      k_at_.push_back(k_at_.back() / d.k0);
    }
    width_.assign(dims.size() + 1, 1);
    for (std::size_t l = dims.size(); l-- > 0;) width_[l] = width_[l + 1] * dims[l].m0 * dims[l].n0;
  }

  const NodeValues& eval(const NodePtr& node, std::size_t depth) {
    auto key = std::make_pair(node.get(), depth);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    NodeValues out;
    const std::size_t W = width_[depth];
    if (!node) {
      leaf_k_ = std::max(leaf_k_, k_at_[depth]);
      out.delta.assign(W, BigInt(summation_count(static_cast<long long>(k_at_[depth]), dnc_)));
      out.xi.assign(W, Rational(1));
    } else {
      const auto& alg = *node->alg;
      const StabilityReport rep = analyze(alg, dnc_);
      const std::size_t sub = width_[depth + 1];
      std::vector<const NodeValues*> kids;
      for (const auto& c : node->children) kids.push_back(&eval(c, depth + 1));
      out.delta.assign(W, 0);
      out.xi.assign(W, 0);
      for (std::size_t k = 0; k < alg.m0() * alg.n0(); ++k) {
        const long long g = summation_count(rep.gamma[k], dnc_);
        for (std::size_t rest = 0; rest < sub; ++rest) {
          BigInt best = 0;
          Rational xi = 0;
          for (std::size_t r = 0; r < alg.rank(); ++r) {
            const Rational& wk = alg.w()(k, r);
            if (wk == 0) continue;
            const BigInt cand = BigInt(summation_count(rep.alpha[r], dnc_) + summation_count(rep.beta[r], dnc_)) +
                                kids[r]->delta[rest];
            if (cand > best) best = cand;
            xi += abs(wk) * rep.a[r] * rep.b[r] * kids[r]->xi[rest];
          }
          out.delta[k * sub + rest] = g + best;
          out.xi[k * sub + rest] = xi;
        }
      }
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

  BigInt leaf_k() const { return leaf_k_; }

private:
  std::vector<LevelDims> dims_;
  bool dnc_;
  std::vector<std::size_t> k_at_, width_;
  std::map<std::pair<const PlanNode*, std::size_t>, NodeValues> memo_;
  std::size_t leaf_k_ = 0;
};

} // namespace detail

// Exact tree recursion over every output multi-index.
inline PlanStabilityReport analyze_tree(const NodePtr& root, std::size_t K, bool dnc = false) {
  const auto dims = level_dims(root);
  detail::PlanAnalyzer an(dims, K, dnc);
  const auto& v = an.eval(root, 0);
  PlanStabilityReport rep;
  rep.delta_max = *std::max_element(v.delta.begin(), v.delta.end());
  rep.xi_max = *std::max_element(v.xi.begin(), v.xi.end());
  rep.leaf_k = an.leaf_k();
  rep.bound_coefficient = Rational(rep.delta_max) * Rational(rep.leaf_k) * rep.xi_max;
  return rep;
}

// Closed forms for stationary and uniform plans, tree recursion otherwise.
inline PlanStabilityReport analyze_plan(const RecursionPlan& plan, std::size_t K, bool dnc = false) {
  if (std::holds_alternative<TreePlan>(plan)) return analyze_tree(std::get<TreePlan>(plan).root, K, dnc);
  std::vector<AlgorithmPtr> levels;
  if (auto* s = std::get_if<Stationary>(&plan)) levels.assign(s->levels, s->alg);
  else levels = std::get<UniformNonStationary>(plan).algs;
  level_dims(plan);
  std::size_t kl = K;
  BigInt sumQ = 0;
  Rational prodE = 1;
  for (const auto& alg : levels) {
    if (kl % alg->k0()) throw std::invalid_argument("K is not divisible by the plan's K0 product");
    kl /= alg->k0();
    const auto rep = analyze(*alg, dnc);
    sumQ += rep.bigQ;
    prodE *= rep.bigE;
  }
  PlanStabilityReport rep;
  rep.delta_max = BigInt(summation_count(static_cast<long long>(kl), dnc)) + sumQ;
  rep.xi_max = prodE;
  rep.leaf_k = kl;
  rep.bound_coefficient = Rational(rep.delta_max) * Rational(rep.leaf_k) * rep.xi_max;
  return rep;
}

inline double plan_bound(const RecursionPlan& plan, std::size_t K, double normA, double normB,
                         double eps = unit_roundoff, bool dnc = false) {
  return to_double(analyze_plan(plan, K, dnc).bound_coefficient) * normA * normB * eps;
}

// ---- serialization ----

inline std::string join(const std::vector<long long>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

inline std::string join(const std::vector<Rational>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + to_string(v[i]);
  return s;
}

inline std::string format_decimal(const Rational& r) {
  std::ostringstream o;
  o.precision(12);
  o << to_double(r);
  return o.str();
}

inline std::string to_key_value(const StabilityReport& s) {
  std::ostringstream o;
  o << "name " << s.name << "\n"
    << "dims " << s.m0 << " " << s.k0 << " " << s.n0 << "\n"
    << "rank " << s.rank << "\n"
    << "nnz " << s.nnz << "\n"
    << "alpha " << join(s.alpha) << "\n"
    << "beta " << join(s.beta) << "\n"
    << "gamma " << join(s.gamma) << "\n"
    << "a " << join(s.a) << "\n"
    << "b " << join(s.b) << "\n"
    << "q " << join(s.q) << "\n"
    << "Q " << s.bigQ << "\n"
    << "e " << join(s.e) << "\n"
    << "E " << to_string(s.bigE) << "\n"
    << "legacyE " << to_string(s.legacyE) << "\n";
  if (s.stab_exponent) {
    o.precision(6);
    o << "stab_exp " << std::fixed << *s.stab_exponent << "\n";
  }
  return o.str();
}

inline std::string csv_header() { return "name,m0,k0,n0,R,nnz,Q,E,legacyE,stab_exp"; }

inline std::string to_csv_row(const StabilityReport& s) {
  std::ostringstream o;
  o << s.name << "," << s.m0 << "," << s.k0 << "," << s.n0 << "," << s.rank << "," << s.nnz << "," << s.bigQ << ","
    << format_decimal(s.bigE) << "," << format_decimal(s.legacyE) << ",";
  if (s.stab_exponent) {
    o.precision(6);
    o << std::fixed << *s.stab_exponent;
  }
  return o.str();
}

} // namespace fmm
