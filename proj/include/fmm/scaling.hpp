#pragma once

#include "fmm/engine.hpp"
#include "fmm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fmm {

enum class ScalingMode { none, outside, inside, outside_inside, inside_outside, repeated };
enum class StepKind { O, I };
enum class StopVerdict { untested, continue_, stop };

struct ScalingConfig {
  ScalingMode mode = ScalingMode::none;
  StepKind first_step = StepKind::O;
  double tau = 1.0;
  std::size_t max_steps = 100;
  bool pow2_round = false;
  // repeated mode only: run exactly this many steps with no stop test.
  std::optional<std::size_t> fixed_steps;

  static ScalingConfig repeated_iterations(std::size_t iterations) {
    ScalingConfig c;
    c.mode = ScalingMode::repeated;
    c.fixed_steps = 2 * iterations;
    c.max_steps = 2 * iterations;
    return c;
  }
};

class ScalingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ScalingState {
  std::vector<double> d_a, d_b, d_inner;
  Matrix a_scaled, b_scaled;
  std::size_t steps_taken = 0;
};

struct StepRecord {
  StepKind kind;
  // O-steps: r (rows of A) and s (columns of B). I-steps: p in `r`, `s` empty.
  std::vector<double> r, s;
  double w = 0.0;
  StopVerdict verdict = StopVerdict::untested;
  std::vector<double> d_a, d_b;
  double norm_a = 0.0, norm_b = 0.0;
};

struct ScalingTrace {
  double initial_norm_a = 0.0, initial_norm_b = 0.0;
  std::vector<StepRecord> steps;
  // One-based index of the first O-step, 0 if none.
  std::size_t t0 = 0;
  bool cap_reached = false;
};

// Nearest power of two in log2; exact ties go to the smaller exponent.
inline double round_pow2(double x) {
  int e;
  const double f = std::frexp(x, &e);
  return 2.0 * f <= std::sqrt(2.0) ? std::ldexp(1.0, e - 1) : std::ldexp(1.0, e);
}

namespace detail {

inline double max_abs_log(const std::vector<double>& v, double w = 0.0) {
  for (double x : v) w = std::max(w, std::fabs(std::log(x)));
  return w;
}

inline StepRecord o_step(ScalingState& st, bool pow2) {
  Matrix& a = st.a_scaled;
  Matrix& b = st.b_scaled;
  StepRecord rec;
  rec.kind = StepKind::O;
  rec.r.assign(a.rows(), 0.0);
  rec.s.assign(b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) rec.r[i] = std::max(rec.r[i], std::fabs(a(i, j)));
    if (rec.r[i] == 0.0) throw ScalingError("outside scaling: row " + std::to_string(i) + " of A is zero");
  }
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) rec.s[j] = std::max(rec.s[j], std::fabs(b(i, j)));
  for (std::size_t j = 0; j < b.cols(); ++j)
    if (rec.s[j] == 0.0) throw ScalingError("outside scaling: column " + std::to_string(j) + " of B is zero");
  if (pow2) {
    for (auto& x : rec.r) x = round_pow2(x);
    for (auto& x : rec.s) x = round_pow2(x);
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) /= rec.r[i];
    st.d_a[i] *= rec.r[i];
  }
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) /= rec.s[j];
  for (std::size_t j = 0; j < b.cols(); ++j) st.d_b[j] *= rec.s[j];
  rec.w = max_abs_log(rec.s, max_abs_log(rec.r));
  return rec;
}

inline StepRecord i_step(ScalingState& st, bool pow2) {
  Matrix& a = st.a_scaled;
  Matrix& b = st.b_scaled;
  const std::size_t K = a.cols();
  std::vector<double> ca(K, 0.0), rb(K, 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < K; ++k) ca[k] = std::max(ca[k], std::fabs(a(i, k)));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < b.cols(); ++j) rb[k] = std::max(rb[k], std::fabs(b(k, j)));
  StepRecord rec;
  rec.kind = StepKind::I;
  rec.r.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    if (ca[k] == 0.0) throw ScalingError("inside scaling: column " + std::to_string(k) + " of A is zero");
    if (rb[k] == 0.0) throw ScalingError("inside scaling: row " + std::to_string(k) + " of B is zero");
    rec.r[k] = std::sqrt(rb[k] / ca[k]);
    if (pow2) rec.r[k] = round_pow2(rec.r[k]);
  }
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < K; ++k) a(i, k) *= rec.r[k];
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < b.cols(); ++j) b(k, j) /= rec.r[k];
    st.d_inner[k] *= rec.r[k];
  }
  rec.w = max_abs_log(rec.r);
  return rec;
}

inline ScalingState initial_state(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("inner dimensions differ");
  ScalingState st;
  st.d_a.assign(a.rows(), 1.0);
  st.d_b.assign(b.cols(), 1.0);
  st.d_inner.assign(a.cols(), 1.0);
  st.a_scaled = a;
  st.b_scaled = b;
  return st;
}

inline bool stop_test(const StepRecord& rec, double tau) {
  if (rec.kind == StepKind::I) {
    const double lo = std::pow(1.0 + tau, -0.25), hi = std::pow(1.0 + tau, 0.25);
    return std::all_of(rec.r.begin(), rec.r.end(), [&](double p) { return p >= lo && p <= hi; });
  }
  const double lo = std::pow(1.0 + tau, -0.5);
  auto ok = [&](double x) { return x >= lo; };
  return std::all_of(rec.r.begin(), rec.r.end(), ok) && std::all_of(rec.s.begin(), rec.s.end(), ok);
}

} // namespace detail

inline ScalingState outside_scale(const Matrix& a, const Matrix& b, bool pow2 = false) {
  auto st = detail::initial_state(a, b);
  detail::o_step(st, pow2);
  st.steps_taken = 1;
  return st;
}

inline ScalingState inside_scale(const Matrix& a, const Matrix& b, bool pow2 = false) {
  auto st = detail::initial_state(a, b);
  detail::i_step(st, pow2);
  st.steps_taken = 1;
  return st;
}

// Alternating O/I steps with the tolerance-based stop test.
inline std::pair<ScalingState, ScalingTrace> repeated_scale(const Matrix& a, const Matrix& b, const ScalingConfig& cfg) {
  if (cfg.max_steps == 0) throw std::invalid_argument("max_steps must be at least 1");
  if (!cfg.fixed_steps && !(cfg.tau > 0)) throw std::invalid_argument("tau must be positive");
  auto st = detail::initial_state(a, b);
  ScalingTrace trace;
  trace.initial_norm_a = max_norm(a);
  trace.initial_norm_b = max_norm(b);
  const std::size_t limit = cfg.fixed_steps ? *cfg.fixed_steps : cfg.max_steps;
  StepKind kind = cfg.first_step;
  bool stopped = false;
  for (std::size_t t = 1; t <= limit; ++t) {
    StepRecord rec = kind == StepKind::O ? detail::o_step(st, cfg.pow2_round) : detail::i_step(st, cfg.pow2_round);
    st.steps_taken = t;
    if (kind == StepKind::O && trace.t0 == 0) trace.t0 = t;
    if (!cfg.fixed_steps && trace.t0 != 0 && t > trace.t0)
      rec.verdict = detail::stop_test(rec, cfg.tau) ? StopVerdict::stop : StopVerdict::continue_;
    rec.d_a = st.d_a;
    rec.d_b = st.d_b;
    rec.norm_a = max_norm(st.a_scaled);
    rec.norm_b = max_norm(st.b_scaled);
    trace.steps.push_back(std::move(rec));
    if (trace.steps.back().verdict == StopVerdict::stop) {
      stopped = true;
      break;
    }
    kind = kind == StepKind::O ? StepKind::I : StepKind::O;
  }
  trace.cap_reached = !stopped && !cfg.fixed_steps;
  return {std::move(st), std::move(trace)};
}

inline ScalingState apply_scaling(const Matrix& a, const Matrix& b, const ScalingConfig& cfg,
                                  ScalingTrace* trace = nullptr) {
  auto fixed = [&](std::vector<StepKind> kinds) {
    ScalingConfig c = cfg;
    c.first_step = kinds.front();
    c.fixed_steps = kinds.size();
    c.max_steps = kinds.size();
    return c;
  };
  ScalingConfig c;
  switch (cfg.mode) {
  case ScalingMode::none: {
    auto st = detail::initial_state(a, b);
    if (trace) {
      *trace = ScalingTrace{};
      trace->initial_norm_a = max_norm(a);
      trace->initial_norm_b = max_norm(b);
    }
    return st;
  }
  case ScalingMode::outside: c = fixed({StepKind::O}); break;
  case ScalingMode::inside: c = fixed({StepKind::I}); break;
  case ScalingMode::outside_inside: c = fixed({StepKind::O, StepKind::I}); break;
  case ScalingMode::inside_outside: c = fixed({StepKind::I, StepKind::O}); break;
  case ScalingMode::repeated: c = cfg; break;
  }
  auto [st, tr] = repeated_scale(a, b, c);
  if (trace) *trace = std::move(tr);
  return std::move(st);
}

// C_ij = (d_a[i] * C'_ij) * d_b[j].
inline Matrix unscale(const Matrix& cs, const ScalingState& st) {
  Matrix c(cs.rows(), cs.cols());
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) = (st.d_a[i] * cs(i, j)) * st.d_b[j];
  return c;
}

inline Matrix scaled_multiply(const Matrix& a, const Matrix& b, const RecursionPlan& plan, const ScalingConfig& cfg,
                              const EngineOptions& opt = {}, ScalingTrace* trace = nullptr,
                              std::size_t* steps_taken = nullptr) {
  if (cfg.mode == ScalingMode::none) {
    if (steps_taken) *steps_taken = 0;
    if (trace) {
      *trace = ScalingTrace{};
      trace->initial_norm_a = max_norm(a);
      trace->initial_norm_b = max_norm(b);
    }
    return multiply(a, b, plan, opt);
  }
  const ScalingState st = apply_scaling(a, b, cfg, trace);
  if (steps_taken) *steps_taken = st.steps_taken;
  return unscale(multiply(st.a_scaled, st.b_scaled, plan, opt), st);
}

inline std::string to_string(ScalingMode m) {
  switch (m) {
  case ScalingMode::none: return "none";
  case ScalingMode::outside: return "outside";
  case ScalingMode::inside: return "inside";
  case ScalingMode::outside_inside: return "outside-inside";
  case ScalingMode::inside_outside: return "inside-outside";
  case ScalingMode::repeated: return "repeated";
  }
  return "?";
}

// none, outside, inside, outside-inside, inside-outside, repeated, repeated(k)
inline ScalingConfig parse_scaling(const std::string& s) {
  ScalingConfig c;
  if (s == "none") c.mode = ScalingMode::none;
  else if (s == "outside") c.mode = ScalingMode::outside;
  else if (s == "inside") c.mode = ScalingMode::inside;
  else if (s == "outside-inside") c.mode = ScalingMode::outside_inside;
  else if (s == "inside-outside") c.mode = ScalingMode::inside_outside;
  else if (s == "repeated") c.mode = ScalingMode::repeated;
  else if (s.rfind("repeated(", 0) == 0 && s.back() == ')') {
    const std::string num = s.substr(9, s.size() - 10);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos || std::stoul(num) == 0)
      throw std::invalid_argument("bad scaling mode '" + s + "'");
    c = ScalingConfig::repeated_iterations(std::stoul(num));
  } else
    throw std::invalid_argument("unknown scaling mode '" + s + "'");
  return c;
}

inline std::string describe(const ScalingConfig& c) {
  if (c.mode == ScalingMode::repeated && c.fixed_steps) return "repeated(" + std::to_string(*c.fixed_steps / 2) + ")";
  return to_string(c.mode);
}

} // namespace fmm
