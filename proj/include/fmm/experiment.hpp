#pragma once

#include "fmm/engine.hpp"
#include "fmm/oracle.hpp"
#include "fmm/plan.hpp"
#include "fmm/random.hpp"
#include "fmm/scaling.hpp"
#include "fmm/stability.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fmm {

struct ExperimentSpec {
  std::string algo = "strassen";
  std::size_t m = 512, k = 512, n = 512;
  Distribution dist = Distribution::u01;
  std::uint64_t seed = 1;
  std::vector<std::size_t> levels{1, 2, 3, 4};
  std::vector<ScalingConfig> scalings{ScalingConfig{}};
  std::size_t reps = 5;
  EngineOptions engine;
};

struct ErrorRow {
  std::string algo;
  std::size_t m, k, n;
  std::string dist;
  std::uint64_t seed;
  std::size_t L;
  std::string scaling;
  std::size_t steps_taken;
  double max_abs_err, max_rel_err;
  double bound; // NaN when the summation mode voids it
};

inline std::string error_csv_header() {
  return "algo,m,k,n,dist,seed,L,scaling,steps_taken,max_abs_err,max_rel_err,bound";
}

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string to_csv(const ErrorRow& r) {
  return r.algo + "," + std::to_string(r.m) + "," + std::to_string(r.k) + "," + std::to_string(r.n) + "," + r.dist +
         "," + std::to_string(r.seed) + "," + std::to_string(r.L) + "," + r.scaling + "," +
         std::to_string(r.steps_taken) + "," + format_g17(r.max_abs_err) + "," + format_g17(r.max_rel_err) + "," +
         format_g17(r.bound);
}

// One row per (L, scaling). `emit` sees each row as soon as it is computed.
inline std::vector<ErrorRow> bench_error(const ExperimentSpec& spec, const Resolver& resolve,
                                         const std::function<void(const ErrorRow&)>& emit = {}) {
  const AlgorithmPtr alg = resolve(spec.algo);
  const auto [a, b] = generate_pair(spec.dist, spec.m, spec.k, spec.n, spec.seed);
  const ReferenceMatrix ref = multiply_reference(a, b);
  const StabilityReport rep = analyze(*alg);
  const double na = max_norm(a), nb = max_norm(b);
  std::vector<ErrorRow> rows;
  for (std::size_t L : spec.levels) {
    const RecursionPlan plan = Stationary{alg, L};
    const auto padded = pad_dims(spec.m, spec.k, spec.n, plan);
    const double bound = spec.engine.mode == SummationMode::strict
                             ? bound_stationary(rep, L, padded[1], na, nb)
                             : std::numeric_limits<double>::quiet_NaN();
    for (const auto& sc : spec.scalings) {
      std::size_t steps = 0;
      const Matrix c = scaled_multiply(a, b, plan, sc, spec.engine, nullptr, &steps);
      const ErrorReport er = compare(c, ref, bound);
      ErrorRow row{alg->name(), spec.m, spec.k, spec.n, to_string(spec.dist), spec.seed, L, describe(sc),
                   steps, er.max_abs_err, er.max_rel_err, bound};
      if (emit) emit(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

struct PerfRow {
  std::string algo;
  std::size_t m, k, n, L;
  std::string scaling;
  double seconds_median;
  double effective_gflops;
};

inline std::string perf_csv_header() { return "algo,m,k,n,L,scaling,seconds_median,effective_gflops"; }

inline std::string to_csv(const PerfRow& r) {
  return r.algo + "," + std::to_string(r.m) + "," + std::to_string(r.k) + "," + std::to_string(r.n) + "," +
         std::to_string(r.L) + "," + r.scaling + "," + format_g17(r.seconds_median) + "," +
         format_g17(r.effective_gflops);
}

inline double median_seconds(std::size_t reps, const std::function<void()>& fn) {
  std::vector<double> t;
  for (std::size_t i = 0; i < std::max<std::size_t>(reps, 1); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

// Timed scaled_multiply, scaling included. L = 0 rows use multiply_classical.
inline std::vector<PerfRow> bench_perf(const ExperimentSpec& spec, const Resolver& resolve,
                                       const std::function<void(const PerfRow&)>& emit = {}) {
  const AlgorithmPtr alg = resolve(spec.algo);
  const auto [a, b] = generate_pair(spec.dist, spec.m, spec.k, spec.n, spec.seed);
  std::vector<PerfRow> rows;
  for (std::size_t L : spec.levels) {
    const RecursionPlan plan = Stationary{alg, L};
    for (const auto& sc : spec.scalings) {
      volatile double sink = 0;
      const double s = median_seconds(spec.reps, [&] {
        Matrix c = L == 0 && sc.mode == ScalingMode::none ? multiply_classical(a, b, spec.engine.mode)
                                                          : scaled_multiply(a, b, plan, sc, spec.engine);
        sink = sink + c(0, 0);
      });
      PerfRow row{L == 0 ? std::string("classical") : alg->name(), spec.m, spec.k, spec.n, L, describe(sc), s,
                  effective_gflops(double(spec.m), double(spec.k), double(spec.n), s)};
      if (emit) emit(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

} // namespace fmm
