#pragma once

#include "fmm/matrix.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fmm {

// Error-free transformations; require round-to-nearest and no FMA contraction.
namespace dd {

inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

inline void split(double a, double& hi, double& lo) {
  constexpr double factor = 134217729.0; // 2^27 + 1
  const double t = factor * a;
  hi = t - (t - a);
  lo = a - hi;
}

inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  double ah, al, bh, bl;
  split(a, ah, al);
  split(b, bh, bl);
  e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
}

} // namespace dd

// Classical product with double-double accumulation of every entry.
struct ReferenceMatrix {
  Matrix hi, lo;
  std::size_t rows() const { return hi.rows(); }
  std::size_t cols() const { return hi.cols(); }
  Matrix to_double() const {
    Matrix c(hi.rows(), hi.cols());
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = hi.data()[i] + lo.data()[i];
    return c;
  }
};

inline ReferenceMatrix multiply_reference(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("inner dimensions differ");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  ReferenceMatrix c{Matrix(m, n), Matrix(m, n)};
  std::vector<double> bh(n), bl(n);
  for (std::size_t i = 0; i < m; ++i) {
    double* __restrict hi = c.hi.row(i);
    double* __restrict lo = c.lo.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double x = a(i, p);
      if (x == 0.0) continue;
      double xh, xl;
      dd::split(x, xh, xl);
      const double* __restrict brow = b.row(p);
      for (std::size_t j = 0; j < n; ++j) {
        const double y = brow[j];
        const double prod = x * y;
        constexpr double factor = 134217729.0;
        const double t = factor * y;
        const double yh = t - (t - y);
        const double yl = y - yh;
        const double perr = ((xh * yh - prod) + xh * yl + xl * yh) + xl * yl;
        const double s = hi[j] + prod;
        const double bb = s - hi[j];
        double e = (hi[j] - (s - bb)) + (prod - bb);
        e += lo[j] + perr;
        const double h = s + e;
        lo[j] = e - (h - s);
        hi[j] = h;
      }
    }
  }
  return c;
}

struct ErrorReport {
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  std::size_t zero_reference_entries = 0;
  std::optional<double> bound;
};

// Differences are formed against the double-double value and rounded once.
inline ErrorReport compare(const Matrix& computed, const ReferenceMatrix& ref, std::optional<double> bound = {}) {
  if (computed.rows() != ref.rows() || computed.cols() != ref.cols())
    throw std::invalid_argument("dimension mismatch in compare");
  ErrorReport r;
  r.bound = bound;
  for (std::size_t i = 0; i < computed.size(); ++i) {
    const double h = ref.hi.data()[i], l = ref.lo.data()[i];
    const double err = std::fabs((computed.data()[i] - h) - l);
    r.max_abs_err = std::max(r.max_abs_err, err);
    if (h == 0.0 && l == 0.0) {
      ++r.zero_reference_entries;
      continue;
    }
    r.max_rel_err = std::max(r.max_rel_err, err / std::fabs(h + l));
  }
  return r;
}

inline double effective_gflops(double m, double k, double n, double seconds) {
  if (!(seconds > 0)) throw std::invalid_argument("elapsed time must be positive");
  return (2.0 * m * k * n - m * n) / seconds * 1e-9;
}

} // namespace fmm
