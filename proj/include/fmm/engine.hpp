#pragma once

#include "fmm/matrix.hpp"
#include "fmm/plan.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fmm {

enum class SummationMode {
  strict, // every entry accumulates in ascending index order
  fast    // leaf products may be summed blockwise
};

struct EngineOptions {
  SummationMode mode = SummationMode::strict;
  bool check_finite = false;
};

namespace kernel {

inline constexpr std::size_t kBlockK = 128;
inline constexpr std::size_t kBlockN = 256;

// C[i, j0:j0+jn] += sum over p in [p0, p1) of A[i,p] * B[p, j0:j0+jn], p ascending, for rows [0, m).
inline void accumulate_panel(const double* __restrict A, std::size_t lda, const double* __restrict B, std::size_t ldb,
                             double* __restrict C, std::size_t ldc, std::size_t m, std::size_t p0, std::size_t p1,
                             std::size_t j0, std::size_t jn) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    double* __restrict c0 = C + i * ldc + j0;
    double* __restrict c1 = c0 + ldc;
    double* __restrict c2 = c1 + ldc;
    double* __restrict c3 = c2 + ldc;
    const double* a = A + i * lda;
    for (std::size_t p = p0; p < p1; ++p) {
      const double a0 = a[p], a1 = a[lda + p], a2 = a[2 * lda + p], a3 = a[3 * lda + p];
      const double* __restrict b = B + p * ldb + j0;
      for (std::size_t j = 0; j < jn; ++j) {
        const double bj = b[j];
        c0[j] += a0 * bj;
        c1[j] += a1 * bj;
        c2[j] += a2 * bj;
        c3[j] += a3 * bj;
      }
    }
  }
  for (; i < m; ++i) {
    double* __restrict c = C + i * ldc + j0;
    const double* a = A + i * lda;
    for (std::size_t p = p0; p < p1; ++p) {
      const double ap = a[p];
      const double* __restrict b = B + p * ldb + j0;
      for (std::size_t j = 0; j < jn; ++j) c[j] += ap * b[j];
    }
  }
}

// C = A * B for an m x k by k x n product on strided views.
inline void gemm(const double* A, std::size_t lda, const double* B, std::size_t ldb, double* C, std::size_t ldc,
                 std::size_t m, std::size_t k, std::size_t n, SummationMode mode) {
  for (std::size_t i = 0; i < m; ++i) std::fill(C + i * ldc, C + i * ldc + n, 0.0);
  if (mode == SummationMode::strict) {
    for (std::size_t p0 = 0; p0 < k; p0 += kBlockK)
      for (std::size_t j0 = 0; j0 < n; j0 += kBlockN)
        accumulate_panel(A, lda, B, ldb, C, ldc, m, p0, std::min(k, p0 + kBlockK), j0, std::min(kBlockN, n - j0));
    return;
  }
  std::vector<double> part(m * std::min(n, kBlockN));
  for (std::size_t j0 = 0; j0 < n; j0 += kBlockN) {
    const std::size_t jn = std::min(kBlockN, n - j0);
    for (std::size_t p0 = 0; p0 < k; p0 += kBlockK) {
      std::fill(part.begin(), part.begin() + m * jn, 0.0);
      accumulate_panel(A, lda, B + j0, ldb, part.data(), jn, m, p0, std::min(k, p0 + kBlockK), 0, jn);
      for (std::size_t i = 0; i < m; ++i) {
        double* c = C + i * ldc + j0;
        const double* t = part.data() + i * jn;
        for (std::size_t j = 0; j < jn; ++j) c[j] += t[j];
      }
    }
  }
}

} // namespace kernel

namespace detail {

struct ConstView {
  const double* p;
  std::size_t ld;
};

struct View {
  double* p;
  std::size_t ld;
};

class Executor {
public:
  Executor(const std::vector<LevelDims>& dims, std::size_t m, std::size_t k, std::size_t n, SummationMode mode)
      : mode_(mode) {
    for (const auto& d : dims) {
      m /= d.m0;
      k /= d.k0;
      n /= d.n0;
      Level lv;
      lv.s.resize(m * k);
      lv.t.resize(k * n);
      lv.m.resize(m * n);
      levels_.push_back(std::move(lv));
    }
  }

  void run(const NodePtr& node, std::size_t depth, ConstView A, ConstView B, View C, std::size_t m, std::size_t k,
           std::size_t n) {
    if (!node) {
      kernel::gemm(A.p, A.ld, B.p, B.ld, C.p, C.ld, m, k, n, mode_);
      return;
    }
    const BilinearAlgorithm& alg = *node->alg;
    const std::size_t m0 = alg.m0(), k0 = alg.k0(), n0 = alg.n0();
    const std::size_t mb = m / m0, kb = k / k0, nb = n / n0;
    Level& lv = levels_[depth];

    auto a_block = [&](std::size_t i) {
      return ConstView{A.p + (i % m0) * mb * A.ld + (i / m0) * kb, A.ld};
    };
    auto b_block = [&](std::size_t j) {
      return ConstView{B.p + (j % k0) * kb * B.ld + (j / k0) * nb, B.ld};
    };
    auto c_block = [&](std::size_t c) { return View{C.p + (c / n0) * mb * C.ld + (c % n0) * nb, C.ld}; };

    std::vector<char> started(m0 * n0, 0);
    for (std::size_t r = 0; r < alg.rank(); ++r) {
      const ConstView S = combine(alg.u_terms(r), a_block, lv.s.data(), mb, kb);
      const ConstView T = combine(alg.v_terms(r), b_block, lv.t.data(), kb, nb);

      const auto& out = alg.w_col_terms(r);
      // A single unit entry that opens its output block lets the product land in C directly.
      if (out.size() == 1 && out[0].coef == 1.0 && !started[out[0].index]) {
        run(node->children[r], depth + 1, S, T, c_block(out[0].index), mb, kb, nb);
        started[out[0].index] = 1;
        continue;
      }
      run(node->children[r], depth + 1, S, T, View{lv.m.data(), nb}, mb, kb, nb);
      for (const auto& t : out) {
        axpy_block(c_block(t.index), lv.m.data(), nb, mb, nb, t.coef, !started[t.index]);
        started[t.index] = 1;
      }
    }
  }

private:
  struct Level {
    std::vector<double> s, t, m;
  };

  // dst = coef * src when first, else dst += coef * src.
  static void axpy_block(View dst, const double* src, std::size_t lds, std::size_t rows, std::size_t cols, double coef,
                         bool first) {
    for (std::size_t i = 0; i < rows; ++i) {
      double* __restrict d = dst.p + i * dst.ld;
      const double* __restrict s = src + i * lds;
      if (first) {
        if (coef == 1.0) std::copy(s, s + cols, d);
        else if (coef == -1.0)
          for (std::size_t j = 0; j < cols; ++j) d[j] = -s[j];
        else
          for (std::size_t j = 0; j < cols; ++j) d[j] = coef * s[j];
      } else {
        if (coef == 1.0)
          for (std::size_t j = 0; j < cols; ++j) d[j] += s[j];
        else if (coef == -1.0)
          for (std::size_t j = 0; j < cols; ++j) d[j] -= s[j];
        else
          for (std::size_t j = 0; j < cols; ++j) d[j] += coef * s[j];
      }
    }
  }

  template <class BlockFn>
  static ConstView combine(const std::vector<BilinearAlgorithm::Term>& terms, BlockFn block, double* buf,
                           std::size_t rows, std::size_t cols) {
    if (terms.size() == 1 && terms[0].coef == 1.0) return block(terms[0].index);
    bool first = true;
    for (const auto& t : terms) {
      const ConstView src = block(t.index);
      for (std::size_t i = 0; i < rows; ++i) {
        double* __restrict d = buf + i * cols;
        const double* __restrict s = src.p + i * src.ld;
        if (first) {
          if (t.coef == 1.0) std::copy(s, s + cols, d);
          else if (t.coef == -1.0)
            for (std::size_t j = 0; j < cols; ++j) d[j] = -s[j];
          else
            for (std::size_t j = 0; j < cols; ++j) d[j] = t.coef * s[j];
        } else {
          if (t.coef == 1.0)
            for (std::size_t j = 0; j < cols; ++j) d[j] += s[j];
          else if (t.coef == -1.0)
            for (std::size_t j = 0; j < cols; ++j) d[j] -= s[j];
          else
            for (std::size_t j = 0; j < cols; ++j) d[j] += t.coef * s[j];
        }
      }
      first = false;
    }
    return ConstView{buf, cols};
  }

  SummationMode mode_;
  std::vector<Level> levels_;
};

} // namespace detail

inline Matrix multiply_classical(const Matrix& a, const Matrix& b, SummationMode mode = SummationMode::strict) {
  if (a.cols() != b.rows()) throw std::invalid_argument("inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  kernel::gemm(a.data(), a.cols(), b.data(), b.cols(), c.data(), c.cols(), a.rows(), a.cols(), b.cols(), mode);
  return c;
}

inline Matrix multiply(const Matrix& a, const Matrix& b, const RecursionPlan& plan, const EngineOptions& opt = {}) {
  if (a.cols() != b.rows()) throw std::invalid_argument("inner dimensions differ");
  if (opt.check_finite && (!a.all_finite() || !b.all_finite()))
    throw std::invalid_argument("input contains NaN or Inf");
  const NodePtr root = to_tree(plan);
  const auto dims = level_dims(root);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const auto [mp, kp, np] = pad_dims(m, k, n, plan);
  const bool padded = mp != m || kp != k || np != n;

  const Matrix* pa = &a;
  const Matrix* pb = &b;
  Matrix a2, b2;
  if (padded) {
    a2 = resized(a, mp, kp);
    b2 = resized(b, kp, np);
    pa = &a2;
    pb = &b2;
  }
  Matrix c(mp, np);
  detail::Executor ex(dims, mp, kp, np, opt.mode);
  ex.run(root, 0, {pa->data(), kp}, {pb->data(), np}, {c.data(), np}, mp, kp, np);
  return padded ? resized(c, m, n) : c;
}

} // namespace fmm
