#pragma once

#include "fmm/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fmm {

// Single-index conventions for base-case entries (zero-based).
// A and B entries are numbered column-major, C entries row-major.
constexpr std::size_t a_index(std::size_t row, std::size_t col, std::size_t m0) { return row + col * m0; }
constexpr std::size_t b_index(std::size_t row, std::size_t col, std::size_t k0) { return row + col * k0; }
constexpr std::size_t c_index(std::size_t row, std::size_t col, std::size_t n0) { return row * n0 + col; }

struct AlgorithmTriple {
  std::string name;
  std::size_t m0 = 0, k0 = 0, n0 = 0;
  std::size_t rank = 0;
  RationalMatrix u, v, w;
};

class StructuralError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

struct Violation {
  std::size_t i, j, k;
  Rational sum;
  int expected;
};

class ValidationError : public std::runtime_error {
public:
  ValidationError(std::string what, std::vector<Violation> v)
      : std::runtime_error(std::move(what)), violations_(std::move(v)) {}
  const std::vector<Violation>& violations() const { return violations_; }

private:
  std::vector<Violation> violations_;
};

inline void check_shapes(const AlgorithmTriple& t) {
  if (t.m0 == 0 || t.k0 == 0 || t.n0 == 0) throw StructuralError("dimensions must be positive");
  if (t.rank == 0) throw StructuralError("rank must be positive");
  auto expect = [&](const RationalMatrix& x, std::size_t rows, char nm) {
    if (x.rows() != rows || x.cols() != t.rank)
      throw StructuralError(std::string(1, nm) + " has shape " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()) + ", expected " + std::to_string(rows) + "x" +
                            std::to_string(t.rank));
  };
  expect(t.u, t.m0 * t.k0, 'U');
  expect(t.v, t.k0 * t.n0, 'V');
  expect(t.w, t.m0 * t.n0, 'W');
}

// Exhaustive triple-product check. Empty result means the triple multiplies matrices.
inline std::vector<Violation> find_violations(const AlgorithmTriple& t) {
  check_shapes(t);
  const std::size_t m0 = t.m0, k0 = t.k0, n0 = t.n0, R = t.rank;
  std::vector<Violation> out;
  std::vector<Rational> uv(R);
  for (std::size_t i = 0; i < m0 * k0; ++i) {
    const std::size_t ra = i % m0, ca = i / m0;
    for (std::size_t j = 0; j < k0 * n0; ++j) {
      const std::size_t rb = j % k0, cb = j / k0;
      bool any = false;
      for (std::size_t r = 0; r < R; ++r) {
        uv[r] = t.u(i, r) * t.v(j, r);
        any = any || uv[r] != 0;
      }
      for (std::size_t k = 0; k < m0 * n0; ++k) {
        const std::size_t rc = k / n0, cc = k % n0;
        const int expected = (ca == rb && ra == rc && cb == cc) ? 1 : 0;
        Rational s = 0;
        if (any)
          for (std::size_t r = 0; r < R; ++r)
            if (uv[r] != 0 && t.w(k, r) != 0) s += uv[r] * t.w(k, r);
        if (s != expected) out.push_back({i, j, k, s, expected});
      }
    }
  }
  return out;
}

struct ValidationResult;
ValidationResult validate(AlgorithmTriple t);

class BilinearAlgorithm {
public:
  struct Term {
    std::size_t index;
    double coef;
  };

  const std::string& name() const { return t_.name; }
  std::size_t m0() const { return t_.m0; }
  std::size_t k0() const { return t_.k0; }
  std::size_t n0() const { return t_.n0; }
  std::size_t rank() const { return t_.rank; }
  const RationalMatrix& u() const { return t_.u; }
  const RationalMatrix& v() const { return t_.v; }
  const RationalMatrix& w() const { return t_.w; }
  const AlgorithmTriple& triple() const { return t_; }

  // Nonzero coefficients of column r, ascending row index, as doubles.
  const std::vector<Term>& u_terms(std::size_t r) const { return u_terms_[r]; }
  const std::vector<Term>& v_terms(std::size_t r) const { return v_terms_[r]; }
  // Nonzero coefficients of row k of W, ascending r.
  const std::vector<Term>& w_terms(std::size_t k) const { return w_terms_[k]; }
  // Nonzero coefficients of column r of W, ascending output index.
  const std::vector<Term>& w_col_terms(std::size_t r) const { return w_col_terms_[r]; }

  BilinearAlgorithm renamed(std::string name) const {
    BilinearAlgorithm copy = *this;
    copy.t_.name = std::move(name);
    return copy;
  }

private:
  explicit BilinearAlgorithm(AlgorithmTriple t) : t_(std::move(t)) {
    auto by_col = [&](const RationalMatrix& x) {
      std::vector<std::vector<Term>> out(x.cols());
      for (std::size_t r = 0; r < x.cols(); ++r)
        for (std::size_t i = 0; i < x.rows(); ++i)
          if (x(i, r) != 0) out[r].push_back({i, to_double(x(i, r))});
      return out;
    };
    u_terms_ = by_col(t_.u);
    v_terms_ = by_col(t_.v);
    w_col_terms_ = by_col(t_.w);
    w_terms_.resize(t_.w.rows());
    for (std::size_t k = 0; k < t_.w.rows(); ++k)
      for (std::size_t r = 0; r < t_.w.cols(); ++r)
        if (t_.w(k, r) != 0) w_terms_[k].push_back({r, to_double(t_.w(k, r))});
  }

  AlgorithmTriple t_;
  std::vector<std::vector<Term>> u_terms_, v_terms_, w_terms_, w_col_terms_;

  friend ValidationResult validate(AlgorithmTriple t);
};

using AlgorithmPtr = std::shared_ptr<const BilinearAlgorithm>;

struct ValidationResult {
  std::optional<BilinearAlgorithm> algorithm;
  std::vector<Violation> violations;
  bool ok() const { return algorithm.has_value(); }
};

inline ValidationResult validate(AlgorithmTriple t) {
  ValidationResult res;
  res.violations = find_violations(t);
  if (res.violations.empty()) res.algorithm = BilinearAlgorithm(std::move(t));
  return res;
}

inline BilinearAlgorithm validated(AlgorithmTriple t, const std::string& context = "invalid algorithm") {
  auto res = validate(std::move(t));
  if (!res.ok())
    throw ValidationError(context + " (" + std::to_string(res.violations.size()) + " violated triples)",
                          std::move(res.violations));
  return std::move(*res.algorithm);
}

// ---- text format ----

inline AlgorithmTriple parse_algorithm(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  AlgorithmTriple t;
  bool have_name = false, have_dims = false, have_rank = false;
  char section = 0;
  std::size_t row = 0;
  bool seen[3] = {false, false, false};

  auto rows_for = [&](char s) -> std::size_t {
    return s == 'U' ? t.m0 * t.k0 : s == 'V' ? t.k0 * t.n0 : t.m0 * t.n0;
  };
  auto target = [&](char s) -> RationalMatrix& { return s == 'U' ? t.u : s == 'V' ? t.v : t.w; };
  auto close_section = [&] {
    if (section && row != rows_for(section))
      throw ParseError(lineno, std::string("section ") + section + " has " + std::to_string(row) +
                                   " rows, expected " + std::to_string(rows_for(section)));
  };
  auto read_count = [&](std::istringstream& ls, const char* what) {
    std::string tok;
    if (!(ls >> tok)) throw ParseError(lineno, std::string("missing value for ") + what);
    auto q = parse_rational(tok);
    if (!q || denominator(*q) != 1 || *q < 0)
      throw ParseError(lineno, std::string("bad ") + what + " '" + tok + "'");
    return numerator(*q).convert_to<std::size_t>();
  };

  while (std::getline(in, raw)) {
    ++lineno;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    std::istringstream ls(raw);
    std::string head;
    if (!(ls >> head)) continue;

    if (head == "name" || head == "dims" || head == "rank") {
      if (section) throw ParseError(lineno, "header keyword '" + head + "' after matrix data");
      if (head == "name") {
        if (!(ls >> t.name)) throw ParseError(lineno, "missing algorithm name");
        have_name = true;
      } else if (head == "dims") {
        t.m0 = read_count(ls, "M0");
        t.k0 = read_count(ls, "K0");
        t.n0 = read_count(ls, "N0");
        if (t.m0 == 0 || t.k0 == 0 || t.n0 == 0) throw ParseError(lineno, "dimensions must be positive");
        have_dims = true;
      } else {
        t.rank = read_count(ls, "rank");
        if (t.rank == 0) throw ParseError(lineno, "rank must be positive");
        have_rank = true;
      }
      std::string extra;
      if (ls >> extra) throw ParseError(lineno, "unexpected token '" + extra + "'");
      continue;
    }
    if (head == "U" || head == "V" || head == "W") {
      if (!have_name || !have_dims || !have_rank)
        throw ParseError(lineno, "matrix section before name/dims/rank header");
      std::string extra;
      if (ls >> extra) throw ParseError(lineno, "unexpected token '" + extra + "' after section name");
      close_section();
      section = head[0];
      const int idx = section - 'U';
      if (seen[idx]) throw ParseError(lineno, "duplicate section " + head);
      seen[idx] = true;
      target(section) = RationalMatrix(rows_for(section), t.rank);
      row = 0;
      continue;
    }
    if (!section) throw ParseError(lineno, "unexpected '" + head + "'");
    if (row >= rows_for(section))
      throw ParseError(lineno, std::string("too many rows in section ") + section);
    std::vector<std::string> toks{head};
    for (std::string tok; ls >> tok;) toks.push_back(tok);
    if (toks.size() != t.rank)
      throw ParseError(lineno, "expected " + std::to_string(t.rank) + " entries, found " + std::to_string(toks.size()));
    for (std::size_t r = 0; r < toks.size(); ++r) {
      auto q = parse_rational(toks[r]);
      if (!q) throw ParseError(lineno, "unparsable entry '" + toks[r] + "'");
      target(section)(row, r) = *q;
    }
    ++row;
  }
  ++lineno;
  if (!have_name || !have_dims || !have_rank) throw ParseError(lineno, "incomplete header");
  close_section();
  for (int s = 0; s < 3; ++s)
    if (!seen[s]) throw ParseError(lineno, std::string("missing section ") + char('U' + s));
  return t;
}

inline std::string serialize(const AlgorithmTriple& t) {
  std::ostringstream out;
  out << "name " << t.name << "\n";
  out << "dims " << t.m0 << " " << t.k0 << " " << t.n0 << "\n";
  out << "rank " << t.rank << "\n";
  auto block = [&](char nm, const RationalMatrix& x) {
    std::size_t width = 1;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t r = 0; r < x.cols(); ++r) width = std::max(width, to_string(x(i, r)).size());
    out << nm << "\n";
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t r = 0; r < x.cols(); ++r) {
        auto s = to_string(x(i, r));
        out << (r ? " " : "") << std::string(width - s.size(), ' ') << s;
      }
      out << "\n";
    }
  };
  block('U', t.u);
  block('V', t.v);
  block('W', t.w);
  return out.str();
}

inline std::string serialize(const BilinearAlgorithm& a) { return serialize(a.triple()); }

inline AlgorithmTriple load_algorithm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_algorithm(ss.str());
}

// ---- permutations ----

// (P x)[i] = x[map[i]].
struct Permutation {
  std::vector<std::size_t> map;

  std::size_t size() const { return map.size(); }
  bool operator==(const Permutation&) const = default;

  static Permutation identity(std::size_t n) {
    Permutation p;
    p.map.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.map[i] = i;
    return p;
  }

  // From a 0/1 matrix given row by row.
  static Permutation from_matrix(const std::vector<std::vector<int>>& m) {
    Permutation p;
    p.map.assign(m.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i].size() != m.size()) throw std::invalid_argument("permutation matrix must be square");
      for (std::size_t j = 0; j < m[i].size(); ++j)
        if (m[i][j]) {
          if (m[i][j] != 1 || p.map[i] != m.size()) throw std::invalid_argument("not a permutation matrix");
          p.map[i] = j;
        }
      if (p.map[i] == m.size()) throw std::invalid_argument("not a permutation matrix");
    }
    if (!p.valid()) throw std::invalid_argument("not a permutation matrix");
    return p;
  }

  bool valid() const {
    std::vector<bool> hit(map.size(), false);
    for (auto j : map) {
      if (j >= map.size() || hit[j]) return false;
      hit[j] = true;
    }
    return true;
  }

  int entry(std::size_t i, std::size_t j) const { return map[i] == j ? 1 : 0; }

  // this * other
  Permutation operator*(const Permutation& other) const {
    Permutation p;
    p.map.resize(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) p.map[i] = other.map[map[i]];
    return p;
  }
};

// Kronecker product X (x) Y of permutation matrices.
inline Permutation kron(const Permutation& x, const Permutation& y) {
  Permutation p;
  const std::size_t q = y.size();
  p.map.resize(x.size() * q);
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < q; ++b) p.map[a * q + b] = x.map[a] * q + y.map[b];
  return p;
}

// P_{m,n} * vec_colmajor(X) = vec_rowmajor(X) for X of size m x n.
inline Permutation vec_permutation(std::size_t m, std::size_t n) {
  Permutation p;
  p.map.resize(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) p.map[i * n + j] = i + j * m;
  return p;
}

inline RationalMatrix permute_rows(const Permutation& p, const RationalMatrix& x) {
  if (p.size() != x.rows()) throw StructuralError("permutation order does not match row count");
  RationalMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t r = 0; r < x.cols(); ++r) out(i, r) = x(p.map[i], r);
  return out;
}

inline BilinearAlgorithm permute_rows(const BilinearAlgorithm& alg, const Permutation& pu, const Permutation& pv,
                                      const Permutation& pw, std::string name = {}) {
  AlgorithmTriple t = alg.triple();
  t.u = permute_rows(pu, t.u);
  t.v = permute_rows(pv, t.v);
  t.w = permute_rows(pw, t.w);
  if (!name.empty()) t.name = std::move(name);
  return validated(std::move(t), "not a matmul-preserving transform");
}

// ---- transforms ----

inline BilinearAlgorithm cyclic_rotate(const BilinearAlgorithm& alg) {
  AlgorithmTriple t;
  t.name = alg.name() + "'";
  t.m0 = alg.n0();
  t.k0 = alg.m0();
  t.n0 = alg.k0();
  t.rank = alg.rank();
  t.u = alg.w();
  t.v = alg.u();
  t.w = alg.v();
  auto res = validate(std::move(t));
  if (!res.ok()) throw std::logic_error("cyclic_rotate produced an invalid algorithm");
  return std::move(*res.algorithm);
}

inline BilinearAlgorithm transpose_transform(const BilinearAlgorithm& alg) {
  const std::size_t m0 = alg.m0(), k0 = alg.k0(), n0 = alg.n0();
  AlgorithmTriple t;
  t.name = alg.name() + "^T";
  t.m0 = n0;
  t.k0 = k0;
  t.n0 = m0;
  t.rank = alg.rank();
  t.u = permute_rows(vec_permutation(k0, n0), alg.v());
  t.v = permute_rows(vec_permutation(m0, k0), alg.u());
  t.w = permute_rows(vec_permutation(n0, m0), alg.w());
  auto res = validate(std::move(t));
  if (!res.ok()) throw std::logic_error("transpose_transform produced an invalid algorithm");
  return std::move(*res.algorithm);
}

inline BilinearAlgorithm classical(std::size_t m0, std::size_t k0, std::size_t n0) {
  AlgorithmTriple t;
  t.name = "classical:" + std::to_string(m0) + "x" + std::to_string(k0) + "x" + std::to_string(n0);
  t.m0 = m0;
  t.k0 = k0;
  t.n0 = n0;
  t.rank = m0 * k0 * n0;
  t.u = RationalMatrix(m0 * k0, t.rank);
  t.v = RationalMatrix(k0 * n0, t.rank);
  t.w = RationalMatrix(m0 * n0, t.rank);
  std::size_t r = 0;
  for (std::size_t i = 0; i < m0; ++i)
    for (std::size_t j = 0; j < n0; ++j)
      for (std::size_t p = 0; p < k0; ++p, ++r) {
        t.u(a_index(i, p, m0), r) = 1;
        t.v(b_index(p, j, k0), r) = 1;
        t.w(c_index(i, j, n0), r) = 1;
      }
  return validated(std::move(t), "classical generator");
}

// Same dims and the same multiset of (U,V,W) column triples.
inline bool equivalent_up_to_column_order(const BilinearAlgorithm& a, const BilinearAlgorithm& b) {
  if (a.m0() != b.m0() || a.k0() != b.k0() || a.n0() != b.n0() || a.rank() != b.rank()) return false;
  auto columns = [](const BilinearAlgorithm& x) {
    std::vector<std::vector<Rational>> cols(x.rank());
    for (std::size_t r = 0; r < x.rank(); ++r) {
      for (std::size_t i = 0; i < x.u().rows(); ++i) cols[r].push_back(x.u()(i, r));
      for (std::size_t i = 0; i < x.v().rows(); ++i) cols[r].push_back(x.v()(i, r));
      for (std::size_t i = 0; i < x.w().rows(); ++i) cols[r].push_back(x.w()(i, r));
    }
    std::sort(cols.begin(), cols.end());
    return cols;
  };
  return columns(a) == columns(b);
}

} // namespace fmm
