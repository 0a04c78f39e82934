#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmm {

class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw std::invalid_argument("ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  bool operator==(const Matrix&) const = default;

  // Bitwise equality, distinguishing -0.0 from 0.0 and comparing NaN payloads.
  bool bitwise_equal(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ &&
           (data_.empty() || std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(double)) == 0);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

inline double max_norm(const Matrix& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) r = std::max(r, std::fabs(m.data()[i]));
  return r;
}

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

// Copy of m zero-padded (or cropped) to rows x cols.
inline Matrix resized(const Matrix& m, std::size_t rows, std::size_t cols) {
  Matrix out(rows, cols);
  const std::size_t r = std::min(rows, m.rows()), c = std::min(cols, m.cols());
  for (std::size_t i = 0; i < r; ++i) std::copy(m.row(i), m.row(i) + c, out.row(i));
  return out;
}

// ---- I/O ----

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated matrix header");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

} // namespace detail

// "FMM1", u64 rows, u64 cols (little-endian), then row-major little-endian f64.
inline void write_binary(std::ostream& out, const Matrix& m) {
  out.write("FMM1", 4);
  detail::put_u64(out, m.rows());
  detail::put_u64(out, m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, m.data() + i, 8);
    detail::put_u64(out, bits);
  }
  if (!out) throw std::runtime_error("matrix write failed");
}

inline Matrix read_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "FMM1", 4) != 0) throw std::runtime_error("bad matrix magic");
  const auto rows = detail::get_u64(in), cols = detail::get_u64(in);
  if (cols != 0 && rows > (std::uint64_t(1) << 40) / cols) throw std::runtime_error("matrix too large");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::uint64_t bits;
    try {
      bits = detail::get_u64(in);
    } catch (const std::runtime_error&) {
      throw std::runtime_error("truncated matrix data");
    }
    std::memcpy(m.data() + i, &bits, 8);
  }
  return m;
}

// Rows of whitespace-separated decimals, printed with round-trip precision.
inline void write_text(std::ostream& out, const Matrix& m) {
  out.precision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << "\n";
  }
}

inline Matrix read_text(std::istream& in) {
  std::vector<double> vals;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::size_t c = 0;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double x;
      try {
        x = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw std::runtime_error("bad number '" + tok + "' on row " + std::to_string(rows + 1));
      vals.push_back(x);
      ++c;
    }
    if (c == 0) continue;
    if (rows == 0) cols = c;
    else if (c != cols) throw std::runtime_error("row " + std::to_string(rows + 1) + " has " + std::to_string(c) +
                                                 " entries, expected " + std::to_string(cols));
    ++rows;
  }
  Matrix m(rows, cols);
  std::copy(vals.begin(), vals.end(), m.data());
  return m;
}

// Binary if the file starts with the magic, text otherwise.
inline Matrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, "FMM1", 4) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_binary(in) : read_text(in);
}

// Creates missing parent directories.
inline void save_matrix(const std::string& path, const Matrix& m, bool text = false) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, text ? std::ios::out : std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  if (text) write_text(out, m);
  else write_binary(out, m);
}

} // namespace fmm
