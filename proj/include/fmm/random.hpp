#pragma once

#include "fmm/matrix.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace fmm {

enum class Distribution { u01, u11, adversarial_inside, adversarial_outside };

inline Distribution parse_distribution(const std::string& s) {
  if (s == "u01" || s == "1") return Distribution::u01;
  if (s == "u11") return Distribution::u11;
  if (s == "2") return Distribution::adversarial_inside;
  if (s == "3") return Distribution::adversarial_outside;
  throw std::invalid_argument("unknown distribution '" + s + "' (expected 1, 2, 3, u01, u11)");
}

inline std::string to_string(Distribution d) {
  switch (d) {
  case Distribution::u01: return "u01";
  case Distribution::u11: return "u11";
  case Distribution::adversarial_inside: return "2";
  case Distribution::adversarial_outside: return "3";
  }
  return "?";
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64 output mapped to [0, 1) with 53 random bits.
class UniformSource {
public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

private:
  std::mt19937_64 gen_;
};

// A draws from stream seed+1, B from stream seed+2. Distributions 2 and 3
// split both index ranges into exact halves at N/2 (zero-based).
inline std::pair<Matrix, Matrix> generate_pair(Distribution dist, std::size_t m, std::size_t k, std::size_t n,
                                               std::uint64_t seed) {
  if (m == 0 || k == 0 || n == 0) throw std::invalid_argument("dimensions must be positive");
  UniformSource ga(splitmix64(seed + 1)), gb(splitmix64(seed + 2));
  Matrix a(m, k), b(k, n);
  const double N = static_cast<double>(k);
  const double small = 1.0 / (N * N), large = N * N;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double u = ga.next();
      double x = u;
      switch (dist) {
      case Distribution::u01: break;
      case Distribution::u11: x = 2.0 * u - 1.0; break;
      case Distribution::adversarial_inside: x = 2 * j >= k ? u * small : u; break;
      case Distribution::adversarial_outside: x = (2 * i < m && 2 * j >= k) ? u * large : u; break;
      }
      a(i, j) = x;
    }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double u = gb.next();
      double x = u;
      switch (dist) {
      case Distribution::u01: break;
      case Distribution::u11: x = 2.0 * u - 1.0; break;
      case Distribution::adversarial_inside: x = 2 * i < k ? u * small : u; break;
      case Distribution::adversarial_outside: x = 2 * j < n ? u * small : u; break;
      }
      b(i, j) = x;
    }
  return {std::move(a), std::move(b)};
}

} // namespace fmm
