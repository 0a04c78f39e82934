#pragma once

#include "fmm/algorithm.hpp"

#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmm {

namespace catalog_text {

inline constexpr const char* kStrassen = R"fmm(
name strassen
dims 2 2 2
rank 7
U
 1  0  1  0  1 -1  0
 0  1  0  0  0  1  0
 0  0  0  0  1  0  1
 1  1  0  1  0  0 -1
V
 1  1  0 -1  0  1  0
 0  0  0  1  0  0  1
 0  0  1  0  0  1  0
 1  0 -1  0  1  0  1
W
 1  0  0  1 -1  0  1
 0  0  1  0  1  0  0
 0  1  0  1  0  0  0
 1 -1  1  0  0  1  0
)fmm";

inline constexpr const char* k323 = R"fmm(
name 323
dims 3 2 3
rank 15
U
 0  1  0  0 -1  1  1  0  0  0 -1  0  0  0 -1
 0  1  0  0  0  0  0 -1  0 -1  0  0  1 -1  0
 0  0  0  1  0  0  0 -1  0 -1  1  0  0 -1  0
-1  0  1  0  1  0  0  0  0  0  1  0  0  0  1
-1  0  0  0  0  1  0  1  0  1  0  1 -1  0  0
 0  0 -1  0  0  0  0  1  1  0 -1  0  0  0 -1
V
 0  0  1  1  0  0  0  0  0  0  1  0  0  1  1
 0  0  1  0  0  0  0 -1  1 -1  0  0  0  1  0
 0 -1  0  0  0  1  0  0  0  1  0  1  1 -1  0
-1  0  0  0  0  0  0  1  0  1  0  1  0 -1  0
 0  1  1  0  0  0  1  0  0  0  1  0  0  0  1
 1  0  1  0  1  1  1  0  0  0  0  0  0  0  1
W
 0  0  1  0  0  0 -1  0  1  0  0  0  0  0 -1
 1  0  0  0  1  1  0  0  0  0  0 -1  0  0  0
 0  0  0  0  1  0  1  0  0  0  0  0  0  0  0
 0  0  0 -1  0  0  0  0  0 -1  0  1  0 -1  0
 0  0  0  0  0  0  0  0  0  0  0  1  1  0  0
 0  1  0  0  0  1 -1  0  0  0  0  0  1  0  0
 0  0  0  1  0  0  0  0  1  0  0  0  0  0  0
 0  0  0  0  0  0  0  1  1 -1  0  0 -1  0  0
 0  0  0 -1  1  0  0  0  0  0  1  0  0  0 -1
)fmm";

inline constexpr const char* k442 = R"fmm(
name 442
dims 4 4 2
rank 26
U
   1    0    0   -1    0    0    0    0   -1    0    0    0    0   -1    0    0    0    0    0    0    0    0    0    0    0    0
   0    0    0    0    0   -1    0    0    0    0    1    1    1    0    0    0    0    0    0    0    0    0    0    0    0    0
   0    0    1    0    0   -1    0    0    0    0    1    1    1   -1    0    0    0    0    0    0   -1    0    0    1    0    0
   0    0    0    0    0    0    0    0    0    0    0   -1    0    1    0    0    0    0    0    0    0    0    0    0    0    0
   0    1    0    0    0    0    0  1/2    0    0    0    0    0    0    0    0    0    0 -1/2    0    0    0    0    0    0    1
   0    1    0    0    0    0    0    0    0    0    0    0   -1    0    0  1/2    0    0    0  1/2    0   -1    0    1   -1    0
   0    1    0    0    0    0    0  1/2    0    0    0    0    0    0    0    0    0    0 -1/2    0    0   -1    0    0    0    0
   0    0    0  1/2    1    0 -1/2 -1/2    0 -1/2   -1    1    0   -1   -1    0    0  1/2    0    0  1/2    0    0    0    0    0
   0    0    0    0    0    0    0  1/2    0    0    0    0    0    0    0 -1/2  1/2  1/2    0    0    0    0    0    0    0    0
   0    1    0    0   -1    0    0    0    0    0    0    0    0    0    0  1/2    0    0    0  1/2    0   -1    1    0    1    0
   0    1    0    0   -1    0    0  1/2    0    0    0    0    0    0    0    0    0  1/2    0    0    0   -1    1    0    1    0
   0    0    0  1/2    0    0 -1/2 -1/2    0  1/2    0    0    0    0    0    0    0 -1/2    0    0 -1/2    0    0    0    0    0
   0   -1    0    0    0    0    0    0    1    0    0    0    0    0    0  1/2 -1/2 -1/2  1/2    0    0    0    0    0    0   -1
   0    0    0    0    1    0    0    0    0    0    0    0    1    0    0    0    0    0    0    0    0    0    0    0    0    0
   0    0    0    0    1    0    0    0    0    0    0    0    0    0    0    0    0 -1/2  1/2    0    0    0    0    0   -1    0
   0    0    0    0   -1    0    0    0    0    0    1    0    0    1    1    0    0    0    0    0    0    0    0    0    0    0
V
   1    0   -1    0    0   -1    0    0    0    0   -1    0    0   -1   -1    0    0    0    0    0    0    0    0    0    0    0
   1  1/2   -1    1    0    0    0    1    1    0    0    0    0    0    0    1    0    1    1    0   -1    0    0    1 -1/2    1
   1  1/2    1    1    0    0    0    1    1    0    0    0    0    0    0    0    1   -1   -1    1    1    0    0   -1  1/2    0
   1  1/2   -1    1    0    1    0    1    1    0    1    0   -1    0    1    1    0    1   -1    0   -1    0    0    1 -1/2    0
  -1    0   -1   -1    0   -1   -1    0    0   -1    0   -1    0    0    0    0    0    0    0    0   -1    0    0    0    0    0
  -1   -1   -1   -1    0    0   -1    0   -1   -1    0    0    0    0    0    0    0    0    0    0   -1    1    1    1    0   -1
  -1    0    1   -1    0    0   -1    0   -1    1    0    0    0    0    0   -1   -1    0    0    1    1    0   -1   -1    0    0
  -1    0   -1   -1   -1    1   -1    0   -1   -1    1    0   -1    0    0    0    0    0    0    0   -1    0   -1    1   -1    0
W
   1   -1    0    1    0    0    1    1    0    0    0    0    0    0    0    1    1    0    0    1    0    1    0    0    0    1
   0   -1    0    1    0    0    1    1   -1    0    0    0    0    0    0    1   -1    0    0    1    0    1    0    0    0    0
   0    0    1    0    1    0    0    0    0    1   -1    0   -1    0    1    1    1    1    0    1    1    0    0    0    1    0
   0    0    0    0   -1    1    0    0    0   -1    1    0    0    0   -1   -1   -1   -1    0    1   -1    0    0    1   -1    0
   0    1   -1    0    0    0    0    0    0   -1    0    0    0    0    0   -1   -1   -1   -1   -1   -1   -1    0    0    0   -1
   0    0    0    0    0    0    0    0    0    1    0    0    0    0    0    1    1    1    0   -1    1   -1   -1   -1    1    0
   1    0   -1    1    0    0    1    0    0   -1    0    0    0   -1    1    0    0    0    0    0   -1    0    0    0    0    0
   0    0    0    0    0    1    1    0    0    1    1    1    0    0   -1    0    0    0    0    0    0    0    0    0    0    0
)fmm";

} // namespace catalog_text

class UnknownAlgorithm : public std::runtime_error {
public:
  explicit UnknownAlgorithm(const std::string& name) : std::runtime_error("unknown algorithm '" + name + "'") {}
};

namespace detail {

inline BilinearAlgorithm from_text(const char* text) { return validated(parse_algorithm(text), "catalog entry"); }

inline Permutation perm(std::vector<std::vector<int>> m) { return Permutation::from_matrix(m); }

} // namespace detail

inline const BilinearAlgorithm& strassen() {
  static const BilinearAlgorithm a = detail::from_text(catalog_text::kStrassen);
  return a;
}

inline const BilinearAlgorithm& alg_323() {
  static const BilinearAlgorithm a = detail::from_text(catalog_text::k323);
  return a;
}

inline const BilinearAlgorithm& alg_442() {
  static const BilinearAlgorithm a = detail::from_text(catalog_text::k442);
  return a;
}

// Strassen with rows and columns of blocks swapped so that e is [4,12,12,4].
inline BilinearAlgorithm strassen_dalberto() {
  const auto sw = detail::perm({{0, 1}, {1, 0}});
  const auto i2 = Permutation::identity(2);
  return permute_rows(strassen(), Permutation::identity(4), kron(sw, i2), kron(i2, sw), "strassen-dalberto");
}

inline BilinearAlgorithm alg_323_v1() {
  const auto p = detail::perm({{1, 0, 0}, {0, 0, 1}, {0, 1, 0}});
  const auto i2 = Permutation::identity(2);
  return permute_rows(alg_323(), kron(i2, p), kron(p, i2), kron(p, p), "323-v1");
}

inline BilinearAlgorithm alg_323_v2() {
  const auto p = detail::perm({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  const auto i2 = Permutation::identity(2);
  return permute_rows(alg_323(), kron(i2, p), kron(p, i2), kron(p, p), "323-v2");
}

// Variant family of a <2,2,2> algorithm: each bit swaps one block index of A, B and C consistently.
inline BilinearAlgorithm castrapel_gustafson_variant(const BilinearAlgorithm& alg, bool x, bool y, bool z) {
  if (alg.m0() != 2 || alg.k0() != 2 || alg.n0() != 2)
    throw std::invalid_argument("castrapel_gustafson_variant needs a <2,2,2> algorithm");
  const auto sw = detail::perm({{0, 1}, {1, 0}});
  const auto i2 = Permutation::identity(2);
  auto pick = [&](bool b) { return b ? sw : i2; };
  return permute_rows(alg, kron(pick(x), pick(y)), kron(pick(z), pick(x)), kron(pick(y), pick(z)),
                      alg.name() + "-cg" + std::to_string(int(x)) + std::to_string(int(y)) + std::to_string(int(z)));
}

// Names understood by catalog_lookup, besides classical:MxKxN, the
// .rot / .rot2 / .T suffixes and -cgXYZ (X, Y, Z each 0 or 1) on <2,2,2> entries.
inline std::vector<std::string> catalog_names() {
  return {"strassen", "323", "332", "233", "442", "424", "244", "strassen-dalberto", "323-v1", "323-v2"};
}

inline AlgorithmPtr catalog_lookup(const std::string& name) {
  static std::recursive_mutex mu;
  static std::map<std::string, AlgorithmPtr> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;

  auto make = [&]() -> BilinearAlgorithm {
    if (name == "strassen") return strassen();
    if (name == "323") return alg_323();
    if (name == "442") return alg_442();
    if (name == "332") return cyclic_rotate(alg_323()).renamed(name);
    if (name == "233") return cyclic_rotate(cyclic_rotate(alg_323())).renamed(name);
    if (name == "424") return cyclic_rotate(cyclic_rotate(alg_442())).renamed(name);
    if (name == "244") return transpose_transform(alg_442()).renamed(name);
    if (name == "strassen-dalberto") return strassen_dalberto();
    if (name == "323-v1") return alg_323_v1();
    if (name == "323-v2") return alg_323_v2();
    if (name.rfind("classical:", 0) == 0) {
      std::size_t d[3];
      std::size_t pos = 10;
      for (int i = 0; i < 3; ++i) {
        std::size_t used = 0;
        try {
          d[i] = std::stoul(name.substr(pos), &used);
        } catch (const std::exception&) {
          throw UnknownAlgorithm(name);
        }
        pos += used;
        if (i < 2) {
          if (pos >= name.size() || name[pos] != 'x') throw UnknownAlgorithm(name);
          ++pos;
        }
      }
      if (pos != name.size() || !d[0] || !d[1] || !d[2]) throw UnknownAlgorithm(name);
      return classical(d[0], d[1], d[2]);
    }
    if (name.size() > 6 && name.compare(name.size() - 6, 3, "-cg") == 0) {
      const std::string bits = name.substr(name.size() - 3);
      if (bits.find_first_not_of("01") == std::string::npos) {
        const AlgorithmPtr b = catalog_lookup(name.substr(0, name.size() - 6));
        if (b->m0() != 2 || b->k0() != 2 || b->n0() != 2) throw UnknownAlgorithm(name);
        return castrapel_gustafson_variant(*b, bits[0] == '1', bits[1] == '1', bits[2] == '1');
      }
    }
    for (const char* suffix : {".rot2", ".rot", ".T"}) {
      const std::string s(suffix);
      if (name.size() > s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0) {
        const std::string base = name.substr(0, name.size() - s.size());
        const AlgorithmPtr b = catalog_lookup(base);
        if (s == ".rot") return cyclic_rotate(*b).renamed(name);
        if (s == ".rot2") return cyclic_rotate(cyclic_rotate(*b)).renamed(name);
        return transpose_transform(*b).renamed(name);
      }
    }
    throw UnknownAlgorithm(name);
  };
  auto ptr = std::make_shared<const BilinearAlgorithm>(make());
  cache.emplace(name, ptr);
  return ptr;
}

} // namespace fmm
