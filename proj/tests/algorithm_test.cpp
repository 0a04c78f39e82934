#include "fmm/fmm.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

using namespace fmm;

namespace {

std::string algo_file(const std::string& name) { return std::string(FMM_SOURCE_DIR) + "/data/algorithms/" + name; }

std::size_t nnz(const RationalMatrix& m) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) n += m(i, j) != 0;
  return n;
}

bool is_permutation_of(std::vector<Rational> a, std::vector<Rational> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

} // namespace

TEST(IndexConvention, MapsAreBijective) {
  for (std::size_t m0 = 1; m0 <= 4; ++m0)
    for (std::size_t k0 = 1; k0 <= 4; ++k0) {
      std::vector<int> hit(m0 * k0, 0);
      for (std::size_t r = 0; r < m0; ++r)
        for (std::size_t c = 0; c < k0; ++c) ++hit[a_index(r, c, m0)];
      EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
      std::fill(hit.begin(), hit.end(), 0);
      for (std::size_t r = 0; r < m0; ++r)
        for (std::size_t c = 0; c < k0; ++c) ++hit[c_index(r, c, k0)];
      EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
    }
  EXPECT_EQ(a_index(1, 0, 2), 1u);
  EXPECT_EQ(b_index(0, 1, 2), 2u);
  EXPECT_EQ(c_index(0, 1, 2), 1u);
}

TEST(Validate, ShippedFilesAreExactlyCorrect) {
  for (const char* f : {"strassen.fmm", "323.fmm", "442.fmm"}) {
    const auto res = validate(load_algorithm_file(algo_file(f)));
    EXPECT_TRUE(res.ok()) << f;
    EXPECT_TRUE(res.violations.empty()) << f;
  }
}

TEST(Validate, ClassicalGeneratorForAllSmallDims) {
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t k = 1; k <= 4; ++k)
      for (std::size_t n = 1; n <= 4; ++n) {
        const auto c = classical(m, k, n);
        EXPECT_EQ(c.rank(), m * k * n);
        EXPECT_TRUE(validate(c.triple()).ok());
      }
}

TEST(Validate, ZeroOutputMapViolatesEveryClassicalTriple) {
  AlgorithmTriple t = strassen().triple();
  t.w = RationalMatrix(t.w.rows(), t.w.cols());
  const auto res = validate(t);
  ASSERT_FALSE(res.ok());
  EXPECT_EQ(res.violations.size(), 8u);
  for (const auto& v : res.violations) {
    EXPECT_EQ(v.expected, 1);
    EXPECT_EQ(v.sum, 0);
  }
}

TEST(Validate, ZeroOutputMapOnLargerBaseCase) {
  AlgorithmTriple t = alg_323().triple();
  t.w = RationalMatrix(t.w.rows(), t.w.cols());
  EXPECT_EQ(validate(t).violations.size(), 3u * 2u * 3u);
}

TEST(Validate, SignFlipInUIsDetected) {
  const AlgorithmTriple base = strassen().triple();
  std::size_t flips = 0;
  for (std::size_t i = 0; i < base.u.rows(); ++i)
    for (std::size_t r = 0; r < base.u.cols(); ++r) {
      if (base.u(i, r) == 0) continue;
      AlgorithmTriple t = base;
      t.u(i, r) = -t.u(i, r);
      const auto res = validate(t);
      EXPECT_FALSE(res.ok());
      EXPECT_FALSE(res.violations.empty());
      ++flips;
    }
  EXPECT_EQ(flips, nnz(base.u));
}

TEST(Validate, ShapeMismatchIsStructural) {
  AlgorithmTriple t = strassen().triple();
  t.v = RationalMatrix(3, 7);
  EXPECT_THROW(validate(t), StructuralError);
  t = strassen().triple();
  t.rank = 6;
  EXPECT_THROW(validate(t), StructuralError);
}

TEST(Validate, ValidatedThrowsWithViolations) {
  AlgorithmTriple t = strassen().triple();
  t.w(0, 0) = 2;
  try {
    validated(t);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_FALSE(e.violations().empty());
  }
}

TEST(Parse, StrassenFileMatchesCatalog) {
  const AlgorithmTriple t = load_algorithm_file(algo_file("strassen.fmm"));
  EXPECT_EQ(t.name, "strassen");
  EXPECT_EQ(t.rank, 7u);
  EXPECT_EQ(t.u, strassen().u());
  EXPECT_EQ(t.v, strassen().v());
  EXPECT_EQ(t.w, strassen().w());
}

TEST(Parse, HalvesAreExactRationals) {
  const AlgorithmTriple t = load_algorithm_file(algo_file("442.fmm"));
  std::size_t halves = 0;
  for (const RationalMatrix* m : {&t.u, &t.v, &t.w})
    for (std::size_t i = 0; i < m->rows(); ++i)
      for (std::size_t r = 0; r < m->cols(); ++r)
        if (denominator((*m)(i, r)) == 2) ++halves;
  EXPECT_GT(halves, 0u);
}

TEST(Parse, FractionAndDecimalAgree) {
  EXPECT_EQ(*parse_rational("1/2"), *parse_rational("0.5"));
  EXPECT_EQ(*parse_rational("-3/4"), *parse_rational("-0.75"));
  EXPECT_EQ(*parse_rational("+7"), Rational(7));
  EXPECT_EQ(*parse_rational("2/4"), Rational(BigInt(1), BigInt(2)));
  EXPECT_FALSE(parse_rational("1/0"));
  EXPECT_FALSE(parse_rational("abc"));
  EXPECT_FALSE(parse_rational("."));
  EXPECT_FALSE(parse_rational("1e3"));
}

TEST(Parse, CommentsAndBlankLinesAreIgnored) {
  const std::string text = "# header comment\nname tiny\n\ndims 1 1 1  # trailing\nrank 1\nU\n1\nV\n  1 \nW\n1\n";
  const auto t = parse_algorithm(text);
  EXPECT_EQ(t.name, "tiny");
  EXPECT_TRUE(validate(t).ok());
}

TEST(Parse, RankZeroIsAnError) {
  EXPECT_THROW(parse_algorithm("name x\ndims 1 1 1\nrank 0\nU\nV\nW\n"), ParseError);
}

TEST(Parse, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_algorithm(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("name x\ndims 1 1\nrank 1\n"), 2u);
  EXPECT_EQ(line_of("name x\ndims 1 1 1\nrank 1\nU\n1 2\nV\n1\nW\n1\n"), 5u);
  EXPECT_EQ(line_of("name x\ndims 1 1 1\nrank 1\nU\nfoo\nV\n1\nW\n1\n"), 5u);
  EXPECT_EQ(line_of("name x\ndims 1 1 1\nrank 1\nU\n1\n1\nV\n1\nW\n1\n"), 6u);
  EXPECT_EQ(line_of("name x\ndims 1 1 1\nrank 1\nU\n1\nV\n1\n"), 8u);
  EXPECT_EQ(line_of("U\n1\n"), 1u);
}

TEST(Parse, SerializeRoundTripIsIdentity) {
  for (const auto& name : catalog_names()) {
    const auto alg = catalog_lookup(name);
    const AlgorithmTriple t = parse_algorithm(serialize(*alg));
    EXPECT_EQ(t.name, alg->name());
    EXPECT_EQ(t.u, alg->u()) << name;
    EXPECT_EQ(t.v, alg->v()) << name;
    EXPECT_EQ(t.w, alg->w()) << name;
    EXPECT_EQ(serialize(t), serialize(*alg));
  }
}

TEST(Catalog, EverythingValidates) {
  for (const auto& name : catalog_names()) EXPECT_NO_THROW(catalog_lookup(name)) << name;
  for (const char* name : {"strassen.rot", "323.rot2", "442.T", "classical:3x1x2"})
    EXPECT_NO_THROW(catalog_lookup(name)) << name;
  EXPECT_THROW(catalog_lookup("nope"), UnknownAlgorithm);
  EXPECT_THROW(catalog_lookup("classical:2x2"), UnknownAlgorithm);
  EXPECT_THROW(catalog_lookup("classical:0x2x2"), UnknownAlgorithm);
}

TEST(Catalog, LookupIsCached) { EXPECT_EQ(catalog_lookup("442").get(), catalog_lookup("442").get()); }

TEST(Catalog, StructuralCounts) {
  EXPECT_EQ(nnz(strassen().u()) + nnz(strassen().v()) + nnz(strassen().w()), 36u);
  EXPECT_EQ(nnz(alg_323().u()) + nnz(alg_323().v()) + nnz(alg_323().w()), 94u);
  EXPECT_EQ(nnz(alg_442().u()) + nnz(alg_442().v()) + nnz(alg_442().w()), 257u);
}

TEST(CyclicRotate, StrassenKeepsQAndE) {
  const auto r1 = cyclic_rotate(strassen());
  const auto r2 = cyclic_rotate(r1);
  for (const auto* a : {&r1, &r2}) {
    EXPECT_TRUE(validate(a->triple()).ok());
    const auto rep = analyze(*a);
    EXPECT_EQ(rep.bigQ, 8);
    EXPECT_EQ(rep.bigE, 12);
  }
}

TEST(CyclicRotate, DimensionsCycle) {
  const auto r = cyclic_rotate(alg_323());
  EXPECT_EQ(r.m0(), 3u);
  EXPECT_EQ(r.k0(), 3u);
  EXPECT_EQ(r.n0(), 2u);
  const auto r2 = cyclic_rotate(r);
  EXPECT_EQ(r2.m0(), 2u);
  EXPECT_EQ(r2.k0(), 3u);
  EXPECT_EQ(r2.n0(), 3u);
}

TEST(CyclicRotate, ThreeRotationsReturnTheInput) {
  for (const BilinearAlgorithm* a : {&strassen(), &alg_323(), &alg_442()}) {
    const auto r3 = cyclic_rotate(cyclic_rotate(cyclic_rotate(*a)));
    EXPECT_TRUE(equivalent_up_to_column_order(r3, *a)) << a->name();
  }
}

TEST(CyclicRotate, ClassicalIsInvariantUpToColumnOrder) {
  EXPECT_TRUE(equivalent_up_to_column_order(cyclic_rotate(classical(2, 2, 2)), classical(2, 2, 2)));
}

TEST(Transpose, Of442KeepsE) {
  const auto t = transpose_transform(alg_442());
  EXPECT_EQ(t.m0(), 2u);
  EXPECT_EQ(t.k0(), 4u);
  EXPECT_EQ(t.n0(), 4u);
  EXPECT_EQ(analyze(t).bigE, 89);
}

TEST(Transpose, RotationsOf442) {
  const auto once = cyclic_rotate(alg_442());
  EXPECT_EQ(once.m0(), 2u);
  EXPECT_EQ(analyze(once).bigE, 102);
  const auto twice = cyclic_rotate(once);
  EXPECT_EQ(twice.m0(), 4u);
  EXPECT_EQ(twice.k0(), 2u);
  EXPECT_EQ(analyze(twice).bigE, 92);
}

TEST(Transpose, ClassicalOneByOneByNUnchanged) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto c = classical(1, 1, n);
    const auto t = transpose_transform(c);
    EXPECT_EQ(t.m0(), n);
    EXPECT_EQ(t.n0(), 1u);
    EXPECT_EQ(t.v(), c.u());
    EXPECT_EQ(t.u(), c.v());
  }
}

TEST(Transpose, InvolutionUpToColumnOrder) {
  for (const BilinearAlgorithm* a : {&strassen(), &alg_323(), &alg_442()})
    EXPECT_TRUE(equivalent_up_to_column_order(transpose_transform(transpose_transform(*a)), *a));
}

TEST(VecPermutation, Definition) {
  EXPECT_EQ(vec_permutation(1, 5), Permutation::identity(5));
  const auto p = vec_permutation(2, 2);
  EXPECT_EQ(p.map, (std::vector<std::size_t>{0, 2, 1, 3}));
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t n = 1; n <= 4; ++n) {
      EXPECT_EQ(vec_permutation(m, n) * vec_permutation(n, m), Permutation::identity(m * n));
      // (P x)[i] = x[map[i]] with x column-major gives the row-major vec.
      const auto q = vec_permutation(m, n);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(q.map[i * n + j], i + j * m);
    }
}

TEST(Permutation, FromMatrixAndKron) {
  const auto sw = Permutation::from_matrix({{0, 1}, {1, 0}});
  EXPECT_EQ(sw.map, (std::vector<std::size_t>{1, 0}));
  const auto k = kron(sw, Permutation::identity(2));
  EXPECT_EQ(k.map, (std::vector<std::size_t>{2, 3, 0, 1}));
  EXPECT_THROW(Permutation::from_matrix({{1, 1}, {0, 0}}), std::invalid_argument);
  EXPECT_THROW(Permutation::from_matrix({{1, 0}}), std::invalid_argument);
}

TEST(PermuteRows, IdentitiesLeaveInputUnchanged) {
  const auto p = permute_rows(strassen(), Permutation::identity(4), Permutation::identity(4),
                              Permutation::identity(4));
  EXPECT_EQ(p.u(), strassen().u());
  EXPECT_EQ(p.v(), strassen().v());
  EXPECT_EQ(p.w(), strassen().w());
}

TEST(PermuteRows, DAlbertoVariant) {
  const auto d = strassen_dalberto();
  EXPECT_TRUE(validate(d.triple()).ok());
  const auto e = analyze(d).e;
  EXPECT_TRUE(is_permutation_of(e, {12, 4, 4, 12}));
  EXPECT_EQ(e, (std::vector<Rational>{4, 12, 12, 4}));
}

TEST(PermuteRows, ThreeByTwoByThreeVariants) {
  for (const auto& v : {alg_323_v1(), alg_323_v2()}) {
    EXPECT_TRUE(validate(v.triple()).ok()) << v.name();
    EXPECT_TRUE(is_permutation_of(analyze(v).e, analyze(alg_323()).e)) << v.name();
  }
}

TEST(PermuteRows, BrokenTransformIsRejected) {
  const auto sw = Permutation::from_matrix({{0, 1}, {1, 0}});
  const auto i2 = Permutation::identity(2);
  try {
    permute_rows(strassen(), kron(sw, i2), Permutation::identity(4), Permutation::identity(4));
    FAIL() << "expected rejection";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("not a matmul-preserving transform"), std::string::npos);
  }
}

TEST(PermuteRows, CastrapelGustafsonFamilyIsValid) {
  for (int bits = 0; bits < 8; ++bits) {
    const auto v = castrapel_gustafson_variant(strassen(), bits & 1, bits & 2, bits & 4);
    EXPECT_TRUE(validate(v.triple()).ok());
    EXPECT_TRUE(is_permutation_of(analyze(v).e, {12, 4, 4, 12}));
  }
  EXPECT_THROW(castrapel_gustafson_variant(alg_323(), true, false, false), std::invalid_argument);
}

TEST(Catalog, CastrapelGustafsonNames) {
  const auto v = catalog_lookup("strassen-cg101");
  EXPECT_EQ(v->name(), "strassen-cg101");
  EXPECT_TRUE(v->u() == castrapel_gustafson_variant(strassen(), true, false, true).u());
  EXPECT_TRUE(v->w() == castrapel_gustafson_variant(strassen(), true, false, true).w());
  EXPECT_EQ(analyze(*catalog_lookup("strassen-dalberto-cg011")).bigE, 12);
  EXPECT_THROW(catalog_lookup("323-cg100"), UnknownAlgorithm);
  EXPECT_THROW(catalog_lookup("strassen-cg2"), UnknownAlgorithm);
  EXPECT_THROW(catalog_lookup("strassen-cg102"), UnknownAlgorithm);
}

TEST(Transforms, PreserveValidityOnRandomVariants) {
  std::mt19937 gen(3);
  for (int trial = 0; trial < 8; ++trial) {
    const auto v = castrapel_gustafson_variant(strassen(), gen() & 1, gen() & 1, gen() & 1);
    EXPECT_TRUE(validate(cyclic_rotate(v).triple()).ok());
    EXPECT_TRUE(validate(transpose_transform(v).triple()).ok());
  }
  for (const auto& name : catalog_names()) {
    const auto a = catalog_lookup(name);
    EXPECT_NO_THROW(cyclic_rotate(*a)) << name;
    EXPECT_NO_THROW(transpose_transform(*a)) << name;
  }
}
