#include "fmm/fmm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fmm;

namespace {

Matrix random_integers(std::size_t r, std::size_t c, int lo, int hi, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> d(lo, hi);
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = d(gen);
  return m;
}

std::size_t pow_size(std::size_t b, std::size_t e) {
  std::size_t p = 1;
  while (e--) p *= b;
  return p;
}

} // namespace

TEST(Engine, IdentityTimesIdentity) {
  const auto i64 = Matrix::identity(64);
  EXPECT_TRUE(multiply(i64, i64, parse_plan("strassen:L=2")).bitwise_equal(i64));
}

TEST(Engine, IntegerInputsAreExactUnderStrassen) {
  const auto a = random_integers(64, 64, -8, 8, 1), b = random_integers(64, 64, -8, 8, 2);
  const auto c = multiply(a, b, parse_plan("strassen:L=3"));
  EXPECT_TRUE(c.bitwise_equal(multiply_classical(a, b)));
  EXPECT_TRUE(c.bitwise_equal(multiply_reference(a, b).to_double()));
}

TEST(Engine, IntegerInputsAreExactForEveryCatalogAlgorithm) {
  for (const auto& name : catalog_names()) {
    const auto alg = catalog_lookup(name);
    for (std::size_t L = 1; L <= 3; ++L) {
      const std::size_t m = pow_size(alg->m0(), L) * 2, k = pow_size(alg->k0(), L), n = pow_size(alg->n0(), L) + 1;
      if (std::max({m, k, n}) > 96) continue;
      const auto a = random_integers(m, k, -8, 8, unsigned(L * 7 + name.size()));
      const auto b = random_integers(k, n, -8, 8, unsigned(L * 11 + name.size()));
      const auto c = multiply(a, b, Stationary{alg, L});
      EXPECT_TRUE(c.bitwise_equal(multiply_classical(a, b))) << name << " L=" << L;
    }
  }
}

TEST(Engine, LevelZeroIsClassicalBitwise) {
  const auto [a, b] = generate_pair(Distribution::u11, 37, 45, 29, 5);
  EXPECT_TRUE(multiply(a, b, parse_plan("strassen:L=0")).bitwise_equal(multiply_classical(a, b)));
  EXPECT_TRUE(multiply(a, b, parse_plan("classical")).bitwise_equal(multiply_classical(a, b)));
}

TEST(Engine, OneByOne) {
  const Matrix a{{3.0}}, b{{-2.5}};
  EXPECT_EQ(multiply(a, b, parse_plan("strassen:L=1"))(0, 0), -7.5);
  EXPECT_EQ(multiply(a, b, parse_plan("323:L=2"))(0, 0), -7.5);
}

TEST(Engine, SmallExamplesWithinBound) {
  const double z = 0x1p-40 * 1.2345678;
  for (const auto& [a, b] : {std::pair{Matrix{{1, 1}, {1, 1}}, Matrix{{z, 1}, {z, 1}}},
                             std::pair{Matrix{{1, z}, {1, z}}, Matrix{{z, z}, {1, 1}}}}) {
    const auto plan = parse_plan("strassen:L=1");
    const auto rep = compare(multiply(a, b, plan), multiply_reference(a, b),
                             plan_bound(plan, 2, max_norm(a), max_norm(b)));
    EXPECT_LE(rep.max_abs_err, *rep.bound);
  }
}

TEST(Padding, Dimensions) {
  const auto s = parse_plan("strassen:L=3");
  EXPECT_EQ(pad_dims(5, 5, 5, s), (std::array<std::size_t, 3>{8, 8, 8}));
  EXPECT_EQ(pad_dims(16, 24, 8, s), (std::array<std::size_t, 3>{16, 24, 8}));
  EXPECT_EQ(pad_dims(1, 9, 17, s), (std::array<std::size_t, 3>{8, 16, 24}));
  const auto p = parse_plan("classical:4x2x3:L=6");
  EXPECT_EQ(pad_dims(4096, 2048, 3645, p)[0], 4096u);
  EXPECT_EQ(pad_dims(4096, 2048, 3645, p)[1], 2048u);
  EXPECT_EQ(pad_dims(4096, 2048, 3645, p)[2], 3645u);
  EXPECT_EQ(pad_dims(4095, 2047, 3644, p), (std::array<std::size_t, 3>{4096, 2048, 3645}));
}

TEST(Padding, IsNeutral) {
  const auto a = random_integers(13, 11, -5, 5, 3), b = random_integers(11, 7, -5, 5, 4);
  for (const char* plan : {"strassen:L=2", "323:L=1", "442:L=1", "seq(strassen,323)"}) {
    const auto c = multiply(a, b, parse_plan(plan));
    ASSERT_EQ(c.rows(), 13u);
    ASSERT_EQ(c.cols(), 7u);
    EXPECT_TRUE(c.bitwise_equal(multiply_classical(a, b))) << plan;
  }
}

TEST(Engine, Deterministic) {
  const auto [a, b] = generate_pair(Distribution::u11, 96, 96, 96, 9);
  const auto plan = parse_plan("323:L=2");
  EXPECT_TRUE(multiply(a, b, plan).bitwise_equal(multiply(a, b, plan)));
}

TEST(Engine, ExplicitTreeMatchesStationaryBitwise) {
  const auto [a, b] = generate_pair(Distribution::u01, 64, 64, 64, 11);
  const auto tree = parse_plan("tree(strassen,strassen,strassen,strassen,strassen,strassen,strassen,strassen)");
  EXPECT_TRUE(multiply(a, b, tree).bitwise_equal(multiply(a, b, parse_plan("strassen:L=2"))));
}

TEST(Engine, MixedTreeIsCorrect) {
  const auto a = random_integers(32, 32, -6, 6, 21), b = random_integers(32, 32, -6, 6, 22);
  const auto tree = parse_plan(
      "tree(strassen,strassen-dalberto,classical:2x2x2,tree(strassen,strassen,classical,classical,classical,classical,"
      "classical,strassen-dalberto),strassen,strassen,strassen,strassen)");
  EXPECT_TRUE(multiply(a, b, tree).bitwise_equal(multiply_classical(a, b)));
}

TEST(Engine, FastModeIsClose) {
  const auto [a, b] = generate_pair(Distribution::u01, 300, 700, 200, 13);
  const auto ref = multiply_reference(a, b);
  const auto plan = parse_plan("strassen:L=1");
  EngineOptions fast;
  fast.mode = SummationMode::fast;
  const double bound = plan_bound(plan, 700, max_norm(a), max_norm(b));
  EXPECT_LE(compare(multiply(a, b, plan, fast), ref).max_abs_err, bound);
  EXPECT_LE(compare(multiply_classical(a, b, SummationMode::fast), ref).max_abs_err,
            plan_bound(parse_plan("classical"), 700, max_norm(a), max_norm(b)));
}

TEST(Engine, CheckFinite) {
  Matrix a = Matrix::identity(4), b = Matrix::identity(4);
  a(1, 2) = std::nan("");
  EngineOptions opt;
  opt.check_finite = true;
  EXPECT_THROW(multiply(a, b, parse_plan("strassen:L=1"), opt), std::invalid_argument);
  EXPECT_NO_THROW(multiply(a, b, parse_plan("strassen:L=1")));
}

TEST(Engine, InnerDimensionMismatch) {
  EXPECT_THROW(multiply(Matrix(2, 3), Matrix(4, 2), parse_plan("strassen:L=1")), std::invalid_argument);
}

TEST(Engine, ErrorWithinBoundAcrossPlans) {
  const auto [a, b] = generate_pair(Distribution::u11, 128, 128, 128, 17);
  const auto ref = multiply_reference(a, b);
  for (const char* p : {"strassen:L=1", "strassen:L=4", "strassen-dalberto:L=3", "seq(strassen,classical:2x2x2)"}) {
    const auto plan = parse_plan(p);
    const auto rep = compare(multiply(a, b, plan), ref, plan_bound(plan, 128, max_norm(a), max_norm(b)));
    EXPECT_LE(rep.max_abs_err, *rep.bound) << p;
  }
}
