#include "fmm/fmm.hpp"

#include <gtest/gtest.h>

using namespace fmm;

namespace {

const std::string kData = std::string(FMM_SOURCE_DIR) + "/data/algorithms/";

} // namespace

TEST(PlanGrammar, Stationary) {
  const auto p = parse_plan("strassen:L=3");
  ASSERT_TRUE(std::holds_alternative<Stationary>(p));
  EXPECT_EQ(std::get<Stationary>(p).levels, 3u);
  EXPECT_EQ(std::get<Stationary>(p).alg->name(), "strassen");
  EXPECT_EQ(std::get<Stationary>(parse_plan("323")).levels, 1u);
  EXPECT_EQ(plan_depth(parse_plan("323:L=0")), 0u);
}

TEST(PlanGrammar, UniformAndTree) {
  const auto u = parse_plan("seq( strassen , classical:2x2x2,strassen-dalberto )");
  ASSERT_TRUE(std::holds_alternative<UniformNonStationary>(u));
  EXPECT_EQ(std::get<UniformNonStationary>(u).algs.size(), 3u);
  EXPECT_EQ(plan_depth(u), 3u);

  const auto t = parse_plan("tree(strassen, classical, strassen, tree(strassen-dalberto), classical, classical, "
                            "classical, classical)");
  ASSERT_TRUE(std::holds_alternative<TreePlan>(t));
  const auto& root = std::get<TreePlan>(t).root;
  EXPECT_EQ(root->children.size(), 7u);
  EXPECT_EQ(root->children[0], nullptr);
  EXPECT_EQ(root->children[1]->alg->name(), "strassen");
  EXPECT_EQ(root->children[2]->alg->name(), "strassen-dalberto");
  EXPECT_EQ(plan_depth(t), 2u);

  const auto c = parse_plan("classical");
  EXPECT_EQ(std::get<TreePlan>(c).root, nullptr);
  EXPECT_EQ(plan_depth(c), 0u);
}

TEST(PlanGrammar, RoundTrip) {
  for (const char* text :
       {"strassen:L=2", "323:L=0", "seq(strassen,323)", "seq()", "classical",
        "tree(strassen,classical,strassen,tree(strassen-dalberto,strassen,classical,classical,classical,classical,"
        "classical,classical),classical,classical,classical,classical)",
        "tree(442.rot)", "strassen.T:L=4"}) {
    const auto p = parse_plan(text);
    const auto printed = print_plan(p);
    EXPECT_TRUE(same_plan(parse_plan(printed), p)) << printed;
    EXPECT_EQ(print_plan(parse_plan(printed)), printed);
  }
}

TEST(PlanGrammar, Errors) {
  for (const char* bad : {"", "strassen:L=", "strassen:L=x", "nosuch:L=1", "seq(strassen", "tree(strassen,strassen)",
                          "tree()", "strassen:L=1 junk", "seq(strassen,,323)"})
    EXPECT_THROW(parse_plan(bad), PlanError) << bad;
}

TEST(PlanGrammar, ErrorsCarryColumns) {
  try {
    parse_plan("seq(strassen, nosuch)");
    FAIL();
  } catch (const PlanError& e) {
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("nosuch"), std::string::npos);
  }
}

TEST(PlanStructure, MismatchedLevelsAreRejected) {
  std::string t = "tree(strassen,323";
  for (int i = 0; i < 5; ++i) t += ",classical";
  t += ",strassen)";
  EXPECT_THROW(parse_plan(t), PlanError);
  EXPECT_THROW(level_dims(RecursionPlan{TreePlan{make_node(catalog_lookup("strassen"),
                                                           {make_node(catalog_lookup("323")), nullptr, nullptr,
                                                            nullptr, nullptr, nullptr,
                                                            make_node(catalog_lookup("strassen"))})}}),
               PlanError);
  EXPECT_THROW(make_node(catalog_lookup("strassen"), {nullptr, nullptr}), PlanError);
  EXPECT_THROW(make_node(nullptr), PlanError);
}

TEST(PlanStructure, LevelDimsAndTrees) {
  const auto p = parse_plan("seq(323,strassen,442)");
  const auto d = level_dims(p);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0], (LevelDims{3, 2, 3}));
  EXPECT_EQ(d[1], (LevelDims{2, 2, 2}));
  EXPECT_EQ(d[2], (LevelDims{4, 4, 2}));
  const auto tree = to_tree(p);
  EXPECT_EQ(tree->children.size(), 15u);
  EXPECT_EQ(tree->children[0]->children.size(), 7u);
  EXPECT_FALSE(same_plan(RecursionPlan{TreePlan{tree}}, p));
  EXPECT_FALSE(same_plan(parse_plan("strassen:L=2"), parse_plan("strassen:L=3")));
  EXPECT_FALSE(same_plan(parse_plan("strassen:L=2"), parse_plan("seq(strassen,strassen)")));
  EXPECT_TRUE(same_tree(to_tree(parse_plan("strassen:L=2")), to_tree(parse_plan("seq(strassen,strassen)"))));
}

TEST(PlanRegistry, AlgorithmFiles) {
  AlgorithmRegistry reg;
  const auto p = parse_plan("seq(" + kData + "strassen.fmm," + kData + "323.fmm)",
                            [&](const std::string& t) { return reg(t); });
  const auto d = level_dims(p);
  EXPECT_EQ(d[1], (LevelDims{3, 2, 3}));
  EXPECT_EQ(reg("strassen")->name(), "strassen");
  EXPECT_EQ(reg(kData + "442.fmm")->rank(), 26u);
  EXPECT_THROW(reg(kData + "missing.fmm"), std::exception);
}

TEST(PlanHelpers, StationaryFromThreshold) {
  const auto s = catalog_lookup("strassen");
  EXPECT_EQ(stationary_from_threshold(s, 1024, 1024, 1024, 64).levels, 4u);
  EXPECT_EQ(stationary_from_threshold(s, 1024, 1024, 1024, 65).levels, 3u);
  EXPECT_EQ(stationary_from_threshold(s, 1024, 100, 1024, 64).levels, 0u);
  EXPECT_EQ(stationary_from_threshold(catalog_lookup("323"), 729, 64, 729, 8).levels, 3u);
}
