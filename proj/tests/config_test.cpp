// Copyright 2026 The gfu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gfu/config.hpp"
#include "gfu/harness.hpp"
#include "test_util.hpp"

namespace gfu {
namespace {

using testing_util::ExpectErrorCode;

TEST(ConfigParse, SectionsCommentsAndValues) {
  const auto c = Config::parse_string(
      "# leading comment\n"
      "schema_version = 1\n"
      "\n"
      "[rule]\n"
      "kind = rpw   # trailing comment\n"
      "  p1 =0.7\n"
      "[experiment]\n"
      "horizons = 100, 1000 ,10000\n"
      "deterministic = yes\n");
  EXPECT_EQ(c.get_string("rule.kind"), "rpw");
  EXPECT_DOUBLE_EQ(c.get_double("rule.p1"), 0.7);
  EXPECT_EQ(c.get_list("experiment.horizons"), (std::vector<double>{100, 1000, 10000}));
  EXPECT_TRUE(c.get_bool("experiment.deterministic", false));
  EXPECT_EQ(c.get_long("experiment.seed", 42), 42);
  EXPECT_FALSE(c.has("rule.p2"));
  ExpectErrorCode([&] { c.get_string("rule.p2"); }, "MissingKey");
}

TEST(ConfigParse, Errors) {
  ExpectErrorCode([] { Config::parse_string("[rule\nkind = rpw\n"); }, "BadConfig");
  ExpectErrorCode([] { Config::parse_string("kind rpw\n"); }, "BadConfig");
  ExpectErrorCode([] { Config::parse_string(" = 3\n"); }, "BadConfig");
  ExpectErrorCode([] { Config::parse_string("schema_version = 2\n"); }, "UnsupportedSchema");
  ExpectErrorCode([] { Config::load("/nonexistent/gfu.cfg"); }, "MissingFile");
  const auto c = Config::parse_string("a = x\nb = maybe\nc = 1.5\n");
  ExpectErrorCode([&] { c.get_double("a"); }, "BadValue");
  ExpectErrorCode([&] { c.get_bool("b", false); }, "BadValue");
  ExpectErrorCode([&] { c.get_long("c"); }, "BadValue");
}

TEST(ConfigParse, MatricesAndSupports) {
  const auto c = Config::parse_string(
      "h = 1, 0; 0.5, 0.5\n"
      "bad = 1, 0; 1\n"
      "s = (1, 0):0.3, (0.5, 0.5):0.7\n"
      "empty = none\n");
  Mat h(2, 2);
  h << 1, 0, 0.5, 0.5;
  EXPECT_EQ(c.get_matrix("h"), h);
  ExpectErrorCode([&] { c.get_matrix("bad"); }, "BadValue");
  const RowSampler s = c.get_support("s");
  ASSERT_EQ(s.support.size(), 2u);
  EXPECT_EQ(s.support[1](0), 0.5);
  EXPECT_EQ(s.weights, (std::vector<double>{0.3, 0.7}));
  ExpectErrorCode([&] { c.get_support("empty"); }, "EmptySupport");
}

TEST(MatrixCsv, ParseAndLoad) {
  std::istringstream is("# generating matrix\n0.7, 0.3\n\n0.3, 0.7\n");
  Mat expected(2, 2);
  expected << 0.7, 0.3, 0.3, 0.7;
  EXPECT_EQ(parse_matrix_csv(is), expected);
  std::istringstream ragged("1, 0\n1\n");
  ExpectErrorCode([&] { parse_matrix_csv(ragged); }, "BadValue");
  std::istringstream empty("# nothing\n");
  ExpectErrorCode([&] { parse_matrix_csv(empty); }, "BadValue");
  ExpectErrorCode([] { load_matrix_csv("/nonexistent/h.csv"); }, "MissingFile");

  const auto path = std::filesystem::temp_directory_path() / "gfu_config_test_h.csv";
  std::ofstream(path) << "1,0\n0,1\n";
  EXPECT_EQ(load_matrix_csv(path.string()), Mat::Identity(2, 2));
  std::filesystem::remove(path);
}

Mat LimitMean(const std::string& text) { return build_rule(Config::parse_string(text))->limit_mean(); }

TEST(BuildRule, EveryKind) {
  Mat rpw(2, 2);
  rpw << 0.7, 0.3, 0.2, 0.8;
  EXPECT_LT((LimitMean("[rule]\nkind = rpw\np1 = 0.7\np2 = 0.8\n") - rpw).norm(), 1e-15);

  // General responses: mean response 0.5 for colour 1 and 0.25 for colour 2.
  Mat general(2, 2);
  general << 0.5, 0.5, 0.75, 0.25;
  EXPECT_LT((LimitMean("[rule]\nkind = rpw\nd1.support = 0, 1\nd1.weights = 0.5, 0.5\n"
                       "d2.support = 0, 0.5\nd2.weights = 0.5, 0.5\n") -
             general)
                .norm(),
            1e-15);

  Mat multi(2, 2);
  multi << 0.3, 0.7, 0.3, 0.7;
  EXPECT_LT((LimitMean("[rule]\nkind = multinomial\nv = 0.3, 0.7\n") - multi).norm(), 1e-15);

  Mat homog(2, 2);
  homog << 0.3, 0.7, 0.5, 0.5;
  EXPECT_LT((LimitMean("[rule]\nkind = homogeneous\nrow1 = (1, 0):0.3, (0, 1):0.7\n"
                       "row2 = (0.5, 0.5):1\n") -
             homog)
                .norm(),
            1e-15);

  Mat det(3, 3);
  det << 1, 0, 0, 0, 0.5, 0.5, 0.2, 0.3, 0.5;
  EXPECT_EQ(LimitMean("[rule]\nkind = deterministic\nh = 1, 0, 0; 0, 0.5, 0.5; 0.2, 0.3, 0.5\n"), det);

  const auto nh = build_rule(Config::parse_string(
      "[rule]\nkind = nonhomogeneous\nbase.kind = rpw\nbase.p1 = 0.6\nbase.p2 = 0.6\n"
      "perturbation = 0.1, -0.1; -0.1, 0.1\nexponent = 0.7\n"));
  EXPECT_FALSE(nh->homogeneous());
  Mat base(2, 2);
  base << 0.6, 0.4, 0.4, 0.6;
  EXPECT_LT((nh->limit_mean() - base).norm(), 1e-15);
}

TEST(BuildRule, Errors) {
  ExpectErrorCode([] { build_rule(Config::parse_string("[rule]\nkind = polya\n")); }, "UnknownRule");
  ExpectErrorCode([] { build_rule(Config::parse_string("[rule]\nkind = rpw\np1 = 0.5\n")); }, "MissingKey");
  ExpectErrorCode([] { build_rule(Config::parse_string("[rule]\nkind = rpw\np1 = 1.5\np2 = 0.5\n")); },
                  "InvalidProbability");
  ExpectErrorCode(
      [] {
        build_rule(Config::parse_string("[rule]\nkind = rpw\nd1.support = 0, 1\nd1.weights = 1\np2 = 0.5\n"));
      },
      "InvalidProbability");
  ExpectErrorCode([] { build_rule(Config::parse_string("[rule]\nkind = homogeneous\n")); }, "EmptySupport");
  // Unequal row sums are caught when the mean matrix is validated.
  const auto uneven = build_rule(Config::parse_string("[rule]\nkind = deterministic\nh = 1, 0; 0.5, 0.6\n"));
  ExpectErrorCode([&] { validate_generating_matrix(uneven->limit_mean()); }, "NonConstantRowSums");
  ExpectErrorCode(
      [] {
        build_rule(Config::parse_string("[rule]\nkind = nonhomogeneous\nbase.kind = rpw\nbase.p1 = 0.6\n"
                                        "base.p2 = 0.6\nperturbation = 0.1, 0; 0, 0\nexponent = 0.7\n"));
      },
      "RowSumViolation");
  ExpectErrorCode(
      [] {
        build_rule(Config::parse_string("[rule]\nkind = nonhomogeneous\nbase.kind = rpw\nbase.p1 = 0.6\n"
                                        "base.p2 = 0.6\nperturbation = 0, 0, 0\nexponent = 0.7\n"));
      },
      "DimensionMismatch");
}

TEST(ShippedConfigs, AllParse) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(GFU_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    ++count;
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(experiment_from_config(Config::load(entry.path().string())));
  }
  EXPECT_GE(count, 4);
}

}  // namespace
}  // namespace gfu
