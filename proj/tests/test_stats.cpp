//
// Copyright 2026 The DPSU Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpsu/stats.hpp"

#include <gtest/gtest.h>

namespace dpsu {
namespace {

TEST(IncompleteBeta, MatchesReferenceValues) {
  EXPECT_NEAR(regularized_incomplete_beta(0.5, 0.5, 0.5), 0.5, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(2.5, 1.5, 0.3), 0.08894372317066562, 1e-12);
  EXPECT_DOUBLE_EQ(regularized_incomplete_beta(1.0, 1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(regularized_incomplete_beta(1.0, 1.0, 1.0), 1.0);
}

TEST(StudentT, TwoSidedPValuesMatchReference) {
  EXPECT_NEAR(student_t_two_sided_p(2.0, 10.0), 0.07338803477074039, 1e-12);
  EXPECT_NEAR(student_t_two_sided_p(0.5, 3.0), 0.651447964848151, 1e-12);
  EXPECT_NEAR(student_t_two_sided_p(4.2, 7.3), 0.0036750570016489117, 1e-12);
  EXPECT_DOUBLE_EQ(student_t_two_sided_p(0.0, 5.0), 1.0);
  EXPECT_NEAR(student_t_two_sided_p(-2.0, 10.0), student_t_two_sided_p(2.0, 10.0), 1e-15);
}

TEST(Welch, MatchesReferenceOnUnequalGroups) {
  const std::vector<double> a{10.0, 12.0, 11.0, 13.0, 9.0};
  const std::vector<double> b{14.0, 15.0, 13.5, 16.0, 14.5};
  const WelchResult result = welch_t_test(a, b);
  EXPECT_NEAR(result.t, -4.349679071977274, 1e-12);
  EXPECT_NEAR(result.p_value, 0.003851426163332946, 1e-12);
}

TEST(Welch, IdenticalSamplesGivePOne) {
  const std::vector<double> a{3.0, 3.0, 3.0};
  const WelchResult result = welch_t_test(a, a);
  EXPECT_DOUBLE_EQ(result.t, 0.0);
  EXPECT_DOUBLE_EQ(result.p_value, 1.0);
}

TEST(Welch, WellSeparatedTinyVarianceSamplesGivePNearZero) {
  const std::vector<double> a{1.0, 1.0 + 1e-9, 1.0 - 1e-9};
  const std::vector<double> b{100.0, 100.0 + 1e-9, 100.0 - 1e-9};
  EXPECT_LT(welch_t_test(a, b).p_value, 1e-10);
  // Fully degenerate variant.
  const std::vector<double> c{1.0, 1.0, 1.0};
  const std::vector<double> d{100.0, 100.0, 100.0};
  EXPECT_DOUBLE_EQ(welch_t_test(c, d).p_value, 0.0);
}

TEST(Welch, RejectsTooFewSamples) {
  EXPECT_THROW(welch_t_test({1.0}, {2.0, 3.0}), std::invalid_argument);
}

}  // namespace
}  // namespace dpsu
