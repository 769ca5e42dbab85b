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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gfu/rules.hpp"
#include "gfu/spectral.hpp"
#include "test_util.hpp"

namespace gfu {
namespace {

using testing_util::ExpectErrorCode;
using testing_util::RandomGenerator;

Mat M2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

TEST(ValidateGeneratingMatrix, RowStochasticUnchanged) {
  const auto g = validate_generating_matrix(M2(0.5, 0.5, 0.5, 0.5));
  EXPECT_DOUBLE_EQ(g.s, 1.0);
  EXPECT_TRUE(g.h.isApprox(M2(0.5, 0.5, 0.5, 0.5)));
}

TEST(ValidateGeneratingMatrix, ScalesByCommonRowSum) {
  const auto g = validate_generating_matrix(M2(1.4, 0.6, 0.6, 1.4));
  EXPECT_DOUBLE_EQ(g.s, 2.0);
  EXPECT_LT((g.h - M2(0.7, 0.3, 0.3, 0.7)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ValidateGeneratingMatrix, Errors) {
  ExpectErrorCode([] { validate_generating_matrix(M2(0.5, 0.6, 0.5, 0.5)); }, "NonConstantRowSums");
  ExpectErrorCode([] { validate_generating_matrix(M2(1.2, -0.2, 0.5, 0.5)); }, "NegativeOffDiagonal");
  ExpectErrorCode([] { validate_generating_matrix(Mat::Ones(2, 3)); }, "NotSquare");
  ExpectErrorCode([] { validate_generating_matrix(Mat::Ones(1, 1)); }, "DimensionTooSmall");
  ExpectErrorCode([] { validate_generating_matrix(M2(-1, 0, 0, -1)); }, "NonPositiveRowSum");
  ExpectErrorCode([] { validate_generating_matrix(M2(NAN, 0, 0, 1)); }, "NonFinite");
}

TEST(SpectralAnalyze, RankOne) {
  const auto sd = spectral_analyze(validate_generating_matrix(M2(0.5, 0.5, 0.5, 0.5)));
  EXPECT_NEAR(sd.v(0), 0.5, 1e-14);
  EXPECT_NEAR(sd.v(1), 0.5, 1e-14);
  EXPECT_NEAR(sd.rho, 0.0, 1e-14);
  EXPECT_EQ(sd.nu, 1);
  EXPECT_LT(sd.h_tilde.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(sd.regime, Regime::kSubcritical);
}

TEST(SpectralAnalyze, PlayTheWinnerClosedForm) {
  // v_1 = q2 / (q1 + q2), second eigenvalue p1 - q2 (trace minus 1).
  for (auto [p1, p2] : {std::pair{0.7, 0.7}, std::pair{0.6, 0.3}, std::pair{0.2, 0.9}}) {
    const double q1 = 1 - p1, q2 = 1 - p2;
    const auto sd = spectral_analyze(validate_generating_matrix(M2(p1, q1, q2, p2)));
    EXPECT_NEAR(sd.v(0), q2 / (q1 + q2), 1e-12);
    EXPECT_NEAR(sd.rho, p1 - q2, 1e-12);
    EXPECT_EQ(sd.nu, 1);
  }
}

TEST(SpectralAnalyze, SymmetricThreeColour) {
  Mat h(3, 3);
  h << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0;
  const auto sd = spectral_analyze(validate_generating_matrix(h));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(sd.v(k), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(sd.rho, -0.5, 1e-12);
  EXPECT_EQ(sd.nu, 1);
  // Characteristic polynomial of H: (x - 1)(x + 1/2)^2.
  for (int i = 1; i < 3; ++i) EXPECT_NEAR(std::abs(sd.eigenvalues(i) - (-0.5)), 0.0, 1e-7);
}

TEST(SpectralAnalyze, CriticalAndSupercritical) {
  const auto sd = spectral_analyze(validate_generating_matrix(M2(0.75, 0.25, 0.25, 0.75)));
  EXPECT_EQ(sd.regime, Regime::kCritical);
  ASSERT_EQ(sd.critical_pairs.size(), 1u);
  EXPECT_NEAR(sd.critical_pairs[0].lambda.real(), 0.5, 1e-12);
  // The eigenvector normalisation: unit norm, first nonzero entry positive real.
  EXPECT_NEAR(sd.critical_pairs[0].right.norm(), 1.0, 1e-12);
  EXPECT_GT(sd.critical_pairs[0].right(0).real(), 0.0);
  EXPECT_NEAR(sd.critical_pairs[0].right(0).imag(), 0.0, 1e-15);
  EXPECT_NEAR(std::abs((sd.critical_pairs[0].left * sd.critical_pairs[0].right)(0) - 1.0), 0.0, 1e-12);
  ExpectErrorCode([] { spectral_analyze(validate_generating_matrix(M2(0.9, 0.1, 0.1, 0.9))); },
                  "SupercriticalUnsupported");
}

TEST(SpectralAnalyze, RejectsRepeatedPerronRoot) {
  ExpectErrorCode([] { spectral_analyze(validate_generating_matrix(Mat::Identity(2, 2))); },
                  "NonSimplePerronRoot");
}

// H = 1'v + lambda (I - 1'v) + c u'w with a nilpotent u'w: eigenvalue lambda
// is a 2x2 Jordan block.
Mat Defective(double lambda) {
  const RowVec v = RowVec::Constant(3, 1.0 / 3.0);
  const Mat p = RowVec::Ones(3).transpose() * v;
  RowVec u(3), w(3);
  u << 1, -1, 0;
  w << 1, 1, -2;
  return p + lambda * (Mat::Identity(3, 3) - p) + 0.1 * u.transpose() * w;
}

TEST(SpectralAnalyze, DefectiveRepeatedEigenvalueNeedsOverride) {
  ExpectErrorCode([] { spectral_analyze(validate_generating_matrix(Defective(0.2))); }, "AmbiguousNu");
  SpectralOptions opt;
  opt.nu_override = 2;
  const auto sd = spectral_analyze(validate_generating_matrix(Defective(0.2)), opt);
  EXPECT_EQ(sd.nu, 2);
  EXPECT_NEAR(sd.rho, 0.2, 1e-6);
}

TEST(MatrixPower, IdentityAtOne) {
  const auto sd = spectral_analyze(validate_generating_matrix(M2(0.7, 0.3, 0.3, 0.7)));
  EXPECT_TRUE(matrix_power(sd, 1.0).isIdentity(0.0));
  ExpectErrorCode([&] { matrix_power(sd, 0.0); }, "NonPositiveTime");
}

TEST(MatrixPower, ProjectionClosedForm) {
  // H~ = 0.4 P with P idempotent, so exp(0.4 P ln t) = I + (t^0.4 - 1) P.
  const auto sd = spectral_analyze(validate_generating_matrix(M2(0.7, 0.3, 0.3, 0.7)));
  const Mat p = M2(0.5, -0.5, -0.5, 0.5);
  ASSERT_LT((sd.h_tilde - 0.4 * p).cwiseAbs().maxCoeff(), 1e-14);
  const Mat expected = Mat::Identity(2, 2) + (std::pow(4.0, 0.4) - 1.0) * p;
  EXPECT_LT((matrix_power(sd, 4.0) - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(MatrixPower, ZeroGenerator) {
  for (double t : {1e-3, 0.5, 7.0, 1e4}) EXPECT_TRUE(matrix_power(Mat::Zero(3, 3), t).isIdentity(0.0));
}

// --- properties over random generating matrices ---

TEST(SpectralProperties, InvariantsOfRandomMatrices) {
  RandomGenerator gen(11);
  for (int i = 0; i < 100; ++i) {
    const int d = 2 + i % 4;
    const Mat raw = gen.generating_matrix(d, 0.45, 1.0 + i % 3);
    const auto g = validate_generating_matrix(raw);
    const auto sd = spectral_analyze(g);
    EXPECT_LT((sd.v * sd.h - sd.v).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(sd.v.sum(), 1.0, 1e-10);
    EXPECT_LT((sd.h_tilde * Vec::Ones(d)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((sd.v * sd.h_tilde).cwiseAbs().maxCoeff(), 1e-10);
    // Spectrum of H~ is {0} together with the non-Perron eigenvalues of H.
    Eigen::EigenSolver<Mat> es(sd.h_tilde);
    std::vector<std::complex<double>> expected{0.0};
    for (int k = 1; k < d; ++k) expected.push_back(sd.eigenvalues(k));
    for (const auto& lam : expected) {
      double best = INFINITY;
      for (int k = 0; k < d; ++k) best = std::min(best, std::abs(es.eigenvalues()(k) - lam));
      EXPECT_LT(best, 1e-6);
    }
    // Row sums preserved by t^H~.
    for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      EXPECT_LT((matrix_power(sd, t) * Vec::Ones(d) - Vec::Ones(d)).cwiseAbs().maxCoeff(), 1e-9);
    }
    // Semigroup property.
    EXPECT_LT((matrix_power(sd, 3.0) * matrix_power(sd, 0.2) - matrix_power(sd, 0.6)).cwiseAbs().maxCoeff(),
              1e-9);
    // Scale invariance.
    const auto sd2 = spectral_analyze(validate_generating_matrix(2.5 * raw));
    EXPECT_LT((sd2.v - sd.v).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(sd2.rho, sd.rho, 1e-12);
    EXPECT_EQ(sd2.nu, sd.nu);
    EXPECT_LT((sd2.h_tilde - sd.h_tilde).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// ||a^{H~}|| contains the constant mode 1'v (eigenvalue 0 of H~), so the rate
// a^rho shows once that projection is removed; ||a^{H~}|| itself is bounded by
// a^{max(rho, 0)}. A complex pair at rho multiplies the norm by a bounded factor
// periodic in ln a, which biases a finite-range slope fit, so the slope is fitted
// only when the dominant eigenvalue is real.
TEST(SpectralProperties, GrowthBound) {
  RandomGenerator gen(5);
  int checked = 0;
  for (int i = 0; i < 40 && checked < 12; ++i) {
    const int d = 2 + i % 3;
    const auto sd = spectral_analyze(validate_generating_matrix(gen.generating_matrix(d, 0.5, 1.0)));
    if (sd.rho < 0.05) continue;  // slope fit needs visible growth
    const Mat p = RowVec::Ones(d).transpose() * sd.v;
    std::vector<double> xs, ys;
    double lo = INFINITY, hi = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double a = std::ldexp(1.0, k);
      const Mat pw = matrix_power(sd, a);
      const double ratio = operator_norm(pw) / std::pow(a, std::max(sd.rho, 0.0));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      if (k >= 8) {
        xs.push_back(a);
        ys.push_back(operator_norm(pw - p));
      }
    }
    EXPECT_TRUE(std::isfinite(hi / lo));
    EXPECT_LT(hi / lo, 1e3);
    bool real_dominant = true;
    for (Eigen::Index k = 1; k < sd.eigenvalues.size(); ++k) {
      const auto& l = sd.eigenvalues(k);
      if (std::abs(l.real() - sd.rho) < 1e-9 && std::abs(l.imag()) > 1e-9) real_dominant = false;
    }
    if (!real_dominant) continue;
    EXPECT_NEAR(detail::loglog_slope(xs, ys), sd.rho, 0.02);
    ++checked;
  }
  EXPECT_GE(checked, 5);
}

}  // namespace
}  // namespace gfu
