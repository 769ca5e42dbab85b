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

// Small dense helpers shared by the covariance and limit-process code.

#ifndef GFU_LINALG_HPP_
#define GFU_LINALG_HPP_

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/quadrature/gauss.hpp>

#include "gfu/core.hpp"

namespace gfu {

/// exp(M) by scaling and squaring with a Pade approximant.
inline Mat expm(const Mat& m) {
  Mat out = m.exp();
  if (!out.allFinite()) {
    throw numeric_error("OverflowDomain", "matrix exponential overflowed");
  }
  return out;
}

/// Symmetric square root of a PSD matrix; eigenvalues below `clamp` are set to 0.
inline Mat psd_sqrt(const Mat& a, double clamp = 1e-12) {
  const Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Vec root = es.eigenvalues();
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    if (root(i) < -clamp * scale) {
      throw validation_error("NotPositiveSemidefinite",
                             "eigenvalue " + std::to_string(root(i)) + " below zero");
    }
    root(i) = root(i) > 0.0 ? std::sqrt(root(i)) : 0.0;
  }
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

inline bool is_psd(const Mat& a, double tol) {
  if (!a.isApprox(a.transpose(), tol) && (a - a.transpose()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  return es.eigenvalues().minCoeff() >= -tol;
}

struct StationaritySolution {
  Mat x;
  double residual = 0.0;  // max-abs residual of the linear equation
};

/// Solves X - A'X - XA = C through the Kronecker (vectorised) form.
/// Unique whenever no two eigenvalues of A sum to 1.
inline StationaritySolution solve_stationarity(const Mat& a, const Mat& c) {
  const Eigen::Index d = a.rows();
  const Mat id = Mat::Identity(d, d);
  const Mat at = a.transpose();
  const Mat op = Mat::Identity(d * d, d * d) - Mat(Eigen::kroneckerProduct(id, at)) -
                 Mat(Eigen::kroneckerProduct(at, id));
  Eigen::FullPivLU<Mat> lu(op);
  if (!lu.isInvertible()) {
    throw numeric_error("SingularStationarity", "X - A'X - XA = C is not uniquely solvable");
  }
  const Vec rhs = Eigen::Map<const Vec>(c.data(), d * d);
  const Vec sol = lu.solve(rhs);
  StationaritySolution out;
  out.x = Eigen::Map<const Mat>(sol.data(), d, d);
  out.residual = (out.x - at * out.x - out.x * a - c).cwiseAbs().maxCoeff();
  return out;
}

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  static constexpr int kPoints = 20;
  std::array<double, kPoints> nodes{};
  std::array<double, kPoints> weights{};

  GaussRule() {
    using Quad = boost::math::quadrature::gauss<double, kPoints>;
    const auto& x = Quad::abscissa();
    const auto& w = Quad::weights();
    // Boost stores the non-negative half; kPoints is even so there is no 0 node.
    const int half = kPoints / 2;
    for (int i = 0; i < half; ++i) {
      nodes[half - 1 - i] = -x[i];
      weights[half - 1 - i] = w[i];
      nodes[half + i] = x[i];
      weights[half + i] = w[i];
    }
  }

  static const GaussRule& instance() {
    static const GaussRule rule;
    return rule;
  }
};

/// Node/weight pairs of a composite Gauss-Legendre rule on [lo, hi] with
/// `panels` equal panels.
struct PanelNodes {
  std::vector<double> x;
  std::vector<double> w;
};

inline PanelNodes composite_gauss(double lo, double hi, int panels) {
  const auto& rule = GaussRule::instance();
  PanelNodes out;
  out.x.reserve(static_cast<std::size_t>(panels) * GaussRule::kPoints);
  out.w.reserve(out.x.capacity());
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    for (int i = 0; i < GaussRule::kPoints; ++i) {
      out.x.push_back(a + 0.5 * h * (rule.nodes[i] + 1.0));
      out.w.push_back(0.5 * h * rule.weights[i]);
    }
  }
  return out;
}

}  // namespace gfu

#endif  // GFU_LINALG_HPP_
