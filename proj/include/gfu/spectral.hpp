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

// Validation of generating matrices and the spectral quantities derived from
// them: the drift vector v, the non-Perron spectrum, rho, nu and
// H~ = H - 1'v.

#ifndef GFU_SPECTRAL_HPP_
#define GFU_SPECTRAL_HPP_

#include <algorithm>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gfu/core.hpp"
#include "gfu/linalg.hpp"

namespace gfu {

/// Mean replacement matrix normalised to unit row sums; `s` is the original
/// common row sum.
struct GeneratingMatrix {
  Mat h;
  double s = 1.0;

  Eigen::Index dim() const { return h.rows(); }
};

enum class Regime { kSubcritical, kCritical, kSupercritical };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kSubcritical: return "subcritical";
    case Regime::kCritical: return "critical";
    case Regime::kSupercritical: return "supercritical";
  }
  return "unknown";
}

inline Regime parse_regime(const std::string& name) {
  if (name == "subcritical") return Regime::kSubcritical;
  if (name == "critical") return Regime::kCritical;
  if (name == "supercritical") return Regime::kSupercritical;
  throw validation_error("BadRegime", "unknown regime '" + name + "'");
}

/// A critical eigenvalue with its right eigenvector (a column of the Jordan
/// basis T) and the matching row of T^{-1}.
struct CriticalPair {
  std::complex<double> lambda;
  CVec right;     // unit Euclidean norm, first nonzero component positive real
  CRowVec left;   // dual row: left * right = 1
};

struct SpectralData {
  Mat h;
  RowVec v;
  CVec eigenvalues;  // eigenvalues(0) == 1
  double rho = 0.0;
  int nu = 1;
  Mat h_tilde;
  std::vector<CriticalPair> critical_pairs;
  Regime regime = Regime::kSubcritical;
  bool boundary_warning = false;  // rho sat inside the tolerance band around 1/2
  double eig_tol = 1e-9;

  Eigen::Index dim() const { return h.rows(); }
};

struct SpectralOptions {
  double eig_tol = 1e-9;
  std::optional<int> nu_override;
};

/// Eigenvalues closer than this are treated as one repeated eigenvalue.
/// Numerically split Jordan blocks of order 2 separate by ~sqrt(eps), so the
/// clustering threshold must sit above that.
inline double cluster_tolerance(double eig_tol) { return std::max(eig_tol, 1e-6); }

inline GeneratingMatrix validate_generating_matrix(const Mat& raw, double tol = 1e-12) {
  if (raw.rows() != raw.cols()) {
    throw validation_error("NotSquare", "generating matrix must be square");
  }
  if (raw.rows() < 2) {
    throw validation_error("DimensionTooSmall", "need at least two colours");
  }
  if (!raw.allFinite()) {
    throw validation_error("NonFinite", "generating matrix has non-finite entries");
  }
  const Vec sums = raw.rowwise().sum();
  const double s = sums(0);
  for (Eigen::Index q = 1; q < sums.size(); ++q) {
    if (std::abs(sums(q) - s) > tol) {
      throw validation_error("NonConstantRowSums",
                             "row " + std::to_string(q + 1) + " sums to " +
                                 std::to_string(sums(q)) + ", row 1 to " + std::to_string(s));
    }
  }
  if (!(s > 0.0)) {
    throw validation_error("NonPositiveRowSum", "common row sum must be positive");
  }
  for (Eigen::Index q = 0; q < raw.rows(); ++q) {
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      if (k != q && raw(q, k) < -tol) {
        throw validation_error("NegativeOffDiagonal", "H(" + std::to_string(q + 1) + "," +
                                                          std::to_string(k + 1) + ") < 0");
      }
    }
  }
  return GeneratingMatrix{raw / s, s};
}

namespace detail {

inline void normalize_eigenvector(CVec& t) {
  t /= t.norm();
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (std::abs(t(i)) > 1e-12) {
      t *= std::conj(t(i)) / std::abs(t(i));
      t(i) = std::abs(t(i));
      break;
    }
  }
}

// Algebraic multiplicity of the eigenvalue at `index` and whether that
// eigenvalue is semisimple (geometric == algebraic multiplicity).
struct Multiplicity {
  int algebraic = 1;
  bool semisimple = true;
};

inline Multiplicity multiplicity_of(const Mat& h, const CVec& eig, Eigen::Index index,
                                    double cluster_tol) {
  Multiplicity m{0, true};
  std::complex<double> mean = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (std::abs(eig(i) - eig(index)) <= cluster_tol) {
      ++m.algebraic;
      mean += eig(i);
    }
  }
  if (m.algebraic == 1) return m;
  mean /= static_cast<double>(m.algebraic);
  const Eigen::Index d = h.rows();
  const CMat shifted = h.cast<std::complex<double>>() - mean * CMat::Identity(d, d);
  Eigen::JacobiSVD<CMat> svd(shifted);
  const auto& sv = svd.singularValues();
  const double scale = std::max(1.0, sv(0));
  int null_dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= 1e-7 * scale) ++null_dim;
  }
  m.semisimple = null_dim >= m.algebraic;
  return m;
}

}  // namespace detail

inline SpectralData spectral_analyze(const GeneratingMatrix& g, const SpectralOptions& opt = {}) {
  const Mat& h = g.h;
  const Eigen::Index d = h.rows();
  const double ctol = cluster_tolerance(opt.eig_tol);

  Eigen::EigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) {
    throw numeric_error("EigenFailure", "eigen-decomposition of H did not converge");
  }
  CVec eig = es.eigenvalues();
  CMat vecs = es.eigenvectors();

  // Perron root: the eigenvalue closest to 1.
  Eigen::Index perron = 0;
  for (Eigen::Index i = 1; i < d; ++i) {
    if (std::abs(eig(i) - 1.0) < std::abs(eig(perron) - 1.0)) perron = i;
  }
  if (std::abs(eig(perron) - 1.0) > ctol) {
    throw numeric_error("NonSimplePerronRoot", "1 is not an eigenvalue of H");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i != perron && std::abs(eig(i) - 1.0) <= ctol) {
      throw validation_error("NonSimplePerronRoot", "eigenvalue 1 of H is repeated");
    }
  }
  // Put the Perron root first, keep the rest in solver order.
  std::vector<Eigen::Index> order{perron};
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i != perron) order.push_back(i);
  }
  CVec sorted_eig(d);
  CMat sorted_vecs(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    sorted_eig(i) = eig(order[static_cast<std::size_t>(i)]);
    sorted_vecs.col(i) = vecs.col(order[static_cast<std::size_t>(i)]);
  }
  sorted_eig(0) = 1.0;

  SpectralData out;
  out.h = h;
  out.eig_tol = opt.eig_tol;
  out.eigenvalues = sorted_eig;

  // Left Perron vector from the transpose, fixed by v1' = 1.
  Eigen::EigenSolver<Mat> est(h.transpose());
  Eigen::Index lp = 0;
  for (Eigen::Index i = 1; i < d; ++i) {
    if (std::abs(est.eigenvalues()(i) - 1.0) < std::abs(est.eigenvalues()(lp) - 1.0)) lp = i;
  }
  const CVec vc = est.eigenvectors().col(lp);
  const std::complex<double> total = vc.sum();
  if (std::abs(total) < 1e-14) {
    throw numeric_error("DegenerateLeftVector", "left Perron vector sums to zero");
  }
  out.v = (vc / total).real().transpose();
  if (out.v.minCoeff() < -opt.eig_tol) {
    throw numeric_error("NegativeLeftVector", "left Perron vector has a negative component");
  }
  out.h_tilde = h - RowVec::Ones(d).transpose() * out.v;

  out.rho = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < d; ++i) out.rho = std::max(out.rho, sorted_eig(i).real());

  if (out.rho > 0.5 + opt.eig_tol) {
    throw validation_error("SupercriticalUnsupported",
                           "rho = " + std::to_string(out.rho) + " exceeds 1/2");
  }
  if (std::abs(out.rho - 0.5) <= opt.eig_tol) {
    out.regime = Regime::kCritical;
    out.boundary_warning = std::abs(out.rho - 0.5) > 0.0;
  } else {
    out.regime = Regime::kSubcritical;
  }

  // nu: largest Jordan order among eigenvalues attaining rho.
  bool repeated_defective = false;
  for (Eigen::Index i = 1; i < d; ++i) {
    if (std::abs(sorted_eig(i).real() - out.rho) > ctol) continue;
    const auto mult = detail::multiplicity_of(h, sorted_eig, i, ctol);
    if (!mult.semisimple) repeated_defective = true;
  }
  if (repeated_defective) {
    if (!opt.nu_override) {
      throw validation_error("AmbiguousNu",
                             "a repeated eigenvalue attaining rho is not semisimple; "
                             "supply nu_override");
    }
    out.nu = *opt.nu_override;
  } else {
    out.nu = opt.nu_override.value_or(1);
  }
  if (out.nu < 1) throw validation_error("BadNu", "nu must be a positive integer");

  if (out.regime == Regime::kCritical) {
    const Eigen::FullPivLU<CMat> lu(sorted_vecs);
    if (lu.isInvertible() && out.nu == 1) {
      // Rescale each basis column first so the dual rows are consistent.
      for (Eigen::Index i = 1; i < d; ++i) {
        CVec t = sorted_vecs.col(i);
        detail::normalize_eigenvector(t);
        sorted_vecs.col(i) = t;
      }
      const CMat tinv = sorted_vecs.inverse();
      for (Eigen::Index i = 1; i < d; ++i) {
        if (std::abs(sorted_eig(i).real() - 0.5) <= opt.eig_tol) {
          out.critical_pairs.push_back(
              CriticalPair{sorted_eig(i), sorted_vecs.col(i), tinv.row(i)});
        }
      }
    }
  }
  return out;
}

/// t^M = exp(M ln t).
inline Mat matrix_power(const Mat& m, double t) {
  if (!(t > 0.0)) throw validation_error("NonPositiveTime", "t^M needs t > 0");
  if (t == 1.0) return Mat::Identity(m.rows(), m.cols());
  return expm(m * std::log(t));
}

/// t^{H~}; rows sum to one for every t since H~ 1' = 0.
inline Mat matrix_power(const SpectralData& s, double t) { return matrix_power(s.h_tilde, t); }

}  // namespace gfu

#endif  // GFU_SPECTRAL_HPP_
