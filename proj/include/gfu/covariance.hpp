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

// Theoretical asymptotic covariances of the stacked fluctuation vector
// (Y_n - n v, N_n - n v): the noise matrices, Gamma in the subcritical regime,
// Gamma~ in the critical regime and the two-colour play-the-winner formulas.

#ifndef GFU_COVARIANCE_HPP_
#define GFU_COVARIANCE_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "gfu/core.hpp"
#include "gfu/linalg.hpp"
#include "gfu/rules.hpp"
#include "gfu/spectral.hpp"

namespace gfu {

struct NoiseMatrices {
  Mat sigma1;  // diag(v) - v'v
  Mat sigma2;  // sum_q v_q V_q
  Mat sigma;   // H' sigma1 H + sigma2
};

/// `v`, `V` and `H` must all be on the normalised (unit row sum) scale.
inline NoiseMatrices sigma_matrices(const RowVec& v, const std::vector<Mat>& V, const Mat& h) {
  const Eigen::Index d = v.size();
  if (static_cast<Eigen::Index>(V.size()) != d || h.rows() != d || h.cols() != d) {
    throw validation_error("DimensionMismatch", "v, V and H disagree on the number of colours");
  }
  NoiseMatrices out;
  out.sigma1 = Mat(v.asDiagonal()) - v.transpose() * v;
  out.sigma2 = Mat::Zero(d, d);
  for (Eigen::Index q = 0; q < d; ++q) {
    const Mat& vq = V[static_cast<std::size_t>(q)];
    if (vq.rows() != d || vq.cols() != d) {
      throw validation_error("DimensionMismatch", "V_" + std::to_string(q + 1) + " is not d x d");
    }
    out.sigma2 += v(q) * vq;
  }
  out.sigma2 = 0.5 * (out.sigma2 + out.sigma2.transpose());
  out.sigma = h.transpose() * out.sigma1 * h + out.sigma2;
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  return out;
}

/// Noise matrices of a rule, rescaled by its common row sum s.
inline NoiseMatrices sigma_matrices(const AdditionRule& rule, const SpectralData& sd) {
  const double s = rule.limit_mean().row(0).sum();
  std::vector<Mat> v;
  for (const auto& vq : rule.limit_row_covs()) v.push_back(vq / (s * s));
  return sigma_matrices(sd.v, v, sd.h);
}

struct CovarianceReport {
  Regime regime = Regime::kSubcritical;
  RowVec v;
  double rho = 0.0;
  int nu = 1;
  Mat sigma1, sigma2;
  // Gamma blocks, or Gamma~ blocks in the critical regime.
  Mat g11, g12, g21, g22;
  // Quadrature provenance (subcritical only).
  double quad_tol = 0.0;
  int panels = 0;
  double tail_cutoff = 0.0;
  double sylvester_residual = 0.0;
  // Critical eigen-structure used (critical only).
  std::vector<std::complex<double>> critical_eigenvalues;
  std::string eigenvector_normalization;

  Mat full() const {
    const Eigen::Index d = g11.rows();
    Mat out(2 * d, 2 * d);
    out << g11, g12, g21, g22;
    return out;
  }
};

namespace detail {

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Integrals over u in [0, U] of
//   P1 = e^{uA'} S1 e^{uA} e^{-u},  P2 = e^{uA'} S2 e^{uA} e^{-u},
//   PS = e^{uA'} S  e^{uA} e^{-u},  Q  = K(u)' S2 K(u) e^{-u},
// with K(u) = int_0^u e^{sA} ds, using `panels` Gauss-Legendre panels.
struct GammaIntegrals {
  Mat p1, p2, ps, q;
};

inline GammaIntegrals gamma_integrals(const Mat& a, const NoiseMatrices& nm, double upper, int panels) {
  const Eigen::Index d = a.rows();
  const auto& rule = GaussRule::instance();
  constexpr int kn = GaussRule::kPoints;
  const double width = upper / panels;

  // Offsets inside one panel are the same for every panel, so e^{rA} and
  // int_0^r e^{sA} ds at those offsets are computed once.
  std::vector<Mat> e_off(kn), k_off(kn);
  auto inner = [&](double r) {
    Mat acc = Mat::Zero(d, d);
    for (int j = 0; j < kn; ++j) {
      const double s = 0.5 * r * (rule.nodes[j] + 1.0);
      acc += 0.5 * r * rule.weights[j] * expm(a * s);
    }
    return acc;
  };
  for (int i = 0; i < kn; ++i) {
    const double r = 0.5 * width * (rule.nodes[i] + 1.0);
    e_off[i] = expm(a * r);
    k_off[i] = inner(r);
  }
  const Mat k_panel = inner(width);

  GammaIntegrals out{Mat::Zero(d, d), Mat::Zero(d, d), Mat::Zero(d, d), Mat::Zero(d, d)};
  Mat k_start = Mat::Zero(d, d);  // K at the left end of the current panel
  for (int p = 0; p < panels; ++p) {
    const double lo = p * width;
    const Mat e_lo = expm(a * lo);
    for (int i = 0; i < kn; ++i) {
      const double u = lo + 0.5 * width * (rule.nodes[i] + 1.0);
      const double w = 0.5 * width * rule.weights[i] * std::exp(-u);
      const Mat e = e_lo * e_off[i];
      const Mat k = k_start + e_lo * k_off[i];
      out.p1 += w * e.transpose() * nm.sigma1 * e;
      out.p2 += w * e.transpose() * nm.sigma2 * e;
      out.ps += w * e.transpose() * nm.sigma * e;
      out.q += w * k.transpose() * nm.sigma2 * k;
    }
    k_start += e_lo * k_panel;
  }
  return out;
}

// Tail cutoff U such that the integrands' mass beyond U is below tol. Uses
// ||e^{uA}|| <= C e^{r u} (1+u)^{nu-1}, hence ||K(u)|| <= C e^{r u} (1+u)^nu,
// with r = max(rho, 0) and C measured on the instance.
inline double tail_cutoff(const Mat& a, const NoiseMatrices& nm, double rho, int nu, double tol) {
  const double r = std::max(rho, 0.0);
  const double beta = 1.0 - 2.0 * r;
  if (!(beta > 0.0)) throw numeric_error("QuadratureDivergence", "integrands do not decay");
  double c = 1.0;
  for (double u = 0.25; u <= 60.0; u += 0.25) {
    const double scale = std::exp(r * u) * std::pow(1.0 + u, nu - 1);
    c = std::max(c, operator_norm(expm(a * u)) / scale);
  }
  const double m = std::max({operator_norm(nm.sigma), operator_norm(nm.sigma1),
                             operator_norm(nm.sigma2), 1e-300});
  const double k = 2.0 * nu;
  // int_U^inf (1+u)^k e^{-beta u} du = e^{beta} beta^{-k-1} Gamma(k+1, beta(1+U))
  auto tail = [&](double upper) {
    return c * c * m * std::exp(beta) * std::pow(beta, -k - 1.0) *
           boost::math::tgamma(k + 1.0, beta * (1.0 + upper));
  };
  double upper = 8.0;
  while (tail(upper) > tol) {
    upper *= 1.25;
    if (upper > 5000.0) {
      throw numeric_error("QuadratureDivergence",
                          "tail cutoff exceeds 5000; rho too close to 1/2");
    }
  }
  return upper;
}

}  // namespace detail

/// Gamma for rho < 1/2 by quadrature in u = -ln x, cross-checked against the
/// stationarity relation G - H~'G - G H~ = Sigma.
inline CovarianceReport gamma_subcritical(const SpectralData& sd, const NoiseMatrices& nm,
                                          double quad_tol = 1e-10) {
  if (!(sd.rho < 0.5 - sd.eig_tol) || sd.regime != Regime::kSubcritical) {
    throw validation_error("CriticalRegime", "rho = " + std::to_string(sd.rho) +
                                                 " is not below 1/2; use gamma_critical");
  }
  if (!(quad_tol > 0.0)) throw validation_error("BadTolerance", "quad_tol must be positive");
  const Eigen::Index d = sd.dim();
  const Mat& a = sd.h_tilde;
  const double upper = detail::tail_cutoff(a, nm, sd.rho, sd.nu, quad_tol);

  int panels = std::max(4, static_cast<int>(std::ceil(upper / 2.0)));
  detail::GammaIntegrals prev = detail::gamma_integrals(a, nm, upper, panels);
  for (;;) {
    if (panels > (1 << 15)) {
      throw numeric_error("QuadratureDivergence", "panel doubling did not converge");
    }
    panels *= 2;
    detail::GammaIntegrals cur = detail::gamma_integrals(a, nm, upper, panels);
    const double scale = std::max({1.0, detail::max_abs(cur.ps), detail::max_abs(cur.q)});
    const double diff = std::max({detail::max_abs(cur.p1 - prev.p1), detail::max_abs(cur.p2 - prev.p2),
                                  detail::max_abs(cur.ps - prev.ps), detail::max_abs(cur.q - prev.q)});
    prev = std::move(cur);
    if (diff < quad_tol * scale) break;
  }

  const Mat id = Mat::Identity(d, d);
  const Mat proj = id - RowVec::Ones(d).transpose() * sd.v;  // I - 1'v
  CovarianceReport rep;
  rep.regime = Regime::kSubcritical;
  rep.v = sd.v;
  rep.rho = sd.rho;
  rep.nu = sd.nu;
  rep.sigma1 = nm.sigma1;
  rep.sigma2 = nm.sigma2;
  rep.g11 = 0.5 * (prev.ps + prev.ps.transpose());
  rep.g12 = sd.h.transpose() * prev.p1 +
            (id - a.transpose()).partialPivLu().solve(prev.p2) * proj;
  rep.g21 = rep.g12.transpose();
  rep.g22 = prev.p1 + proj.transpose() * prev.q * proj;
  rep.g22 = 0.5 * (rep.g22 + rep.g22.transpose());
  rep.quad_tol = quad_tol;
  rep.panels = panels;
  rep.tail_cutoff = upper;

  const StationaritySolution st = solve_stationarity(a, nm.sigma);
  rep.sylvester_residual = detail::max_abs(rep.g11 - st.x);
  if (rep.sylvester_residual > 10.0 * quad_tol * std::max(1.0, detail::max_abs(st.x))) {
    throw numeric_error("SylvesterMismatch", "quadrature and stationarity solution differ by " +
                                                 std::to_string(rep.sylvester_residual));
  }
  return rep;
}

/// Gamma~ for rho = 1/2 with diagonalizable critical eigenvalues. With w_l the
/// rows of T^{-1} dual to the critical eigenvectors t_l, every block is
/// Re sum_{l,k} c_{lk} w_l^* w_k over pairs of critical indices sharing one
/// eigenvalue lambda, where for u = t_l^* S1 t_k and s = t_l^* S2 t_k
///   c11 = |lambda|^2 u + s,  c12 = conj(lambda) u + s / lambda,
///   c22 = u + s / |lambda|^2.
inline CovarianceReport gamma_critical(const SpectralData& sd, const NoiseMatrices& nm) {
  if (sd.regime != Regime::kCritical) {
    throw validation_error("NotCritical", "rho = " + std::to_string(sd.rho) + " is not 1/2");
  }
  if (sd.nu != 1 || sd.critical_pairs.empty()) {
    throw validation_error("UnsupportedJordanStructure",
                           "critical eigenvalues must be diagonalizable (nu = 1)");
  }
  const Eigen::Index d = sd.dim();
  const double ctol = cluster_tolerance(sd.eig_tol);
  const CMat s1 = nm.sigma1.cast<std::complex<double>>();
  const CMat s2 = nm.sigma2.cast<std::complex<double>>();
  CMat c11 = CMat::Zero(d, d), c12 = CMat::Zero(d, d), c22 = CMat::Zero(d, d);
  for (const auto& pl : sd.critical_pairs) {
    for (const auto& pk : sd.critical_pairs) {
      if (std::abs(pl.lambda - pk.lambda) > ctol) continue;
      const std::complex<double> lam = pl.lambda;
      const std::complex<double> u = (pl.right.adjoint() * s1 * pk.right)(0, 0);
      const std::complex<double> s = (pl.right.adjoint() * s2 * pk.right)(0, 0);
      const CMat outer = pl.left.adjoint() * pk.left;
      c11 += (std::norm(lam) * u + s) * outer;
      c12 += (std::conj(lam) * u + s / lam) * outer;
      c22 += (u + s / std::norm(lam)) * outer;
    }
  }
  CovarianceReport rep;
  rep.regime = Regime::kCritical;
  rep.v = sd.v;
  rep.rho = sd.rho;
  rep.nu = sd.nu;
  rep.sigma1 = nm.sigma1;
  rep.sigma2 = nm.sigma2;
  rep.g11 = c11.real();
  rep.g11 = 0.5 * (rep.g11 + rep.g11.transpose());
  rep.g12 = c12.real();
  rep.g21 = rep.g12.transpose();
  rep.g22 = c22.real();
  rep.g22 = 0.5 * (rep.g22 + rep.g22.transpose());
  for (const auto& p : sd.critical_pairs) rep.critical_eigenvalues.push_back(p.lambda);
  rep.eigenvector_normalization = "unit Euclidean norm, first nonzero component positive real";
  return rep;
}

/// Dispatches on the regime of `sd`.
inline CovarianceReport gamma(const SpectralData& sd, const NoiseMatrices& nm, double quad_tol = 1e-10) {
  if (sd.regime == Regime::kCritical) return gamma_critical(sd, nm);
  return gamma_subcritical(sd, nm, quad_tol);
}

// ---------------------------------------------------------------------------
// Two-colour play-the-winner closed forms.

struct RpwAsymptotics {
  double v1 = 0, v2 = 0;
  double rho = 0;
  double sigma1_sq = 0;  // q1 q2 / (q1 + q2)^2
  double sigma2_sq = 0;  // (a1 q2 + a2 q1) / (q1 + q2)
  bool critical = false;
  // rho < 1/2: limit covariance of n^{-1/2}(Y_n1 - n v1, N_n1 - n v1).
  double s11 = 0, s12 = 0, s22 = 0;
  // rho = 1/2: sigma~^2, the scaled covariance is (sigma~^2, 2 sigma~^2, 4 sigma~^2).
  double sigma_tilde_sq = 0;
};

inline RpwAsymptotics rpw_closed_forms(double p1, double p2, double a1, double a2, double tol = 1e-9) {
  for (double p : {p1, p2}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw validation_error("InvalidProbability", "p = " + std::to_string(p));
    }
  }
  if (!(a1 >= 0.0) || !(a2 >= 0.0)) {
    throw validation_error("InvalidVariance", "a1 and a2 must be non-negative");
  }
  const double q1 = 1.0 - p1, q2 = 1.0 - p2;
  const double qs = q1 + q2;
  if (!(qs > 0.0)) throw validation_error("DegenerateRule", "q1 + q2 must be positive");
  RpwAsymptotics r;
  r.v1 = q2 / qs;
  r.v2 = q1 / qs;
  r.rho = p1 - q2;
  if (r.rho > 0.5 + tol) {
    throw validation_error("SupercriticalUnsupported", "rho = " + std::to_string(r.rho));
  }
  const double b = a1 * q2 + a2 * q1;
  r.sigma1_sq = q1 * q2 / (qs * qs);
  r.sigma2_sq = b / qs;
  if (std::abs(r.rho - 0.5) <= tol) {
    r.critical = true;
    r.sigma_tilde_sq = q1 * q2 + 2.0 * b;
    return r;
  }
  const double den = 1.0 - 2.0 * r.rho;
  r.s11 = (r.rho * r.rho * q1 * q2 + qs * b) / (den * qs * qs);
  r.s12 = r.rho * r.sigma1_sq / den + r.sigma2_sq / (den * qs);
  r.s22 = r.sigma1_sq / den + 2.0 * r.sigma2_sq / (den * qs);
  return r;
}

// ---------------------------------------------------------------------------
// JSON.

inline nlohmann::json to_json_rows(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json to_json_vec(const RowVec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline nlohmann::json to_json(const CovarianceReport& r) {
  nlohmann::json j;
  j["regime"] = regime_name(r.regime);
  j["v"] = to_json_vec(r.v);
  j["rho"] = r.rho;
  j["nu"] = r.nu;
  j["sigma1"] = to_json_rows(r.sigma1);
  j["sigma2"] = to_json_rows(r.sigma2);
  j["gamma_blocks"] = {{"g11", to_json_rows(r.g11)},
                       {"g12", to_json_rows(r.g12)},
                       {"g21", to_json_rows(r.g21)},
                       {"g22", to_json_rows(r.g22)}};
  if (r.regime == Regime::kCritical) {
    j["scaling"] = "n^{-1/2} (log n)^{-1/2}";
    nlohmann::json eig = nlohmann::json::array();
    for (const auto& l : r.critical_eigenvalues) eig.push_back({l.real(), l.imag()});
    j["critical"] = {{"eigenvalues", eig}, {"eigenvector_normalization", r.eigenvector_normalization}};
  } else {
    j["scaling"] = "n^{-1/2}";
    j["method"] = {{"quad_tol", r.quad_tol},
                   {"panels", r.panels},
                   {"tail_cutoff", r.tail_cutoff},
                   {"sylvester_residual", r.sylvester_residual}};
  }
  return j;
}

}  // namespace gfu

#endif  // GFU_COVARIANCE_HPP_
