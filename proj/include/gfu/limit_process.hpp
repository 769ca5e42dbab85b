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

// Gaussian limit processes S_t = int (dW_x)(t/x)^{H~}: the solutions of
//   Equ1: S_t = W_t + int_0^t S_x H~ / x dx          (t >= 0)
//   Equ2: S_t = W_t - W_1 + int_1^t S_x H~ / x dx    (t >= 1)
// on a time grid, plus the composite (Y, N) limits built from two of them.

#ifndef GFU_LIMIT_PROCESS_HPP_
#define GFU_LIMIT_PROCESS_HPP_

#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "gfu/core.hpp"
#include "gfu/linalg.hpp"
#include "gfu/spectral.hpp"

namespace gfu {

enum class Equation { kEqu1, kEqu2 };

using PathMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LimitPath {
  Equation equation = Equation::kEqu1;
  std::vector<double> grid;
  PathMat values;            // row j holds S(t_j)
  PathMat running_integral;  // row j holds int_{t_0}^{t_j} S(x)/x dx
  PathMat driver;            // row j holds W(t_{j+1}) - W(t_j)
  Mat h_tilde;

  Eigen::Index dim() const { return h_tilde.rows(); }
  bool has_driver() const { return driver.rows() + 1 == static_cast<Eigen::Index>(grid.size()); }
};

// ---------------------------------------------------------------------------
// Grids.

/// 0 followed by a geometric grid from t_min to T (points entries in all).
/// t_min is placed where the neglected first panel carries a 1e-6 share of
/// the variance, t^{1 - 2 rho}; 1e-12 T when rho <= 0.
inline std::vector<double> equ1_grid(int points, double horizon = 1.0, double rho = 0.0) {
  if (points < 3 || !(horizon > 0.0)) {
    throw validation_error("BadGrid", "need at least 3 points and a positive horizon");
  }
  double t_min = rho > 0.0 ? horizon * std::pow(1e-6, 1.0 / (1.0 - 2.0 * rho)) : 1e-12 * horizon;
  t_min = std::max(t_min, 1e-300);
  std::vector<double> g{0.0};
  const int steps = points - 2;
  const double lr = std::log(horizon / t_min);
  for (int i = 0; i <= steps; ++i) g.push_back(t_min * std::exp(lr * i / steps));
  g.back() = horizon;
  return g;
}

/// Geometric grid from 1 to T.
inline std::vector<double> equ2_grid(int points, double horizon) {
  if (points < 2 || !(horizon > 1.0)) {
    throw validation_error("BadGrid", "need at least 2 points and a horizon above 1");
  }
  std::vector<double> g;
  const double lt = std::log(horizon);
  for (int i = 0; i < points; ++i) g.push_back(std::exp(lt * i / (points - 1)));
  g.front() = 1.0;
  g.back() = horizon;
  return g;
}

// ---------------------------------------------------------------------------
// Propagation scheme, shared by every path on one grid.

/// Per step j: S(t_{j+1}) = S(t_j) R_j + dW_j K_j with R_j = (t_{j+1}/t_j)^{H~}
/// and K_j = (t_{j+1}/x_j)^{H~}, x_j the interval midpoint. Geometric grids
/// have a single (R, K) pair.
class LimitScheme {
 public:
  LimitScheme(Equation eq, const Mat& h_tilde, double rho, const Mat& cov, std::vector<double> grid,
              double tol = 1e-9)
      : eq_(eq), h_tilde_(h_tilde), grid_(std::move(grid)) {
    const Eigen::Index d = h_tilde_.rows();
    if (cov.rows() != d || cov.cols() != d) {
      throw validation_error("DimensionMismatch", "driver covariance is not d x d");
    }
    if (eq_ == Equation::kEqu1 && !(rho < 0.5 - tol)) {
      throw validation_error("CriticalRegime", "Equ1 needs rho < 1/2; use the Equ2 form");
    }
    if (eq_ == Equation::kEqu2 && rho > 0.5 + tol) {
      throw validation_error("SupercriticalUnsupported", "Equ2 needs rho <= 1/2");
    }
    check_grid();
    root_ = psd_sqrt(cov);
    const std::size_t steps = grid_.size() - 1;
    sqrt_dt_.resize(steps);
    log_step_.resize(steps);
    for (std::size_t j = 0; j < steps; ++j) {
      sqrt_dt_[j] = std::sqrt(grid_[j + 1] - grid_[j]);
      log_step_[j] = grid_[j] > 0.0 ? std::log(grid_[j + 1] / grid_[j]) : 0.0;
    }
    const std::size_t first = eq_ == Equation::kEqu1 ? 1 : 0;
    geometric_ = true;
    for (std::size_t j = first + 1; j < steps; ++j) {
      if (std::abs(log_step_[j] - log_step_[first]) > 1e-12 * std::abs(log_step_[first])) {
        geometric_ = false;
        break;
      }
    }
    auto kernels = [&](std::size_t j) {
      const double t0 = grid_[j], t1 = grid_[j + 1];
      const double mid = 0.5 * (t0 + t1);
      const Mat r = t0 > 0.0 ? matrix_power(h_tilde_, t1 / t0) : Mat::Zero(d, d);
      return std::make_pair(r, matrix_power(h_tilde_, t1 / mid));
    };
    if (eq_ == Equation::kEqu1) {
      auto k0 = kernels(0);
      r_.push_back(k0.first);
      k_.push_back(k0.second);
    }
    if (geometric_) {
      if (first < steps) {
        auto kj = kernels(first);
        r_.push_back(kj.first);
        k_.push_back(kj.second);
      }
    } else {
      for (std::size_t j = first; j < steps; ++j) {
        auto kj = kernels(j);
        r_.push_back(kj.first);
        k_.push_back(kj.second);
      }
    }
  }

  LimitScheme(Equation eq, const SpectralData& sd, const Mat& cov, std::vector<double> grid)
      : LimitScheme(eq, sd.h_tilde, sd.rho, cov, std::move(grid), sd.eig_tol) {}

  Equation equation() const { return eq_; }
  const std::vector<double>& grid() const { return grid_; }
  const Mat& h_tilde() const { return h_tilde_; }
  Eigen::Index dim() const { return h_tilde_.rows(); }
  std::size_t steps() const { return grid_.size() - 1; }

  /// Driver increments dW_j = sqrt(dt_j) z Lambda^{1/2}.
  PathMat sample_driver(Stream& rng) const {
    const Eigen::Index d = dim();
    PathMat dw(static_cast<Eigen::Index>(steps()), d);
    boost::random::normal_distribution<double> normal;
    RowVec z(d);
    for (std::size_t j = 0; j < steps(); ++j) {
      for (Eigen::Index k = 0; k < d; ++k) z(k) = normal(rng);
      dw.row(static_cast<Eigen::Index>(j)) = sqrt_dt_[j] * (z * root_);
    }
    return dw;
  }

  /// Full path from given driver increments.
  LimitPath propagate(PathMat driver) const {
    const Eigen::Index d = dim();
    const auto m = static_cast<Eigen::Index>(grid_.size());
    if (driver.rows() != m - 1 || driver.cols() != d) {
      throw validation_error("BadGrid", "driver does not match the grid");
    }
    LimitPath p;
    p.equation = eq_;
    p.grid = grid_;
    p.h_tilde = h_tilde_;
    p.values = PathMat::Zero(m, d);
    p.running_integral = PathMat::Zero(m, d);
    RowVec s = RowVec::Zero(d), next(d), integral = RowVec::Zero(d);
    for (std::size_t j = 0; j < steps(); ++j) {
      step(j, s, driver.row(static_cast<Eigen::Index>(j)), next);
      integral += 0.5 * (s + next) * log_step_[j];
      s = next;
      p.values.row(static_cast<Eigen::Index>(j + 1)) = s;
      p.running_integral.row(static_cast<Eigen::Index>(j + 1)) = integral;
    }
    p.driver = std::move(driver);
    return p;
  }

  LimitPath simulate(Stream& rng) const { return propagate(sample_driver(rng)); }

  /// Endpoint S(T) and int S/x dx up to T without storing the path.
  void simulate_endpoint(Stream& rng, double* s_out, double* integral_out) const {
    const Eigen::Index d = dim();
    boost::random::normal_distribution<double> normal;
    // Small fixed buffers keep the inner loop free of allocations.
    std::vector<double> s(static_cast<std::size_t>(d), 0.0), nx(s), z(s), dw(s), acc(s);
    const double* root = root_.data();  // symmetric, layout irrelevant
    for (std::size_t j = 0; j < steps(); ++j) {
      for (Eigen::Index k = 0; k < d; ++k) z[static_cast<std::size_t>(k)] = normal(rng);
      for (Eigen::Index c = 0; c < d; ++c) {
        double x = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) x += z[static_cast<std::size_t>(k)] * root[c * d + k];
        dw[static_cast<std::size_t>(c)] = sqrt_dt_[j] * x;
      }
      const std::size_t ki = kernel_index(j);
      const double* r = r_[ki].data();
      const double* kk = k_[ki].data();
      const bool origin = eq_ == Equation::kEqu1 && j == 0;
      for (Eigen::Index c = 0; c < d; ++c) {
        double x = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
          const auto kz = static_cast<std::size_t>(k);
          if (!origin) x += s[kz] * r[c * d + k];
          x += dw[kz] * kk[c * d + k];
        }
        nx[static_cast<std::size_t>(c)] = x;
      }
      for (std::size_t c = 0; c < s.size(); ++c) {
        acc[c] += 0.5 * (s[c] + nx[c]) * log_step_[j];
        s[c] = nx[c];
      }
    }
    for (std::size_t c = 0; c < s.size(); ++c) {
      s_out[c] = s[c];
      integral_out[c] = acc[c];
    }
  }

 private:
  void check_grid() const {
    if (grid_.size() < 2) throw validation_error("BadGrid", "grid needs at least two points");
    const double start = eq_ == Equation::kEqu1 ? 0.0 : 1.0;
    if (grid_.front() != start) {
      throw validation_error("BadGrid", eq_ == Equation::kEqu1 ? "Equ1 grid must start at 0"
                                                               : "Equ2 grid must start at 1");
    }
    for (std::size_t j = 1; j < grid_.size(); ++j) {
      if (!(grid_[j] > grid_[j - 1]) || !std::isfinite(grid_[j])) {
        throw validation_error("BadGrid", "grid must be strictly increasing and finite");
      }
    }
  }

  std::size_t kernel_index(std::size_t j) const {
    const std::size_t first = eq_ == Equation::kEqu1 ? 1 : 0;
    if (eq_ == Equation::kEqu1 && j == 0) return 0;
    if (geometric_) return first;
    return j;
  }

  void step(std::size_t j, const RowVec& s, const RowVec& dw, RowVec& out) const {
    const std::size_t ki = kernel_index(j);
    if (eq_ == Equation::kEqu1 && j == 0) {
      out = dw * k_[ki];
    } else {
      out = s * r_[ki] + dw * k_[ki];
    }
  }

  Equation eq_;
  Mat h_tilde_;
  std::vector<double> grid_;
  Mat root_;
  std::vector<double> sqrt_dt_, log_step_;
  bool geometric_ = false;
  std::vector<Mat> r_, k_;
};

/// One Equ1 path on `grid` (starting at 0) with driver covariance `cov`.
inline LimitPath simulate_equ1(const SpectralData& sd, const Mat& cov, std::vector<double> grid,
                               Stream& rng) {
  return LimitScheme(Equation::kEqu1, sd, cov, std::move(grid)).simulate(rng);
}

/// One Equ2 path on `grid` (starting at 1).
inline LimitPath simulate_equ2(const SpectralData& sd, const Mat& cov, std::vector<double> grid,
                               Stream& rng) {
  return LimitScheme(Equation::kEqu2, sd, cov, std::move(grid)).simulate(rng);
}

// ---------------------------------------------------------------------------
// Composite limits.

struct CompositePath {
  std::vector<double> grid;
  PathMat y;  // G1 H + G2
  PathMat n;  // G1 + (int G2/x dx)(I - 1'v)
};

inline CompositePath composite_paths(const LimitPath& g1, const LimitPath& g2, const SpectralData& sd) {
  if (g1.grid != g2.grid || g1.dim() != g2.dim() || g1.dim() != sd.dim()) {
    throw validation_error("GridMismatch", "G1 and G2 must share one grid and dimension");
  }
  const Eigen::Index d = sd.dim();
  const Mat proj = Mat::Identity(d, d) - RowVec::Ones(d).transpose() * sd.v;
  CompositePath c;
  c.grid = g1.grid;
  c.y = g1.values * sd.h + g2.values;
  c.n = g1.values + g2.running_integral * proj;
  return c;
}

/// max_j ||S(t_j) - W(t_j) - (int S H~/s ds)(t_j)||, with W measured from the
/// start of the grid (W_t - W_1 for Equ2).
inline double sde_residual(const LimitPath& path, Equation which) {
  if (!path.has_driver()) throw validation_error("DriverMissing", "path kept no driver");
  if (path.equation != which) {
    throw validation_error("BadGrid", "path was simulated for the other equation");
  }
  const Eigen::Index d = path.dim();
  RowVec w = RowVec::Zero(d);
  double worst = 0.0;
  for (Eigen::Index j = 1; j < path.values.rows(); ++j) {
    w += path.driver.row(j - 1);
    const RowVec r = path.values.row(j) - w - path.running_integral.row(j) * path.h_tilde;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Ensemble statistics.

struct EnsembleStats {
  RowVec mean;
  Mat cov;  // unbiased
  long count = 0;
};

/// Value at time t; linear interpolation between grid points.
inline RowVec value_at(const std::vector<double>& grid, const PathMat& values, double t) {
  if (t < grid.front() || t > grid.back()) throw validation_error("BadGrid", "t outside the grid");
  const auto it = std::lower_bound(grid.begin(), grid.end(), t);
  const auto j = static_cast<Eigen::Index>(it - grid.begin());
  if (*it == t) return values.row(j);
  const double w = (t - grid[static_cast<std::size_t>(j - 1)]) /
                   (grid[static_cast<std::size_t>(j)] - grid[static_cast<std::size_t>(j - 1)]);
  return (1.0 - w) * values.row(j - 1) + w * values.row(j);
}

/// Sample mean and unbiased covariance of the rows of `samples` (one sample
/// per row). Two-pass, so the result depends only on the row order.
inline EnsembleStats ensemble_stats(const Mat& samples) {
  if (samples.rows() < 2) throw validation_error("InsufficientPaths", "need at least two paths");
  EnsembleStats st;
  st.count = static_cast<long>(samples.rows());
  st.mean = samples.colwise().mean();
  const Mat c = samples.rowwise() - st.mean;
  st.cov = c.transpose() * c / static_cast<double>(samples.rows() - 1);
  return st;
}

inline EnsembleStats ensemble_stats(const std::vector<LimitPath>& paths, double t) {
  if (paths.size() < 2) throw validation_error("InsufficientPaths", "need at least two paths");
  Mat s(static_cast<Eigen::Index>(paths.size()), paths.front().dim());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    s.row(static_cast<Eigen::Index>(i)) = value_at(paths[i].grid, paths[i].values, t);
  }
  return ensemble_stats(s);
}

/// Stacked (y, n) composite values at time t.
inline EnsembleStats ensemble_stats(const std::vector<CompositePath>& paths, double t) {
  if (paths.size() < 2) throw validation_error("InsufficientPaths", "need at least two paths");
  const Eigen::Index d = paths.front().y.cols();
  Mat s(static_cast<Eigen::Index>(paths.size()), 2 * d);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    s.row(static_cast<Eigen::Index>(i)) << value_at(paths[i].grid, paths[i].y, t),
        value_at(paths[i].grid, paths[i].n, t);
  }
  return ensemble_stats(s);
}

/// CSV with columns t, S_1..S_d, I_1..I_d.
inline void write_path_csv(const LimitPath& p, std::ostream& os) {
  const Eigen::Index d = p.dim();
  os << 't';
  for (Eigen::Index k = 1; k <= d; ++k) os << ",S_" << k;
  for (Eigen::Index k = 1; k <= d; ++k) os << ",I_" << k;
  os << '\n' << std::setprecision(17);
  for (std::size_t j = 0; j < p.grid.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    os << p.grid[j];
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << p.values(r, k);
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << p.running_integral(r, k);
    os << '\n';
  }
}

}  // namespace gfu

#endif  // GFU_LIMIT_PROCESS_HPP_
