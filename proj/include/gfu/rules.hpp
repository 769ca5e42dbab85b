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

// Addition rules: how the matrix D_m is sampled and what its conditional
// moments are. Three concrete rules ship here: the generalised randomised
// play-the-winner rule, homogeneous rules with finite-support rows, and a
// nonhomogeneous wrapper whose conditional mean drifts towards H.

#ifndef GFU_RULES_HPP_
#define GFU_RULES_HPP_

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gfu/core.hpp"
#include "gfu/linalg.hpp"

namespace gfu {

/// Read-only view of the history sigma-field F_{m-1} at the moment stage
/// `stage` is about to be drawn.
struct History {
  long stage = 1;       // m, the index of the draw being made (>= 1)
  const RowVec* y = nullptr;  // Y_{m-1}
  double total = 0.0;   // a_{m-1}
};

class AdditionRule {
 public:
  virtual ~AdditionRule() = default;

  virtual Eigen::Index dim() const = 0;
  virtual std::string kind() const = 0;
  virtual bool homogeneous() const = 0;

  /// Samples row q of D_m into `out`.
  virtual void sample_row(const History& h, Eigen::Index q, Stream& rng, RowVec& out) const = 0;

  /// Row q of H_m = E[D_m | F_{m-1}].
  virtual RowVec conditional_mean_row(const History& h, Eigen::Index q) const = 0;

  /// V_{mq} = Cov(row q of D_m | F_{m-1}).
  virtual Mat conditional_row_cov(const History& h, Eigen::Index q) const = 0;

  /// Declared limits H and {V_q}.
  virtual const Mat& limit_mean() const = 0;
  virtual const std::vector<Mat>& limit_row_covs() const = 0;

  /// Upper bound on any sampled entry.
  virtual double support_bound() const = 0;

  /// Every row of D_m sampled independently.
  Mat sample_d(const History& h, Stream& rng) const {
    const Eigen::Index d = dim();
    Mat out(d, d);
    RowVec row(d);
    for (Eigen::Index q = 0; q < d; ++q) {
      sample_row(h, q, rng, row);
      out.row(q) = row;
    }
    return out;
  }

  Mat conditional_mean(const History& h) const {
    const Eigen::Index d = dim();
    Mat out(d, d);
    for (Eigen::Index q = 0; q < d; ++q) out.row(q) = conditional_mean_row(h, q);
    return out;
  }
};

using RulePtr = std::shared_ptr<const AdditionRule>;

/// Finite distribution over real values.
struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> weights;

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += weights[i] * values[i];
    return m;
  }

  double variance() const {
    const double mu = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      v += weights[i] * (values[i] - mu) * (values[i] - mu);
    }
    return v;
  }
};

namespace detail {

inline void check_weights(const std::vector<double>& w, const char* code) {
  if (w.empty()) throw validation_error("EmptySupport", "distribution has no support points");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw validation_error(code, "negative or NaN weight");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw validation_error(code, "weights sum to " + std::to_string(total));
  }
}

// Index of the support point selected by one uniform; half-open bins.
inline std::size_t pick(const std::vector<double>& cumulative, double u) {
  for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
    if (u < cumulative[i]) return i;
  }
  return cumulative.size() - 1;
}

inline std::vector<double> cumulate(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) c[i] = (acc += w[i]);
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Generalised randomised play-the-winner rule.

struct RpwParams {
  DiscreteDistribution d1;  // law of d_1(xi) on [0, 1]
  DiscreteDistribution d2;  // law of d_2(xi) on [0, 1]

  /// Dichotomous responses with d_k(x) = x: success probabilities p1, p2.
  static RpwParams dichotomous(double p1, double p2) {
    for (double p : {p1, p2}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw validation_error("InvalidProbability", "p = " + std::to_string(p));
      }
    }
    return RpwParams{{{0.0, 1.0}, {1.0 - p1, p1}}, {{0.0, 1.0}, {1.0 - p2, p2}}};
  }
};

class RpwRule final : public AdditionRule {
 public:
  explicit RpwRule(RpwParams params) : params_(std::move(params)) {
    for (const auto* dist : {&params_.d1, &params_.d2}) {
      if (dist->values.size() != dist->weights.size()) {
        throw validation_error("InvalidProbability", "support and weights differ in length");
      }
      detail::check_weights(dist->weights, "InvalidProbability");
      for (double x : dist->values) {
        if (!(x >= 0.0 && x <= 1.0)) {
          throw validation_error("InvalidProbability", "response value outside [0, 1]");
        }
      }
    }
    cum1_ = detail::cumulate(params_.d1.weights);
    cum2_ = detail::cumulate(params_.d2.weights);
    const double p1 = params_.d1.mean();
    const double p2 = params_.d2.mean();
    h_.resize(2, 2);
    h_ << p1, 1.0 - p1, 1.0 - p2, p2;
    Mat r(2, 2);
    r << 1.0, -1.0, -1.0, 1.0;
    v_ = {params_.d1.variance() * r, params_.d2.variance() * r};
  }

  const RpwParams& params() const { return params_; }
  double p1() const { return h_(0, 0); }
  double p2() const { return h_(1, 1); }
  double a1() const { return params_.d1.variance(); }
  double a2() const { return params_.d2.variance(); }

  Eigen::Index dim() const override { return 2; }
  std::string kind() const override { return "rpw"; }
  bool homogeneous() const override { return true; }

  void sample_row(const History&, Eigen::Index q, Stream& rng, RowVec& out) const override {
    const auto& dist = q == 0 ? params_.d1 : params_.d2;
    const auto& cum = q == 0 ? cum1_ : cum2_;
    const double x = dist.values[detail::pick(cum, uniform01(rng))];
    out.resize(2);
    if (q == 0) {
      out << x, 1.0 - x;
    } else {
      out << 1.0 - x, x;
    }
  }

  RowVec conditional_mean_row(const History&, Eigen::Index q) const override { return h_.row(q); }
  Mat conditional_row_cov(const History&, Eigen::Index q) const override {
    return v_[static_cast<std::size_t>(q)];
  }
  const Mat& limit_mean() const override { return h_; }
  const std::vector<Mat>& limit_row_covs() const override { return v_; }
  double support_bound() const override { return 1.0; }

 private:
  RpwParams params_;
  std::vector<double> cum1_, cum2_;
  Mat h_;
  std::vector<Mat> v_;
};

inline RulePtr rpw_rule(RpwParams params) {
  return std::make_shared<RpwRule>(std::move(params));
}

// ---------------------------------------------------------------------------
// Homogeneous rules: D_m i.i.d., each row drawn from its own finite support.

struct RowSampler {
  std::vector<RowVec> support;
  std::vector<double> weights;
};

class HomogeneousRule final : public AdditionRule {
 public:
  explicit HomogeneousRule(std::vector<RowSampler> rows, bool allow_negative = false)
      : rows_(std::move(rows)) {
    const auto d = static_cast<Eigen::Index>(rows_.size());
    if (d < 1) throw validation_error("EmptySupport", "no row samplers");
    h_ = Mat::Zero(d, d);
    for (Eigen::Index q = 0; q < d; ++q) {
      const auto& r = rows_[static_cast<std::size_t>(q)];
      if (r.support.empty()) {
        throw validation_error("EmptySupport", "row " + std::to_string(q + 1) + " has no support");
      }
      if (r.support.size() != r.weights.size()) {
        throw validation_error("EmptySupport", "support and weights differ in length");
      }
      detail::check_weights(r.weights, "InvalidWeights");
      Mat cov = Mat::Zero(d, d);
      RowVec mean = RowVec::Zero(d);
      for (std::size_t i = 0; i < r.support.size(); ++i) {
        if (r.support[i].size() != d) {
          throw validation_error("DimensionMismatch", "support vector has wrong length");
        }
        if (!allow_negative && r.support[i].minCoeff() < 0.0) {
          throw validation_error("NegativeAddition", "support vector has a negative entry");
        }
        bound_ = std::max(bound_, r.support[i].maxCoeff());
        mean += r.weights[i] * r.support[i];
      }
      for (std::size_t i = 0; i < r.support.size(); ++i) {
        const RowVec c = r.support[i] - mean;
        cov += r.weights[i] * c.transpose() * c;
      }
      h_.row(q) = mean;
      v_.push_back(cov);
      cum_.push_back(detail::cumulate(r.weights));
    }
  }

  Eigen::Index dim() const override { return h_.rows(); }
  std::string kind() const override { return "homogeneous"; }
  bool homogeneous() const override { return true; }

  void sample_row(const History&, Eigen::Index q, Stream& rng, RowVec& out) const override {
    const auto qi = static_cast<std::size_t>(q);
    out = rows_[qi].support[detail::pick(cum_[qi], uniform01(rng))];
  }

  RowVec conditional_mean_row(const History&, Eigen::Index q) const override { return h_.row(q); }
  Mat conditional_row_cov(const History&, Eigen::Index q) const override {
    return v_[static_cast<std::size_t>(q)];
  }
  const Mat& limit_mean() const override { return h_; }
  const std::vector<Mat>& limit_row_covs() const override { return v_; }
  double support_bound() const override { return bound_; }

 private:
  std::vector<RowSampler> rows_;
  std::vector<std::vector<double>> cum_;
  Mat h_;
  std::vector<Mat> v_;
  double bound_ = -std::numeric_limits<double>::infinity();
};

inline RulePtr homogeneous_rule(std::vector<RowSampler> rows, bool allow_negative = false) {
  return std::make_shared<HomogeneousRule>(std::move(rows), allow_negative);
}

/// Rows are one-hot vectors e_k drawn with probabilities `probs`.
inline RowSampler one_hot_sampler(const RowVec& probs) {
  RowSampler s;
  const Eigen::Index d = probs.size();
  for (Eigen::Index k = 0; k < d; ++k) {
    s.support.push_back(RowVec::Unit(d, k));
    s.weights.push_back(probs(k));
  }
  return s;
}

/// Row always equal to `row`.
inline RowSampler point_mass(const RowVec& row) { return RowSampler{{row}, {1.0}}; }

// ---------------------------------------------------------------------------
// Nonhomogeneous wrapper.

/// Produces H_m from the history (same scale as the base rule's H).
using Perturbation = std::function<Mat(const History&)>;

/// H_m = H + m^{-exponent} E. E must have zero row sums.
inline Perturbation decaying_perturbation(Mat h, Mat e, double exponent) {
  return [h = std::move(h), e = std::move(e), exponent](const History& hist) {
    return Mat(h + std::pow(static_cast<double>(hist.stage), -exponent) * e);
  };
}

/// Sampling shifts the base sample additively by the drawn row of H_m - H,
/// floors negative entries at 0 and rescales the row back to its unfloored
/// sum. The conditional mean is exact whenever the floor is inactive.
class NonhomogeneousRule final : public AdditionRule {
 public:
  NonhomogeneousRule(RulePtr base, Perturbation perturbation)
      : base_(std::move(base)), perturbation_(std::move(perturbation)) {
    if (!base_) throw validation_error("MissingBase", "nonhomogeneous rule needs a base rule");
  }

  Eigen::Index dim() const override { return base_->dim(); }
  std::string kind() const override { return "nonhomogeneous"; }
  bool homogeneous() const override { return false; }
  const AdditionRule& base() const { return *base_; }

  void sample_row(const History& h, Eigen::Index q, Stream& rng, RowVec& out) const override {
    base_->sample_row(h, q, rng, out);
    const RowVec shift = conditional_mean_row(h, q) - base_->limit_mean().row(q);
    const double target = out.sum() + shift.sum();
    out += shift;
    if (out.minCoeff() < 0.0) {
      out = out.cwiseMax(0.0);
      const double s = out.sum();
      if (s > 0.0) out *= target / s;
    }
  }

  RowVec conditional_mean_row(const History& h, Eigen::Index q) const override {
    const Mat hm = perturbation_(h);
    const Mat& base = base_->limit_mean();
    if (hm.rows() != base.rows() || hm.cols() != base.cols()) {
      throw validation_error("DimensionMismatch", "perturbation returned a matrix of wrong shape");
    }
    const double expected = base.row(q).sum();
    if (std::abs(hm.row(q).sum() - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw validation_error("RowSumViolation", "perturbed H_m row " + std::to_string(q + 1) +
                                                    " does not keep the row sum");
    }
    return hm.row(q);
  }

  Mat conditional_row_cov(const History& h, Eigen::Index q) const override {
    return base_->conditional_row_cov(h, q);
  }
  const Mat& limit_mean() const override { return base_->limit_mean(); }
  const std::vector<Mat>& limit_row_covs() const override { return base_->limit_row_covs(); }
  double support_bound() const override {
    // The shift is bounded by sup_m ||H_m - H||; callers with unbounded
    // perturbations get infinity.
    return std::numeric_limits<double>::infinity();
  }

 private:
  RulePtr base_;
  Perturbation perturbation_;
};

inline RulePtr nonhomogeneous_wrapper(RulePtr base, Perturbation perturbation) {
  return std::make_shared<NonhomogeneousRule>(std::move(base), std::move(perturbation));
}

// ---------------------------------------------------------------------------
// Descriptive diagnostics for the drift conditions on H_m.

struct DiagnosticsReport {
  std::vector<long> checkpoints;
  std::vector<double> partial_sums;           // sum_{m<=n} ||H_m - H||
  std::vector<double> weighted_partial_sums;  // sum_{m<=n} ||H_m - H|| / m^{1/2}
  double growth_exponent = 0.0;       // log-log slope of partial_sums
  double term_decay_exponent = 0.0;   // ||H_m - H|| ~ m^{-decay}
  double tau_estimate = 0.0;          // 1/2 - growth exponent; +inf when H_m == H
  bool weighted_sum_converges = true;  // decay + 1/2 > 1
};

inline double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

namespace detail {

// Least-squares slope of log(y) on log(x) over the points with y > 0.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// `h_of(m)` returns H_m for m = 1..horizon. Exponents are fitted on the
/// checkpoints in the last three decades of the horizon.
inline DiagnosticsReport assumption_diagnostics(const std::function<Mat(long)>& h_of,
                                                const Mat& h, long horizon) {
  if (horizon < 1) throw validation_error("BadHorizon", "horizon must be >= 1");
  DiagnosticsReport rep;
  double sum = 0.0, wsum = 0.0;
  long next = 1;
  std::vector<double> term_m, term_v;
  for (long m = 1; m <= horizon; ++m) {
    const double dev = operator_norm(h_of(m) - h);
    sum += dev;
    wsum += dev / std::sqrt(static_cast<double>(m));
    if (m == next || m == horizon) {
      rep.checkpoints.push_back(m);
      rep.partial_sums.push_back(sum);
      rep.weighted_partial_sums.push_back(wsum);
      term_m.push_back(static_cast<double>(m));
      term_v.push_back(dev);
      if (m == next) next *= 2;
    }
  }
  const double lo = std::max(1.0, static_cast<double>(horizon) / 1000.0);
  std::vector<double> xs, ys, tx, ty;
  for (std::size_t i = 0; i < rep.checkpoints.size(); ++i) {
    if (static_cast<double>(rep.checkpoints[i]) < lo) continue;
    xs.push_back(static_cast<double>(rep.checkpoints[i]));
    ys.push_back(rep.partial_sums[i]);
    tx.push_back(term_m[i]);
    ty.push_back(term_v[i]);
  }
  if (sum == 0.0) {
    rep.growth_exponent = 0.0;
    rep.term_decay_exponent = std::numeric_limits<double>::infinity();
    rep.tau_estimate = std::numeric_limits<double>::infinity();
    rep.weighted_sum_converges = true;
    return rep;
  }
  rep.growth_exponent = detail::loglog_slope(xs, ys);
  rep.term_decay_exponent = -detail::loglog_slope(tx, ty);
  rep.tau_estimate = 0.5 - rep.growth_exponent;
  rep.weighted_sum_converges = rep.term_decay_exponent + 0.5 > 1.0;
  return rep;
}

inline DiagnosticsReport assumption_diagnostics(const std::vector<Mat>& h_sequence, const Mat& h,
                                                long horizon) {
  if (static_cast<long>(h_sequence.size()) < horizon) {
    throw validation_error("BadHorizon", "sequence shorter than horizon");
  }
  return assumption_diagnostics(
      [&](long m) { return h_sequence[static_cast<std::size_t>(m - 1)]; }, h, horizon);
}

}  // namespace gfu

#endif  // GFU_RULES_HPP_
