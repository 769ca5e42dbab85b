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

// Monte Carlo experiments that put simulated urns next to their Gaussian
// limits, plus the comparison, normality and envelope statistics used to
// judge them.

#ifndef GFU_HARNESS_HPP_
#define GFU_HARNESS_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "gfu/config.hpp"
#include "gfu/core.hpp"
#include "gfu/covariance.hpp"
#include "gfu/limit_process.hpp"
#include "gfu/rules.hpp"
#include "gfu/spectral.hpp"
#include "gfu/urn.hpp"

namespace gfu {

// ---------------------------------------------------------------------------
// Parallel loop.

/// Calls fn(i) for i in [0, count) on `threads` workers pulling indices from
/// a shared counter. The first exception thrown by any worker is rethrown.
inline void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<long>(threads, std::max(1L, count)));
  if (threads == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Comparison.

struct Verdict {
  bool pass = false;
  double tol = 0.0;
  double frobenius_rel_err = 0.0;
  Mat entry_err;  // relative per entry; absolute where the theoretical entry is null
  double max_entry_err = 0.0;
};

inline Verdict compare(const Mat& empirical, const Mat& theoretical, double tol) {
  if (empirical.rows() != theoretical.rows() || empirical.cols() != theoretical.cols()) {
    throw validation_error("ShapeMismatch", "matrices differ in shape");
  }
  if (!(tol > 0.0)) throw validation_error("BadTolerance", "tolerance must be positive");
  Verdict v;
  v.tol = tol;
  const double tnorm = theoretical.norm();
  const double diff = (empirical - theoretical).norm();
  v.frobenius_rel_err = tnorm > 0.0 ? diff / tnorm : diff;
  const double null_level = 1e-10 * (theoretical.size() ? theoretical.cwiseAbs().maxCoeff() : 0.0);
  v.entry_err = Mat::Zero(empirical.rows(), empirical.cols());
  for (Eigen::Index i = 0; i < empirical.rows(); ++i) {
    for (Eigen::Index j = 0; j < empirical.cols(); ++j) {
      const double t = theoretical(i, j);
      const double e = std::abs(empirical(i, j) - t);
      v.entry_err(i, j) = std::abs(t) > null_level && std::abs(t) > 0.0 ? e / std::abs(t) : e;
    }
  }
  v.max_entry_err = v.entry_err.size() ? v.entry_err.maxCoeff() : 0.0;
  v.pass = v.frobenius_rel_err <= tol;
  return v;
}

// ---------------------------------------------------------------------------
// Normality: Mahalanobis distances against a chi-square law.

/// Asymptotic Kolmogorov tail probability P(sqrt(n) D_n > x) with the
/// finite-n correction x = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline double ks_pvalue(double d_stat, long n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d_stat;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

/// One-sample KS statistic of `samples` against the chi-square(dof) CDF.
inline double ks_chi_square(std::vector<double> samples, int dof) {
  std::sort(samples.begin(), samples.end());
  const boost::math::chi_squared dist(dof);
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = boost::math::cdf(dist, std::max(samples[i], 0.0));
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct NormalityResult {
  int dof = 0;
  double ks_stat = 0.0;
  double p_value = 1.0;
  bool rejected = false;
};

/// Projects the rows of `samples` onto the eigenvectors of `theory` whose
/// eigenvalues exceed 1e-10 of the largest, and compares the squared
/// Mahalanobis distances with chi-square(rank).
inline NormalityResult normality_test(const Mat& samples, const Mat& theory, double alpha) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (theory + theory.transpose()));
  const Vec& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-10 * top) keep.push_back(i);
  }
  NormalityResult r;
  r.dof = static_cast<int>(keep.size());
  if (top <= 0.0 || keep.empty()) {
    // Degenerate limit: every fluctuation must vanish.
    r.rejected = samples.size() > 0 && samples.cwiseAbs().maxCoeff() > 1e-9;
    r.p_value = r.rejected ? 0.0 : 1.0;
    return r;
  }
  Mat basis(theory.rows(), static_cast<Eigen::Index>(keep.size()));
  Vec inv(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    basis.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
    inv(static_cast<Eigen::Index>(k)) = 1.0 / ev(keep[k]);
  }
  const Mat proj = samples * basis;
  std::vector<double> d2(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index i = 0; i < proj.rows(); ++i) {
    d2[static_cast<std::size_t>(i)] = proj.row(i).cwiseAbs2().dot(inv.transpose());
  }
  r.ks_stat = ks_chi_square(std::move(d2), r.dof);
  r.p_value = ks_pvalue(r.ks_stat, static_cast<long>(samples.rows()));
  r.rejected = r.p_value < alpha;
  return r;
}

// ---------------------------------------------------------------------------
// Experiment configuration.

/// Selects one fluctuation component: Y_n/s - n v or N_n - n v, colour index.
struct Component {
  bool counts = true;  // true: N, false: Y
  Eigen::Index index = 0;

  static Component parse(const std::string& s) {
    if (s.size() < 2 || (s[0] != 'N' && s[0] != 'Y')) {
      throw validation_error("BadValue", "component must look like N1 or Y2");
    }
    const long k = detail::parse_long(s.substr(1), "component");
    if (k < 1) throw validation_error("BadValue", "component index starts at 1");
    return Component{s[0] == 'N', static_cast<Eigen::Index>(k - 1)};
  }
  std::string name() const { return std::string(counts ? "N" : "Y") + std::to_string(index + 1); }
};

struct LilConfig {
  std::vector<long> horizons;
  Component component;
  long replicates = 100;
  long min_n = 100;
};

struct ExperimentConfig {
  RulePtr rule;
  std::string rule_kind;
  RowVec y0;
  std::vector<long> horizons;
  long replicates = 2;
  std::uint64_t seed = 1;
  std::optional<Regime> expect_regime;
  double tolerance = 0.05;
  double ks_alpha = 1e-3;
  int threads = 1;
  bool deterministic = false;
  double quad_tol = 1e-10;
  SpectralOptions spectral;
  std::optional<LilConfig> lil;
  std::string json_path;
  std::string csv_path;

  void validate() const {
    if (!rule) throw validation_error("MissingRule", "experiment has no rule");
    if (replicates < 2) throw validation_error("InsufficientReplicates", "replicates must be >= 2");
    if (horizons.empty()) throw validation_error("BadHorizons", "no horizons given");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      if (horizons[i] < 1 || (i > 0 && horizons[i] <= horizons[i - 1])) {
        throw validation_error("BadHorizons", "horizons must be positive and strictly increasing");
      }
    }
    if (!(tolerance > 0.0) || !(ks_alpha > 0.0) || !(quad_tol > 0.0)) {
      throw validation_error("BadTolerance", "tolerances must be positive");
    }
    if (y0.size() != rule->dim()) throw validation_error("DimensionMismatch", "Y0 length");
  }
};

namespace detail {

inline std::vector<long> to_longs(const std::vector<double>& xs, const std::string& key) {
  std::vector<long> out;
  for (double x : xs) {
    if (x != std::floor(x) || std::abs(x) > 9e15) throw validation_error("BadValue", key + " needs integers");
    out.push_back(static_cast<long>(x));
  }
  return out;
}

}  // namespace detail

inline ExperimentConfig experiment_from_config(const Config& c) {
  static const std::set<std::string> known = {
      "schema_version", "urn.y0", "experiment.horizons", "experiment.replicates",
      "experiment.seed", "experiment.expect_regime", "experiment.tolerance",
      "experiment.ks_alpha", "experiment.threads", "experiment.deterministic",
      "output.json", "output.csv", "quad.tol", "spectral.eig_tol", "spectral.nu_override",
      "lil.horizons", "lil.component", "lil.replicates", "lil.min_n",
      "limit.grid_points", "limit.paths", "limit.t", "simulate.n", "simulate.stride"};
  const auto unknown = c.unknown_keys(known, {"rule."});
  if (!unknown.empty()) throw validation_error("UnknownKey", unknown.front());

  ExperimentConfig e;
  e.rule = build_rule(c);
  e.rule_kind = c.get_string("rule.kind");
  e.y0 = c.has("urn.y0") ? c.get_row("urn.y0") : RowVec::Ones(e.rule->dim());
  e.horizons = c.has("experiment.horizons")
                   ? detail::to_longs(c.get_list("experiment.horizons"), "experiment.horizons")
                   : std::vector<long>{1000};
  e.replicates = c.get_long("experiment.replicates", 1000);
  e.seed = static_cast<std::uint64_t>(c.get_long("experiment.seed", 1));
  if (c.has("experiment.expect_regime")) e.expect_regime = parse_regime(c.get_string("experiment.expect_regime"));
  e.tolerance = c.get_double("experiment.tolerance", 0.05);
  e.ks_alpha = c.get_double("experiment.ks_alpha", 1e-3);
  e.threads = static_cast<int>(c.get_long("experiment.threads", 1));
  e.deterministic = c.get_bool("experiment.deterministic", false);
  e.quad_tol = c.get_double("quad.tol", 1e-10);
  e.spectral.eig_tol = c.get_double("spectral.eig_tol", 1e-9);
  if (c.has("spectral.nu_override")) e.spectral.nu_override = static_cast<int>(c.get_long("spectral.nu_override"));
  if (c.has("lil.horizons")) {
    LilConfig l;
    l.horizons = detail::to_longs(c.get_list("lil.horizons"), "lil.horizons");
    l.component = Component::parse(c.get_string("lil.component", "N1"));
    l.replicates = c.get_long("lil.replicates", 100);
    l.min_n = c.get_long("lil.min_n", 100);
    e.lil = l;
  }
  e.json_path = c.get_string("output.json", "");
  e.csv_path = c.get_string("output.csv", "");
  e.validate();
  return e;
}

// ---------------------------------------------------------------------------
// Fluctuations.

/// n^{-1/2} for rho < 1/2, n^{-1/2} (log n)^{1/2 - nu} for rho = 1/2.
inline double fluctuation_scale(long n, const SpectralData& sd) {
  const double x = static_cast<double>(n);
  double s = 1.0 / std::sqrt(x);
  if (sd.regime == Regime::kCritical) s *= std::pow(std::log(std::max(x, 2.0)), 0.5 - sd.nu);
  return s;
}

/// Unscaled (Y_n/s - n v, N_n - n v).
inline RowVec fluctuation(const UrnState& st, const SpectralData& sd, double s) {
  const Eigen::Index d = sd.dim();
  const double n = static_cast<double>(st.m);
  RowVec out(2 * d);
  out.head(d) = st.y / s - n * sd.v;
  out.tail(d) = st.n.cast<double>() - n * sd.v;
  return out;
}

// ---------------------------------------------------------------------------
// Reports.

struct HorizonResult {
  long n = 0;
  double scale = 1.0;
  RowVec mean;
  RowVec mean_se;
  double max_mean_z = 0.0;
  Mat cov;
  Verdict verdict;
  NormalityResult normality;
  RowVec var_ratio;  // Var(N_k) / Var(Y_k) per colour
};

struct EnvelopeReport {
  std::string component;
  std::string envelope;
  long min_n = 0;
  std::vector<long> horizons;
  std::vector<double> median;
  std::vector<double> p95;
  Mat sups;  // replicates x horizons
  double median_ratio = 0.0;  // median at the last horizon / median at the first
};

struct ExperimentReport {
  std::string rule_kind;
  RowVec y0;
  std::uint64_t seed = 0;
  long replicates = 0;
  int threads = 1;
  bool deterministic = false;
  SpectralData spectral;
  CovarianceReport theory;
  std::vector<HorizonResult> horizons;
  std::optional<EnvelopeReport> lil;
  std::optional<DiagnosticsReport> diagnostics;
  bool pass = false;
  double wall_seconds = 0.0;
};

inline double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double h = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

/// Envelope sqrt(2 n log log n), or sqrt(2 n log n log log log n) at rho = 1/2,
/// with log x = ln(max(e, x)).
inline double lil_envelope_value(long n, Regime regime) {
  const double x = static_cast<double>(n);
  if (regime == Regime::kCritical) return std::sqrt(2.0 * x * log_e(x) * log_e(log_e(log_e(x))));
  return std::sqrt(2.0 * x * log_e(log_e(x)));
}

inline EnvelopeReport lil_envelope(const ExperimentConfig& cfg, const LilConfig& lil) {
  if (!cfg.rule) throw validation_error("MissingRule", "experiment has no rule");
  if (lil.horizons.empty() || lil.horizons.back() < 100000) {
    throw validation_error("HorizonTooShort", "the largest envelope horizon must be >= 1e5");
  }
  for (std::size_t i = 1; i < lil.horizons.size(); ++i) {
    if (lil.horizons[i] <= lil.horizons[i - 1]) {
      throw validation_error("BadHorizons", "envelope horizons must increase");
    }
  }
  if (lil.replicates < 2) throw validation_error("InsufficientReplicates", "need >= 2 replicates");
  if (lil.component.index >= cfg.rule->dim()) throw validation_error("BadValue", "component index");
  const SpectralData sd =
      spectral_analyze(validate_generating_matrix(cfg.rule->limit_mean()), cfg.spectral);
  const double s = cfg.rule->limit_mean().row(0).sum();
  const double vk = sd.v(lil.component.index);

  EnvelopeReport rep;
  rep.component = lil.component.name();
  rep.envelope = sd.regime == Regime::kCritical ? "sqrt(2 n log n log log log n)" : "sqrt(2 n log log n)";
  rep.min_n = lil.min_n;
  rep.horizons = lil.horizons;
  const auto nh = static_cast<Eigen::Index>(lil.horizons.size());
  rep.sups = Mat::Zero(lil.replicates, nh);
  parallel_for(lil.replicates, cfg.threads, [&](long r) {
    UrnState st = init_urn(cfg.y0, cfg.rule, derive_stream(cfg.seed, static_cast<std::uint64_t>(r), StreamTag::kLil));
    double sup = 0.0;
    Eigen::Index next = 0;
    const Eigen::Index k = lil.component.index;
    for (long n = 1; n <= lil.horizons.back(); ++n) {
      step(st);
      if (n >= lil.min_n) {
        const double level = lil.component.counts ? static_cast<double>(st.n(k)) : st.y(k) / s;
        const double dev = std::abs(level - static_cast<double>(n) * vk);
        sup = std::max(sup, dev / lil_envelope_value(n, sd.regime));
      }
      if (n == lil.horizons[static_cast<std::size_t>(next)]) {
        rep.sups(r, next) = sup;
        ++next;
      }
    }
  });
  for (Eigen::Index h = 0; h < nh; ++h) {
    std::vector<double> col(rep.sups.col(h).data(), rep.sups.col(h).data() + rep.sups.rows());
    rep.median.push_back(quantile(col, 0.5));
    rep.p95.push_back(quantile(col, 0.95));
  }
  rep.median_ratio = rep.median.front() > 0.0 ? rep.median.back() / rep.median.front()
                                              : (rep.median.back() > 0.0 ? INFINITY : 1.0);
  return rep;
}

/// H_m - H along one simulated history, normalised by s, for the drift
/// diagnostics of nonhomogeneous rules.
inline DiagnosticsReport history_diagnostics(const ExperimentConfig& cfg, long horizon) {
  UrnState st = init_urn(cfg.y0, cfg.rule, derive_stream(cfg.seed, 0, StreamTag::kUrn));
  const double s = cfg.rule->limit_mean().row(0).sum();
  std::vector<Mat> hs;
  hs.reserve(static_cast<std::size_t>(horizon));
  for (long m = 1; m <= horizon; ++m) {
    hs.push_back(cfg.rule->conditional_mean(history_of(st)) / s);
    step(st);
  }
  return assumption_diagnostics(hs, cfg.rule->limit_mean() / s, horizon);
}

inline ExperimentReport mc_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  const GeneratingMatrix g = validate_generating_matrix(cfg.rule->limit_mean());
  ExperimentReport rep;
  rep.spectral = spectral_analyze(g, cfg.spectral);
  const SpectralData& sd = rep.spectral;
  if (cfg.expect_regime && *cfg.expect_regime != sd.regime) {
    throw validation_error("RegimeMismatch", std::string("expected ") + regime_name(*cfg.expect_regime) +
                                                 ", rule is " + regime_name(sd.regime));
  }
  const NoiseMatrices nm = sigma_matrices(*cfg.rule, sd);
  rep.theory = gamma(sd, nm, cfg.quad_tol);
  const Mat theory = rep.theory.full();
  {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (theory + theory.transpose()));
    if (es.info() != Eigen::Success) {
      throw numeric_error("SingularTheoreticalCovariance", "eigen-decomposition of Gamma failed");
    }
  }
  rep.rule_kind = cfg.rule_kind.empty() ? cfg.rule->kind() : cfg.rule_kind;
  rep.y0 = cfg.y0;
  rep.seed = cfg.seed;
  rep.replicates = cfg.replicates;
  rep.threads = cfg.threads;
  rep.deterministic = cfg.deterministic;

  const Eigen::Index d = sd.dim();
  const double s = g.s;
  const std::size_t nh = cfg.horizons.size();
  // One slot per replicate and horizon: results never depend on scheduling.
  std::vector<Mat> samples(nh, Mat(cfg.replicates, 2 * d));
  parallel_for(cfg.replicates, cfg.threads, [&](long r) {
    UrnState st = init_urn(cfg.y0, cfg.rule, derive_stream(cfg.seed, static_cast<std::uint64_t>(r), StreamTag::kUrn));
    for (std::size_t h = 0; h < nh; ++h) {
      advance(st, cfg.horizons[h] - st.m);
      samples[h].row(r) = fluctuation(st, sd, s) * fluctuation_scale(cfg.horizons[h], sd);
    }
  });

  rep.pass = true;
  for (std::size_t h = 0; h < nh; ++h) {
    HorizonResult hr;
    hr.n = cfg.horizons[h];
    hr.scale = fluctuation_scale(hr.n, sd);
    const EnsembleStats es = ensemble_stats(samples[h]);
    hr.mean = es.mean;
    hr.cov = 0.5 * (es.cov + es.cov.transpose());
    hr.mean_se = (hr.cov.diagonal().transpose() / static_cast<double>(cfg.replicates)).cwiseSqrt();
    for (Eigen::Index k = 0; k < 2 * d; ++k) {
      if (hr.mean_se(k) > 0.0) hr.max_mean_z = std::max(hr.max_mean_z, std::abs(hr.mean(k)) / hr.mean_se(k));
    }
    hr.verdict = compare(hr.cov, theory, cfg.tolerance);
    hr.normality = normality_test(samples[h], theory, cfg.ks_alpha);
    hr.var_ratio = RowVec(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      const double vy = hr.cov(k, k);
      hr.var_ratio(k) = vy > 0.0 ? hr.cov(d + k, d + k) / vy : 0.0;
    }
    rep.pass = rep.pass && hr.verdict.pass && !hr.normality.rejected;
    rep.horizons.push_back(std::move(hr));
  }
  if (cfg.lil) rep.lil = lil_envelope(cfg, *cfg.lil);
  if (!cfg.rule->homogeneous()) {
    rep.diagnostics = history_diagnostics(cfg, std::min<long>(cfg.horizons.back(), 100000));
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Composite limit ensembles.

/// Stacked (y(T), n(T)) samples of the composite limit, one row per path;
/// path i uses streams (seed, i) tagged first and second. For rho < 1/2 the
/// Equ1 processes run on [0, T] and are returned unscaled; at rho = 1/2 the
/// Equ2 processes run on [1, T] and are scaled by (T log T)^{-1/2}.
inline Mat limit_ensemble(const SpectralData& sd, const NoiseMatrices& nm, int grid_points, long paths,
                          std::uint64_t seed, int threads, double horizon = 1.0) {
  if (paths < 2) throw validation_error("InsufficientPaths", "need at least two paths");
  const bool critical = sd.regime == Regime::kCritical;
  const Equation eq = critical ? Equation::kEqu2 : Equation::kEqu1;
  const auto grid = critical ? equ2_grid(grid_points, horizon) : equ1_grid(grid_points, horizon, sd.rho);
  const double scale = critical ? 1.0 / std::sqrt(horizon * std::log(horizon)) : 1.0;
  const LimitScheme first(eq, sd, nm.sigma1, grid);
  const LimitScheme second(eq, sd, nm.sigma2, grid);
  const Eigen::Index d = sd.dim();
  const Mat proj = Mat::Identity(d, d) - RowVec::Ones(d).transpose() * sd.v;
  Mat out(paths, 2 * d);
  parallel_for(paths, threads, [&](long i) {
    Stream r1 = derive_stream(seed, static_cast<std::uint64_t>(i), StreamTag::kLimitFirst);
    Stream r2 = derive_stream(seed, static_cast<std::uint64_t>(i), StreamTag::kLimitSecond);
    RowVec g1(d), i1(d), g2(d), i2(d);
    first.simulate_endpoint(r1, g1.data(), i1.data());
    second.simulate_endpoint(r2, g2.data(), i2.data());
    out.row(i) << scale * (g1 * sd.h + g2), scale * (g1 + i2 * proj);
  });
  return out;
}

// ---------------------------------------------------------------------------
// JSON and CSV output.

inline nlohmann::json to_json(const Verdict& v) {
  return {{"pass", v.pass},
          {"tol", v.tol},
          {"frobenius_rel_err", v.frobenius_rel_err},
          {"max_entry_err", v.max_entry_err},
          {"entry_err", to_json_rows(v.entry_err)}};
}

inline nlohmann::json to_json(const EnvelopeReport& e) {
  return {{"component", e.component},
          {"envelope", e.envelope},
          {"min_n", e.min_n},
          {"horizons", e.horizons},
          {"median", e.median},
          {"p95", e.p95},
          {"median_ratio", e.median_ratio}};
}

inline nlohmann::json to_json(const DiagnosticsReport& r) {
  auto finite = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  };
  return {{"checkpoints", r.checkpoints},
          {"partial_sums", r.partial_sums},
          {"weighted_partial_sums", r.weighted_partial_sums},
          {"growth_exponent", finite(r.growth_exponent)},
          {"term_decay_exponent", finite(r.term_decay_exponent)},
          {"tau_estimate", finite(r.tau_estimate)},
          {"weighted_sum_converges", r.weighted_sum_converges},
          {"gates_verdict", false}};
}

inline nlohmann::json to_json(const SpectralData& sd) {
  nlohmann::json eig = nlohmann::json::array();
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
    eig.push_back({sd.eigenvalues(i).real(), sd.eigenvalues(i).imag()});
  }
  return {{"v", to_json_vec(sd.v)},
          {"eigenvalues", eig},
          {"rho", sd.rho},
          {"nu", sd.nu},
          {"regime", regime_name(sd.regime)},
          {"boundary_warning", sd.boundary_warning},
          {"h_tilde", to_json_rows(sd.h_tilde)}};
}

/// Deterministic reports leave out wall-clock time and thread count so they
/// are byte-identical across runs and thread counts.
inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["rule_kind"] = r.rule_kind;
  j["y0"] = to_json_vec(r.y0);
  j["spectral"] = to_json(r.spectral);
  j["theory"] = to_json(r.theory);
  nlohmann::json hs = nlohmann::json::array();
  for (const auto& h : r.horizons) {
    hs.push_back({{"n", h.n},
                  {"scale", h.scale},
                  {"mean", to_json_vec(h.mean)},
                  {"mean_se", to_json_vec(h.mean_se)},
                  {"max_mean_z", h.max_mean_z},
                  {"cov", to_json_rows(h.cov)},
                  {"comparison", to_json(h.verdict)},
                  {"normality", {{"dof", h.normality.dof},
                                 {"ks_stat", h.normality.ks_stat},
                                 {"p_value", h.normality.p_value},
                                 {"rejected", h.normality.rejected}}},
                  {"var_ratio_n_over_y", to_json_vec(h.var_ratio)}});
  }
  j["horizons"] = hs;
  if (r.lil) j["lil"] = to_json(*r.lil);
  if (r.diagnostics) j["diagnostics"] = to_json(*r.diagnostics);
  j["provenance"] = {{"seed", r.seed}, {"replicates", r.replicates}, {"deterministic", r.deterministic}};
  if (!r.deterministic) {
    j["provenance"]["threads"] = r.threads;
    j["provenance"]["wall_seconds"] = r.wall_seconds;
  }
  j["verdict"] = r.pass ? "PASS" : "FAIL";
  return j;
}

/// Columns horizon, component, empirical, theoretical, rel_err; one row per
/// covariance entry, labelled cov(A,B) with A, B in Y1..Yd, N1..Nd.
inline void write_summary_csv(const ExperimentReport& r, std::ostream& os) {
  const Eigen::Index d = r.spectral.dim();
  auto label = [d](Eigen::Index i) {
    return std::string(i < d ? "Y" : "N") + std::to_string(i % d + 1);
  };
  const Mat theory = r.theory.full();
  os << "horizon,component,empirical,theoretical,rel_err\n" << std::setprecision(17);
  for (const auto& h : r.horizons) {
    for (Eigen::Index i = 0; i < 2 * d; ++i) {
      for (Eigen::Index j = i; j < 2 * d; ++j) {
        os << h.n << ",cov(" << label(i) << ';' << label(j) << ")," << h.cov(i, j) << ','
           << theory(i, j) << ',' << h.verdict.entry_err(i, j) << '\n';
      }
    }
  }
}

}  // namespace gfu

#endif  // GFU_HARNESS_HPP_
