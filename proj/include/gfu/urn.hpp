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

// Exact simulation of the urn recursion Y_m = Y_{m-1} + X_m D_m and the
// martingale bookkeeping built on top of a recorded trajectory.

#ifndef GFU_URN_HPP_
#define GFU_URN_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "gfu/core.hpp"
#include "gfu/rules.hpp"
#include "gfu/spectral.hpp"

namespace gfu {

using CountVec = Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic>;

struct UrnState {
  RowVec y;      // ball counts Y_m
  CountVec n;    // draw counts N_m
  double a = 0;  // a_m = Y_m 1'
  long m = 0;
  Stream rng;
  RulePtr rule;
  RowVec scratch;  // sampled row buffer
};

/// Outcome of one draw: the drawn type, the added row of D_m and the row of
/// H_m it is centred on.
struct StepRecord {
  Eigen::Index drawn = 0;
  RowVec row;
  RowVec h_row;
};

inline UrnState init_urn(const RowVec& y0, RulePtr rule, Stream rng) {
  if (!rule) throw validation_error("MissingRule", "urn needs an addition rule");
  if (y0.size() != rule->dim()) {
    throw validation_error("DimensionMismatch", "Y0 has " + std::to_string(y0.size()) +
                                                    " entries, rule has " +
                                                    std::to_string(rule->dim()) + " colours");
  }
  for (Eigen::Index k = 0; k < y0.size(); ++k) {
    if (!(y0(k) > 0.0)) {
      throw validation_error("NonpositiveInitialCount",
                             "Y0(" + std::to_string(k + 1) + ") must be positive");
    }
  }
  UrnState s;
  s.y = y0;
  s.n = CountVec::Zero(y0.size());
  s.a = y0.sum();
  s.m = 0;
  s.rng = std::move(rng);
  s.rule = std::move(rule);
  s.scratch.resize(y0.size());
  return s;
}

inline UrnState init_urn(const RowVec& y0, RulePtr rule, std::uint64_t seed) {
  return init_urn(y0, std::move(rule), derive_stream(seed, 0, StreamTag::kUrn));
}

inline History history_of(const UrnState& s) {
  History h;
  h.stage = s.m + 1;
  h.y = &s.y;
  h.total = s.a;
  return h;
}

/// Adds `row` as the outcome of drawing type k.
inline void apply_draw(UrnState& s, Eigen::Index k, const RowVec& row) {
  s.y += row;
  s.a += row.sum();
  s.n(k) += 1;
  s.m += 1;
}

/// Draw type k with probability Y_k / a from one uniform, half-open bins.
inline Eigen::Index draw_type(const RowVec& y, double a, double u) {
  const double target = u * a;
  double acc = 0.0;
  const Eigen::Index d = y.size();
  for (Eigen::Index k = 0; k + 1 < d; ++k) {
    acc += y(k);
    if (target < acc) return k;
  }
  return d - 1;
}

namespace detail {

inline void guard(const UrnState& s) {
  if (!(s.a > 0.0)) throw numeric_error("AllMassLost", "urn total is not positive");
  if (s.y.minCoeff() <= 0.0) {
    throw numeric_error("NonpositiveCount", "a colour count reached zero before a draw");
  }
}

}  // namespace detail

/// One stage, in place. Only the drawn row of D_m is sampled: the undrawn rows
/// never enter the recursion, so this has the same law as sampling all rows.
inline void step(UrnState& s) {
  detail::guard(s);
  const Eigen::Index k = draw_type(s.y, s.a, uniform01(s.rng));
  s.rule->sample_row(history_of(s), k, s.rng, s.scratch);
  apply_draw(s, k, s.scratch);
}

inline StepRecord step_recorded(UrnState& s) {
  detail::guard(s);
  StepRecord rec;
  const History h = history_of(s);
  rec.drawn = draw_type(s.y, s.a, uniform01(s.rng));
  s.rule->sample_row(h, rec.drawn, s.rng, s.scratch);
  rec.h_row = s.rule->homogeneous() ? RowVec(s.rule->limit_mean().row(rec.drawn))
                                    : s.rule->conditional_mean_row(h, rec.drawn);
  rec.row = s.scratch;
  apply_draw(s, rec.drawn, s.scratch);
  return rec;
}

/// Runs n steps without recording anything.
inline void advance(UrnState& s, long n) {
  for (long i = 0; i < n; ++i) step(s);
}

// ---------------------------------------------------------------------------
// Trajectories.

struct Checkpoint {
  long m = 0;
  RowVec y;
  CountVec n;
  double a = 0;
};

/// Full draw log plus periodic checkpoints of the state. The sampled D row is
/// logged as the sufficient statistic of the rule-internal responses.
struct Trajectory {
  RowVec y0;
  double s = 1.0;              // common row sum of the declared H
  Mat declared_h;              // rule's limit H (raw scale)
  std::vector<Mat> declared_v; // rule's limit V_q (raw scale)
  bool homogeneous = true;
  long stride = 1;
  std::vector<std::int32_t> drawn;  // 0-based type per stage
  std::vector<double> rows;         // n x d, row-major: drawn row of D_m
  std::vector<double> h_rows;       // n x d drawn row of H_m (nonhomogeneous only)
  std::vector<Checkpoint> checkpoints;

  Eigen::Index dim() const { return y0.size(); }
  long length() const { return static_cast<long>(drawn.size()); }

  RowVec row(long m) const {  // D row of stage m (1-based)
    const auto d = dim();
    return Eigen::Map<const RowVec>(rows.data() + (m - 1) * d, d);
  }
  RowVec h_row(long m) const {
    const auto d = dim();
    if (homogeneous) return declared_h.row(drawn[static_cast<std::size_t>(m - 1)]);
    return Eigen::Map<const RowVec>(h_rows.data() + (m - 1) * d, d);
  }
};

inline long default_stride(long n) { return n < 100000 ? 1 : 64; }

namespace detail {

inline Checkpoint checkpoint_of(const UrnState& s) { return Checkpoint{s.m, s.y, s.n, s.a}; }

}  // namespace detail

/// Runs n steps from `state` (which is advanced in place) and records them.
inline Trajectory run(UrnState& state, long n, long stride = 0) {
  if (n < 0) throw validation_error("NegativeLength", "n must be >= 0");
  if (stride <= 0) stride = default_stride(n);
  Trajectory t;
  t.y0 = state.y;
  t.declared_h = state.rule->limit_mean();
  t.declared_v = state.rule->limit_row_covs();
  t.s = t.declared_h.row(0).sum();
  t.homogeneous = state.rule->homogeneous();
  t.stride = stride;
  const auto d = state.y.size();
  t.drawn.reserve(static_cast<std::size_t>(n));
  t.rows.reserve(static_cast<std::size_t>(n * d));
  if (!t.homogeneous) t.h_rows.reserve(static_cast<std::size_t>(n * d));
  t.checkpoints.push_back(detail::checkpoint_of(state));
  for (long i = 1; i <= n; ++i) {
    const StepRecord rec = step_recorded(state);
    t.drawn.push_back(static_cast<std::int32_t>(rec.drawn));
    t.rows.insert(t.rows.end(), rec.row.data(), rec.row.data() + d);
    if (!t.homogeneous) t.h_rows.insert(t.h_rows.end(), rec.h_row.data(), rec.h_row.data() + d);
    if (i % stride == 0 || i == n) t.checkpoints.push_back(detail::checkpoint_of(state));
  }
  return t;
}

inline Trajectory run(UrnState&& state, long n, long stride = 0) {
  UrnState s = std::move(state);
  return run(s, n, stride);
}

/// Replays the log from Y0, calling fn(m, Y_m, N_m, a_m) for m = 0..n.
inline void replay(const Trajectory& t,
                   const std::function<void(long, const RowVec&, const CountVec&, double)>& fn) {
  RowVec y = t.y0;
  CountVec n = CountVec::Zero(t.dim());
  double a = y.sum();
  fn(0, y, n, a);
  for (long m = 1; m <= t.length(); ++m) {
    const RowVec r = t.row(m);
    y += r;
    a += r.sum();
    n(t.drawn[static_cast<std::size_t>(m - 1)]) += 1;
    fn(m, y, n, a);
  }
}

/// True when replaying the log reproduces every stored checkpoint bit for bit.
inline bool verify_checkpoints(const Trajectory& t) {
  std::size_t next = 0;
  bool ok = true;
  replay(t, [&](long m, const RowVec& y, const CountVec& n, double a) {
    if (next < t.checkpoints.size() && t.checkpoints[next].m == m) {
      const auto& c = t.checkpoints[next];
      ok = ok && (c.y.array() == y.array()).all() && (c.n.array() == n.array()).all() && c.a == a;
      ++next;
    }
  });
  return ok && next == t.checkpoints.size();
}

namespace detail {

inline void require_log(const Trajectory& t) {
  const auto d = static_cast<std::size_t>(t.dim());
  if (t.y0.size() == 0 || t.rows.size() != t.drawn.size() * d ||
      (!t.homogeneous && t.h_rows.size() != t.drawn.size() * d) || t.declared_h.size() == 0) {
    throw validation_error("MissingLog", "trajectory does not carry a complete draw log");
  }
}

}  // namespace detail

struct MartingaleTracks {
  Mat m1;  // (n+1) x d, row m holds M_{m1}
  Mat m2;  // (n+1) x d, row m holds M_{m2}
};

/// M_{n1} = sum (X_k - Y_{k-1}/a_{k-1}),  M_{n2} = sum X_m (D_m - H_m), both in
/// units normalised by the common row sum s.
inline MartingaleTracks martingale_tracks(const Trajectory& t) {
  detail::require_log(t);
  const auto d = t.dim();
  const long n = t.length();
  MartingaleTracks out{Mat::Zero(n + 1, d), Mat::Zero(n + 1, d)};
  RowVec prob(d);
  RowVec m1 = RowVec::Zero(d), m2 = RowVec::Zero(d);
  replay(t, [&](long m, const RowVec& y, const CountVec&, double a) {
    if (m > 0) {
      const auto k = t.drawn[static_cast<std::size_t>(m - 1)];
      m1 -= prob;
      m1(k) += 1.0;
      m2 += (t.row(m) - t.h_row(m)) / t.s;
      out.m1.row(m) = m1;
      out.m2.row(m) = m2;
    }
    prob = y / a;
  });
  return out;
}

struct DecompositionResiduals {
  double y_residual = 0.0;  // max_n |Y_n - n v - (M_n2 + M_n1 H + ... + Y_0)|
  double n_residual = 0.0;  // max_n |N_n - n v - (M_n1 + ... + R_n2)|
};

/// Evaluates both sides of the exact expansions of Y_n - n v and N_n - n v
/// (martingale parts, the drift sum over (Y_m - m v)/m and the remainders
/// R_n1, R_n2) for n = 1..length and returns the largest mismatch. Everything
/// is in units normalised by s.
inline DecompositionResiduals decompose(const Trajectory& t, const SpectralData& sd) {
  detail::require_log(t);
  const auto d = t.dim();
  const Mat& h = sd.h;
  const Mat& ht = sd.h_tilde;
  const RowVec& v = sd.v;
  const Mat proj = Mat::Identity(d, d) - RowVec::Ones(d).transpose() * v;  // I - 1'v
  const Mat hn = t.declared_h / t.s;

  DecompositionResiduals res;
  RowVec m1 = RowVec::Zero(d), m2 = RowVec::Zero(d);
  RowVec drift = RowVec::Zero(d);    // sum_{m=1}^{n-1} (Y_m - m v)/m
  RowVec rem_a = RowVec::Zero(d);    // sum_{m=1}^{n-1} ((m - a_m)/m)(Y_m/a_m - v)
  RowVec hdev = RowVec::Zero(d);     // sum_{m=1}^{n} X_m (H_m - H)
  RowVec prob(d);
  RowVec y0n, start;  // Y_0/s and Y_0/a_0 - v
  RowVec prev_y;
  double prev_a = 0.0;

  replay(t, [&](long m, const RowVec& y_raw, const CountVec& counts, double a_raw) {
    const RowVec y = y_raw / t.s;
    const double a = a_raw / t.s;
    if (m == 0) {
      y0n = y;
      start = y / a - v;
    } else {
      const auto k = t.drawn[static_cast<std::size_t>(m - 1)];
      m1 -= prob;
      m1(k) += 1.0;
      m2 += (t.row(m) - t.h_row(m)) / t.s;
      hdev += t.h_row(m) / t.s - hn.row(k);
      if (m >= 2) {
        const double mm = static_cast<double>(m - 1);
        drift += (prev_y - mm * v) / mm;
        rem_a += ((mm - prev_a) / mm) * (prev_y / prev_a - v);
      }
      const double nn = static_cast<double>(m);
      const RowVec r1 = start * ht + rem_a * ht + hdev;
      const RowVec r2 = start + rem_a * proj;
      const RowVec lhs_y = y - nn * v;
      const RowVec rhs_y = m2 + m1 * h + drift * ht + r1 + y0n;
      const RowVec lhs_n = counts.cast<double>() - nn * v;
      const RowVec rhs_n = m1 + drift * proj + r2;
      res.y_residual = std::max(res.y_residual, (lhs_y - rhs_y).cwiseAbs().maxCoeff());
      res.n_residual = std::max(res.n_residual, (lhs_n - rhs_n).cwiseAbs().maxCoeff());
    }
    prob = y / a;
    prev_y = y;
    prev_a = a;
  });
  return res;
}

// ---------------------------------------------------------------------------
// Conditional covariance structure of (M_1, M_2) across replicates.

struct CovCheckReport {
  Mat cross_mean;  // average of dM1' dM2 over all stages and replicates
  Mat cross_se;
  double max_cross_z = 0.0;
  Mat q1;  // replicate average of (1/n) sum dM1' dM1
  Mat q2;  // replicate average of (1/n) sum dM2' dM2
  Mat sigma1;
  Mat sigma2;
  double q1_rel_err = 0.0;  // Frobenius, relative to sigma1
  double q2_rel_err = 0.0;  // relative to sigma2 (absolute when sigma2 = 0)
};

/// Streaming form of the check: trajectories are added one at a time so large
/// replicate counts never need to be held in memory together.
class CovCheckAccumulator {
 public:
  void add(const Trajectory& t) {
    detail::require_log(t);
    if (count_ == 0 && replicates_ == 0) init(t);
    if (t.dim() != d_ || !(t.declared_h.array() == declared_h_.array()).all()) {
      throw validation_error("InsufficientReplicates", "replicates must share one rule");
    }
    ++replicates_;
    const long n = t.length();
    if (n < 1) return;
    const MartingaleTracks tr = martingale_tracks(t);
    Mat a1 = Mat::Zero(d_, d_), a2 = Mat::Zero(d_, d_);
    for (long m = 1; m <= n; ++m) {
      const RowVec dm1 = tr.m1.row(m) - tr.m1.row(m - 1);
      const RowVec dm2 = tr.m2.row(m) - tr.m2.row(m - 1);
      const Mat cross = dm1.transpose() * dm2;
      sum_ += cross;
      sumsq_ += cross.cwiseProduct(cross);
      a1 += dm1.transpose() * dm1;
      a2 += dm2.transpose() * dm2;
      count_ += 1.0;
    }
    q1_ += a1 / static_cast<double>(n);
    q2_ += a2 / static_cast<double>(n);
  }

  CovCheckReport report() const {
    if (replicates_ < 2 || count_ < 2) {
      throw validation_error("InsufficientReplicates", "need at least two non-empty trajectories");
    }
    CovCheckReport rep;
    rep.sigma1 = sigma1_;
    rep.sigma2 = sigma2_;
    const double r = static_cast<double>(replicates_);
    rep.q1 = q1_ / r;
    rep.q2 = q2_ / r;
    rep.cross_mean = sum_ / count_;
    const Mat var = (sumsq_ / count_ - rep.cross_mean.cwiseProduct(rep.cross_mean)) * (count_ / (count_ - 1));
    rep.cross_se = (var.cwiseMax(0.0) / count_).cwiseSqrt();
    for (Eigen::Index i = 0; i < d_; ++i) {
      for (Eigen::Index j = 0; j < d_; ++j) {
        if (rep.cross_se(i, j) > 0.0) {
          rep.max_cross_z = std::max(rep.max_cross_z, std::abs(rep.cross_mean(i, j)) / rep.cross_se(i, j));
        }
      }
    }
    const double n1 = rep.sigma1.norm();
    rep.q1_rel_err = n1 > 0 ? (rep.q1 - rep.sigma1).norm() / n1 : (rep.q1 - rep.sigma1).norm();
    const double n2 = rep.sigma2.norm();
    rep.q2_rel_err = n2 > 0 ? (rep.q2 - rep.sigma2).norm() / n2 : (rep.q2 - rep.sigma2).norm();
    return rep;
  }

 private:
  void init(const Trajectory& t) {
    d_ = t.dim();
    declared_h_ = t.declared_h;
    const SpectralData sd = spectral_analyze(validate_generating_matrix(t.declared_h, 1e-9));
    sigma1_ = Mat(sd.v.asDiagonal()) - sd.v.transpose() * sd.v;
    sigma2_ = Mat::Zero(d_, d_);
    for (Eigen::Index q = 0; q < d_; ++q) {
      sigma2_ += sd.v(q) * t.declared_v[static_cast<std::size_t>(q)] / (t.s * t.s);
    }
    sum_ = sumsq_ = q1_ = q2_ = Mat::Zero(d_, d_);
  }

  Eigen::Index d_ = 0;
  Mat declared_h_, sigma1_, sigma2_, sum_, sumsq_, q1_, q2_;
  double count_ = 0.0;
  long replicates_ = 0;
};

inline CovCheckReport conditional_cov_check(const std::vector<Trajectory>& replicates) {
  if (replicates.size() < 2) {
    throw validation_error("InsufficientReplicates", "need at least two trajectories");
  }
  CovCheckAccumulator acc;
  for (const auto& t : replicates) acc.add(t);
  return acc.report();
}

// ---------------------------------------------------------------------------
// Export and persistence.

/// CSV with columns m, drawn_type, D_1..D_d, Y_1..Y_d, N_1..N_d, a. The m = 0
/// row leaves drawn_type and D empty. Types are 1-based.
inline void write_trajectory_csv(const Trajectory& t, std::ostream& os) {
  const auto d = t.dim();
  os << "m,drawn_type";
  for (Eigen::Index k = 1; k <= d; ++k) os << ",D_" << k;
  for (Eigen::Index k = 1; k <= d; ++k) os << ",Y_" << k;
  for (Eigen::Index k = 1; k <= d; ++k) os << ",N_" << k;
  os << ",a\n";
  os << std::setprecision(17);
  replay(t, [&](long m, const RowVec& y, const CountVec& n, double a) {
    os << m << ',';
    if (m > 0) {
      os << t.drawn[static_cast<std::size_t>(m - 1)] + 1;
      const RowVec r = t.row(m);
      for (Eigen::Index k = 0; k < d; ++k) os << ',' << r(k);
    } else {
      for (Eigen::Index k = 0; k < d; ++k) os << ',';
    }
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << y(k);
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << n(k);
    os << ',' << a << '\n';
  });
}

// Binary checkpoint format, native endianness:
//   "GFUTRAJ" '\0', u32 version, i64 d, i64 n, i64 stride, u8 homogeneous,
//   f64 s, f64 y0[d], f64 H[d*d], f64 V[d*d*d], i32 drawn[n], f64 rows[n*d],
//   f64 h_rows[n*d] (nonhomogeneous only), i64 #checkpoints,
//   per checkpoint: i64 m, f64 y[d], i64 n[d], f64 a.
inline constexpr std::uint32_t kTrajectoryFormatVersion = 1;

namespace detail {

template <typename T>
void put(std::ostream& os, const T& x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}
template <typename T>
void put_n(std::ostream& os, const T* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(T)));
}
template <typename T>
T get(std::istream& is) {
  T x{};
  is.read(reinterpret_cast<char*>(&x), sizeof(T));
  if (!is) throw validation_error("CorruptTrajectory", "unexpected end of file");
  return x;
}
template <typename T>
void get_n(std::istream& is, T* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(T)));
  if (!is) throw validation_error("CorruptTrajectory", "unexpected end of file");
}

}  // namespace detail

inline void save_trajectory(const Trajectory& t, std::ostream& os) {
  const auto d = static_cast<std::int64_t>(t.dim());
  const auto n = static_cast<std::int64_t>(t.length());
  os.write("GFUTRAJ\0", 8);
  detail::put(os, kTrajectoryFormatVersion);
  detail::put(os, d);
  detail::put(os, n);
  detail::put(os, static_cast<std::int64_t>(t.stride));
  detail::put(os, static_cast<std::uint8_t>(t.homogeneous ? 1 : 0));
  detail::put(os, t.s);
  detail::put_n(os, t.y0.data(), static_cast<std::size_t>(d));
  detail::put_n(os, t.declared_h.data(), static_cast<std::size_t>(d * d));
  for (const auto& vq : t.declared_v) detail::put_n(os, vq.data(), static_cast<std::size_t>(d * d));
  detail::put_n(os, t.drawn.data(), t.drawn.size());
  detail::put_n(os, t.rows.data(), t.rows.size());
  if (!t.homogeneous) detail::put_n(os, t.h_rows.data(), t.h_rows.size());
  detail::put(os, static_cast<std::int64_t>(t.checkpoints.size()));
  for (const auto& c : t.checkpoints) {
    detail::put(os, static_cast<std::int64_t>(c.m));
    detail::put_n(os, c.y.data(), static_cast<std::size_t>(d));
    detail::put_n(os, c.n.data(), static_cast<std::size_t>(d));
    detail::put(os, c.a);
  }
}

inline Trajectory load_trajectory(std::istream& is) {
  char magic[8];
  detail::get_n(is, magic, 8);
  if (std::memcmp(magic, "GFUTRAJ\0", 8) != 0) {
    throw validation_error("CorruptTrajectory", "bad magic");
  }
  const auto version = detail::get<std::uint32_t>(is);
  if (version != kTrajectoryFormatVersion) {
    throw validation_error("UnsupportedVersion",
                           "trajectory format version " + std::to_string(version));
  }
  Trajectory t;
  const auto d = detail::get<std::int64_t>(is);
  const auto n = detail::get<std::int64_t>(is);
  if (d < 1 || n < 0) throw validation_error("CorruptTrajectory", "bad header");
  t.stride = static_cast<long>(detail::get<std::int64_t>(is));
  t.homogeneous = detail::get<std::uint8_t>(is) != 0;
  t.s = detail::get<double>(is);
  t.y0.resize(d);
  detail::get_n(is, t.y0.data(), static_cast<std::size_t>(d));
  t.declared_h.resize(d, d);
  detail::get_n(is, t.declared_h.data(), static_cast<std::size_t>(d * d));
  t.declared_v.assign(static_cast<std::size_t>(d), Mat(d, d));
  for (auto& vq : t.declared_v) detail::get_n(is, vq.data(), static_cast<std::size_t>(d * d));
  t.drawn.resize(static_cast<std::size_t>(n));
  detail::get_n(is, t.drawn.data(), t.drawn.size());
  t.rows.resize(static_cast<std::size_t>(n * d));
  detail::get_n(is, t.rows.data(), t.rows.size());
  if (!t.homogeneous) {
    t.h_rows.resize(static_cast<std::size_t>(n * d));
    detail::get_n(is, t.h_rows.data(), t.h_rows.size());
  }
  const auto nc = detail::get<std::int64_t>(is);
  for (std::int64_t i = 0; i < nc; ++i) {
    Checkpoint c;
    c.m = static_cast<long>(detail::get<std::int64_t>(is));
    c.y.resize(d);
    detail::get_n(is, c.y.data(), static_cast<std::size_t>(d));
    c.n.resize(d);
    detail::get_n(is, c.n.data(), static_cast<std::size_t>(d));
    c.a = detail::get<double>(is);
    t.checkpoints.push_back(std::move(c));
  }
  return t;
}

}  // namespace gfu

#endif  // GFU_URN_HPP_
