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

// Line-oriented `key = value` configuration files.
//
//   # comment
//   schema_version = 1
//   [rule]            # section header, prefixes following keys with "rule."
//   kind = rpw
//   p1 = 0.5
//   urn.y0 = 1, 1     # dotted keys work anywhere
//
// Values: numbers, comma lists "1, 2", matrices with ';' between rows
// "0.5, 0.5; 0.2, 0.8", and row supports "(1, 0):0.3, (0, 1):0.7".

#ifndef GFU_CONFIG_HPP_
#define GFU_CONFIG_HPP_

#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gfu/core.hpp"
#include "gfu/rules.hpp"

namespace gfu {

inline constexpr int kConfigSchemaVersion = 1;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (trim(s.substr(pos)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw validation_error("BadValue", key + ": '" + s + "' is not a number");
}

inline long parse_long(const std::string& s, const std::string& key) {
  // Accept 1e5 style integers too.
  const double x = parse_double(s, key);
  if (x != std::floor(x) || std::abs(x) > 9e15) {
    throw validation_error("BadValue", key + ": '" + s + "' is not an integer");
  }
  return static_cast<long>(x);
}

}  // namespace detail

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& is) {
    Config c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw validation_error("BadConfig", "line " + std::to_string(lineno) + ": bad section");
        }
        section = detail::trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw validation_error("BadConfig", "line " + std::to_string(lineno) + ": expected key = value");
      }
      std::string key = detail::trim(line.substr(0, eq));
      if (key.empty()) {
        throw validation_error("BadConfig", "line " + std::to_string(lineno) + ": empty key");
      }
      if (!section.empty()) key = section + "." + key;
      c.values_[key] = detail::trim(line.substr(eq + 1));
    }
    if (c.has("schema_version")) {
      const long v = c.get_long("schema_version");
      if (v != kConfigSchemaVersion) {
        throw validation_error("UnsupportedSchema", "schema_version " + std::to_string(v));
      }
    }
    return c;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static Config load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw validation_error("MissingFile", "cannot open " + path);
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  const std::string& get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw validation_error("MissingKey", key);
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const { return detail::parse_double(get_string(key), key); }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long get_long(const std::string& key) const { return detail::parse_long(get_string(key), key); }
  long get_long(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& s = get_string(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw validation_error("BadValue", key + ": '" + s + "' is not a boolean");
  }

  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : detail::split(get_string(key), ',')) {
      out.push_back(detail::parse_double(item, key));
    }
    return out;
  }

  RowVec get_row(const std::string& key) const {
    const auto l = get_list(key);
    return Eigen::Map<const RowVec>(l.data(), static_cast<Eigen::Index>(l.size()));
  }

  Mat get_matrix(const std::string& key) const {
    const auto rows = detail::split(get_string(key), ';');
    Mat m;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<double> r;
      for (const auto& item : detail::split(rows[i], ',')) r.push_back(detail::parse_double(item, key));
      if (i == 0) m.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(r.size()));
      if (static_cast<Eigen::Index>(r.size()) != m.cols()) {
        throw validation_error("BadValue", key + ": ragged matrix");
      }
      for (std::size_t j = 0; j < r.size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[j];
      }
    }
    return m;
  }

  /// "(1, 0):0.3, (0, 1):0.7"
  RowSampler get_support(const std::string& key) const {
    const std::string& s = get_string(key);
    RowSampler out;
    std::size_t pos = 0;
    while (pos < s.size()) {
      const auto open = s.find('(', pos);
      if (open == std::string::npos) break;
      const auto close = s.find(')', open);
      const auto colon = s.find(':', close);
      if (close == std::string::npos || colon == std::string::npos) {
        throw validation_error("BadValue", key + ": expected (x, y, ...):weight");
      }
      std::vector<double> row;
      for (const auto& item : detail::split(s.substr(open + 1, close - open - 1), ',')) {
        row.push_back(detail::parse_double(item, key));
      }
      auto end = s.find(',', colon);
      if (end == std::string::npos) end = s.size();
      out.support.push_back(Eigen::Map<const RowVec>(row.data(), static_cast<Eigen::Index>(row.size())));
      out.weights.push_back(detail::parse_double(detail::trim(s.substr(colon + 1, end - colon - 1)), key));
      pos = end + 1;
    }
    if (out.support.empty()) throw validation_error("EmptySupport", key + " has no support points");
    return out;
  }

  /// Keys not in `known` (exact) and not under any prefix in `prefixes`.
  std::vector<std::string> unknown_keys(const std::set<std::string>& known,
                                        const std::vector<std::string>& prefixes) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      if (known.count(k)) continue;
      bool ok = false;
      for (const auto& p : prefixes) ok = ok || k.rfind(p, 0) == 0;
      if (!ok) out.push_back(k);
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

/// Square matrix from CSV text: one row per line, comma separated, '#'
/// comments allowed.
inline Mat parse_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::vector<double> r;
    for (const auto& item : detail::split(line, ',')) r.push_back(detail::parse_double(item, "matrix"));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw validation_error("BadValue", "matrix file is empty");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw validation_error("BadValue", "ragged matrix");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

inline Mat load_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw validation_error("MissingFile", "cannot open " + path);
  return parse_matrix_csv(is);
}

namespace detail {

inline DiscreteDistribution response_law(const Config& c, const std::string& prefix, const char* p_key) {
  if (c.has(prefix + ".support")) {
    return DiscreteDistribution{c.get_list(prefix + ".support"), c.get_list(prefix + ".weights")};
  }
  const double p = c.get_double(p_key);
  if (!(p >= 0.0 && p <= 1.0)) throw validation_error("InvalidProbability", std::string(p_key));
  return DiscreteDistribution{{0.0, 1.0}, {1.0 - p, p}};
}

}  // namespace detail

/// Builds the rule described under `prefix` (default "rule"):
///   kind = rpw:            p1, p2  or  d1.support/d1.weights, d2.support/d2.weights
///   kind = multinomial:    v           (every row one-hot with probabilities v)
///   kind = homogeneous:    row1, row2, ... supports "(..):w, ..."
///   kind = deterministic:  h           (row q of D always equals row q of h)
///   kind = nonhomogeneous: base.*      (any of the above), perturbation (matrix E
///                          with zero row sums), exponent (H_m = H + m^{-exponent} E)
inline RulePtr build_rule(const Config& c, const std::string& prefix = "rule") {
  const std::string kind = c.get_string(prefix + ".kind");
  if (kind == "rpw") {
    RpwParams p{detail::response_law(c, prefix + ".d1", (prefix + ".p1").c_str()),
                detail::response_law(c, prefix + ".d2", (prefix + ".p2").c_str())};
    if (p.d1.values.size() != p.d1.weights.size() || p.d2.values.size() != p.d2.weights.size()) {
      throw validation_error("InvalidProbability", "support and weights differ in length");
    }
    return rpw_rule(std::move(p));
  }
  if (kind == "multinomial") {
    const RowVec v = c.get_row(prefix + ".v");
    std::vector<RowSampler> rows(static_cast<std::size_t>(v.size()), one_hot_sampler(v));
    return homogeneous_rule(std::move(rows));
  }
  if (kind == "homogeneous") {
    std::vector<RowSampler> rows;
    for (int q = 1; c.has(prefix + ".row" + std::to_string(q)); ++q) {
      rows.push_back(c.get_support(prefix + ".row" + std::to_string(q)));
    }
    if (rows.empty()) throw validation_error("EmptySupport", prefix + ".row1 is missing");
    return homogeneous_rule(std::move(rows));
  }
  if (kind == "deterministic") {
    const Mat h = c.get_matrix(prefix + ".h");
    std::vector<RowSampler> rows;
    for (Eigen::Index q = 0; q < h.rows(); ++q) rows.push_back(point_mass(h.row(q)));
    return homogeneous_rule(std::move(rows));
  }
  if (kind == "nonhomogeneous") {
    RulePtr base = build_rule(c, prefix + ".base");
    const Mat e = c.get_matrix(prefix + ".perturbation");
    const double alpha = c.get_double(prefix + ".exponent");
    if (e.rows() != base->dim() || e.cols() != base->dim()) {
      throw validation_error("DimensionMismatch", "perturbation must be d x d");
    }
    if (e.rowwise().sum().cwiseAbs().maxCoeff() > 1e-12) {
      throw validation_error("RowSumViolation", "perturbation rows must sum to zero");
    }
    return nonhomogeneous_wrapper(base, decaying_perturbation(base->limit_mean(), e, alpha));
  }
  throw validation_error("UnknownRule", "rule kind '" + kind + "'");
}

}  // namespace gfu

#endif  // GFU_CONFIG_HPP_
