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

#ifndef GFU_CORE_HPP_
#define GFU_CORE_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gfu {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
// Urn compositions, allocation counts and v are row vectors throughout.
using RowVec = Eigen::RowVectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using CRowVec = Eigen::RowVectorXcd;

enum class ErrorKind {
  kValidation,  // bad input, CLI exit code 2
  kComparison,  // statistical verdict FAIL, exit code 3
  kNumeric,     // numerical breakdown, exit code 4
};

// Every failure carries a stable code name (e.g. "NonConstantRowSums") so
// callers and tests can match on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error validation_error(std::string code, const std::string& what) {
  return Error(ErrorKind::kValidation, std::move(code), what);
}

inline Error numeric_error(std::string code, const std::string& what) {
  return Error(ErrorKind::kNumeric, std::move(code), what);
}

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return 2;
    case ErrorKind::kComparison: return 3;
    case ErrorKind::kNumeric: return 4;
  }
  return 4;
}

/// Random stream handle. One stream per trajectory or limit path.
using Stream = std::mt19937_64;

// Stream tags keep draws for different purposes of the same replicate apart.
enum class StreamTag : std::uint32_t {
  kUrn = 1,
  kLimitFirst = 2,
  kLimitSecond = 3,
  kLil = 4,
  kTest = 99,
};

/// Counter-based stream derivation: the stream for (master_seed, index, tag)
/// is an mt19937_64 seeded through std::seed_seq with the five 32-bit words
/// {seed lo, seed hi, index lo, index hi, tag}. Results therefore depend only
/// on the replicate index, never on which thread ran it.
inline Stream derive_stream(std::uint64_t master_seed, std::uint64_t index,
                            StreamTag tag = StreamTag::kUrn) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag)};
  return Stream(seq);
}

/// Uniform on [0, 1) from the top 53 bits; bit-identical on every platform.
inline double uniform01(Stream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// log x = ln(max(e, x)), the iterated-logarithm convention used for the
/// envelope functions.
inline double log_e(double x) { return x > 2.718281828459045 ? std::log(x) : 1.0; }

}  // namespace gfu

#endif  // GFU_CORE_HPP_
