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

#ifndef GFU_TESTS_TEST_UTIL_HPP_
#define GFU_TESTS_TEST_UTIL_HPP_

#include <functional>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "gfu/core.hpp"
#include "gfu/spectral.hpp"

namespace gfu::testing_util {

inline void ExpectErrorCode(const std::function<void()>& fn, const std::string& code) {
  try {
    fn();
    ADD_FAILURE() << "expected error " << code;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

class RandomGenerator {
 public:
  explicit RandomGenerator(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

  /// Random valid generating matrix with common row sum s and rho < rho_max:
  /// a mixture alpha I + (1 - alpha) P with P row-stochastic.
  Mat generating_matrix(int d, double rho_max, double s) {
    for (;;) {
      Mat p(d, d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) p(i, j) = -std::log(uniform(1e-12, 1.0));
        p.row(i) /= p.row(i).sum();
      }
      const double alpha = uniform(0.0, 0.6);
      const Mat h = alpha * Mat::Identity(d, d) + (1.0 - alpha) * p;
      try {
        const auto sd = spectral_analyze(validate_generating_matrix(h));
        if (sd.rho < rho_max) return s * h;
      } catch (const Error&) {
      }
    }
  }

  /// Random symmetric PSD matrix of rank r with V 1' = 0 when `zero_rows`.
  Mat psd(int d, int r, bool zero_rows) {
    Mat b(r, d);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < d; ++j) b(i, j) = uniform(-1.0, 1.0);
      if (zero_rows) b.row(i).array() -= b.row(i).mean();
    }
    return b.transpose() * b;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace gfu::testing_util

#endif  // GFU_TESTS_TEST_UTIL_HPP_
