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

// Library walk-through: a play-the-winner urn, its limit covariance and a
// small Monte Carlo check of one entry.

#include <iostream>

#include "gfu/gfu.hpp"

int main() {
  const gfu::RulePtr rule = gfu::rpw_rule(gfu::RpwParams::dichotomous(0.7, 0.7));
  const gfu::SpectralData sd = gfu::spectral_analyze(gfu::validate_generating_matrix(rule->limit_mean()));
  const gfu::NoiseMatrices nm = gfu::sigma_matrices(*rule, sd);
  const gfu::CovarianceReport gam = gfu::gamma_subcritical(sd, nm);
  std::cout << "rho = " << sd.rho << "\nGamma =\n" << gam.full() << "\n";

  gfu::UrnState st = gfu::init_urn(gfu::RowVec::Ones(2), rule, 7);
  const gfu::Trajectory t = gfu::run(st, 1000);
  const gfu::DecompositionResiduals res = gfu::decompose(t, sd);
  std::cout << "N_1000 = " << st.n << ", decomposition residuals " << res.y_residual << ", "
            << res.n_residual << "\n";
  return 0;
}
