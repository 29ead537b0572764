// Copyright 2026 the etsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ETSIM_EXPFIT_HPP
#define ETSIM_EXPFIT_HPP

#include <complex>
#include <vector>

namespace etsim {

struct ExpFitResult {
  std::vector<std::complex<double>> amplitudes;
  std::vector<std::complex<double>> decays;   // Re > 0 enforced
  double max_rel_deviation = 0.0;             // against max |value| on the grid
};

/// Least-squares fit of samples (t_i, y_i) by sum_m a_m exp(-nu_m t_i).
/// Decay rates are optimized by damped Gauss-Newton with the amplitudes
/// eliminated by a linear solve (variable projection); starts from a Prony
/// estimate plus randomized restarts.
ExpFitResult fit_exponential_sum(const std::vector<double>& ts,
                                 const std::vector<std::complex<double>>& ys,
                                 int n_terms, int n_starts = 8,
                                 unsigned seed = 12345);

}  // namespace etsim

#endif
