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

#ifndef ETSIM_UNITS_HPP
#define ETSIM_UNITS_HPP

#include <complex>
#include <stdexcept>

namespace etsim {

// Canonical working units: time in ps, energies and rates as angular
// frequencies in rad/ps (hbar = 1). Interfaces speak cm^-1, K, ps, Angstrom.
namespace units {

inline constexpr double cm1_to_radps = 0.188365;   // 2*pi*c, c in cm/ps
inline constexpr double kB_cm1_per_K = 0.695035;

inline double energy(double cm1) { return cm1 * cm1_to_radps; }
inline double to_cm1(double radps) { return radps / cm1_to_radps; }

// inverse temperature in ps (beta = 1/kB T in angular-frequency units)
inline double beta_ps(double temperature_K) {
  if (temperature_K <= 0.0) throw std::invalid_argument("temperature must be > 0 K");
  return 1.0 / (kB_cm1_per_K * temperature_K * cm1_to_radps);
}

}  // namespace units

using complexd = std::complex<double>;

// Configuration or input contract violations; the CLI maps these to exit 1.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures of the numerics themselves; the CLI maps these to exit 2.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace etsim

#endif
