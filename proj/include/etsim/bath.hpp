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

#ifndef ETSIM_BATH_HPP
#define ETSIM_BATH_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "etsim/model.hpp"
#include "etsim/units.hpp"

namespace etsim {

enum class SpectralFamily { lorentzian, ohmic };

std::string to_string(SpectralFamily family);
SpectralFamily family_from_string(const std::string& name);

struct BathSpec {
  SpectralFamily family = SpectralFamily::lorentzian;
  double lambda_cm1 = 35.0;        // reorganization energy scale
  double gamma_cm1 = 50.0;         // cutoff
  double temperature_K = 298.0;
  double r_cor_angstrom = 0.0;     // 0 = uncorrelated
  int correlation_sign = +1;       // +1 / -1
  int matsubara_terms = -1;        // -1 = default by temperature

  // Ohmic canonicalization controls.
  int ohmic_fit_terms = 6;
  double ohmic_t_max_ps = 4.0;
  double ohmic_rel_tol = 1e-3;

  // 3 at ambient temperatures, 100 below 200 K.
  int effective_matsubara_terms() const {
    if (matsubara_terms >= 0) return matsubara_terms;
    return temperature_K >= 200.0 ? 3 : 100;
  }
  // A lambda < 0 input is the negative-correlations sign channel: the
  // autocorrelation uses |lambda| and the sign moves to the off-diagonals.
  double lambda_magnitude() const { return std::abs(lambda_cm1); }
  int effective_sign() const {
    return lambda_cm1 < 0.0 ? -correlation_sign : correlation_sign;
  }
  void validate() const;
};

struct KernelTerm {
  complexd amplitude;  // (rad/ps)^2
  complexd decay;      // rad/ps, Re > 0
};

/// Bath correlation function reduced to C(t) = sum_m a_m exp(-nu_m t).
struct ExponentialKernel {
  std::vector<KernelTerm> terms;
  double fit_residual = 0.0;  // max relative deviation when produced by a fit

  complexd at(double t_ps) const {
    complexd c = 0.0;
    for (const auto& kt : terms) c += kt.amplitude * std::exp(-kt.decay * t_ps);
    return c;
  }
  complexd c0() const {
    complexd c = 0.0;
    for (const auto& kt : terms) c += kt.amplitude;
    return c;
  }
};

/// Lorentzian (Drude) kernel: leading cotangent term plus Matsubara series.
/// Throws numerical_error("degenerate Matsubara point") at cot poles or
/// nu_k == gamma resonances.
ExponentialKernel decompose(const BathSpec& spec);

/// Ohmic kernel via quadrature of C(t) on a log grid followed by a
/// multi-start complex-exponential fit (Prony initialization). Throws
/// numerical_error carrying the achieved residual if rel_tol is missed.
ExponentialKernel decompose_ohmic(const BathSpec& spec, int fit_terms,
                                  double t_max_ps, double rel_tol);

/// Dispatch on spec.family using the spec's fit controls.
ExponentialKernel make_kernel(const BathSpec& spec);

/// C~(s) = sum a_m / (s + nu_m). Throws numerical_error("kernel pole") when
/// s + nu_m vanishes.
complexd laplace_at(const ExponentialKernel& kernel, complexd s);

/// lambda_{jk} matrix in cm^-1: diagonal lambda, off-diagonal
/// sign * lambda * exp(-d_{jk}/R_cor); R_cor = 0 gives a diagonal matrix.
Eigen::MatrixXd spatial_correlation_matrix(const ChromophoreGeometry& geom,
                                           const BathSpec& spec);

/// Bose-weighted average phonon energy int J w n / int J n, in cm^-1.
double mean_phonon_energy(const BathSpec& spec);

/// Direct evaluation of the Ohmic C(t) (rad/ps units): exact zero-temperature
/// part plus adaptive quadrature of the Bose part.
complexd ohmic_correlation(double t_ps, const BathSpec& spec);

}  // namespace etsim

#endif
