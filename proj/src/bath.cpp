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

#include "etsim/bath.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "etsim/expfit.hpp"

namespace etsim {

using boost::math::quadrature::gauss_kronrod;

std::string to_string(SpectralFamily family) {
  return family == SpectralFamily::lorentzian ? "lorentzian" : "ohmic";
}

SpectralFamily family_from_string(const std::string& name) {
  if (name == "lorentzian") return SpectralFamily::lorentzian;
  if (name == "ohmic") return SpectralFamily::ohmic;
  throw validation_error("unknown spectral family: " + name);
}

void BathSpec::validate() const {
  if (!(gamma_cm1 > 0.0)) throw validation_error("bath: gamma must be > 0");
  if (!(temperature_K > 0.0)) throw validation_error("bath: temperature must be > 0");
  if (!std::isfinite(lambda_cm1)) throw validation_error("bath: lambda must be finite");
  if (matsubara_terms < -1) throw validation_error("bath: matsubara_terms must be >= 0");
  if (correlation_sign != 1 && correlation_sign != -1)
    throw validation_error("bath: correlation_sign must be +1 or -1");
  if (r_cor_angstrom < 0.0) throw validation_error("bath: R_cor must be >= 0");
  if (ohmic_fit_terms < 2 || ohmic_fit_terms > 12)
    throw validation_error("bath: ohmic_fit_terms must be in [2, 12]");
}

ExponentialKernel decompose(const BathSpec& spec) {
  spec.validate();
  if (spec.family != SpectralFamily::lorentzian)
    throw validation_error("decompose: Lorentzian family only");
  const double lam = units::energy(spec.lambda_magnitude());
  const double gam = units::energy(spec.gamma_cm1);
  const double beta = units::beta_ps(spec.temperature_K);
  const int n_mats = spec.effective_matsubara_terms();

  ExponentialKernel kernel;
  if (lam == 0.0) return kernel;

  const double x = 0.5 * beta * gam;
  const double sx = std::sin(x);
  if (std::abs(sx) < 1e-12)
    throw numerical_error("degenerate Matsubara point: cot pole, nudge T");
  kernel.terms.push_back({complexd(gam * lam * (std::cos(x) / sx), -gam * lam),
                          complexd(gam, 0.0)});
  for (int k = 1; k <= n_mats; ++k) {
    const double nu = 2.0 * M_PI * k / beta;
    const double denom = nu * nu - gam * gam;
    if (std::abs(denom) < 1e-9 * nu * nu)
      throw numerical_error("degenerate Matsubara point: nu_k == gamma, nudge T");
    kernel.terms.push_back(
        {complexd(4.0 * lam * gam / beta * nu / denom, 0.0), complexd(nu, 0.0)});
  }
  return kernel;
}

complexd ohmic_correlation(double t_ps, const BathSpec& spec) {
  const double lam = units::energy(spec.lambda_magnitude());
  const double gam = units::energy(spec.gamma_cm1);
  const double beta = units::beta_ps(spec.temperature_K);
  // (1/pi) int_0^inf J(w) e^{-iwt} dw has a closed form for J = lam (w/g) e^{-w/g}
  const complexd a(1.0 / gam, t_ps);
  const complexd zero_t = lam / (M_PI * gam) / (a * a);
  // Bose part (2/pi) int J(w) n(w) cos(wt) dw, integrand decays on min(g, 1/beta)
  auto f = [&](double w) {
    return lam / gam * w * std::exp(-w / gam) / std::expm1(beta * w) * std::cos(w * t_ps);
  };
  const double cutoff = 50.0 * gam + 60.0 / beta;
  double err = 0.0;
  const double bose =
      gauss_kronrod<double, 15>::integrate(f, 0.0, cutoff, 15, 1e-10, &err);
  return zero_t + (2.0 / M_PI) * bose;
}

ExponentialKernel decompose_ohmic(const BathSpec& spec, int fit_terms,
                                  double t_max_ps, double rel_tol) {
  spec.validate();
  if (spec.family != SpectralFamily::ohmic)
    throw validation_error("decompose_ohmic: Ohmic family only");
  if (fit_terms < 2 || fit_terms > 12)
    throw validation_error("decompose_ohmic: fit_terms must be in [2, 12]");
  if (spec.lambda_magnitude() == 0.0) return {};

  constexpr int kGrid = 160;
  const double t_min = 1e-3;
  std::vector<double> ts(kGrid);
  std::vector<complexd> cs(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    ts[i] = t_min * std::pow(t_max_ps / t_min, double(i) / (kGrid - 1));
    cs[i] = ohmic_correlation(ts[i], spec);
  }
  ExpFitResult fit = fit_exponential_sum(ts, cs, fit_terms);
  if (fit.max_rel_deviation > rel_tol)
    throw numerical_error("ohmic kernel fit missed tolerance: achieved residual " +
                          std::to_string(fit.max_rel_deviation));
  ExponentialKernel kernel;
  for (int m = 0; m < fit_terms; ++m)
    kernel.terms.push_back({fit.amplitudes[m], fit.decays[m]});
  kernel.fit_residual = fit.max_rel_deviation;
  return kernel;
}

ExponentialKernel make_kernel(const BathSpec& spec) {
  if (spec.family == SpectralFamily::lorentzian) return decompose(spec);
  return decompose_ohmic(spec, spec.ohmic_fit_terms, spec.ohmic_t_max_ps,
                         spec.ohmic_rel_tol);
}

complexd laplace_at(const ExponentialKernel& kernel, complexd s) {
  complexd v = 0.0;
  for (const auto& kt : kernel.terms) {
    const complexd denom = s + kt.decay;
    if (std::abs(denom) < 1e-14) throw numerical_error("kernel pole");
    v += kt.amplitude / denom;
  }
  return v;
}

Eigen::MatrixXd spatial_correlation_matrix(const ChromophoreGeometry& geom,
                                           const BathSpec& spec) {
  const int n = geom.size();
  const double lam = spec.lambda_magnitude();
  const int sign = spec.effective_sign();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = lam;
  if (spec.r_cor_angstrom <= 0.0) return m;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = sign * lam * std::exp(-geom.distance(i, j) / spec.r_cor_angstrom);
      m(i, j) = m(j, i) = v;
    }
  return m;
}

double mean_phonon_energy(const BathSpec& spec) {
  spec.validate();
  const double gam = spec.gamma_cm1;  // ratio is unit-free, work in cm^-1
  const double beta = 1.0 / (units::kB_cm1_per_K * spec.temperature_K);
  auto J = [&](double w) {
    if (spec.family == SpectralFamily::lorentzian)
      return 2.0 * spec.lambda_magnitude() * gam * w / (w * w + gam * gam);
    return spec.lambda_magnitude() * (w / gam) * std::exp(-w / gam);
  };
  auto n_bose = [&](double w) { return 1.0 / std::expm1(beta * w); };
  const double cutoff = 50.0 * gam;
  double err = 0.0;
  const double num = gauss_kronrod<double, 15>::integrate(
      [&](double w) { return J(w) * w * n_bose(w); }, 0.0, cutoff, 15, 1e-8, &err);
  const double den = gauss_kronrod<double, 15>::integrate(
      [&](double w) { return J(w) * n_bose(w); }, 0.0, cutoff, 15, 1e-8, &err);
  return num / den;
}

}  // namespace etsim
