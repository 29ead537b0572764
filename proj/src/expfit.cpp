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

#include "etsim/expfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "etsim/rng.hpp"
#include "etsim/units.hpp"

namespace etsim {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct Weighted {
  std::vector<double> ts;
  VectorXcd y;
  VectorXd w;
  double scale;
};

// Decays are parameterized as nu = exp(p_re) + i * p_im to keep Re(nu) > 0.
VectorXcd decays_from_params(const VectorXd& p, int K) {
  VectorXcd nus(K);
  for (int m = 0; m < K; ++m)
    nus[m] = std::complex<double>(std::exp(p[m]), p[K + m]);
  return nus;
}

MatrixXcd design_matrix(const std::vector<double>& ts, const VectorXcd& nus) {
  MatrixXcd M(ts.size(), nus.size());
  for (int i = 0; i < M.rows(); ++i)
    for (int m = 0; m < M.cols(); ++m)
      M(i, m) = std::exp(-nus[m] * ts[i]);
  return M;
}

VectorXcd solve_amplitudes(const Weighted& d, const MatrixXcd& M) {
  MatrixXcd Mw = d.w.asDiagonal() * M;
  VectorXcd yw = d.w.asDiagonal() * d.y;
  return Mw.colPivHouseholderQr().solve(yw);
}

double weighted_cost(const Weighted& d, const VectorXcd& nus, VectorXcd* amps_out) {
  MatrixXcd M = design_matrix(d.ts, nus);
  VectorXcd a = solve_amplitudes(d, M);
  if (amps_out) *amps_out = a;
  return (d.w.asDiagonal() * (M * a - d.y)).squaredNorm();
}

// Classic Prony estimate on a uniform resampling of the data.
VectorXcd prony_initial(const std::vector<double>& ts, const VectorXcd& y, int K) {
  const int M = std::max(4 * K, 24);
  const double t0 = ts.front(), t1 = ts.back();
  const double dt = (t1 - t0) / (M - 1);
  // linear interpolation onto the uniform grid
  VectorXcd u(M);
  std::size_t j = 0;
  for (int i = 0; i < M; ++i) {
    const double t = t0 + i * dt;
    while (j + 2 < ts.size() && ts[j + 1] < t) ++j;
    const double f = (t - ts[j]) / std::max(ts[j + 1] - ts[j], 1e-300);
    u[i] = y[j] * (1.0 - f) + y[j + 1] * f;
  }
  // least-squares linear prediction: u[n+K] = -sum c_k u[n+K-1-k]
  const int rows = M - K;
  MatrixXcd A(rows, K);
  VectorXcd b(rows);
  for (int n = 0; n < rows; ++n) {
    for (int k = 0; k < K; ++k) A(n, k) = u[n + K - 1 - k];
    b[n] = u[n + K];
  }
  VectorXcd c = A.colPivHouseholderQr().solve(b);
  // roots of z^K - c0 z^{K-1} - ... - c_{K-1} via companion matrix
  MatrixXcd comp = MatrixXcd::Zero(K, K);
  for (int k = 0; k < K; ++k) comp(0, k) = c[k];
  for (int k = 1; k < K; ++k) comp(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<MatrixXcd> es(comp);
  VectorXcd nus(K);
  for (int k = 0; k < K; ++k) {
    std::complex<double> z = es.eigenvalues()[k];
    std::complex<double> nu = (std::abs(z) > 1e-12)
                                  ? -std::log(z) / dt
                                  : std::complex<double>(2.0 / dt, 0.0);
    if (nu.real() < 1e-6 / (t1 - t0)) nu.real(1e-6 / (t1 - t0));
    nus[k] = nu;
  }
  return nus;
}

VectorXd params_from_decays(const VectorXcd& nus) {
  const int K = static_cast<int>(nus.size());
  VectorXd p(2 * K);
  for (int m = 0; m < K; ++m) {
    p[m] = std::log(std::max(nus[m].real(), 1e-12));
    p[K + m] = nus[m].imag();
  }
  return p;
}

// Damped Gauss-Newton on the decay parameters with numerically differenced
// Jacobian; amplitudes re-solved at every trial point.
double refine(const Weighted& d, VectorXd& p, int K, int max_iter) {
  double cost = weighted_cost(d, decays_from_params(p, K), nullptr);
  const int n = 2 * K;
  for (int it = 0; it < max_iter; ++it) {
    MatrixXcd M = design_matrix(d.ts, decays_from_params(p, K));
    VectorXcd a = solve_amplitudes(d, M);
    VectorXcd r = d.w.asDiagonal() * (M * a - d.y);
    // Jacobian of weighted residual wrt p (amplitudes held fixed)
    Eigen::MatrixXd J(2 * r.size(), n);
    const double eps = 1e-6;
    for (int q = 0; q < n; ++q) {
      VectorXd pq = p;
      pq[q] += eps;
      MatrixXcd Mq = design_matrix(d.ts, decays_from_params(pq, K));
      VectorXcd rq = d.w.asDiagonal() * (Mq * a - d.y);
      VectorXcd dr = (rq - r) / eps;
      J.block(0, q, r.size(), 1) = dr.real();
      J.block(r.size(), q, r.size(), 1) = dr.imag();
    }
    Eigen::VectorXd rr(2 * r.size());
    rr << r.real(), r.imag();
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * rr;
    double mu = 1e-8 * JtJ.trace() / n;
    bool improved = false;
    for (int trial = 0; trial < 12; ++trial) {
      Eigen::VectorXd step =
          (JtJ + mu * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(-g);
      VectorXd pn = p + step;
      for (int m = 0; m < K; ++m) pn[m] = std::clamp(pn[m], -20.0, 20.0);
      const double cn = weighted_cost(d, decays_from_params(pn, K), nullptr);
      if (cn < cost) {
        p = pn;
        const double gain = (cost - cn) / std::max(cost, 1e-300);
        cost = cn;
        improved = true;
        if (gain < 1e-12) return cost;
        break;
      }
      mu *= 10.0;
    }
    if (!improved) break;
  }
  return cost;
}

}  // namespace

ExpFitResult fit_exponential_sum(const std::vector<double>& ts,
                                 const std::vector<std::complex<double>>& ys,
                                 int n_terms, int n_starts, unsigned seed) {
  if (ts.size() != ys.size() || ts.size() < std::size_t(2 * n_terms + 2))
    throw validation_error("exponential fit: too few samples");
  Weighted d;
  d.ts = ts;
  d.y = Eigen::Map<const VectorXcd>(ys.data(), ys.size());
  d.scale = d.y.cwiseAbs().maxCoeff();
  if (d.scale == 0.0) {
    // zero signal fits trivially
    ExpFitResult r;
    r.amplitudes.assign(n_terms, 0.0);
    r.decays.assign(n_terms, std::complex<double>(1.0, 0.0));
    return r;
  }
  d.w = (d.y.cwiseAbs().array() + 0.05 * d.scale).inverse().matrix();

  Rng rng(seed);
  VectorXd best_p;
  double best_cost = std::numeric_limits<double>::infinity();

  std::vector<VectorXd> starts;
  starts.push_back(params_from_decays(prony_initial(ts, d.y, n_terms)));
  {
    // log-spaced real decays spanning the sampled window
    VectorXcd nus(n_terms);
    const double lo = 0.5 / ts.back(), hi = 2.0 / ts.front();
    for (int m = 0; m < n_terms; ++m)
      nus[m] = lo * std::pow(hi / lo, double(m) / std::max(1, n_terms - 1));
    starts.push_back(params_from_decays(nus));
  }
  while (static_cast<int>(starts.size()) < n_starts) {
    VectorXd p = starts[starts.size() % 2];
    for (int q = 0; q < p.size(); ++q)
      p[q] += (q < n_terms ? rng.uniform(-0.8, 0.8)
                           : rng.uniform(-0.3, 0.3) * std::exp(p[q - n_terms]));
    starts.push_back(p);
  }

  for (auto& p0 : starts) {
    VectorXd p = p0;
    const double c = refine(d, p, n_terms, 60);
    if (c < best_cost) {
      best_cost = c;
      best_p = p;
    }
  }

  ExpFitResult out;
  VectorXcd nus = decays_from_params(best_p, n_terms);
  MatrixXcd M = design_matrix(ts, nus);
  VectorXcd a = solve_amplitudes(d, M);
  VectorXcd resid = M * a - d.y;
  out.max_rel_deviation = resid.cwiseAbs().maxCoeff() / d.scale;
  out.amplitudes.assign(a.data(), a.data() + n_terms);
  out.decays.assign(nus.data(), nus.data() + n_terms);
  return out;
}

}  // namespace etsim
