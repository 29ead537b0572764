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

#include <algorithm>
#include <cmath>

#include "etsim/solver.hpp"

namespace etsim {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,        500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

// The augmented TNME state in the exciton basis: vec(rho), the auxiliary
// memory operators sigma_{k,m}, the eta accumulator and per-site loss
// integrals. The linear diagonal part (exciton phases, uniform loss, kernel
// decays) is integrated exactly via elementwise integrating factors; the
// Runge-Kutta pair handles the trap sink, the memory coupling and the
// sources.
class TnmePropagator {
 public:
  TnmePropagator(const TransferProblem& p, double rel_tol)
      : n_(p.size()),
        nn_(n_ * n_),
        n_terms_(static_cast<int>(p.kernel.terms.size())),
        rtol_(rel_tol),
        r_trap_(p.model.r_trap),
        r_loss_(p.model.r_loss),
        trap_(p.model.trap_site - 1),
        coeff_(p.correlation_coeff),
        uncorrelated_(p.correlation_coeff.isIdentity(1e-14)) {
    const Eigen::MatrixXd h = p.model.hamiltonian * units::cm1_to_radps;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    u_ = es.eigenvectors();
    omega_ = es.eigenvalues();
    for (const auto& kt : p.kernel.terms) {
      amps_.push_back(kt.amplitude);
      decays_.push_back(kt.decay);
    }
    // site projectors in the exciton basis are rank one: P_j = c_j c_j^T
    site_vecs_.resize(n_);
    for (int j = 0; j < n_; ++j) site_vecs_[j] = u_.row(j).transpose();

    dim_ = nn_ * (1 + n_ * n_terms_) + 1 + n_;
    y_.setZero(dim_);
    const Eigen::MatrixXcd rho_ex =
        u_.transpose() * p.initial_state * u_;
    Eigen::Map<Eigen::MatrixXcd>(y_.data(), n_, n_) = rho_ex;
  }

  int sigma_offset(int k, int m) const { return nn_ * (1 + k * n_terms_ + m); }
  int eta_index() const { return nn_ * (1 + n_ * n_terms_); }
  int loss_index(int j) const { return eta_index() + 1 + j; }

  // nonstiff right-hand side (everything except the diagonal part)
  void eval_g(const Eigen::VectorXcd& y, Eigen::VectorXcd& out) const {
    out.setZero(dim_);
    const Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), n_, n_);
    Eigen::Map<Eigen::MatrixXcd> drho(out.data(), n_, n_);

    const Eigen::VectorXd& ct = site_vecs_[trap_];
    const Eigen::VectorXcd rho_ct = rho * ct;
    const Eigen::RowVectorXcd ct_rho = ct.transpose() * rho;
    if (r_trap_ != 0.0)
      drho.noalias() -= r_trap_ * (ct * ct_rho + rho_ct * ct.transpose());

    if (n_terms_ > 0) {
      // per-site kernel accumulators
      std::vector<Eigen::MatrixXcd> sig_sum(n_);
      for (int k = 0; k < n_; ++k) {
        sig_sum[k].setZero(n_, n_);
        for (int m = 0; m < n_terms_; ++m)
          sig_sum[k] += Eigen::Map<const Eigen::MatrixXcd>(
              y.data() + sigma_offset(k, m), n_, n_);
      }
      Eigen::MatrixXcd xj(n_, n_), yj(n_, n_);
      for (int j = 0; j < n_; ++j) {
        if (uncorrelated_) {
          xj = sig_sum[j];
        } else {
          xj.setZero();
          for (int k = 0; k < n_; ++k)
            if (coeff_(j, k) != 0.0) xj += coeff_(j, k) * sig_sum[k];
        }
        yj = xj - xj.adjoint();
        const Eigen::VectorXd& cj = site_vecs_[j];
        drho.noalias() -= cj * (cj.transpose() * yj);
        drho.noalias() += (yj * cj) * cj.transpose();
      }
      // auxiliary sources d sigma_{k,m} = a_m P_k rho (+ diagonal part)
      for (int k = 0; k < n_; ++k) {
        const Eigen::VectorXd& ck = site_vecs_[k];
        const Eigen::RowVectorXcd ck_rho = ck.transpose() * rho;
        for (int m = 0; m < n_terms_; ++m) {
          Eigen::Map<Eigen::MatrixXcd> ds(out.data() + sigma_offset(k, m), n_, n_);
          ds.noalias() = amps_[m] * (ck * ck_rho);
        }
      }
    }

    out[eta_index()] = 2.0 * r_trap_ * (ct_rho * ct).value();
    for (int j = 0; j < n_; ++j) {
      const Eigen::VectorXd& cj = site_vecs_[j];
      out[loss_index(j)] = 2.0 * r_loss_ * (cj.transpose() * rho * cj).value();
    }
  }

  // elementwise exp(Lambda * tau)
  void build_factor(double tau, Eigen::VectorXcd& f) const {
    f.resize(dim_);
    Eigen::VectorXcd ph(n_);
    for (int a = 0; a < n_; ++a)
      ph[a] = std::exp(complexd(0.0, -omega_[a] * tau));
    Eigen::VectorXcd pair(nn_);
    for (int b = 0; b < n_; ++b)
      for (int a = 0; a < n_; ++a) pair[a + n_ * b] = ph[a] * std::conj(ph[b]);
    const double loss_factor = std::exp(-2.0 * r_loss_ * tau);
    f.head(nn_) = loss_factor * pair;
    for (int k = 0; k < n_; ++k)
      for (int m = 0; m < n_terms_; ++m)
        f.segment(sigma_offset(k, m), nn_) = std::exp(-decays_[m] * tau) * pair;
    f.tail(1 + n_).setOnes();
  }

  double trace_rho() const {
    const Eigen::Map<const Eigen::MatrixXcd> rho(y_.data(), n_, n_);
    return rho.trace().real();
  }

  double population(int site) const {
    const Eigen::Map<const Eigen::MatrixXcd> rho(y_.data(), n_, n_);
    const Eigen::VectorXd& c = site_vecs_[site];
    return (c.transpose() * rho * c).value().real();
  }

  double eta() const { return y_[eta_index()].real(); }
  double loss(int j) const { return y_[loss_index(j)].real(); }
  double time() const { return t_; }

  // Advances by one accepted adaptive step, clamped to t_limit.
  void step_to(double t_limit) {
    Eigen::VectorXcd k[7], yi, y5, err, fac;
    int rejections = 0;
    for (;;) {
      const double h_free = h_;
      double hh = std::min(h_, t_limit - t_);
      eval_g(y_, k[0]);
      for (int i = 1; i < 7; ++i) {
        build_factor(kC[i] * hh, fac);
        yi = fac.cwiseProduct(y_);
        for (int j = 0; j < i; ++j) {
          if (kA[i][j] == 0.0) continue;
          build_factor((kC[i] - kC[j]) * hh, fac);
          yi.noalias() += (hh * kA[i][j]) * fac.cwiseProduct(k[j]);
        }
        eval_g(yi, k[i]);
      }
      build_factor(hh, fac);
      y5 = fac.cwiseProduct(y_);
      err.setZero(dim_);
      for (int i = 0; i < 7; ++i) {
        const double db = kB5[i] - kB4[i];
        if (kB5[i] == 0.0 && db == 0.0) continue;
        build_factor((1.0 - kC[i]) * hh, fac);
        if (kB5[i] != 0.0) y5.noalias() += (hh * kB5[i]) * fac.cwiseProduct(k[i]);
        if (db != 0.0) err.noalias() += (hh * db) * fac.cwiseProduct(k[i]);
      }
      double sum = 0.0;
      for (int p = 0; p < dim_; ++p) {
        const double scale =
            kAtol + rtol_ * std::max(std::abs(y_[p]), std::abs(y5[p]));
        const double e = std::abs(err[p]) / scale;
        sum += e * e;
      }
      const double enorm = std::sqrt(sum / dim_);
      if (enorm <= 1.0) {
        t_ += hh;
        y_.swap(y5);
        h_ = hh * std::clamp(0.9 * std::pow(std::max(enorm, 1e-10), -0.2), 0.2, 5.0);
        // a step clamped by an output boundary must not throttle the next one
        if (hh < h_free) h_ = std::max(h_, h_free);
        return;
      }
      h_ = hh * std::clamp(0.9 * std::pow(enorm, -0.2), 0.1, 0.9);
      if (h_ < 1e-12)
        throw numerical_error("step size underflow at t = " + std::to_string(t_) + " ps");
      if (++rejections > 200)
        throw numerical_error("integrator stalled at t = " + std::to_string(t_) + " ps");
    }
  }

 private:
  static constexpr double kAtol = 1e-13;
  int n_, nn_, n_terms_, dim_ = 0;
  double rtol_;
  double r_trap_, r_loss_;
  int trap_;
  Eigen::MatrixXd coeff_;
  bool uncorrelated_;
  Eigen::MatrixXd u_;
  Eigen::VectorXd omega_;
  std::vector<complexd> amps_, decays_;
  std::vector<Eigen::VectorXd> site_vecs_;
  Eigen::VectorXcd y_;
  double t_ = 0.0;
  double h_ = 1e-3;
};

}  // namespace

PropagationResult propagate_time(const TransferProblem& problem, double t_max_ps,
                                 const std::vector<double>& output_grid_ps,
                                 double rel_tol) {
  problem.validate();
  if (t_max_ps <= 0.0) throw validation_error("t_max must be > 0");
  const int n = problem.size();

  std::vector<double> grid = output_grid_ps;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::remove_if(grid.begin(), grid.end(),
                            [&](double t) { return t < 0.0 || t > t_max_ps; }),
             grid.end());

  TnmePropagator prop(problem, rel_tol);

  PropagationResult out;
  out.trace.populations.resize(grid.size(), n);
  out.trace.trace.resize(grid.size());
  out.trace.eta_cumulative.resize(grid.size());

  std::size_t gi = 0;
  auto record = [&](double t) {
    while (gi < grid.size() && grid[gi] <= t + 1e-12) {
      out.trace.t_ps.push_back(grid[gi]);
      for (int j = 0; j < n; ++j)
        out.trace.populations(gi, j) = prop.population(j);
      out.trace.trace[gi] = prop.trace_rho();
      out.trace.eta_cumulative[gi] = prop.eta();
      ++gi;
    }
  };
  record(0.0);

  // Stop once the state has fully decayed: the remaining tail contributes
  // less than the integration tolerance to every reported quantity.
  constexpr double kDeadTrace = 1e-12;
  while (prop.time() < t_max_ps) {
    const double t_limit =
        gi < grid.size() ? std::min(grid[gi], t_max_ps) : t_max_ps;
    prop.step_to(t_limit);
    record(prop.time());
    if (prop.trace_rho() < kDeadTrace &&
        problem.model.r_trap + problem.model.r_loss > 0.0)
      break;
  }
  // flush any remaining grid points (state is static after a dead-state exit)
  record(t_max_ps);

  TransferResult res;
  res.solver = SolverKind::time;
  res.diagnostics.kernel_terms = static_cast<int>(problem.kernel.terms.size());
  res.diagnostics.fit_residual = problem.kernel.fit_residual;
  res.diagnostics.gamma_warning = problem.bath.gamma_cm1 < 5.0;
  res.diagnostics.t_reached_ps = prop.time();
  res.diagnostics.trace_residual = prop.trace_rho();

  const double raw = prop.eta();
  res.diagnostics.raw_ete = raw;
  res.diagnostics.clamped = raw < 0.0 || raw > 1.0;
  res.ete = std::clamp(raw, 0.0, 1.0);
  res.site_loss.resize(n);
  double loss_sum = 0.0;
  for (int j = 0; j < n; ++j) {
    res.site_loss[j] = prop.loss(j);
    loss_sum += res.site_loss[j];
  }
  // unresolved trace is reported as part of the loss budget, not dropped
  res.loss_fraction = loss_sum + res.diagnostics.trace_residual;
  (void)dead_state;
  return res;
}

}  // namespace etsim
