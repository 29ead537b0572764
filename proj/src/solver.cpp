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

#include "etsim/solver.hpp"

#include <cmath>

namespace etsim {

void TransferProblem::validate() const {
  model.validate();
  bath.validate();
  const int n = size();
  if (initial_state.rows() != n || initial_state.cols() != n)
    throw validation_error("initial state dimension mismatch");
  if ((initial_state - initial_state.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw validation_error("initial state must be Hermitian");
  if (std::abs(initial_state.trace().real() - 1.0) > 1e-10 ||
      std::abs(initial_state.trace().imag()) > 1e-10)
    throw validation_error("initial state must have trace 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(initial_state);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw validation_error("initial state must be positive semidefinite");
  if (correlation_coeff.rows() != n || correlation_coeff.cols() != n)
    throw validation_error("correlation coefficient dimension mismatch");
}

TransferProblem make_problem(const ExcitonModel& model, const BathSpec& bath,
                             const ChromophoreGeometry* geom,
                             std::optional<Eigen::MatrixXcd> initial_state) {
  TransferProblem p;
  p.model = model;
  p.bath = bath;
  p.kernel = make_kernel(bath);
  const int n = model.size();
  if (bath.r_cor_angstrom > 0.0 && bath.lambda_magnitude() > 0.0) {
    if (!geom)
      throw validation_error("spatially correlated bath requires a geometry");
    if (geom->size() != n)
      throw validation_error("geometry/model size mismatch");
    p.correlation_coeff =
        spatial_correlation_matrix(*geom, bath) / bath.lambda_magnitude();
  } else {
    p.correlation_coeff = Eigen::MatrixXd::Identity(n, n);
  }
  if (initial_state) {
    p.initial_state = std::move(*initial_state);
  } else {
    p.initial_state = Eigen::MatrixXcd::Zero(n, n);
    p.initial_state(model.initial_site - 1, model.initial_site - 1) = 1.0;
  }
  p.validate();
  return p;
}

namespace {

// C~(-z) on the spectrum of L_S, with the pole-regularization shift when an
// eigenvalue lands on a kernel decay (possible only for fit artifacts).
complexd kernel_at(const ExponentialKernel& kernel, complexd minus_z,
                   bool* regularized) {
  for (const auto& kt : kernel.terms) {
    if (std::abs(minus_z + kt.decay) < 1e-12) {
      *regularized = true;
      return laplace_at(kernel, minus_z + units::energy(1e-6));
    }
  }
  return laplace_at(kernel, minus_z);
}

}  // namespace

LiouvilleOperator build_generator(const TransferProblem& problem,
                                  bool memory_at_zero) {
  problem.validate();
  const int n = problem.size();
  const int nn = n * n;
  const Eigen::MatrixXd h = problem.model.hamiltonian * units::cm1_to_radps;

  LiouvilleOperator op;
  op.n = n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw numerical_error("hamiltonian eigendecomposition failed");
  op.exciton_vectors = es.eigenvectors();
  op.exciton_energies = es.eigenvalues();

  // coherent part L_S = -i (I (x) H - H^T (x) I), column stacking
  op.coherent = Eigen::MatrixXcd::Zero(nn, nn);
  const complexd mi(0.0, -1.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int p = i + n * j;
      for (int k = 0; k < n; ++k) {
        op.coherent(p, k + n * j) += mi * h(i, k);   // H rho
        op.coherent(p, i + n * k) -= mi * h(k, j);   // rho H
      }
    }

  // anticommutator sinks, diagonal in the site-basis vec space
  const int trap = problem.model.trap_site - 1;
  op.sink_diagonal.resize(nn);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      op.sink_diagonal[i + n * j] =
          -2.0 * problem.model.r_loss -
          problem.model.r_trap * ((i == trap) + (j == trap));

  // memory superoperator
  op.memory = Eigen::MatrixXcd::Zero(nn, nn);
  if (!problem.kernel.terms.empty()) {
    const Eigen::MatrixXd& u = op.exciton_vectors;
    Eigen::MatrixXcd f_mat(n, n);
    bool regularized = false;
    if (memory_at_zero) {
      f_mat.setConstant(laplace_at(problem.kernel, 0.0));
    } else {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const complexd z(0.0, -(op.exciton_energies[a] - op.exciton_energies[b]));
          f_mat(a, b) = kernel_at(problem.kernel, -z, &regularized);
        }
    }
    op.regularized = regularized;
    const Eigen::MatrixXcd g_mat = f_mat.adjoint();
    const Eigen::MatrixXcd uc = u.cast<complexd>();
    const Eigen::MatrixXd& c = problem.correlation_coeff;

    Eigen::MatrixXcd yf(n, n), yg(n, n), col_f(n, n), col_g(n, n);
    for (int q = 0; q < nn; ++q) {
      const int iq = q % n, jq = q / n;
      const Eigen::MatrixXd m_q = u.row(iq).transpose() * u.row(jq);
      yf = f_mat.cwiseProduct(m_q);
      yg = g_mat.cwiseProduct(m_q);
      col_f = uc * yf * uc.transpose();
      col_g = uc * yg * uc.transpose();
      for (int p = 0; p < nn; ++p) {
        const int ip = p % n, jp = p / n;
        const double wf = c(ip, iq) - c(jp, iq);
        const double wg = c(ip, jq) - c(jp, jq);
        op.memory(p, q) = -(wf * col_f(ip, jp) - wg * col_g(ip, jp));
      }
    }
  }

  op.generator = op.coherent + op.memory;
  op.generator.diagonal() += op.sink_diagonal;
  return op;
}

TransferResult ete_frequency(const TransferProblem& problem) {
  if (problem.model.r_trap == 0.0 && problem.model.r_loss == 0.0)
    throw numerical_error("no sink: generator is singular");
  const int n = problem.size();
  LiouvilleOperator op = build_generator(problem);

  Eigen::VectorXcd b(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) b[i + n * j] = -problem.initial_state(i, j);

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(op.generator);
  const Eigen::VectorXd udiag = lu.matrixLU().diagonal().cwiseAbs();
  const double cond = udiag.maxCoeff() / std::max(udiag.minCoeff(), 1e-300);
  if (cond > 1e14)
    throw numerical_error("near-singular generator (condition estimate " +
                          std::to_string(cond) + ")");
  const Eigen::VectorXcd x = lu.solve(b);
  const int trap = problem.model.trap_site - 1;
  const double raw = 2.0 * problem.model.r_trap * x[trap + n * trap].real();

  TransferResult res;
  res.solver = SolverKind::frequency;
  res.diagnostics.condition_estimate = cond;
  res.diagnostics.kernel_terms = static_cast<int>(problem.kernel.terms.size());
  res.diagnostics.regularized = op.regularized;
  res.diagnostics.fit_residual = problem.kernel.fit_residual;
  res.diagnostics.gamma_warning = problem.bath.gamma_cm1 < 5.0;
  res.diagnostics.raw_ete = raw;
  res.diagnostics.clamped = raw < 0.0 || raw > 1.0;
  res.ete = std::clamp(raw, 0.0, 1.0);
  res.loss_fraction = 1.0 - res.ete;
  res.diagnostics.loss_fraction_is_complement = true;
  return res;
}

double ete_markovian_limit(const TransferProblem& problem) {
  if (problem.model.r_trap == 0.0 && problem.model.r_loss == 0.0)
    throw numerical_error("no sink: generator is singular");
  const int n = problem.size();
  LiouvilleOperator op = build_generator(problem, /*memory_at_zero=*/true);
  Eigen::VectorXcd b(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) b[i + n * j] = -problem.initial_state(i, j);
  const Eigen::VectorXcd x = op.generator.partialPivLu().solve(b);
  const int trap = problem.model.trap_site - 1;
  return std::clamp(2.0 * problem.model.r_trap * x[trap + n * trap].real(), 0.0, 1.0);
}

}  // namespace etsim
