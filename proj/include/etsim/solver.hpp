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

#ifndef ETSIM_SOLVER_HPP
#define ETSIM_SOLVER_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "etsim/bath.hpp"
#include "etsim/model.hpp"

namespace etsim {

/// Model + bath (with derived kernel and site-correlation coefficients) +
/// initial state. Immutable input to the solvers.
struct TransferProblem {
  ExcitonModel model;
  BathSpec bath;
  ExponentialKernel kernel;
  Eigen::MatrixXd correlation_coeff;  // lambda_jk / lambda, diag = 1
  Eigen::MatrixXcd initial_state;

  int size() const { return model.size(); }
  void validate() const;
};

/// Assembles the derived pieces. `geom` is required only when the bath
/// declares spatial correlations (R_cor > 0). Default initial state is
/// |initial_site><initial_site|.
TransferProblem make_problem(
    const ExcitonModel& model, const BathSpec& bath,
    const ChromophoreGeometry* geom = nullptr,
    std::optional<Eigen::MatrixXcd> initial_state = std::nullopt);

struct SolverDiagnostics {
  double condition_estimate = 0.0;
  int kernel_terms = 0;
  bool regularized = false;      // kernel-pole shift applied
  bool clamped = false;          // ete fell outside [0,1] and was clamped
  double raw_ete = 0.0;          // pre-clamp value
  bool gamma_warning = false;    // gamma < 5 cm^-1: large TNME error regime
  double fit_residual = 0.0;     // Ohmic kernel fit residual
  double t_reached_ps = 0.0;     // time solver only
  double trace_residual = 0.0;   // time solver only
  bool loss_fraction_is_complement = false;  // frequency solver flag
};

enum class SolverKind { frequency, time };

struct TransferResult {
  double ete = 0.0;
  double loss_fraction = 0.0;
  SolverKind solver = SolverKind::frequency;
  SolverDiagnostics diagnostics;
  std::vector<double> site_loss;  // per-site loss integrals (time solver)
};

/// Liouville-space generator at the Laplace point s = 0: coherent part,
/// anticommutator sinks, and the memory superoperator with the kernel applied
/// on the spectrum of the coherent part. Column-stacked convention
/// (vec(A X B) = (B^T (x) A) vec(X)).
struct LiouvilleOperator {
  int n = 0;
  Eigen::MatrixXd exciton_vectors;   // columns = exciton states
  Eigen::VectorXd exciton_energies;  // rad/ps
  Eigen::MatrixXcd coherent;         // L_S
  Eigen::VectorXcd sink_diagonal;    // L_eh (diagonal superoperator)
  Eigen::MatrixXcd memory;           // assembled memory superoperator
  Eigen::MatrixXcd generator;        // coherent + sinks + memory
  bool regularized = false;
};

/// Builds the full generator. With `memory_at_zero` the kernel is evaluated
/// uniformly at s = 0 (the memoryless validation limit).
LiouvilleOperator build_generator(const TransferProblem& problem,
                                  bool memory_at_zero = false);

/// Exact Laplace-domain efficiency: one dense solve of
/// generator * x = -vec(rho0), eta = 2 r_trap Re x_(trap,trap).
TransferResult ete_frequency(const TransferProblem& problem);

/// Frequency solve with the memoryless kernel C~(0).
double ete_markovian_limit(const TransferProblem& problem);

struct DynamicsTrace {
  std::vector<double> t_ps;
  Eigen::MatrixXd populations;  // rows = grid points, cols = sites
  Eigen::VectorXd trace;
  Eigen::VectorXd eta_cumulative;
};

struct PropagationResult {
  DynamicsTrace trace;
  TransferResult result;
};

/// Time-domain propagation of the TNME with auxiliary kernel operators,
/// integrated by an adaptive embedded Dormand-Prince 5(4) pair under a
/// diagonal integrating-factor transform in the exciton basis. Stops early
/// (flagged, t_reached recorded) when the state is numerically dead.
PropagationResult propagate_time(const TransferProblem& problem, double t_max_ps,
                                 const std::vector<double>& output_grid_ps = {},
                                 double rel_tol = 1e-8);

}  // namespace etsim

#endif
