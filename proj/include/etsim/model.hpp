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

#ifndef ETSIM_MODEL_HPP
#define ETSIM_MODEL_HPP

#include <Eigen/Dense>
#include <vector>

#include "etsim/rng.hpp"

namespace etsim {

inline constexpr double kMinPairDistance = 5.0;        // Angstrom
inline constexpr double kDefaultCouplingConstant = 134000.0;  // cm^-1 A^3

/// One chromophore: position (Angstrom), unit transition dipole from polar
/// angles, and site energy (cm^-1).
struct Site {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double theta = 0.0;  // rad
  double phi = 0.0;    // rad
  double energy = 0.0; // cm^-1

  Eigen::Vector3d dipole() const {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta)};
  }
};

struct ChromophoreGeometry {
  std::vector<Site> sites;
  double coupling_constant = kDefaultCouplingConstant;  // C|mu|^2

  int size() const { return static_cast<int>(sites.size()); }
  double distance(int i, int j) const {
    return (sites[i].position - sites[j].position).norm();
  }
  double min_pair_distance() const;
  Eigen::Vector3d centroid() const;
};

/// Frenkel Hamiltonian (cm^-1) with trap/loss placement. Site labels are
/// 1-indexed in every interface.
struct ExcitonModel {
  Eigen::MatrixXd hamiltonian;  // N x N, symmetric, cm^-1
  int initial_site = 1;
  int trap_site = 3;
  double r_trap = 1.0;    // ps^-1
  double r_loss = 1e-3;   // ps^-1

  int size() const { return static_cast<int>(hamiltonian.rows()); }
  void validate(bool allow_same_sites = false) const;
};

/// Dipole-dipole couplings over a geometry. Diagonal carries the site
/// energies. Throws validation_error on coincident positions.
Eigen::MatrixXd build_hamiltonian(const ChromophoreGeometry& geom);

/// Built-in FMO data: seven-site geometry (positions and dipole angles from
/// the crystal structure, site energies matching the canonical Hamiltonian
/// diagonal) and the canonical model with the fitted Hamiltonian taken
/// verbatim (not rebuilt from dipoles).
ChromophoreGeometry fmo_geometry();
ExcitonModel fmo_canonical();

/// Average excitonic gap measure: nuclear norm of the traceless part divided
/// by N-1.
double energy_scale_g(const Eigen::MatrixXd& hamiltonian);

/// Scale all positions by k about the centroid; dipoles and energies kept.
ChromophoreGeometry rescale_compactness(const ChromophoreGeometry& geom, double k);

struct PerturbationSpec {
  double pos_jitter = 0.0;     // Angstrom, per coordinate, uniform
  double angle_jitter = 0.0;   // rad, applied to theta and phi
  double energy_jitter = 0.0;  // cm^-1, clamped at 0
  // Large-variation mode: dipoles resampled isotropically and site energies
  // drawn uniform in [0, energy_max], ignoring the jitter fields above.
  bool isotropic_dipoles = false;
  bool random_energies = false;
  double energy_max = 500.0;
};

/// Jittered copy of `geom`; positions are rejection-resampled until all pairs
/// stay >= 5 A (at most 1e4 attempts, then "infeasible jitter").
ChromophoreGeometry perturb_geometry(const ChromophoreGeometry& geom,
                                     const PerturbationSpec& spec, Rng& rng);

}  // namespace etsim

#endif
