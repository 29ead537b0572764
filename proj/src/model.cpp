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

#include "etsim/model.hpp"

#include <cmath>

#include "etsim/units.hpp"

namespace etsim {

double ChromophoreGeometry::min_pair_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j) best = std::min(best, distance(i, j));
  return best;
}

Eigen::Vector3d ChromophoreGeometry::centroid() const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& s : sites) c += s.position;
  return c / double(sites.size());
}

void ExcitonModel::validate(bool allow_same_sites) const {
  const int n = size();
  if (n < 1 || hamiltonian.cols() != n)
    throw validation_error("hamiltonian must be square");
  if ((hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw validation_error("hamiltonian must be symmetric within 1e-10 cm^-1");
  if (initial_site < 1 || initial_site > n || trap_site < 1 || trap_site > n)
    throw validation_error("site indices are 1-based and must be within [1, N]");
  if (!allow_same_sites && n > 1 && trap_site == initial_site)
    throw validation_error("trap_site must differ from initial_site");
  if (r_trap < 0.0 || r_loss < 0.0)
    throw validation_error("trap and loss rates must be >= 0");
  if (!hamiltonian.allFinite())
    throw validation_error("hamiltonian entries must be finite");
}

Eigen::MatrixXd build_hamiltonian(const ChromophoreGeometry& geom) {
  const int n = geom.size();
  if (n < 2) throw validation_error("need at least 2 sites");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) h(j, j) = geom.sites[j].energy;
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d mj = geom.sites[j].dipole();
    for (int k = j + 1; k < n; ++k) {
      const Eigen::Vector3d r = geom.sites[k].position - geom.sites[j].position;
      const double dist = r.norm();
      if (dist <= 0.0) throw validation_error("degenerate geometry: coincident sites");
      const Eigen::Vector3d rh = r / dist;
      const Eigen::Vector3d mk = geom.sites[k].dipole();
      const double coupling = geom.coupling_constant / (dist * dist * dist) *
                              (mj.dot(mk) - 3.0 * mj.dot(rh) * mk.dot(rh));
      h(j, k) = h(k, j) = coupling;
    }
  }
  return h;
}

namespace {

// Positions of the Mg atoms and dipole polar angles of the seven BChls; phi
// carries the +pi offset as tabulated. Site energies are the canonical
// Hamiltonian diagonal.
struct FmoRow {
  double x, y, z, theta, phi_base, energy;
};
constexpr FmoRow kFmo[7] = {
    {28.032, 163.534, 94.400, 0.3816, -0.6423, 280.0},
    {17.140, 168.057, 100.162, 0.0670, 0.5209, 420.0},
    {5.409, 180.553, 97.621, 0.1399, 1.3616, 0.0},
    {9.062, 187.635, 89.474, 0.2570, -0.6098, 175.0},
    {21.823, 185.260, 84.721, -0.1606, 0.6899, 320.0},
    {23.815, 173.888, 82.810, -0.4214, -1.4686, 360.0},
    {12.735, 174.887, 89.044, 0.5780, -1.0076, 260.0},
};

constexpr double kFmoHamiltonian[7][7] = {
    {280, -106, 8, -5, 6, -8, -4},
    {-106, 420, 28, 6, 2, 13, 1},
    {8, 28, 0, -62, -1, -9, 17},
    {-5, 6, -62, 175, -70, -19, -57},
    {6, 2, -1, -70, 320, 40, -2},
    {-8, 13, -9, -19, 40, 360, 32},
    {-4, 1, 17, -57, -2, 32, 260},
};

}  // namespace

ChromophoreGeometry fmo_geometry() {
  ChromophoreGeometry g;
  g.coupling_constant = kDefaultCouplingConstant;
  g.sites.reserve(7);
  for (const auto& r : kFmo) {
    Site s;
    s.position = {r.x, r.y, r.z};
    s.theta = r.theta;
    s.phi = r.phi_base + M_PI;
    s.energy = r.energy;
    g.sites.push_back(s);
  }
  return g;
}

ExcitonModel fmo_canonical() {
  ExcitonModel m;
  m.hamiltonian.resize(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) m.hamiltonian(i, j) = kFmoHamiltonian[i][j];
  m.initial_site = 1;
  m.trap_site = 3;
  m.r_trap = 1.0;
  m.r_loss = 1e-3;
  return m;
}

double energy_scale_g(const Eigen::MatrixXd& hamiltonian) {
  const int n = static_cast<int>(hamiltonian.rows());
  if (hamiltonian.cols() != n) throw validation_error("g: matrix must be square");
  if (n < 2) return 0.0;
  Eigen::MatrixXd traceless =
      hamiltonian - (hamiltonian.trace() / n) * Eigen::MatrixXd::Identity(n, n);
  // nuclear norm = sum of singular values
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(traceless);
  return svd.singularValues().sum() / double(n - 1);
}

ChromophoreGeometry rescale_compactness(const ChromophoreGeometry& geom, double k) {
  if (k <= 0.0) throw validation_error("compactness factor must be > 0");
  ChromophoreGeometry out = geom;
  const Eigen::Vector3d c = geom.centroid();
  for (auto& s : out.sites) s.position = c + k * (s.position - c);
  return out;
}

ChromophoreGeometry perturb_geometry(const ChromophoreGeometry& geom,
                                     const PerturbationSpec& spec, Rng& rng) {
  if (spec.pos_jitter < 0 || spec.angle_jitter < 0 || spec.energy_jitter < 0)
    throw validation_error("jitters must be >= 0");
  const int n = geom.size();
  ChromophoreGeometry out = geom;

  constexpr int kMaxAttempts = 10000;
  int attempt = 0;
  for (;; ++attempt) {
    if (attempt >= kMaxAttempts) throw numerical_error("infeasible jitter");
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c)
        out.sites[i].position[c] =
            geom.sites[i].position[c] + rng.uniform(-spec.pos_jitter, spec.pos_jitter);
    if (spec.pos_jitter == 0.0 || out.min_pair_distance() >= kMinPairDistance) break;
  }

  for (int i = 0; i < n; ++i) {
    if (spec.isotropic_dipoles) {
      out.sites[i].theta = std::acos(rng.uniform(-1.0, 1.0));
      out.sites[i].phi = rng.uniform(0.0, 2.0 * M_PI);
    } else {
      out.sites[i].theta = geom.sites[i].theta + rng.uniform(-spec.angle_jitter, spec.angle_jitter);
      out.sites[i].phi = geom.sites[i].phi + rng.uniform(-spec.angle_jitter, spec.angle_jitter);
    }
    if (spec.random_energies) {
      out.sites[i].energy = rng.uniform(0.0, spec.energy_max);
    } else {
      out.sites[i].energy = std::max(
          0.0, geom.sites[i].energy + rng.uniform(-spec.energy_jitter, spec.energy_jitter));
    }
  }
  return out;
}

}  // namespace etsim
