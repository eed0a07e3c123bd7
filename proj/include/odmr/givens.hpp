// Copyright 2026 The odmr-screen authors.
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

#ifndef ODMR_GIVENS_HPP
#define ODMR_GIVENS_HPP

#include <cmath>
#include <vector>

#include "odmr/basis.hpp"
#include "odmr/statevector.hpp"

namespace odmr {

// Plane rotation on modes (i, j), i < j:
//   [[cos t, -sin t e^{i phi}], [sin t e^{-i phi}, cos t]].
// Real orthogonal schedules have phi = 0 throughout.
struct GivensRotation {
  int i = 0;
  int j = 0;
  double theta = 0.0;
  double phi = 0.0;
};

// Ordered Givens network plus a trailing diagonal phase layer. The realized
// single-particle matrix is
//
//   U = R(rot[0]) R(rot[1]) ... R(rot[m-1]) diag(exp(i phase_k)),
//
// i.e. the diagonal acts first on a column vector and rot[0] last. Spatial
// schedules address N spatial orbitals and are applied identically to both
// spin blocks; general schedules address all 2N spin orbitals.
class GivensSchedule {
 public:
  enum class Mode { spatial, general };

  GivensSchedule() = default;
  GivensSchedule(int n_modes, Mode mode) : n_modes_(n_modes), mode_(mode) {
    phases_.assign(n_modes, 0.0);
  }

  // Decomposes a single-particle unitary into the schedule form. Real
  // orthogonal inputs (within `tol`) produce phi = 0 rotations and 0/pi
  // phases. Throws when the input is not unitary.
  static GivensSchedule decompose(const CMat& u, Mode mode, double tol = 1e-8) {
    const int n = static_cast<int>(u.rows());
    if (u.cols() != n) throw ContractError("givens_decompose: square matrix required");
    if ((u.adjoint() * u - CMat::Identity(n, n)).cwiseAbs().maxCoeff() > tol)
      throw ContractError("givens_decompose: input is not unitary");

    GivensSchedule sched(n, mode);
    CMat m = u;
    // zero below-diagonal entries with adjacent-row rotations; collected
    // adjoints reconstruct u
    for (int col = 0; col < n; ++col) {
      for (int row = n - 1; row > col; --row) {
        const int top = row - 1;
        const Cplx a = m(top, col), b = m(row, col);
        if (std::abs(b) < 1e-15) continue;
        double theta, phi;
        if (std::abs(a) < 1e-15) {
          theta = constants::pi / 2.0;
          phi = 0.0;
        } else {
          theta = std::atan2(std::abs(b), std::abs(a));
          const Cplx unit = -(std::abs(a) * b) / (std::abs(b) * a);
          phi = -std::arg(unit);
        }
        apply_left(m, top, row, theta, phi);
        // stored rotation is the adjoint: theta -> -theta, same phi. With
        // G_k ... G_1 u = D the realized product u = G_1' G_2' ... G_k' D
        // matches replay(), which applies the stored list back to front.
        sched.rotations_.push_back({top, row, -theta, phi});
      }
    }
    for (int k = 0; k < n; ++k) sched.phases_[k] = std::arg(m(k, k));

    // canonicalize: a phi = pi rotation equals (-theta, 0)
    for (auto& r : sched.rotations_)
      if (std::abs(std::abs(r.phi) - constants::pi) < 1e-13) {
        r.theta = -r.theta;
        r.phi = 0.0;
      }
    return sched;
  }

  static GivensSchedule decompose_real(const Mat& u, Mode mode, double tol = 1e-8) {
    return decompose(u.cast<Cplx>(), mode, tol);
  }

  int n_modes() const { return n_modes_; }
  Mode mode() const { return mode_; }
  const std::vector<GivensRotation>& rotations() const { return rotations_; }
  const std::vector<double>& phases() const { return phases_; }
  std::vector<GivensRotation>& rotations() { return rotations_; }
  std::vector<double>& phases() { return phases_; }

  // Dense reconstruction of the realized single-particle matrix.
  CMat replay() const {
    CMat m = CMat::Identity(n_modes_, n_modes_);
    for (int k = 0; k < n_modes_; ++k) m(k, k) = std::exp(Cplx(0.0, phases_[k]));
    for (auto it = rotations_.rbegin(); it != rotations_.rend(); ++it)
      apply_left(m, it->i, it->j, it->theta, it->phi);
    return m;
  }

  double replay_error(const CMat& u) const {
    return (replay() - u).cwiseAbs().maxCoeff();
  }

  bool is_real() const {
    for (const auto& r : rotations_)
      if (r.phi != 0.0) return false;
    for (double p : phases_)
      if (p != 0.0 && std::abs(std::abs(p) - constants::pi) > 1e-13) return false;
    return true;
  }

 private:
  static void apply_left(CMat& m, int i, int j, double theta, double phi) {
    const double c = std::cos(theta), s = std::sin(theta);
    const Cplx eip = std::exp(Cplx(0.0, phi));
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      const Cplx a = m(i, col), b = m(j, col);
      m(i, col) = c * a - s * eip * b;
      m(j, col) = s * std::conj(eip) * a + c * b;
    }
  }

  int n_modes_ = 0;
  Mode mode_ = Mode::spatial;
  std::vector<GivensRotation> rotations_;
  std::vector<double> phases_;
};

namespace detail {

// Fock-space image of one plane rotation on modes (i, j) of the determinant
// bitmask. Doubly-occupied and empty pairs are untouched; singly-occupied
// pairs mix with the Jordan-Wigner parity of the modes strictly between.
inline void apply_fock_rotation(const FockBasis& basis, CVec& amps, int i, int j,
                                double theta, double phi) {
  if (i > j) std::swap(i, j);
  const double c = std::cos(theta), s = std::sin(theta);
  const Cplx seip = s * std::exp(Cplx(0.0, phi));
  const std::uint32_t between = ((1u << j) - 1) & ~((1u << (i + 1)) - 1);
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    const std::uint32_t d = basis.det(idx);
    const bool occ_i = (d >> i) & 1, occ_j = (d >> j) & 1;
    if (!occ_i || occ_j) continue;  // visit each pair once, from the i-occupied side
    const std::uint32_t partner = (d & ~(1u << i)) | (1u << j);
    const auto pidx = basis.index_of(partner);
    if (pidx < 0) throw ContractError("basis is not closed under the rotation");
    const double sigma = (std::popcount(d & between) & 1) ? -1.0 : 1.0;
    const Cplx x = amps(static_cast<Eigen::Index>(idx));
    const Cplx y = amps(pidx);
    amps(static_cast<Eigen::Index>(idx)) = c * x - sigma * seip * y;
    amps(pidx) = sigma * std::conj(seip) * x + c * y;
  }
}

inline void apply_fock_mode_phase(const FockBasis& basis, CVec& amps, int mode,
                                  double lambda) {
  if (lambda == 0.0) return;
  const Cplx f = std::exp(Cplx(0.0, lambda));
  for (std::size_t idx = 0; idx < basis.size(); ++idx)
    if ((basis.det(idx) >> mode) & 1) amps(static_cast<Eigen::Index>(idx)) *= f;
}

}  // namespace detail

enum class SpinMode { both_spins_same_rotation, spin_orbital_general };

// Applies the Fock-space image of the schedule (optionally inverted) to the
// state in place. Spatial schedules require both_spins_same_rotation; general
// schedules the spin-orbital mode.
inline void apply_basis_rotation_in_place(FockStatevector& state,
                                          const GivensSchedule& sched, SpinMode spin_mode,
                                          bool inverse = false) {
  const auto& basis = *state.basis();
  const int n = basis.n_orbitals();
  const bool spatial = sched.mode() == GivensSchedule::Mode::spatial;
  if (spatial && spin_mode != SpinMode::both_spins_same_rotation)
    throw ContractError("spatial schedule requires the both-spins mode");
  if (!spatial && spin_mode != SpinMode::spin_orbital_general)
    throw ContractError("general schedule requires the spin-orbital mode");
  if (spatial && sched.n_modes() != n)
    throw ContractError("schedule/basis orbital count mismatch");
  if (!spatial && sched.n_modes() != 2 * n)
    throw ContractError("schedule/basis mode count mismatch");

  CVec& amps = state.amplitudes();
  auto one_rotation = [&](const GivensRotation& r, double sign) {
    if (spatial) {
      detail::apply_fock_rotation(basis, amps, r.i, r.j, sign * r.theta, r.phi);
      detail::apply_fock_rotation(basis, amps, n + r.i, n + r.j, sign * r.theta, r.phi);
    } else {
      detail::apply_fock_rotation(basis, amps, r.i, r.j, sign * r.theta, r.phi);
    }
  };
  auto one_phase = [&](int k, double sign) {
    const double lam = sign * sched.phases()[k];
    if (spatial) {
      detail::apply_fock_mode_phase(basis, amps, k, lam);
      detail::apply_fock_mode_phase(basis, amps, n + k, lam);
    } else {
      detail::apply_fock_mode_phase(basis, amps, k, lam);
    }
  };

  if (!inverse) {
    // U = R_0 ... R_{m-1} D: diagonal first
    for (int k = 0; k < sched.n_modes(); ++k) one_phase(k, +1.0);
    for (auto it = sched.rotations().rbegin(); it != sched.rotations().rend(); ++it)
      one_rotation(*it, +1.0);
  } else {
    for (const auto& r : sched.rotations()) one_rotation(r, -1.0);
    for (int k = 0; k < sched.n_modes(); ++k) one_phase(k, -1.0);
  }
}

inline FockStatevector apply_basis_rotation(const FockStatevector& state,
                                            const GivensSchedule& sched,
                                            SpinMode spin_mode, bool inverse = false) {
  FockStatevector out = state;
  apply_basis_rotation_in_place(out, sched, spin_mode, inverse);
  return out;
}

// Decomposition entry point for real orthogonal orbital rotations.
inline GivensSchedule givens_decompose(const Mat& u,
                                       GivensSchedule::Mode mode = GivensSchedule::Mode::spatial) {
  if ((u.transpose() * u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw ContractError("givens_decompose: input is not orthogonal");
  return GivensSchedule::decompose_real(u, mode);
}

}  // namespace odmr

#endif  // ODMR_GIVENS_HPP
