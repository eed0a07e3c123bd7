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

#ifndef ODMR_FOCK_HPP
#define ODMR_FOCK_HPP

#include <vector>

#include "odmr/basis.hpp"
#include "odmr/core.hpp"
#include "odmr/model.hpp"
#include "odmr/statevector.hpp"

namespace odmr {

// Sparse matrix of sum_{pq} h_pq c+_p c_q between two bases. The operator may
// change the (n_up, n_down) sector (e.g. spin-flip blocks), in which case the
// caller supplies distinct source and destination bases; columns index the
// source basis. Destination determinants outside `dst` are rejected.
inline SparseC sparse_one_body(const CMat& h, const BasisPtr& src, const BasisPtr& dst) {
  const int n_modes = src->n_modes();
  if (h.rows() != n_modes || h.cols() != n_modes)
    throw ContractError("sparse_one_body: operator dimension mismatch");
  if (dst->n_orbitals() != src->n_orbitals())
    throw ContractError("sparse_one_body: basis orbital count mismatch");

  std::vector<Eigen::Triplet<Cplx>> trips;
  for (std::size_t col = 0; col < src->size(); ++col) {
    const std::uint32_t d = src->det(col);
    for (int q = 0; q < n_modes; ++q) {
      if (!((d >> q) & 1)) continue;
      for (int p = 0; p < n_modes; ++p) {
        if (h(p, q) == Cplx(0.0)) continue;
        const auto hop = jw::c_dag_c(d, p, q);
        if (hop.sign == 0) continue;
        const auto row = dst->index_of(hop.det);
        if (row < 0)
          throw ContractError("sparse_one_body: result leaves destination basis");
        trips.emplace_back(static_cast<int>(row), static_cast<int>(col),
                           static_cast<double>(hop.sign) * h(p, q));
      }
    }
  }
  SparseC m(static_cast<Eigen::Index>(dst->size()), static_cast<Eigen::Index>(src->size()));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

inline SparseC sparse_one_body(const CMat& h, const BasisPtr& basis) {
  return sparse_one_body(h, basis, basis);
}

inline SparseC sparse_one_body(const SpinResolvedOperator& op, const BasisPtr& src,
                               const BasisPtr& dst) {
  return sparse_one_body(op.matrix, src, dst);
}

inline SparseC sparse_one_body(const SpinResolvedOperator& op, const BasisPtr& basis) {
  return sparse_one_body(op.matrix, basis, basis);
}

// Fock matrix of a spatial (spin-independent) one-body operator such as a
// dipole component.
inline SparseC sparse_spatial_one_body(const Mat& h, const BasisPtr& basis) {
  return sparse_one_body(spin_diagonal(h), basis, basis);
}

// Sparse Hamiltonian of the active-space model on `basis`:
//   H = E + sum t_pq c+_{p s} c_{q s}
//         + 1/2 sum v_pqrs c+_{p s} c+_{r s'} c_{s s'} c_{q s}
// with v in chemists' notation (see ActiveSpaceModel). Jordan-Wigner signs
// are applied operator by operator; Hermiticity follows from the tensor
// symmetries.
inline SparseC sparse_hamiltonian(const ActiveSpaceModel& model, const BasisPtr& basis) {
  const int n = model.n_orbitals();
  if (basis->n_orbitals() != n)
    throw ContractError("sparse_hamiltonian: basis/model orbital mismatch");

  std::vector<Eigen::Triplet<Cplx>> trips;
  const double e0 = model.core_energy();
  for (std::size_t col = 0; col < basis->size(); ++col) {
    const std::uint32_t d0 = basis->det(col);
    if (e0 != 0.0) trips.emplace_back(static_cast<int>(col), static_cast<int>(col), e0);

    for (int so = 0; so < 2; ++so) {
      const int off = so * n;
      for (int q = 0; q < n; ++q) {
        if (!((d0 >> (q + off)) & 1)) continue;
        for (int p = 0; p < n; ++p) {
          if (model.t_eff()(p, q) == 0.0) continue;
          const auto hop = jw::c_dag_c(d0, p + off, q + off);
          if (hop.sign == 0) continue;
          const auto row = basis->index_of(hop.det);
          if (row < 0) throw ContractError("sparse_hamiltonian: sector breach");
          trips.emplace_back(static_cast<int>(row), static_cast<int>(col),
                             model.t_eff()(p, q) * static_cast<double>(hop.sign));
        }
      }
    }

    // two-body: apply c_q(s), c_s(s'), c+_r(s'), c+_p(s) right to left
    for (int so = 0; so < 2; ++so) {
      const int offo = so * n;
      for (int q = 0; q < n; ++q) {
        const auto a1 = jw::annihilate(d0, q + offo);
        if (a1.sign == 0) continue;
        for (int sp = 0; sp < 2; ++sp) {
          const int offp = sp * n;
          for (int s = 0; s < n; ++s) {
            const auto a2 = jw::annihilate(a1.det, s + offp);
            if (a2.sign == 0) continue;
            for (int r = 0; r < n; ++r) {
              const auto c1 = jw::create(a2.det, r + offp);
              if (c1.sign == 0) continue;
              for (int p = 0; p < n; ++p) {
                const double val = model.v(p, q, r, s);
                if (val == 0.0) continue;
                const auto c2 = jw::create(c1.det, p + offo);
                if (c2.sign == 0) continue;
                const auto row = basis->index_of(c2.det);
                if (row < 0) throw ContractError("sparse_hamiltonian: sector breach");
                trips.emplace_back(
                    static_cast<int>(row), static_cast<int>(col),
                    0.5 * val * static_cast<double>(a1.sign * a2.sign * c1.sign * c2.sign));
              }
            }
          }
        }
      }
    }
  }

  SparseC m(static_cast<Eigen::Index>(basis->size()),
            static_cast<Eigen::Index>(basis->size()));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// Total-spin ladder operator S+ = sum_p c+_{p a} c_{p b} as a sector-raising
// sparse matrix.
inline SparseC sparse_s_plus(const BasisPtr& src, const BasisPtr& dst) {
  const int n = src->n_orbitals();
  CMat h = CMat::Zero(2 * n, 2 * n);
  for (int p = 0; p < n; ++p) h(p, n + p) = 1.0;
  return sparse_one_body(h, src, dst);
}

// S^2 = S- S+ + S_z (S_z + 1) on a sector basis (sector-preserving).
inline SparseC sparse_s2(const BasisPtr& basis) {
  const int n = basis->n_orbitals();
  std::vector<Eigen::Triplet<Cplx>> trips;
  for (std::size_t col = 0; col < basis->size(); ++col) {
    const std::uint32_t d = basis->det(col);
    const double mz = 0.5 * (basis->up_count(d) - basis->down_count(d));
    trips.emplace_back(static_cast<int>(col), static_cast<int>(col), mz * (mz + 1.0));
    // S- S+ term: c+_{q b} c_{q a} c+_{p a} c_{p b}
    for (int p = 0; p < n; ++p) {
      const auto up = jw::c_dag_c(d, p, n + p);  // S+ piece
      if (up.sign == 0) continue;
      for (int q = 0; q < n; ++q) {
        const auto dn = jw::c_dag_c(up.det, n + q, q);  // S- piece
        if (dn.sign == 0) continue;
        const auto row = basis->index_of(dn.det);
        if (row < 0) throw ContractError("sparse_s2: sector breach");
        trips.emplace_back(static_cast<int>(row), static_cast<int>(col),
                           static_cast<double>(up.sign * dn.sign));
      }
    }
  }
  SparseC m(static_cast<Eigen::Index>(basis->size()),
            static_cast<Eigen::Index>(basis->size()));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

inline FockStatevector apply_sparse(const SparseC& op, const FockStatevector& state,
                                    BasisPtr out_basis) {
  CVec a = op * state.amplitudes();
  return FockStatevector(std::move(out_basis), std::move(a), false);
}

inline Cplx expectation(const SparseC& op, const FockStatevector& state) {
  return state.amplitudes().dot(op * state.amplitudes());
}

}  // namespace odmr

#endif  // ODMR_FOCK_HPP
