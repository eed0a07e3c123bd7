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

#ifndef ODMR_STATEVECTOR_HPP
#define ODMR_STATEVECTOR_HPP

#include <utility>

#include "odmr/basis.hpp"
#include "odmr/core.hpp"

namespace odmr {

// Complex amplitude vector over a FockBasis. States are normalized unless
// explicitly flagged otherwise (dipole-excited states keep their norm until
// the caller renormalizes).
class FockStatevector {
 public:
  FockStatevector() = default;
  FockStatevector(BasisPtr basis, CVec amps, bool normalized = true)
      : basis_(std::move(basis)), amps_(std::move(amps)), normalized_(normalized) {
    if (static_cast<std::size_t>(amps_.size()) != basis_->size())
      throw ContractError("FockStatevector: amplitude/basis size mismatch");
  }

  static FockStatevector zero(BasisPtr basis) {
    CVec a = CVec::Zero(static_cast<Eigen::Index>(basis->size()));
    return FockStatevector(std::move(basis), std::move(a), false);
  }

  static FockStatevector determinant(BasisPtr basis, std::uint32_t det) {
    auto idx = basis->index_of(det);
    if (idx < 0) throw ContractError("determinant not in basis");
    CVec a = CVec::Zero(static_cast<Eigen::Index>(basis->size()));
    a(idx) = 1.0;
    return FockStatevector(std::move(basis), std::move(a));
  }

  static FockStatevector random(BasisPtr basis, Rng& rng) {
    CVec a(static_cast<Eigen::Index>(basis->size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = Cplx(rng.normal(), rng.normal());
    a.normalize();
    return FockStatevector(std::move(basis), std::move(a));
  }

  const BasisPtr& basis() const { return basis_; }
  const CVec& amplitudes() const { return amps_; }
  CVec& amplitudes() { return amps_; }
  bool is_flagged_normalized() const { return normalized_; }
  void set_normalized_flag(bool f) { normalized_ = f; }

  double norm() const { return amps_.norm(); }

  // Normalizes in place and returns the pre-normalization norm.
  double normalize() {
    const double n = amps_.norm();
    if (n == 0.0) throw DegenerateInputError("cannot normalize a zero state");
    amps_ /= n;
    normalized_ = true;
    return n;
  }

  Cplx inner(const FockStatevector& other) const {
    require_same_basis(other);
    return amps_.dot(other.amps_);  // Eigen's dot conjugates the left factor
  }

  double fidelity2(const FockStatevector& other) const {
    const Cplx d = inner(other);
    return std::norm(d);
  }

  // Embeds this state into a larger basis containing every determinant of the
  // current one (e.g. a sector into the fixed-count space).
  FockStatevector embedded(BasisPtr target) const {
    CVec a = CVec::Zero(static_cast<Eigen::Index>(target->size()));
    for (std::size_t i = 0; i < basis_->size(); ++i) {
      auto j = target->index_of(basis_->det(i));
      if (j < 0) throw ContractError("embedded: target basis misses a determinant");
      a(j) = amps_(static_cast<Eigen::Index>(i));
    }
    return FockStatevector(std::move(target), std::move(a), normalized_);
  }

  void require_same_basis(const FockStatevector& other) const {
    if (!basis_->same_as(*other.basis_))
      throw ContractError("statevector basis mismatch");
  }

 private:
  BasisPtr basis_;
  CVec amps_;
  bool normalized_ = true;
};

}  // namespace odmr

#endif  // ODMR_STATEVECTOR_HPP
