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

#ifndef ODMR_BASIS_HPP
#define ODMR_BASIS_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <memory>
#include <vector>

#include "odmr/core.hpp"

namespace odmr {

// Occupation-number basis over 2N spin orbitals in Jordan-Wigner order:
// modes 0..N-1 are (p, alpha), modes N..2N-1 are (p, beta). A determinant is
// a bitmask with bit s set when spin orbital s is occupied. Determinants are
// stored ascending, so the enumeration order for a sector runs over the
// spin-down configuration (high bits) outermost and spin-up innermost.
class FockBasis {
 public:
  enum class Kind { Sector, FixedCount, Full };

  static constexpr std::size_t default_capacity = 4'000'000;

  // All determinants with exactly n_up/n_down occupied modes per spin block.
  static std::shared_ptr<const FockBasis> sector(int n_orbitals, int n_up, int n_down,
                                                 std::size_t cap = default_capacity) {
    if (n_orbitals < 1 || n_orbitals > 15)
      throw ContractError("FockBasis: n_orbitals must be in [1, 15]");
    if (n_up < 0 || n_up > n_orbitals || n_down < 0 || n_down > n_orbitals)
      throw ContractError("FockBasis: electron count out of range");
    const std::size_t size = binomial(n_orbitals, n_up) * binomial(n_orbitals, n_down);
    check_cap(size, cap);
    auto b = std::make_shared<FockBasis>(Private{}, n_orbitals, Kind::Sector, n_up, n_down);
    const auto ups = combinations(n_orbitals, n_up);
    const auto downs = combinations(n_orbitals, n_down);
    b->dets_.reserve(size);
    for (std::uint32_t d : downs)
      for (std::uint32_t u : ups) b->dets_.push_back(u | (d << n_orbitals));
    return b;
  }

  // All determinants with a fixed total electron count (all M sectors).
  static std::shared_ptr<const FockBasis> fixed_count(int n_orbitals, int n_electrons,
                                                      std::size_t cap = default_capacity) {
    if (n_orbitals < 1 || n_orbitals > 15)
      throw ContractError("FockBasis: n_orbitals must be in [1, 15]");
    if (n_electrons < 0 || n_electrons > 2 * n_orbitals)
      throw ContractError("FockBasis: electron count out of range");
    const std::size_t size = binomial(2 * n_orbitals, n_electrons);
    check_cap(size, cap);
    auto b = std::make_shared<FockBasis>(Private{}, n_orbitals, Kind::FixedCount, -1, -1);
    b->n_electrons_ = n_electrons;
    b->dets_.reserve(size);
    for (std::uint32_t d = 0; d < (1u << (2 * n_orbitals)); ++d)
      if (std::popcount(d) == n_electrons) b->dets_.push_back(d);
    return b;
  }

  // The full 2^(2N)-dimensional occupation space.
  static std::shared_ptr<const FockBasis> full(int n_orbitals,
                                               std::size_t cap = default_capacity) {
    if (n_orbitals < 1 || n_orbitals > 11)
      throw ContractError("FockBasis: full space limited to n_orbitals <= 11");
    const std::size_t size = std::size_t{1} << (2 * n_orbitals);
    check_cap(size, cap);
    auto b = std::make_shared<FockBasis>(Private{}, n_orbitals, Kind::Full, -1, -1);
    b->dets_.resize(size);
    for (std::size_t d = 0; d < size; ++d) b->dets_[d] = static_cast<std::uint32_t>(d);
    return b;
  }

  int n_orbitals() const { return n_orbitals_; }
  int n_modes() const { return 2 * n_orbitals_; }
  Kind kind() const { return kind_; }
  int n_up() const { return n_up_; }
  int n_down() const { return n_down_; }
  std::size_t size() const { return dets_.size(); }
  std::uint32_t det(std::size_t i) const { return dets_[i]; }
  const std::vector<std::uint32_t>& dets() const { return dets_; }

  // Index of a determinant, or -1 when it does not belong to this basis.
  std::ptrdiff_t index_of(std::uint32_t det) const {
    if (kind_ == Kind::Full) return static_cast<std::ptrdiff_t>(det);
    auto it = std::lower_bound(dets_.begin(), dets_.end(), det);
    if (it == dets_.end() || *it != det) return -1;
    return it - dets_.begin();
  }

  int up_count(std::uint32_t det) const {
    return std::popcount(det & ((1u << n_orbitals_) - 1));
  }
  int down_count(std::uint32_t det) const { return std::popcount(det >> n_orbitals_); }

  bool same_as(const FockBasis& other) const {
    return this == &other ||
           (n_orbitals_ == other.n_orbitals_ && kind_ == other.kind_ &&
            n_up_ == other.n_up_ && n_down_ == other.n_down_ && dets_ == other.dets_);
  }

  static std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / i;
    return r;
  }

  struct Private {};
  FockBasis(Private, int n, Kind kind, int nu, int nd)
      : n_orbitals_(n), kind_(kind), n_up_(nu), n_down_(nd) {}

 private:
  static void check_cap(std::size_t size, std::size_t cap) {
    if (size > cap)
      throw CapacityError("basis size " + std::to_string(size) +
                          " exceeds capacity " + std::to_string(cap));
  }

  static std::vector<std::uint32_t> combinations(int n, int k) {
    std::vector<std::uint32_t> out;
    out.reserve(binomial(n, k));
    for (std::uint32_t m = 0; m < (1u << n); ++m)
      if (std::popcount(m) == k) out.push_back(m);
    return out;
  }

  int n_orbitals_;
  Kind kind_;
  int n_up_, n_down_;
  int n_electrons_ = -1;
  std::vector<std::uint32_t> dets_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

namespace jw {

// Parity of the occupation below `mode`; the Jordan-Wigner string sign is
// (-1)^parity.
inline int parity_below(std::uint32_t det, int mode) {
  return std::popcount(det & ((1u << mode) - 1)) & 1;
}

struct Hop {
  std::uint32_t det;
  int sign;
};

// c_dag(p) c(q) |det>. Returns sign 0 when annihilated.
inline Hop c_dag_c(std::uint32_t det, int p, int q) {
  if (!((det >> q) & 1)) return {0, 0};
  int sign = parity_below(det, q) ? -1 : 1;
  std::uint32_t d = det & ~(1u << q);
  if ((d >> p) & 1) return {0, 0};
  if (parity_below(d, p)) sign = -sign;
  return {d | (1u << p), sign};
}

inline Hop annihilate(std::uint32_t det, int q) {
  if (!((det >> q) & 1)) return {0, 0};
  return {det & ~(1u << q), parity_below(det, q) ? -1 : 1};
}

inline Hop create(std::uint32_t det, int p) {
  if ((det >> p) & 1) return {0, 0};
  return {det | (1u << p), parity_below(det, p) ? -1 : 1};
}

}  // namespace jw

}  // namespace odmr

#endif  // ODMR_BASIS_HPP
