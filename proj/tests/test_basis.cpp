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

#include <catch2/catch_amalgamated.hpp>

#include "odmr/basis.hpp"
#include "odmr/statevector.hpp"
#include "test_support.hpp"

using namespace odmr;

TEST_CASE("sector basis enumeration") {
  SECTION("N=2 half filling has C(2,1)^2 = 4 states") {
    auto b = FockBasis::sector(2, 1, 1);
    REQUIRE(b->size() == 4);
    for (std::size_t i = 0; i < b->size(); ++i) {
      CHECK(b->up_count(b->det(i)) == 1);
      CHECK(b->down_count(b->det(i)) == 1);
    }
  }

  SECTION("N=9 with (9 up, 7 down) has 36 states") {
    auto b = FockBasis::sector(9, 9, 7);
    REQUIRE(b->size() == 36);
  }

  SECTION("N=3 (2,1) enumerates 9 states ascending in the combined bitmask") {
    auto b = FockBasis::sector(3, 2, 1);
    REQUIRE(b->size() == 9);
    // spin-down mask forms the high bits, so order is (down, up) lexicographic
    std::vector<std::uint32_t> expect;
    for (std::uint32_t d : {1u, 2u, 4u})
      for (std::uint32_t u : {3u, 5u, 6u}) expect.push_back(u | (d << 3));
    for (std::size_t i = 0; i < 9; ++i) CHECK(b->det(i) == expect[i]);
    for (std::size_t i = 1; i < 9; ++i) CHECK(b->det(i) > b->det(i - 1));
  }

  SECTION("capacity cap raises") {
    CHECK_THROWS_AS(FockBasis::sector(14, 7, 7, 1000), CapacityError);
  }

  SECTION("index lookup round trip") {
    auto b = FockBasis::sector(4, 2, 2);
    for (std::size_t i = 0; i < b->size(); ++i)
      CHECK(b->index_of(b->det(i)) == static_cast<std::ptrdiff_t>(i));
    CHECK(b->index_of(0b1111u) == -1);  // wrong sector
  }
}

TEST_CASE("fixed-count basis spans all M sectors") {
  auto b = FockBasis::fixed_count(3, 3);
  REQUIRE(b->size() == FockBasis::binomial(6, 3));
  std::size_t acc = 0;
  for (int nu = 0; nu <= 3; ++nu) {
    const int nd = 3 - nu;
    if (nd < 0 || nd > 3) continue;
    acc += FockBasis::binomial(3, nu) * FockBasis::binomial(3, nd);
  }
  CHECK(acc == b->size());
}

TEST_CASE("jordan-wigner hop signs match the dense oracle") {
  const int m = 4;
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      const CMat dense =
          test::dense_annihilator(m, p).adjoint() * test::dense_annihilator(m, q);
      for (std::uint32_t d = 0; d < (1u << m); ++d) {
        const auto hop = jw::c_dag_c(d, p, q);
        for (std::uint32_t e = 0; e < (1u << m); ++e) {
          const Cplx expect = dense(e, d);
          const Cplx got = (hop.sign != 0 && hop.det == e)
                               ? Cplx(static_cast<double>(hop.sign))
                               : Cplx(0.0);
          REQUIRE(std::abs(expect - got) < 1e-14);
        }
      }
    }
}

TEST_CASE("statevector basics") {
  auto b = FockBasis::sector(2, 1, 1);
  Rng rng(42);
  auto psi = FockStatevector::random(b, rng);
  CHECK(psi.norm() == Catch::Approx(1.0).margin(1e-12));

  auto phi = FockStatevector::determinant(b, b->det(0));
  CHECK(std::abs(phi.inner(phi) - Cplx(1.0)) < 1e-14);

  SECTION("embedding into the fixed-count space preserves amplitudes") {
    auto big = FockBasis::fixed_count(2, 2);
    auto emb = psi.embedded(big);
    CHECK(emb.norm() == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t i = 0; i < b->size(); ++i) {
      auto j = big->index_of(b->det(i));
      REQUIRE(j >= 0);
      CHECK(emb.amplitudes()(j) == psi.amplitudes()(static_cast<Eigen::Index>(i)));
    }
  }

  SECTION("basis mismatch is a contract error") {
    auto other = FockBasis::sector(2, 2, 0);
    auto chi = FockStatevector::determinant(other, other->det(0));
    CHECK_THROWS_AS(psi.inner(chi), ContractError);
  }
}
