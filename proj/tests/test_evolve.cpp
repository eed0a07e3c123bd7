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

#include "odmr/evolve.hpp"
#include "odmr/reference.hpp"
#include "test_support.hpp"

using namespace odmr;

TEST_CASE("givens decomposition") {
  SECTION("identity gives an empty schedule") {
    auto sched = givens_decompose(Mat::Identity(4, 4));
    CHECK(sched.rotations().empty());
    CHECK(sched.replay_error(CMat::Identity(4, 4)) < 1e-14);
  }

  SECTION("2x2 rotation gives a single Givens with the same angle") {
    const double theta = 0.6;
    Mat u(2, 2);
    u << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    auto sched = givens_decompose(u);
    REQUIRE(sched.rotations().size() == 1);
    CHECK(sched.rotations()[0].i == 0);
    CHECK(sched.rotations()[0].j == 1);
    CHECK(std::abs(sched.rotations()[0].theta) == Catch::Approx(theta));
    CHECK(sched.replay_error(u.cast<Cplx>()) < 1e-12);
    CHECK(sched.is_real());
  }

  SECTION("random 6x6 orthogonal replays to 1e-10") {
    Rng rng(5);
    const Mat x = random_antisymmetric(6, rng);
    const Mat u = cdf_detail::expm_antisymmetric(x);
    auto sched = givens_decompose(u);
    CHECK(sched.rotations().size() <= 15);  // N(N-1)/2
    CHECK(sched.replay_error(u.cast<Cplx>()) < 1e-10);
  }

  SECTION("random unitary replays through the complex path") {
    Rng rng(6);
    const CMat h = random_hermitian(5, rng);
    const CMat u = test::dense_exp_hermitian(h, 1.0);
    auto sched = GivensSchedule::decompose(u, GivensSchedule::Mode::general);
    CHECK(sched.replay_error(u) < 1e-10);
  }

  SECTION("non-orthogonal input is a contract error") {
    Mat u(2, 2);
    u << 1, 0.2, 0, 1;
    CHECK_THROWS_AS(givens_decompose(u), ContractError);
  }
}

TEST_CASE("fock-space basis rotation") {
  auto basis = FockBasis::sector(3, 2, 1);
  Rng rng(8);
  auto psi = FockStatevector::random(basis, rng);

  SECTION("rotation then its inverse is the identity") {
    const Mat u = cdf_detail::expm_antisymmetric(random_antisymmetric(3, rng));
    auto sched = givens_decompose(u);
    auto forth = apply_basis_rotation(psi, sched, SpinMode::both_spins_same_rotation);
    auto back =
        apply_basis_rotation(forth, sched, SpinMode::both_spins_same_rotation, true);
    CHECK((back.amplitudes() - psi.amplitudes()).norm() < 1e-12);
  }

  SECTION("single-particle sector reproduces the matrix itself") {
    auto b1 = FockBasis::sector(3, 1, 0);
    const Mat u = cdf_detail::expm_antisymmetric(random_antisymmetric(3, rng));
    auto sched = givens_decompose(u);
    // basis dets are single alpha occupations ordered by orbital
    CMat fock(3, 3);
    for (int col = 0; col < 3; ++col) {
      auto e = FockStatevector::determinant(b1, 1u << col);
      auto rotated = apply_basis_rotation(e, sched, SpinMode::both_spins_same_rotation);
      for (int row = 0; row < 3; ++row)
        fock(row, col) = rotated.amplitudes()(b1->index_of(1u << row));
    }
    CHECK((fock - u.cast<Cplx>()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("matches the dense one-body exponential oracle on the full space") {
    auto full = FockBasis::full(2);
    auto chi = FockStatevector::random(full, rng);
    const Mat x = random_antisymmetric(2, rng);
    const Mat u = cdf_detail::expm_antisymmetric(x);
    auto sched = givens_decompose(u);
    auto rotated = apply_basis_rotation(chi, sched, SpinMode::both_spins_same_rotation);
    // dense oracle: exp(sum K_pq c+_p c_q) with K = log u on both spins
    CMat k2 = CMat::Zero(4, 4);
    k2.topLeftCorner(2, 2) = x.cast<Cplx>();
    k2.bottomRightCorner(2, 2) = x.cast<Cplx>();
    const CMat gen = test::dense_one_body_full(k2);
    // exp via scaling of the anti-Hermitian generator
    Eigen::SelfAdjointEigenSolver<CMat> es(Cplx(0, -1) * gen);
    CVec ph(gen.rows());
    for (Eigen::Index i = 0; i < gen.rows(); ++i)
      ph(i) = std::exp(Cplx(0, es.eigenvalues()(i)));
    const CMat big = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    const CVec expect = big * chi.amplitudes();
    CHECK((rotated.amplitudes() - expect).norm() < 1e-11);
  }

  SECTION("identical rotation of both spins preserves <S^2>") {
    const SparseC s2 = sparse_s2(basis);
    const double before = std::real(expectation(s2, psi));
    const Mat u = cdf_detail::expm_antisymmetric(random_antisymmetric(3, rng));
    auto rotated =
        apply_basis_rotation(psi, givens_decompose(u), SpinMode::both_spins_same_rotation);
    const double after = std::real(expectation(s2, rotated));
    CHECK(after == Catch::Approx(before).margin(1e-10));
  }
}

namespace {

struct ToySetup {
  ActiveSpaceModel model;
  BasisPtr basis;
  CdfFactorization cdf;
  CMat h_dense;
};

ToySetup make_toy(int n, int nu, int nd, std::uint64_t seed, int l_frags) {
  auto model = test::random_model(n, seed, 1.0, 0.5, 0.2);
  auto basis = FockBasis::sector(n, nu, nd);
  CdfOptions opts;
  opts.seed = seed + 1;
  opts.max_iters = 4000;
  CdfFactorization f;
  f.one_body = factorize_one_body(model);
  f.two_body = factorize_two_body(model, l_frags, opts, &f.residual);
  return {model, basis, std::move(f), CMat(sparse_hamiltonian(model, basis))};
}

}  // namespace

TEST_CASE("trotter step") {
  SECTION("diagonal hamiltonian is exact at any step size") {
    // zero two-body, diagonal t: all fragments commute
    Mat t = Mat::Zero(3, 3);
    t.diagonal() << 0.3, -0.7, 1.1;
    ActiveSpaceModel model(3, t, std::vector<double>(81, 0.0), 0.05);
    auto basis = FockBasis::sector(3, 2, 1);
    CdfFactorization f;
    f.one_body = factorize_one_body(model);
    f.two_body = factorize_two_body(model, 1, CdfOptions{});
    TrotterWorkspace ws(model, f, basis);
    Rng rng(14);
    auto psi = FockStatevector::random(basis, rng);
    TrotterPlan plan;
    plan.dt = 2.3;
    auto stepped = trotter_step(psi, ws, plan);
    const CMat h(sparse_hamiltonian(model, basis));
    const CVec expect = test::dense_exp_hermitian(h, plan.dt) * psi.amplitudes();
    CHECK((stepped.amplitudes() - expect).norm() < 1e-12);
  }

  SECTION("order-2 local error scales as dt^3") {
    auto toy = make_toy(2, 1, 1, 101, 3);
    TrotterWorkspace ws(toy.model, toy.cdf, toy.basis);
    Rng rng(15);
    auto psi = FockStatevector::random(toy.basis, rng);
    std::vector<double> dts{0.2, 0.1, 0.05, 0.025, 0.0125};
    std::vector<double> errs;
    for (double dt : dts) {
      TrotterPlan plan;
      plan.dt = dt;
      auto stepped = trotter_step(psi, ws, plan);
      const CVec expect = test::dense_exp_hermitian(toy.h_dense, dt) * psi.amplitudes();
      errs.push_back((stepped.amplitudes() - expect).norm());
    }
    const double slope = test::loglog_slope(dts, errs);
    CHECK(slope == Catch::Approx(3.0).margin(0.2));
  }

  SECTION("dt -> 0 returns the input state") {
    auto toy = make_toy(2, 1, 1, 102, 2);
    TrotterWorkspace ws(toy.model, toy.cdf, toy.basis);
    Rng rng(16);
    auto psi = FockStatevector::random(toy.basis, rng);
    TrotterPlan plan;
    plan.dt = 1e-9;
    auto stepped = trotter_step(psi, ws, plan);
    CHECK((stepped.amplitudes() - psi.amplitudes()).norm() < 1e-7);
  }

  SECTION("particle number and M are conserved") {
    auto toy = make_toy(3, 2, 1, 103, 3);
    TrotterWorkspace ws(toy.model, toy.cdf, toy.basis);
    Rng rng(17);
    auto psi = FockStatevector::random(toy.basis, rng);
    TrotterPlan plan;
    plan.dt = 0.3;
    auto stepped = trotter_step(psi, ws, plan);
    CHECK(stepped.norm() == Catch::Approx(1.0).margin(1e-10));
    // sector basis itself encodes (n_up, n_down); closure under the step is
    // the statement (no ContractError above), plus unit norm
  }

  SECTION("angle rounding perturbs the step by O(eps_rot)") {
    auto toy = make_toy(2, 1, 1, 104, 2);
    TrotterWorkspace ws(toy.model, toy.cdf, toy.basis);
    Rng rng(18);
    auto psi = FockStatevector::random(toy.basis, rng);
    TrotterPlan exact_plan;
    exact_plan.dt = 0.2;
    auto ref = trotter_step(psi, ws, exact_plan);

    TrotterPlan coarse = exact_plan;
    coarse.eps_rot = 1e-2;
    auto coarse_state = trotter_step(psi, ws, coarse);
    TrotterPlan fine = exact_plan;
    fine.eps_rot = 1e-6;
    auto fine_state = trotter_step(psi, ws, fine);

    const double coarse_err = (coarse_state.amplitudes() - ref.amplitudes()).norm();
    const double fine_err = (fine_state.amplitudes() - ref.amplitudes()).norm();
    CHECK(coarse_err > fine_err);
    CHECK(fine_err < 1e-4);
    CHECK(coarse_state.norm() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("evolve") {
  auto toy = make_toy(3, 2, 1, 111, 4);
  TrotterWorkspace ws(toy.model, toy.cdf, toy.basis);
  Rng rng(19);
  auto psi = FockStatevector::random(toy.basis, rng);

  SECTION("t = 0 is the identity") {
    TrotterPlan plan;
    plan.dt = 0.1;
    auto res = evolve(psi, 0.0, plan, ws);
    CHECK(res.steps == 0);
    CHECK((res.state.amplitudes() - psi.amplitudes()).norm() == 0.0);
  }

  SECTION("rounding residual is reported") {
    TrotterPlan plan;
    plan.dt = 0.4;
    auto res = evolve(psi, 1.0, plan, ws);
    CHECK(res.steps == 2);  // 2.5 steps rounds to 2
    CHECK(res.t_residual == Catch::Approx(0.2));
  }

  SECTION("eigenstate of an exactly factorized model picks up a pure phase") {
    // diagonal hamiltonian again: exact evolution within one fragment family
    Mat t = Mat::Zero(2, 2);
    t.diagonal() << 0.9, -0.4;
    ActiveSpaceModel model(2, t, std::vector<double>(16, 0.0), 0.0);
    auto basis = FockBasis::sector(2, 1, 0);
    CdfFactorization f;
    f.one_body = factorize_one_body(model);
    f.two_body = factorize_two_body(model, 1, CdfOptions{});
    TrotterWorkspace dws(model, f, basis);
    auto e0 = FockStatevector::determinant(basis, 1u << 1);  // orbital 1, energy -0.4
    TrotterPlan plan;
    plan.dt = 0.5;
    auto res = evolve(e0, 3.0, plan, dws);
    const Cplx overlap = e0.inner(res.state);
    CHECK(std::abs(overlap) == Catch::Approx(1.0).margin(1e-10));
    CHECK(std::arg(overlap) == Catch::Approx(-(-0.4) * 3.0).margin(1e-10));
  }

  SECTION("norm preserved and overlap with exact evolution stays high") {
    TrotterPlan plan;
    plan.dt = 0.05;
    const double t = 5.0;
    auto res = evolve(psi, t, plan, ws);
    CHECK(res.state.norm() == Catch::Approx(1.0).margin(1e-8));
    const CVec expect = test::dense_exp_hermitian(toy.h_dense, t) * psi.amplitudes();
    const double overlap = std::abs(CVec(expect).dot(res.state.amplitudes()));
    // the CDF fit residual also enters here, so the bound is loose
    CHECK(overlap > 1.0 - 10.0 * plan.dt * plan.dt - 10.0 * toy.cdf.residual * t);
  }
}

TEST_CASE("fast-forwarded one-body evolution") {
  auto basis = FockBasis::fixed_count(2, 2);
  Rng rng(21);
  auto psi = FockStatevector::random(basis, rng);

  SECTION("S_z gives the known per-determinant phases") {
    auto sz = sz_operator(2);
    const double t = 1.7;
    auto evolved = fast_forward_one_body(psi, sz, t);
    for (std::size_t i = 0; i < basis->size(); ++i) {
      const double m = 0.5 * (basis->up_count(basis->det(i)) -
                              basis->down_count(basis->det(i)));
      const Cplx expect =
          psi.amplitudes()(static_cast<Eigen::Index>(i)) * std::exp(Cplx(0, -t * m));
      CHECK(std::abs(evolved.amplitudes()(static_cast<Eigen::Index>(i)) - expect) <
            1e-12);
    }
  }

  SECTION("t = 0 is the identity") {
    auto soc = test::random_soc(2, 120);
    auto evolved = fast_forward_one_body(psi, soc, 0.0);
    CHECK((evolved.amplitudes() - psi.amplitudes()).norm() < 1e-12);
  }

  SECTION("random hermitian matches the dense exponential to 1e-10") {
    auto soc = test::random_soc(2, 121);
    for (double t : {0.1, 1.0, 10.0}) {
      auto evolved = fast_forward_one_body(psi, soc, t);
      const CMat hfull = test::dense_one_body_full(soc.matrix);
      const CMat hres = test::restrict_to(hfull, *basis);
      const CVec expect = test::dense_exp_hermitian(hres, t) * psi.amplitudes();
      CHECK((evolved.amplitudes() - expect).norm() < 1e-10);
    }
  }

  SECTION("non-hermitian input is a contract error") {
    SpinResolvedOperator bad{CMat::Zero(4, 4), SpinResolvedOperator::Label::custom};
    bad.matrix(0, 1) = 1.0;
    CHECK_THROWS_AS(fast_forward_one_body(psi, bad, 1.0), ContractError);
  }
}

TEST_CASE("exp(-i t S^2)") {
  auto basis = FockBasis::sector(2, 1, 1);

  SECTION("singlet eigenstate picks up a global phase only") {
    const auto i_ud = basis->index_of(0b1001);
    const auto i_du = basis->index_of(0b0110);
    CVec amps = CVec::Zero(4);
    amps(i_ud) = amps(i_du) = 1.0 / std::sqrt(2.0);
    FockStatevector singlet(basis, amps);
    auto evolved = exp_s2(singlet, 1.3);
    for (Eigen::Index i = 0; i < 4; ++i)
      CHECK(std::abs(std::abs(evolved.amplitudes()(i)) - std::abs(amps(i))) < 1e-12);
    CHECK(std::abs(singlet.inner(evolved)) == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("triplet acquires exp(-2it) relative to the singlet") {
    const auto i_ud = basis->index_of(0b1001);
    const auto i_du = basis->index_of(0b0110);
    CVec s = CVec::Zero(4), t3 = CVec::Zero(4);
    s(i_ud) = s(i_du) = 1.0 / std::sqrt(2.0);
    t3(i_ud) = 1.0 / std::sqrt(2.0);
    t3(i_du) = -1.0 / std::sqrt(2.0);
    const double t = 0.77;
    auto es = exp_s2(FockStatevector(basis, s), t);
    auto et = exp_s2(FockStatevector(basis, t3), t);
    const Cplx phase_s = FockStatevector(basis, s).inner(es);
    const Cplx phase_t = FockStatevector(basis, t3).inner(et);
    CHECK(std::abs(phase_s - Cplx(1.0)) < 1e-12);  // S^2 = 0
    CHECK(std::abs(phase_t - std::exp(Cplx(0, -2.0 * t))) < 1e-12);
  }

  SECTION("random 2-orbital states match the dense exponential at several t") {
    Rng rng(23);
    for (auto b : {FockBasis::sector(2, 1, 1), FockBasis::fixed_count(2, 2),
                   FockBasis::fixed_count(2, 3)}) {
      auto psi = FockStatevector::random(b, rng);
      const CMat s2full = [&] {
        // dense S^2 oracle: S-S+ + Sz(Sz+1) built from one-body pieces
        CMat sp = CMat::Zero(4, 4);
        sp(0, 2) = 1.0;
        sp(1, 3) = 1.0;
        const CMat spf = test::dense_one_body_full(sp);
        const CMat szf = test::dense_one_body_full(sz_operator(2).matrix);
        const CMat idm = CMat::Identity(szf.rows(), szf.cols());
        return CMat(spf.adjoint() * spf + szf * (szf + idm));
      }();
      for (double t : {0.1, 1.0, 10.0}) {
        auto evolved = exp_s2(psi, t);
        const CMat restricted = test::restrict_to(s2full, *b);
        const CVec expect = test::dense_exp_hermitian(restricted, t) * psi.amplitudes();
        CHECK((evolved.amplitudes() - expect).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("perturbative trotter error estimate") {
  SECTION("commuting fragments give Y3 = 0") {
    Mat t = Mat::Zero(2, 2);
    t.diagonal() << 0.4, -0.2;
    ActiveSpaceModel model(2, t, std::vector<double>(16, 0.0), 0.0);
    auto basis = FockBasis::sector(2, 1, 1);
    CdfFactorization f;
    f.one_body = factorize_one_body(model);
    f.two_body = factorize_two_body(model, 1, CdfOptions{});
    TrotterWorkspace ws(model, f, basis);
    auto sol = exact_diagonalize(sparse_hamiltonian(model, basis), 2);
    std::vector<FockStatevector> states{sol.state(basis, 0), sol.state(basis, 1)};
    auto est = trotter_error_estimate(ws, states, 0.1, 1e-3);
    CHECK(est.y3_expectations.cwiseAbs().maxCoeff() < 1e-10);
  }

  SECTION("prediction matches the measured eigenphase error within a factor 2") {
    auto toy = make_toy(2, 1, 1, 131, 3);
    TrotterWorkspace ws(toy.model, toy.cdf, toy.basis);
    // exact eigenstates of the *frame* hamiltonian so the fit residual does
    // not contaminate the eigenphase measurement
    CMat frame_h = CMat::Zero(toy.basis->size(), toy.basis->size());
    for (const auto& frag : ws.fragments()) frame_h += ws.fragment_matrix(frag);
    Eigen::SelfAdjointEigenSolver<CMat> es(frame_h);

    std::vector<FockStatevector> states;
    for (int k = 0; k < 3; ++k)
      states.emplace_back(toy.basis, CVec(es.eigenvectors().col(k)));
    const double dt = 0.05;
    auto est = trotter_error_estimate(ws, states, dt, 1e-3);

    TrotterPlan plan;
    plan.dt = dt;
    for (int k = 0; k < 3; ++k) {
      auto stepped = trotter_step(states[k], ws, plan);
      const Cplx overlap = states[k].inner(stepped);
      const double e_meas = -std::arg(overlap) / dt;
      const double eps_meas = es.eigenvalues()(k) - e_meas;  // true minus implemented
      if (std::abs(est.eps_e(k)) < 1e-12) continue;
      const double ratio = eps_meas / est.eps_e(k);
      CHECK(ratio > 0.5);
      CHECK(ratio < 2.0);
    }
  }

  SECTION("halving dt quarters the predicted error") {
    auto toy = make_toy(2, 1, 1, 132, 2);
    TrotterWorkspace ws(toy.model, toy.cdf, toy.basis);
    Rng rng(25);
    std::vector<FockStatevector> states{FockStatevector::random(toy.basis, rng)};
    auto a = trotter_error_estimate(ws, states, 0.2, 1e-3);
    auto b = trotter_error_estimate(ws, states, 0.1, 1e-3);
    CHECK(a.eps_e(0) == Catch::Approx(4.0 * b.eps_e(0)));
  }

  SECTION("dimension cap raises a capacity error") {
    auto toy = make_toy(2, 1, 1, 133, 1);
    TrotterWorkspace ws(toy.model, toy.cdf, toy.basis);
    Rng rng(26);
    std::vector<FockStatevector> states{FockStatevector::random(toy.basis, rng)};
    CHECK_THROWS_AS(trotter_error_estimate(ws, states, 0.1, 1e-3, 2), CapacityError);
  }
}
