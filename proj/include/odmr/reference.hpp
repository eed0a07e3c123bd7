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

#ifndef ODMR_REFERENCE_HPP
#define ODMR_REFERENCE_HPP

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "odmr/fock.hpp"
#include "odmr/spectrum.hpp"
#include "odmr/statevector.hpp"

namespace odmr {

// ---------------------------------------------------------------------------
// Exact diagonalization
// ---------------------------------------------------------------------------

struct EigenOptions {
  enum class Method { automatic, dense, iterative };
  Method method = Method::automatic;
  int dense_threshold = 2000;
  double residual_tol = 1e-8;
  std::uint64_t seed = 12345;  // Lanczos start vector
  int max_subspace = 0;        // 0 -> min(dim, 8k + 80)
};

struct EigenSolution {
  Vec energies;               // ascending, Hartree
  CMat vectors;               // dim x k, phase-fixed
  Vec s2_values;              // <S^2> per state (filled by s2_classify)
  std::vector<double> spin_labels;      // s with <S^2> ~ s(s+1), -1 if unclassified
  std::vector<int> index_within_sector; // n-th state of its spin label
  Vec residuals;              // ||Hv - Ev|| per pair

  int count() const { return static_cast<int>(energies.size()); }
  FockStatevector state(const BasisPtr& basis, int k) const {
    return FockStatevector(basis, vectors.col(k));
  }
};

namespace detail {

// Global phase convention: first amplitude above threshold made real positive,
// so downstream matrix elements are reproducible run to run.
inline void fix_phase(CMat& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const Cplx a = vectors(r, c);
      if (std::abs(a) > 1e-10) {
        vectors.col(c) *= std::conj(a) / std::abs(a);
        break;
      }
    }
  }
}

inline std::pair<Vec, CMat> dense_lowest(const SparseC& h, int k) {
  CMat dense(h);
  Eigen::SelfAdjointEigenSolver<CMat> solver(dense);
  if (solver.info() != Eigen::Success)
    throw AlgorithmFailure("dense eigensolver failed");
  const int kk = std::min<int>(k, static_cast<int>(dense.rows()));
  Vec e = solver.eigenvalues().head(kk);
  CMat v = solver.eigenvectors().leftCols(kk);
  return {e, v};
}

// Lanczos with full reorthogonalization for the k lowest eigenpairs.
// Returns nullopt when the verified residuals never reach tolerance.
inline std::optional<std::pair<Vec, CMat>> lanczos_lowest(const SparseC& h, int k,
                                                          const EigenOptions& opts) {
  const Eigen::Index dim = h.rows();
  const int m_max = static_cast<int>(
      opts.max_subspace > 0 ? std::min<Eigen::Index>(opts.max_subspace, dim)
                            : std::min<Eigen::Index>(8 * k + 80, dim));
  Rng rng(opts.seed);
  CVec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Cplx(rng.normal(), rng.normal());
  v.normalize();

  std::vector<CVec> basis{v};
  std::vector<double> alpha, beta;

  auto ritz = [&](int m) {
    Mat tri = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Mat> ts(tri);
    const int kk = std::min(k, m);
    Vec e(kk);
    CMat vecs = CMat::Zero(dim, kk);
    for (int s = 0; s < kk; ++s) {
      e(s) = ts.eigenvalues()(s);
      for (int i = 0; i < m; ++i) vecs.col(s) += ts.eigenvectors()(i, s) * basis[i];
      vecs.col(s).normalize();
    }
    return std::make_pair(e, vecs);
  };

  auto residuals_ok = [&](const std::pair<Vec, CMat>& p) {
    for (Eigen::Index s = 0; s < p.first.size(); ++s)
      if ((h * p.second.col(s) - p.first(s) * p.second.col(s)).norm() > opts.residual_tol)
        return false;
    return true;
  };

  for (int j = 0; j < m_max; ++j) {
    CVec w = h * basis[j];
    const double a = std::real(basis[j].dot(w));
    alpha.push_back(a);
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    for (const auto& b : basis) w -= b.dot(w) * b;  // full reorthogonalization
    for (const auto& b : basis) w -= b.dot(w) * b;
    const double nb = w.norm();
    const int m = j + 1;
    const bool exhausted = nb < 1e-12 || m == m_max;

    if (exhausted || (m >= std::max(2 * k, k + 2) && m % 8 == 0)) {
      auto p = ritz(m);
      if (static_cast<int>(p.first.size()) == k && residuals_ok(p)) return p;
      if (exhausted) return std::nullopt;
    }
    beta.push_back(nb);
    basis.push_back(w / nb);
  }
  return std::nullopt;
}

}  // namespace detail

// k lowest eigenpairs of a sparse Hermitian matrix. Dense below
// `dense_threshold`, Lanczos above, with a dense fallback when the iteration
// stalls and the dimension still permits it.
inline EigenSolution exact_diagonalize(const SparseC& h, int k, EigenOptions opts = {}) {
  if (h.rows() != h.cols()) throw ContractError("exact_diagonalize: square matrix required");
  const Eigen::Index dim = h.rows();
  if (k < 1) throw ContractError("exact_diagonalize: k must be >= 1");
  k = std::min<int>(k, static_cast<int>(dim));

  std::pair<Vec, CMat> pair;
  const bool want_dense = opts.method == EigenOptions::Method::dense ||
                          (opts.method == EigenOptions::Method::automatic &&
                           dim <= opts.dense_threshold);
  if (want_dense) {
    pair = detail::dense_lowest(h, k);
  } else {
    auto it = detail::lanczos_lowest(h, k, opts);
    if (!it) {
      if (dim <= 8000)
        pair = detail::dense_lowest(h, k);
      else
        throw AlgorithmFailure("iterative eigensolver did not converge");
    } else {
      pair = std::move(*it);
    }
  }

  detail::fix_phase(pair.second);
  EigenSolution sol;
  sol.energies = pair.first;
  sol.vectors = pair.second;
  sol.residuals = Vec(k);
  for (int s = 0; s < k; ++s)
    sol.residuals(s) = (h * sol.vectors.col(s) - sol.energies(s) * sol.vectors.col(s)).norm();
  sol.s2_values = Vec::Constant(k, -1.0);
  sol.spin_labels.assign(k, -1.0);
  sol.index_within_sector.assign(k, -1);
  return sol;
}

// Attaches <S^2> and the nearest s(s+1) label to each state. States farther
// than 0.1 from any s(s+1) keep label -1 (unclassified).
inline void s2_classify(EigenSolution& sol, const BasisPtr& basis) {
  const SparseC s2 = sparse_s2(basis);
  std::vector<int> counters;
  for (int k = 0; k < sol.count(); ++k) {
    const CVec v = sol.vectors.col(k);
    const double exp_s2 = std::real(v.dot(s2 * v));
    sol.s2_values(k) = exp_s2;
    // nearest s over s = 0, 1/2, 1, ...
    double best_s = -1.0, best_d = 0.1;
    for (int twos = 0; twos <= 2 * basis->n_orbitals() + 1; ++twos) {
      const double s = 0.5 * twos;
      const double d = std::abs(exp_s2 - s * (s + 1.0));
      if (d < best_d) {
        best_d = d;
        best_s = s;
      }
    }
    sol.spin_labels[k] = best_s;
    if (best_s >= 0.0) {
      const int slot = static_cast<int>(std::lround(2.0 * best_s));
      if (slot >= static_cast<int>(counters.size())) counters.resize(slot + 1, 0);
      sol.index_within_sector[k] = counters[slot]++;
    }
  }
}

struct DipoleAmplitudes {
  Mat per_axis;  // k x 3: |<E_k| D_rho |E_0>|^2
  Vec total;     // k: sum over axes
};

// Squared dipole transition amplitudes from the ground state of `sol`.
// The k = 0 entry is the (unsubtracted) ground-state expectation amplitude.
inline DipoleAmplitudes dipole_amplitudes(const EigenSolution& sol, const DipoleOperator& d,
                                          const BasisPtr& basis) {
  const int k = sol.count();
  DipoleAmplitudes out{Mat::Zero(k, 3), Vec::Zero(k)};
  for (int axis = 0; axis < 3; ++axis) {
    const SparseC dm = sparse_spatial_one_body(d[axis], basis);
    const CVec dpsi0 = dm * sol.vectors.col(0);
    for (int n = 0; n < k; ++n) {
      const double amp2 = std::norm(sol.vectors.col(n).dot(dpsi0));
      out.per_axis(n, axis) = amp2;
      out.total(n) += amp2;
    }
  }
  return out;
}

// <E_f | O | E_i> for all pairs of states from two (possibly different-sector)
// solutions. Both sectors are embedded into the fixed-electron-count space, so
// elements forbidden by the operator's selection rules come out as exact
// zeros. Eigenvector phases were already fixed by exact_diagonalize.
inline CMat isc_matrix_elements(const EigenSolution& final_states,
                                const EigenSolution& initial_states,
                                const SpinResolvedOperator& op, const BasisPtr& basis_final,
                                const BasisPtr& basis_initial) {
  if (basis_final->n_orbitals() != basis_initial->n_orbitals())
    throw ContractError("isc_matrix_elements: orbital count mismatch");
  const int n = basis_initial->n_orbitals();
  const int ne_i = basis_initial->up_count(basis_initial->det(0)) +
                   basis_initial->down_count(basis_initial->det(0));
  const int ne_f = basis_final->up_count(basis_final->det(0)) +
                   basis_final->down_count(basis_final->det(0));
  if (ne_i != ne_f)
    throw ContractError("isc_matrix_elements: bases differ in electron count");
  const auto big = FockBasis::fixed_count(n, ne_i);
  const SparseC o = sparse_one_body(op, big, big);

  auto embed = [&](const EigenSolution& sol, const BasisPtr& from) {
    CMat out = CMat::Zero(static_cast<Eigen::Index>(big->size()), sol.count());
    for (int k = 0; k < sol.count(); ++k)
      for (std::size_t i = 0; i < from->size(); ++i) {
        const auto j = big->index_of(from->det(i));
        if (j < 0) throw ContractError("isc_matrix_elements: embedding failed");
        out(j, k) = sol.vectors(static_cast<Eigen::Index>(i), k);
      }
    return out;
  };

  const CMat vi = embed(initial_states, basis_initial);
  const CMat vf = embed(final_states, basis_final);
  CMat out(final_states.count(), initial_states.count());
  for (int i = 0; i < initial_states.count(); ++i) {
    const CVec oi = o * vi.col(i);
    for (int f = 0; f < final_states.count(); ++f) out(f, i) = vf.col(f).dot(oi);
  }
  return out;
}

// ISC rate 2 pi g |element|^2 X(T); g and X are user-supplied scalars.
inline double isc_rate(Cplx element, double g = 1.0, double x_phonon = 1.0) {
  if (g < 1.0) throw ContractError("isc_rate: degeneracy must be >= 1");
  if (x_phonon < 0.0) throw ContractError("isc_rate: phonon factor must be >= 0");
  return 2.0 * constants::pi * g * std::norm(element) * x_phonon;
}

// Spin-conserving emission rate (4/3) [alpha (E_i - E_j)]^3 |D_ij|^2, atomic
// units throughout.
inline double radiative_rate(double e_upper, double e_lower, double amp2,
                             const PhysicalConstants& c = {}) {
  if (e_upper <= e_lower) throw ContractError("radiative_rate: emission requires E_i > E_j");
  const double x = c.alpha_fs * (e_upper - e_lower);
  return (4.0 / 3.0) * x * x * x * amp2;
}

// Lorentzian reference cross-section, excluding the n = 0 self term:
//   sigma(w) = sum_{n>0, axis} |<E_n|D|E_0>|^2 eta / ((E_n - E_0 - w)^2 + eta^2)
inline SpectrumTrace reference_spectrum(const EigenSolution& sol, const DipoleOperator& d,
                                        const BasisPtr& basis, double eta,
                                        const Vec& omegas) {
  if (eta <= 0.0) throw ContractError("reference_spectrum: eta must be positive");
  const auto amps = dipole_amplitudes(sol, d, basis);
  SpectrumTrace trace;
  trace.omegas = omegas;
  trace.intensities = Vec::Zero(omegas.size());
  trace.provenance = "reference";
  trace.eta = eta;
  const double e0 = sol.energies(0);
  for (int n = 1; n < sol.count(); ++n) {
    const double gap = sol.energies(n) - e0;
    const double a2 = amps.total(n);
    if (a2 == 0.0) continue;
    for (Eigen::Index i = 0; i < omegas.size(); ++i) {
      const double dw = gap - omegas(i);
      trace.intensities(i) += a2 * eta / (dw * dw + eta * eta);
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Classical rate-equation model and ODMR contrast
// ---------------------------------------------------------------------------

// Level kinetics dn_i/dt = sum_l (k_li n_l - k_il n_i). `rates(i,l)` is the
// rate from level i to level l. Microwave driving adds mw_rate in both
// directions across each listed pair. PL intensity sums k^r n_i over the
// radiative pairs.
struct RateModel {
  Mat rates;                                   // n x n, nonnegative, zero diagonal
  std::vector<std::pair<int, int>> radiative;  // (excited, ground) PL transitions
  std::vector<std::pair<int, int>> mw_pairs;   // microwave-coupled level pairs
  double mw_rate = 0.0;

  int n_levels() const { return static_cast<int>(rates.rows()); }

  Mat rate_matrix(bool with_mw) const {
    Mat k = rates;
    if (with_mw)
      for (auto [i, j] : mw_pairs) {
        k(i, j) += mw_rate;
        k(j, i) += mw_rate;
      }
    return k;
  }
};

struct OdmrResult {
  Vec populations_mw;    // steady state with the microwave field
  Vec populations_dark;  // steady state without it
  double intensity_mw = 0.0;
  double intensity_dark = 0.0;
  double contrast = 0.0;  // C = 1 - I(mw)/I(0)
  double residual_mw = 0.0;
  double residual_dark = 0.0;
};

namespace detail {

inline std::pair<Vec, double> steady_state(const Mat& k) {
  const int n = static_cast<int>(k.rows());
  Mat gen = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      if (i == l) continue;
      gen(i, l) += k(l, i);   // inflow l -> i
      gen(i, i) -= k(i, l);   // outflow i -> l
    }
  // null space must be one-dimensional
  Eigen::JacobiSVD<Mat> svd(gen, Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  int null_dim = 0;
  for (int i = 0; i < n; ++i)
    if (svd.singularValues()(i) < 1e-12 * std::max(smax, 1.0)) ++null_dim;
  if (null_dim != 1)
    throw DegenerateModelError("rate model null space has dimension " +
                               std::to_string(null_dim));
  Vec ns = svd.matrixV().col(n - 1);
  if (ns.sum() < 0) ns = -ns;
  if (ns.minCoeff() < -1e-9)
    throw DegenerateModelError("steady state has a negative population");
  ns = ns.cwiseMax(0.0);
  ns /= ns.sum();
  return {ns, (gen * ns).norm()};
}

}  // namespace detail

inline OdmrResult odmr_contrast(const RateModel& rm) {
  if (rm.rates.minCoeff() < 0.0) throw ContractError("rate model: negative rate");
  OdmrResult out;
  const Mat k_mw = rm.rate_matrix(true);
  const Mat k_dark = rm.rate_matrix(false);
  auto [n_mw, r_mw] = detail::steady_state(k_mw);
  auto [n_dark, r_dark] = detail::steady_state(k_dark);
  out.populations_mw = n_mw;
  out.populations_dark = n_dark;
  out.residual_mw = r_mw;
  out.residual_dark = r_dark;
  for (auto [i, j] : rm.radiative) {
    out.intensity_mw += k_mw(i, j) * n_mw(i);
    out.intensity_dark += k_dark(i, j) * n_dark(i);
  }
  if (out.intensity_dark == 0.0)
    throw DegenerateModelError("dark photoluminescence intensity is zero");
  out.contrast = 1.0 - out.intensity_mw / out.intensity_dark;
  return out;
}

// Canonical five-level sketch: triplet ground (M=0, M=+-1), triplet excited
// (M=0, M=+-1) and a singlet shelving state. Levels are indexed
// 0: GS0, 1: GS1, 2: ES0, 3: ES1, 4: S.
struct DefectRateParams {
  double pump = 1.0;        // GS_m -> ES_m
  double k_radiative = 1.0; // ES_m -> GS_m
  double k_isc_axial = 0.0; // ES0 -> S
  double k_isc_perp = 0.0;  // ES1 -> S
  double k_return0 = 0.5;   // S -> GS0
  double k_return1 = 0.5;   // S -> GS1
  double mw_rate = 0.0;     // ES0 <-> ES1
};

inline RateModel make_defect_rate_model(const DefectRateParams& p) {
  RateModel rm;
  rm.rates = Mat::Zero(5, 5);
  rm.rates(0, 2) = p.pump;
  rm.rates(1, 3) = p.pump;
  rm.rates(2, 0) = p.k_radiative;
  rm.rates(3, 1) = p.k_radiative;
  rm.rates(2, 4) = p.k_isc_axial;
  rm.rates(3, 4) = p.k_isc_perp;
  rm.rates(4, 0) = p.k_return0;
  rm.rates(4, 1) = p.k_return1;
  rm.radiative = {{2, 0}, {3, 1}};
  rm.mw_pairs = {{2, 3}};
  rm.mw_rate = p.mw_rate;
  return rm;
}

}  // namespace odmr

#endif  // ODMR_REFERENCE_HPP
