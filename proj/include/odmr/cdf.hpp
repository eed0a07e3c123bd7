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

#ifndef ODMR_CDF_HPP
#define ODMR_CDF_HPP

#include <Eigen/Eigenvalues>
#include <optional>
#include <vector>

#include "odmr/core.hpp"
#include "odmr/model.hpp"

namespace odmr {

// One compressed-double-factorization fragment: v restricted to the fragment
// is U (x) U applied to the diagonal quadratic built from Z. For the one-body
// fragment (l = 0), z is the eigenvalue diagonal.
struct CdfFragment {
  Mat u;  // orthogonal N x N
  Mat z;  // symmetric N x N

  double orthogonality_violation() const {
    return (u.transpose() * u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  }
};

struct CdfOptions {
  int max_iters = 10000;
  double tol = 1e-10;      // relative residual change
  int n_starts = 4;        // multistart count (first start is the eigen init)
  std::uint64_t seed = 1;
  bool warm_start = false; // used by the L sweep
};

struct CdfFactorization {
  CdfFragment one_body;               // l = 0, z diagonal
  std::vector<CdfFragment> two_body;  // l = 1..L
  double constant_shift = 0.0;        // scalar of the rotated-frame Hamiltonian
  double residual = 0.0;              // Frobenius norm of the two-body misfit
  bool converged = true;
  std::uint64_t seed = 0;
  int n_orbitals = 0;
};

namespace cdf_detail {

// The chemists' tensor already pairs (p,q) and (r,s) as the densities of the
// factorized form, so the fit target is the plain (pq),(rs) supermatrix and a
// fragment contributes A Z A^T with A[(pq),k] = U_pk U_qk.
inline Mat chemist_supermatrix(const ActiveSpaceModel& model) {
  const int n = model.n_orbitals();
  Mat w(n * n, n * n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) w(p * n + q, r * n + s) = model.v(p, q, r, s);
  return w;
}

inline Mat khatri_rao_self(const Mat& u) {
  const int n = static_cast<int>(u.rows());
  Mat a(n * n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int k = 0; k < n; ++k) a(p * n + q, k) = u(p, k) * u(q, k);
  return a;
}

inline Mat assemble_supermatrix(const std::vector<CdfFragment>& frags) {
  if (frags.empty()) return Mat();
  const int n = static_cast<int>(frags.front().u.rows());
  Mat w = Mat::Zero(n * n, n * n);
  for (const auto& f : frags) {
    const Mat a = khatri_rao_self(f.u);
    w += a * f.z * a.transpose();
  }
  return w;
}

inline Mat expm_antisymmetric(const Mat& x) {
  // exp of an antisymmetric matrix via the Schur-free scaling of Eigen's
  // self-adjoint machinery: exp(X) = V exp(i D) V^* realified
  Eigen::SelfAdjointEigenSolver<CMat> es(Cplx(0, -1) * x.cast<Cplx>());
  CVec ph(x.rows());
  for (Eigen::Index k = 0; k < x.rows(); ++k)
    ph(k) = std::exp(Cplx(0.0, es.eigenvalues()(k)));
  const CMat e = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  return e.real();
}

struct FitState {
  std::vector<CdfFragment> frags;
  double objective = 0.0;  // squared Frobenius residual
};

inline double objective_of(const Mat& w, const std::vector<CdfFragment>& frags) {
  const Mat r = w - assemble_supermatrix(frags);
  return r.squaredNorm();
}

// Gradients of ||w - sum_l A_l Z_l A_l^T||^2. The U gradient is projected to
// the antisymmetric tangent (E = skew(U^T G)) and steps retract via exp.
inline void gradients(const Mat& w, const std::vector<CdfFragment>& frags,
                      std::vector<Mat>& g_tangent, std::vector<Mat>& g_z) {
  const int n = static_cast<int>(frags.front().u.rows());
  const Mat r = w - assemble_supermatrix(frags);
  g_tangent.clear();
  g_z.clear();
  for (const auto& f : frags) {
    const Mat a = khatri_rao_self(f.u);
    Mat gz = -2.0 * (a.transpose() * r * a);
    gz = 0.5 * (gz + gz.transpose());
    const Mat raz = r * a * f.z;  // (pq) x k
    Mat gu = Mat::Zero(n, n);
    for (int p = 0; p < n; ++p)
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int q = 0; q < n; ++q) acc += raz(p * n + q, k) * f.u(q, k);
        gu(p, k) = -8.0 * acc;
      }
    const Mat m = f.u.transpose() * gu;
    g_tangent.push_back(0.5 * (m - m.transpose()));
    g_z.push_back(gz);
  }
}

// Armijo backtracking descent with a doubling step carry-over. Monotone, so
// warm starts can only improve.
inline FitState descend(const Mat& w, std::vector<CdfFragment> frags,
                        const CdfOptions& opts, bool& converged) {
  double f = objective_of(w, frags);
  double step = 1e-3;
  converged = false;
  std::vector<Mat> gt, gz;
  for (int it = 0; it < opts.max_iters; ++it) {
    gradients(w, frags, gt, gz);
    double gnorm2 = 0.0;
    for (std::size_t l = 0; l < frags.size(); ++l)
      gnorm2 += gt[l].squaredNorm() + gz[l].squaredNorm();
    if (gnorm2 < 1e-30) {
      converged = true;
      break;
    }
    bool accepted = false;
    std::vector<CdfFragment> trial = frags;
    double f_trial = f;
    for (int bt = 0; bt < 48; ++bt) {
      for (std::size_t l = 0; l < frags.size(); ++l) {
        trial[l].u = frags[l].u * expm_antisymmetric(-step * gt[l]);
        trial[l].z = frags[l].z - step * gz[l];
      }
      f_trial = objective_of(w, trial);
      if (f_trial <= f - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double rel = (f - f_trial) / std::max(f, 1e-300);
    frags.swap(trial);
    f = f_trial;
    step = std::min(step * 2.0, 1.0);
    if (rel < opts.tol && it > 4) {
      converged = true;
      break;
    }
  }
  return {std::move(frags), f};
}

// Rank-one eigen initialization: the dominant eigenpairs of the (symmetric)
// supermatrix reshaped into N x N blocks seed U and Z.
inline std::vector<CdfFragment> eigen_init(const Mat& w, int count, Rng& rng,
                                           double jitter = 0.0) {
  const int n2 = static_cast<int>(w.rows());
  const int n = static_cast<int>(std::lround(std::sqrt(double(n2))));
  Eigen::SelfAdjointEigenSolver<Mat> es(w);
  std::vector<int> order(n2);
  for (int i = 0; i < n2; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });
  std::vector<CdfFragment> frags;
  for (int l = 0; l < count; ++l) {
    CdfFragment f;
    if (l < n2 && std::abs(es.eigenvalues()(order[l])) > 1e-14) {
      Mat s(n, n);
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) s(p, q) = es.eigenvectors()(p * n + q, order[l]);
      s = 0.5 * (s + s.transpose());
      Eigen::SelfAdjointEigenSolver<Mat> bs(s);
      f.u = bs.eigenvectors();
      f.z = es.eigenvalues()(order[l]) * bs.eigenvalues() * bs.eigenvalues().transpose();
    } else {
      f.u = Mat::Identity(n, n);
      f.z = Mat::Zero(n, n);
    }
    if (jitter > 0.0) {
      f.u = f.u * expm_antisymmetric(random_antisymmetric(n, rng, jitter));
      f.z += random_symmetric(n, rng, jitter);
    }
    frags.push_back(std::move(f));
  }
  return frags;
}

}  // namespace cdf_detail

// Diagonalizes the symmetric one-body integrals; eigenvalues ascending.
inline CdfFragment factorize_one_body(const ActiveSpaceModel& model) {
  const Mat& t = model.t_eff();
  if ((t - t.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw ContractError("factorize_one_body: t_eff is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(t);
  CdfFragment f;
  f.u = es.eigenvectors();
  f.z = es.eigenvalues().asDiagonal();
  return f;
}

// Gradient-based fit of the two-electron tensor into L fragments. The first
// start seeds from the supermatrix eigendecomposition; remaining starts add
// seeded random jitter. Deterministic for a fixed opts.seed. When `initial`
// is supplied (warm start) the multistart is skipped.
inline std::vector<CdfFragment> factorize_two_body(
    const ActiveSpaceModel& model, int n_fragments, const CdfOptions& opts,
    double* residual_out = nullptr, bool* converged_out = nullptr,
    const std::vector<CdfFragment>* initial = nullptr) {
  if (n_fragments < 1) throw ContractError("factorize_two_body: L must be >= 1");
  const Mat w = cdf_detail::chemist_supermatrix(model);
  Rng rng(opts.seed);

  std::optional<cdf_detail::FitState> best;
  bool best_conv = false;
  const int starts = initial ? 1 : std::max(1, opts.n_starts);
  for (int s = 0; s < starts; ++s) {
    std::vector<CdfFragment> init;
    if (initial)
      init = *initial;
    else
      init = cdf_detail::eigen_init(w, n_fragments, rng, s == 0 ? 0.0 : 0.05 * s);
    bool conv = false;
    auto fit = cdf_detail::descend(w, std::move(init), opts, conv);
    if (!best || fit.objective < best->objective) {
      best = std::move(fit);
      best_conv = conv;
    }
  }

  if (residual_out) *residual_out = std::sqrt(best->objective);
  if (converged_out) *converged_out = best_conv;
  return std::move(best->frags);
}

// Convenience: full factorization with the recorded residual and the
// rotated-frame constant. Uses L = n_orbitals by default.
inline CdfFactorization factorize(const ActiveSpaceModel& model, int n_fragments = -1,
                                  CdfOptions opts = {}) {
  CdfFactorization f;
  f.n_orbitals = model.n_orbitals();
  f.seed = opts.seed;
  f.one_body = factorize_one_body(model);
  const int l = n_fragments > 0 ? n_fragments : model.n_orbitals();
  f.two_body = factorize_two_body(model, l, opts, &f.residual, &f.converged);

  // constant of the rotated-frame Hamiltonian: E + sum_k Z0_k
  // - 1/2 sum_{l,kl} Z_kl + 1/4 sum_{l,k} Z_kk, with Z0 the eigenvalues of
  // the correction-folded one-body term (see assemble_qubit_frame)
  double z0_sum = model.t_eff().trace();
  double zsum = 0.0, zdiag = 0.0;
  for (const auto& fr : f.two_body) {
    z0_sum += (fr.z.rowwise().sum() - 0.5 * fr.z.diagonal()).sum();
    zsum += fr.z.sum();
    zdiag += fr.z.trace();
  }
  f.constant_shift = model.core_energy() + z0_sum - 0.5 * zsum + 0.25 * zdiag;
  return f;
}

// Residual sweep over fragment counts 1..l_max with warm starts, so the
// reported residual is non-increasing in L.
inline std::vector<std::pair<int, double>> factorize_two_body_sweep(
    const ActiveSpaceModel& model, int l_max, CdfOptions opts,
    std::vector<CdfFragment>* final_frags = nullptr) {
  std::vector<std::pair<int, double>> out;
  std::vector<CdfFragment> current;
  const Mat w = cdf_detail::chemist_supermatrix(model);
  for (int l = 1; l <= l_max; ++l) {
    double res = 0.0;
    if (current.empty()) {
      current = factorize_two_body(model, l, opts, &res);
    } else {
      // append one eigen-init fragment of the residual, then descend
      Rng rng(opts.seed + static_cast<std::uint64_t>(l));
      const Mat r = w - cdf_detail::assemble_supermatrix(current);
      auto extra = cdf_detail::eigen_init(r, 1, rng);
      current.push_back(extra.front());
      current = factorize_two_body(model, l, opts, &res, nullptr, &current);
    }
    out.emplace_back(l, res);
  }
  if (final_frags) *final_frags = current;
  return out;
}

// ---------------------------------------------------------------------------
// Rotated-frame coefficient bundle (the object the Trotter engine consumes)
// ---------------------------------------------------------------------------

// Coefficients of the rotated-frame Hamiltonian
//
//   H = constant_shift
//     - 1/2 U0 [ sum_k Z0_k sum_g sigma_z(k,g) ] U0^T
//     + 1/8 sum_l U_l [ sum_{(k,g) != (l,t)} Z_kl sigma_z sigma_z ] U_l^T.
//
// The single-sigma_z pieces that the density-density reordering produces in
// each two-body fragment are folded into the one-body term before it is
// diagonalized, which is what makes the bundle reproduce the Hamiltonian
// exactly (up to the two-body fit residual).
struct QubitFrameBundle {
  double constant_shift = 0.0;
  Mat u0;       // corrected one-body rotation
  Vec z0;       // its eigenvalues; single-Z coefficients are -z0/2
  std::vector<CdfFragment> two_body;  // ZZ coefficients are z/8 per (k,g)!=(l,t)

  Vec single_z_coefficients() const { return -0.5 * z0; }
};

inline QubitFrameBundle assemble_qubit_frame(const ActiveSpaceModel& model,
                                             const CdfFactorization& f) {
  const int n = model.n_orbitals();
  Mat t_corr = model.t_eff();
  for (const auto& fr : f.two_body) {
    const Vec row_sum = fr.z.rowwise().sum();
    const Vec corr = row_sum - 0.5 * fr.z.diagonal();
    t_corr += fr.u * corr.asDiagonal() * fr.u.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(t_corr);

  QubitFrameBundle bundle;
  bundle.u0 = es.eigenvectors();
  bundle.z0 = es.eigenvalues();
  bundle.two_body = f.two_body;
  double zsum = 0.0, zdiag = 0.0;
  for (const auto& fr : f.two_body) {
    zsum += fr.z.sum();
    zdiag += fr.z.trace();
  }
  bundle.constant_shift =
      model.core_energy() + bundle.z0.sum() - 0.5 * zsum + 0.25 * zdiag;
  return bundle;
}

}  // namespace odmr

#endif  // ODMR_CDF_HPP
