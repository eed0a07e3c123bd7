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

#ifndef ODMR_MODEL_HPP
#define ODMR_MODEL_HPP

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "odmr/core.hpp"

namespace odmr {

// ---------------------------------------------------------------------------
// Active-space model.
//
// Index convention for the two-electron tensor: v(p,q,r,s) is the chemists'
// integral (pq|rs), so the two-body Hamiltonian reads
//
//   H2 = 1/2 sum_{pqrs} sum_{ss'} v_pqrs c+_{p s} c+_{r s'} c_{s s'} c_{q s}.
//
// For real orbitals v is invariant under the eight permutations generated by
// p<->q, r<->s and (pq)<->(rs). The FCIDUMP reader stores exactly this
// convention; see load_fcidump below.
// ---------------------------------------------------------------------------
class ActiveSpaceModel {
 public:
  ActiveSpaceModel() = default;
  ActiveSpaceModel(int n_orbitals, Mat t_eff, std::vector<double> v_eff, double core_energy)
      : n_(n_orbitals), t_(std::move(t_eff)), v_(std::move(v_eff)), e_(core_energy) {
    if (t_.rows() != n_ || t_.cols() != n_)
      throw ContractError("ActiveSpaceModel: t_eff must be N x N");
    if (v_.size() != static_cast<std::size_t>(n_) * n_ * n_ * n_)
      throw ContractError("ActiveSpaceModel: v_eff must have N^4 entries");
  }

  int n_orbitals() const { return n_; }
  const Mat& t_eff() const { return t_; }
  double core_energy() const { return e_; }

  double v(int p, int q, int r, int s) const {
    return v_[((static_cast<std::size_t>(p) * n_ + q) * n_ + r) * n_ + s];
  }
  double& v(int p, int q, int r, int s) {
    return v_[((static_cast<std::size_t>(p) * n_ + q) * n_ + r) * n_ + s];
  }
  const std::vector<double>& v_flat() const { return v_; }

  // The eight index images of (p,q,r,s) under the real-orbital symmetry group.
  static std::array<std::array<int, 4>, 8> symmetry_images(int p, int q, int r, int s) {
    return {{{p, q, r, s}, {q, p, r, s}, {p, q, s, r}, {q, p, s, r},
             {r, s, p, q}, {s, r, p, q}, {r, s, q, p}, {s, r, q, p}}};
  }

  // Max deviation of t from symmetry and of v from its 8-fold group.
  double symmetry_violation() const {
    double worst = (t_ - t_.transpose()).cwiseAbs().maxCoeff();
    for (int p = 0; p < n_; ++p)
      for (int q = 0; q < n_; ++q)
        for (int r = 0; r < n_; ++r)
          for (int s = 0; s < n_; ++s) {
            const double ref = v(p, q, r, s);
            for (const auto& im : symmetry_images(p, q, r, s))
              worst = std::max(worst, std::abs(ref - v(im[0], im[1], im[2], im[3])));
          }
    return worst;
  }

  void validate(double tol = 1e-10) const {
    for (double x : v_)
      if (!std::isfinite(x)) throw DataIntegrityError("v_eff contains non-finite entries");
    if (!t_.allFinite()) throw DataIntegrityError("t_eff contains non-finite entries");
    const double viol = symmetry_violation();
    if (viol > tol)
      throw DataIntegrityError("integral symmetry violated by " + std::to_string(viol));
  }

 private:
  int n_ = 0;
  Mat t_;
  std::vector<double> v_;
  double e_ = 0.0;
};

// Electric dipole operator: three real N x N matrices (x, y, z components),
// spin independent. Real orbitals assumed, so each component is symmetric.
struct DipoleOperator {
  std::array<Mat, 3> components;

  int n_orbitals() const { return static_cast<int>(components[0].rows()); }
  const Mat& operator[](int axis) const { return components[axis]; }

  static DipoleOperator zero(int n) {
    return DipoleOperator{{Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n)}};
  }
};

// One-body operator over 2N spin orbitals indexed (p, sigma): rows/cols
// 0..N-1 are alpha, N..2N-1 beta (matching the Jordan-Wigner mode order).
struct SpinResolvedOperator {
  enum class Label {
    soc_full,
    soc_axial,
    soc_perp,
    soc_T00,
    soc_T10,
    soc_T11,
    soc_T1m1,
    sz,
    custom
  };

  CMat matrix;  // 2N x 2N
  Label label = Label::custom;

  int n_orbitals() const { return static_cast<int>(matrix.rows()) / 2; }

  double hermiticity_violation() const {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  }

  bool is_hermitian(double tol = 1e-10) const { return hermiticity_violation() <= tol; }

  // Block views. aa/bb are the spin-diagonal blocks, ab/ba the spin-flip ones.
  CMat aa() const { int n = n_orbitals(); return matrix.topLeftCorner(n, n); }
  CMat bb() const { int n = n_orbitals(); return matrix.bottomRightCorner(n, n); }
  CMat ab() const { int n = n_orbitals(); return matrix.topRightCorner(n, n); }
  CMat ba() const { int n = n_orbitals(); return matrix.bottomLeftCorner(n, n); }
};

inline const char* to_string(SpinResolvedOperator::Label l) {
  switch (l) {
    case SpinResolvedOperator::Label::soc_full: return "soc_full";
    case SpinResolvedOperator::Label::soc_axial: return "soc_axial";
    case SpinResolvedOperator::Label::soc_perp: return "soc_perp";
    case SpinResolvedOperator::Label::soc_T00: return "soc_T00";
    case SpinResolvedOperator::Label::soc_T10: return "soc_T10";
    case SpinResolvedOperator::Label::soc_T11: return "soc_T11";
    case SpinResolvedOperator::Label::soc_T1m1: return "soc_T1m1";
    case SpinResolvedOperator::Label::sz: return "sz";
    case SpinResolvedOperator::Label::custom: return "custom";
  }
  return "custom";
}

// S_z as a one-body spin-orbital matrix: +1/2 on alpha modes, -1/2 on beta.
inline SpinResolvedOperator sz_operator(int n_orbitals) {
  CMat m = CMat::Zero(2 * n_orbitals, 2 * n_orbitals);
  for (int p = 0; p < n_orbitals; ++p) {
    m(p, p) = 0.5;
    m(n_orbitals + p, n_orbitals + p) = -0.5;
  }
  return {m, SpinResolvedOperator::Label::sz};
}

// Promotes a spin-independent spatial matrix to the 2N x 2N spin-orbital form.
inline CMat spin_diagonal(const Mat& spatial) {
  const int n = static_cast<int>(spatial.rows());
  CMat m = CMat::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = spatial.cast<Cplx>();
  m.bottomRightCorner(n, n) = spatial.cast<Cplx>();
  return m;
}

// Orbitals sampled on a real-space grid. values(i, p) = phi_p(r_i),
// points row i = r_i (Bohr), weight = volume element (Bohr^3).
struct GridOrbitalSet {
  CMat values;
  Mat points;
  double weight = 0.0;

  int n_orbitals() const { return static_cast<int>(values.cols()); }
  long n_points() const { return values.rows(); }

  double norm2(int orbital) const {
    return values.col(orbital).squaredNorm() * weight;
  }

  void require_normalized(double tol = 1e-3) const {
    for (int p = 0; p < n_orbitals(); ++p) {
      const double n2 = norm2(p);
      if (std::abs(n2 - 1.0) > tol)
        throw DataIntegrityError("grid orbital " + std::to_string(p) +
                                 " not normalized: |phi|^2 = " + std::to_string(n2));
    }
  }
};

// Plane-wave representation phi_p(r) = Omega^{-1/2} sum_i C_ip exp(i G_i.r).
struct PlaneWaveOrbitalSet {
  struct Atom {
    int Z = 0;
    Eigen::Vector3d R = Eigen::Vector3d::Zero();
  };

  CMat coefficients;  // n_pw x N
  Mat g_vectors;      // n_pw x 3, Bohr^-1
  double cell_volume = 0.0;
  std::vector<Atom> atoms;

  int n_orbitals() const { return static_cast<int>(coefficients.cols()); }
  long n_pw() const { return coefficients.rows(); }
};

// ---------------------------------------------------------------------------
// FCIDUMP-style text I/O.
//
// Header: &FCI NORB=.., NELEC=.., .. / followed by lines `value p q r s`
// (1-based). Four nonzero indices store the chemists' integral (pq|rs);
// `value p q 0 0` stores t_pq; `value 0 0 0 0` stores the core energy.
// Entries are replicated over the symmetry group on load; conflicting
// duplicates beyond `sym_tol` raise DataIntegrityError.
// ---------------------------------------------------------------------------

struct LoaderOptions {
  double sym_tol = 1e-10;
};

inline ActiveSpaceModel load_fcidump(const std::string& path, LoaderOptions opts = {}) {
  std::ifstream in(path);
  if (!in) throw MalformedInputError("cannot open '" + path + "'", 0);

  std::string line;
  long lineno = 0;
  int norb = -1;

  // header: read until the terminating '/' or '&END'
  bool header_done = false;
  while (!header_done && std::getline(in, line)) {
    ++lineno;
    std::string upper;
    for (char c : line) upper.push_back(static_cast<char>(std::toupper(c)));
    auto pos = upper.find("NORB");
    if (pos != std::string::npos) {
      pos = upper.find_first_of("0123456789", pos);
      if (pos == std::string::npos) throw MalformedInputError("NORB without a value", lineno);
      norb = std::stoi(upper.substr(pos));
    }
    if (upper.find('/') != std::string::npos || upper.find("&END") != std::string::npos)
      header_done = true;
  }
  if (!header_done) throw MalformedInputError("missing end-of-header marker", lineno);
  if (norb < 1) throw MalformedInputError("missing or invalid NORB", lineno);

  const int n = norb;
  Mat t = Mat::Zero(n, n);
  std::vector<double> v(static_cast<std::size_t>(n) * n * n * n, 0.0);
  std::vector<bool> vset(v.size(), false);
  Mat tset = Mat::Zero(n, n);
  double core = 0.0;

  auto vindex = [n](int p, int q, int r, int s) {
    return ((static_cast<std::size_t>(p) * n + q) * n + r) * n + s;
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    double val;
    int p, q, r, s;
    if (!(ss >> val)) continue;  // blank line
    if (!(ss >> p >> q >> r >> s))
      throw MalformedInputError("expected `value p q r s`", lineno);
    if (p < 0 || q < 0 || r < 0 || s < 0 || p > n || q > n || r > n || s > n)
      throw MalformedInputError("orbital index out of range", lineno);
    if (p == 0 && q == 0 && r == 0 && s == 0) {
      core = val;
    } else if (r == 0 && s == 0) {
      if (p == 0 || q == 0) throw MalformedInputError("bad one-body indices", lineno);
      const int i = p - 1, j = q - 1;
      for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
        if (tset(a, b) != 0.0 && std::abs(t(a, b) - val) > opts.sym_tol)
          throw DataIntegrityError("one-body symmetry violated at line " +
                                   std::to_string(lineno) + ": t(" + std::to_string(a + 1) +
                                   "," + std::to_string(b + 1) + ") mismatch by " +
                                   std::to_string(std::abs(t(a, b) - val)));
        t(a, b) = val;
        tset(a, b) = 1.0;
      }
    } else {
      if (p == 0 || q == 0 || r == 0 || s == 0)
        throw MalformedInputError("bad two-body indices", lineno);
      for (const auto& im :
           ActiveSpaceModel::symmetry_images(p - 1, q - 1, r - 1, s - 1)) {
        const auto k = vindex(im[0], im[1], im[2], im[3]);
        if (vset[k] && std::abs(v[k] - val) > opts.sym_tol)
          throw DataIntegrityError("two-body symmetry violated at line " +
                                   std::to_string(lineno) + " by " +
                                   std::to_string(std::abs(v[k] - val)));
        v[k] = val;
        vset[k] = true;
      }
    }
  }

  ActiveSpaceModel model(n, std::move(t), std::move(v), core);
  model.validate(opts.sym_tol);
  return model;
}

inline void save_fcidump(const ActiveSpaceModel& model, const std::string& path,
                         int n_electrons = 0) {
  std::ofstream out(path);
  if (!out) throw DataIntegrityError("cannot write '" + path + "'");
  const int n = model.n_orbitals();
  out << "&FCI NORB=" << n << ",NELEC=" << n_electrons << ",MS2=0,\n/\n";
  out.precision(17);
  // unique two-body entries: canonical representative = lexicographically
  // smallest image
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          auto images = ActiveSpaceModel::symmetry_images(p, q, r, s);
          bool canonical = true;
          for (const auto& im : images)
            if (std::array<int, 4>{im[0], im[1], im[2], im[3]} <
                std::array<int, 4>{p, q, r, s})
              canonical = false;
          if (!canonical) continue;
          const double val = model.v(p, q, r, s);
          if (val != 0.0)
            out << val << ' ' << p + 1 << ' ' << q + 1 << ' ' << r + 1 << ' ' << s + 1
                << '\n';
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      if (model.t_eff()(p, q) != 0.0)
        out << model.t_eff()(p, q) << ' ' << p + 1 << ' ' << q + 1 << " 0 0\n";
  out << model.core_energy() << " 0 0 0 0\n";
}

// ---------------------------------------------------------------------------
// Operator construction from grids and plane waves.
// ---------------------------------------------------------------------------

// d_pq = -sum_i phi_p*(r_i) r_i phi_q(r_i) dV (electron charge -1).
// Components are Hermitian-symmetrized when the grid orbitals are real.
inline DipoleOperator dipole_from_grid(const GridOrbitalSet& orbitals,
                                       double norm_tol = 1e-3) {
  orbitals.require_normalized(norm_tol);
  const int n = orbitals.n_orbitals();
  const bool real_orbitals = orbitals.values.imag().cwiseAbs().maxCoeff() == 0.0;
  DipoleOperator d = DipoleOperator::zero(n);
  for (int axis = 0; axis < 3; ++axis) {
    CMat weighted = orbitals.points.col(axis).asDiagonal() * orbitals.values;
    CMat m = -(orbitals.values.adjoint() * weighted) * orbitals.weight;
    Mat re = m.real();
    if (real_orbitals) re = 0.5 * (re + re.transpose());
    d.components[axis] = re;
  }
  return d;
}

// L = sum over grid points within `radius` of `center` of |phi|^2 dV.
inline double localization_factor(const GridOrbitalSet& orbitals, int orbital,
                                  const Eigen::Vector3d& center, double radius) {
  if (radius <= 0.0) throw ContractError("localization_factor: radius must be positive");
  if (orbital < 0 || orbital >= orbitals.n_orbitals())
    throw ContractError("localization_factor: orbital index out of range");
  const double r2 = radius * radius;
  double acc = 0.0;
  for (long i = 0; i < orbitals.n_points(); ++i) {
    const Eigen::Vector3d dr = orbitals.points.row(i).transpose() - center;
    if (dr.squaredNorm() < r2) acc += std::norm(orbitals.values(i, orbital));
  }
  return acc * orbitals.weight;
}

// Assembles the one-body spin-orbit matrix from plane-wave data:
//
//   h_{p sigma, q tau} = a^2/4 R+(1) S+(1) + a^2/4 R+(2) S+(2) + a^2/2 Rz Sz
//
// with the spatial sums over plane-wave pairs using the 4 pi i G_u / G^2
// Fourier kernel. Pairs with G_j = G_i are skipped: the kernel is singular
// there and the cross product G_ji x G_j vanishes identically in the
// numerator, so the analytic limit contributes nothing.
inline SpinResolvedOperator soc_from_plane_waves(const PlaneWaveOrbitalSet& pw,
                                                 const PhysicalConstants& constants = {}) {
  if (pw.atoms.empty()) throw DegenerateInputError("soc_from_plane_waves: no atoms");
  const int n = pw.n_orbitals();
  const long npw = pw.n_pw();
  const double a2 = constants.alpha_fs * constants.alpha_fs;

  CMat rz = CMat::Zero(n, n), rp1 = CMat::Zero(n, n), rp2 = CMat::Zero(n, n);
  // kernel accumulators per plane-wave pair, weighted by atomic structure factor
  for (long i = 0; i < npw; ++i) {
    const Eigen::Vector3d gi = pw.g_vectors.row(i).transpose();
    for (long j = 0; j < npw; ++j) {
      const Eigen::Vector3d gj = pw.g_vectors.row(j).transpose();
      const Eigen::Vector3d gji = gj - gi;
      const double g2 = gji.squaredNorm();
      if (g2 < 1e-24) continue;
      const Eigen::Vector3d cr = gji.cross(gj);
      Cplx structure = 0.0;
      for (const auto& atom : pw.atoms)
        structure += static_cast<double>(atom.Z) *
                     std::exp(Cplx(0.0, gji.dot(atom.R)));
      const Cplx ker = structure / g2;
      const Cplx lz = Cplx(0.0, cr.z()) * ker;
      const Cplx lp = (Cplx(0.0, cr.x()) - cr.y()) * ker;
      const Cplx lm = (Cplx(0.0, cr.x()) + cr.y()) * ker;
      for (int p = 0; p < n; ++p) {
        const Cplx cip = std::conj(pw.coefficients(i, p));
        for (int q = 0; q < n; ++q) {
          const Cplx w = cip * pw.coefficients(j, q);
          rz(p, q) += w * lz;
          rp1(p, q) += w * lp;
          rp2(p, q) += w * lm;
        }
      }
    }
  }
  const double pref = 4.0 * constants::pi / pw.cell_volume;
  rz *= pref;
  rp1 *= pref;
  rp2 *= pref;

  // spin factors: S+(1) couples (beta row, alpha column), S+(2) the reverse,
  // Sz is diag(+1/2, -1/2) in spin space
  CMat h = CMat::Zero(2 * n, 2 * n);
  h.topLeftCorner(n, n) = (a2 / 4.0) * rz;        // alpha-alpha: +1/2 * a^2/2
  h.bottomRightCorner(n, n) = -(a2 / 4.0) * rz;   // beta-beta
  h.bottomLeftCorner(n, n) = (a2 / 4.0) * rp1;    // l+ s-: beta <- alpha
  h.topRightCorner(n, n) = (a2 / 4.0) * rp2;      // l- s+: alpha <- beta
  return {h, SpinResolvedOperator::Label::soc_full};
}

// Splits the SOC operator into the spin-projection-preserving (axial) and
// spin-flip (non-axial) parts. The two outputs add back to the input exactly.
inline std::pair<SpinResolvedOperator, SpinResolvedOperator> split_axial_nonaxial(
    const SpinResolvedOperator& soc) {
  if (soc.label != SpinResolvedOperator::Label::soc_full)
    throw ContractError("split_axial_nonaxial: expected a soc_full operator");
  const int n = soc.n_orbitals();
  CMat axial = CMat::Zero(2 * n, 2 * n), perp = CMat::Zero(2 * n, 2 * n);
  axial.topLeftCorner(n, n) = soc.aa();
  axial.bottomRightCorner(n, n) = soc.bb();
  perp.topRightCorner(n, n) = soc.ab();
  perp.bottomLeftCorner(n, n) = soc.ba();
  return {{axial, SpinResolvedOperator::Label::soc_axial},
          {perp, SpinResolvedOperator::Label::soc_perp}};
}

struct SpinTensorComponents {
  SpinResolvedOperator t00, t10, t11, t1m1;
};

// Spin tensor decomposition of a one-body spin-orbital operator:
//   T00 ~ (h_aa + h_bb)/2 on both spin-diagonal blocks,
//   T10 ~ (h_aa - h_bb)/2 with opposite signs per spin,
//   T11 = alpha<-beta block, T1m1 = beta<-alpha block.
// The four components sum back to the input exactly.
inline SpinTensorComponents spin_tensor_decompose(const SpinResolvedOperator& soc) {
  if (soc.label != SpinResolvedOperator::Label::soc_full)
    throw ContractError("spin_tensor_decompose: expected a soc_full operator");
  const int n = soc.n_orbitals();
  const CMat sym = 0.5 * (soc.aa() + soc.bb());
  const CMat dif = 0.5 * (soc.aa() - soc.bb());

  CMat m00 = CMat::Zero(2 * n, 2 * n), m10 = CMat::Zero(2 * n, 2 * n);
  m00.topLeftCorner(n, n) = sym;
  m00.bottomRightCorner(n, n) = sym;
  m10.topLeftCorner(n, n) = dif;
  m10.bottomRightCorner(n, n) = -dif;

  CMat m11 = CMat::Zero(2 * n, 2 * n), m1m1 = CMat::Zero(2 * n, 2 * n);
  m11.topRightCorner(n, n) = soc.ab();
  m1m1.bottomLeftCorner(n, n) = soc.ba();

  using L = SpinResolvedOperator::Label;
  return {{m00, L::soc_T00}, {m10, L::soc_T10}, {m11, L::soc_T11}, {m1m1, L::soc_T1m1}};
}

}  // namespace odmr

#endif  // ODMR_MODEL_HPP
