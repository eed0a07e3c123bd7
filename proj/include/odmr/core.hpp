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

#ifndef ODMR_CORE_HPP
#define ODMR_CORE_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace odmr {

inline constexpr const char* version_string = "0.1.0";

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using SparseC = Eigen::SparseMatrix<Cplx>;

namespace constants {
// CODATA fine-structure constant.
inline constexpr double alpha_fs = 7.2973525693e-3;
inline constexpr double hartree_to_ev = 27.211386245988;
inline constexpr double hartree_to_cm = 219474.6313632;
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

struct PhysicalConstants {
  double alpha_fs = constants::alpha_fs;
};

// ---------------------------------------------------------------------------
// Error taxonomy. Contract violations are logic errors (caller bugs);
// everything else is a runtime condition the caller may handle.
// ---------------------------------------------------------------------------

struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct DataIntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse failure in a text input; carries the 1-based line number.
struct MalformedInputError : std::runtime_error {
  MalformedInputError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_number(line) {}
  long line_number;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlgorithmFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Randomness. All stochastic code draws from Rng, a seeded mt19937_64.
// Substreams are derived with SplitMix64 so parallel batches stay
// reproducible under a single 64-bit seed.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  // true with probability p
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t integer() { return engine_(); }

  // Deterministic substream for batch `id`.
  Rng derive(std::uint64_t id) const {
    std::uint64_t s = seed_ ^ (0xd1b54a32d192ed03ULL * (id + 1));
    return Rng(splitmix64(s));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline Mat random_symmetric(int n, Rng& rng, double scale = 1.0) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * rng.normal();
  return 0.5 * (a + a.transpose());
}

inline Mat random_antisymmetric(int n, Rng& rng, double scale = 1.0) {
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * rng.normal();
  return 0.5 * (a - a.transpose());
}

inline CMat random_hermitian(int n, Rng& rng, double scale = 1.0) {
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Cplx(rng.normal(), rng.normal()) * scale;
  return 0.5 * (a + a.adjoint());
}

}  // namespace odmr

#endif  // ODMR_CORE_HPP
