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

#ifndef ODMR_SPECTRUM_HPP
#define ODMR_SPECTRUM_HPP

#include <string>
#include <vector>

#include "odmr/core.hpp"

namespace odmr {

// (frequency, intensity) samples plus the settings that produced them.
// Frequencies are excitation energies in Hartree; intensities carry the
// normalization of the Lorentzian cross-section (peak area = pi * |D|^2).
struct SpectrumTrace {
  Vec omegas;
  Vec intensities;

  // provenance: "reference", "dtft", "perturbed(kappa=..,channel=..)"
  std::string provenance;
  double eta = 0.0;
  double tau = 0.0;
  int j_max = 0;
  long shots = 0;
  std::uint64_t seed = 0;
  double imag_residual = 0.0;  // largest |Im| discarded when realizing the DTFT
};

inline Vec linspace(double lo, double hi, int n) {
  Vec v(n);
  if (n == 1) {
    v(0) = lo;
    return v;
  }
  for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * i / (n - 1);
  return v;
}

// Trapezoid integral of a trace over [lo, hi] (clipped to the grid).
inline double trapezoid_area(const SpectrumTrace& trace, double lo, double hi) {
  double acc = 0.0;
  for (int i = 0; i + 1 < trace.omegas.size(); ++i) {
    const double a = trace.omegas(i), b = trace.omegas(i + 1);
    if (b <= lo || a >= hi) continue;
    const double xa = std::max(a, lo), xb = std::min(b, hi);
    // linear interpolation inside the clipped cell
    const double fa = trace.intensities(i) +
                      (trace.intensities(i + 1) - trace.intensities(i)) * (xa - a) / (b - a);
    const double fb = trace.intensities(i) +
                      (trace.intensities(i + 1) - trace.intensities(i)) * (xb - a) / (b - a);
    acc += 0.5 * (fa + fb) * (xb - xa);
  }
  return acc;
}

}  // namespace odmr

#endif  // ODMR_SPECTRUM_HPP
