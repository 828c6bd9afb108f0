// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "saf/geometry.hpp"

namespace saf {

using cplx = std::complex<double>;

/// Sine-space direction: u = sin(phi) sin(theta), v = cos(theta).
struct UvPoint {
  double u = 0.0;
  double v = 0.0;
};

/// phi is the azimuth in [-90, 90] degrees, theta the polar angle in [0, 180] degrees.
struct Angles {
  double phi_deg = 0.0;
  double theta_deg = 90.0;
};

UvPoint angles_to_uv(double phi_deg, double theta_deg);

/// Inverse of angles_to_uv. Returns nullopt outside the real-angle disk u^2 + v^2 <= 1.
/// At the poles (sin(theta) == 0) phi is reported as 0.
std::optional<Angles> uv_to_angles(double u, double v);

/// Uniform sine-space lattice: u_i = 2 i / (M q_phi) - 1 for i < M q_phi, likewise v.
/// Samples cover [-1, 1).
struct UVGrid {
  int M = 1;
  int N = 1;
  int q_phi = 1;
  int q_theta = 1;
  std::vector<double> u;
  std::vector<double> v;

  std::size_t size() const noexcept { return u.size() * v.size(); }
};

UVGrid make_uv_grid(int M, int N, int q_phi, int q_theta);

/// Horizontal cut at a single elevation v0, used for linear arrays: the u axis follows
/// the lattice formula, the v axis holds only v0.
UVGrid make_u_cut(int M, int q_phi, double v0 = 0.0);

/// Lattice sized for a virtual array: one base sample per half wavelength of virtual
/// aperture on each axis, oversampled by q. Linear arrays get a u cut at v = 0.
UVGrid evaluation_grid(const VirtualArray& va, int q_phi, int q_theta);

/// Point scatterer in the far field with complex return `amplitude`.
struct Target {
  double u = 0.0;
  double v = 0.0;
  cplx amplitude{1.0, 0.0};
};

/// Received signal at each virtual element, indexed like VirtualArray::positions.
struct Snapshot {
  std::vector<cplx> values;
};

/// exp(+j 2 pi (y u + z v)) for every virtual element; y, z in wavelengths.
std::vector<cplx> steering_vector(const VirtualArray& va, double u, double v);

/// Amplitude-weighted sum of steering vectors. Throws for targets outside the real disk.
Snapshot synthesize_snapshot(const VirtualArray& va, std::span<const Target> targets);

/// Square complex matrix, row-major. Supplied by the user (measured or simulated).
struct CouplingMatrix {
  std::size_t dim = 0;
  std::vector<cplx> entries;

  static CouplingMatrix identity(std::size_t dim);
  cplx operator()(std::size_t row, std::size_t col) const { return entries[row * dim + col]; }
};

Snapshot apply_coupling(const Snapshot& snapshot, const CouplingMatrix& coupling);

/// Complex received-signal pattern over a UVGrid, stored row-major (v outer, u inner).
class Pattern {
 public:
  Pattern() = default;
  Pattern(UVGrid grid, std::vector<cplx> values);

  const UVGrid& grid() const noexcept { return grid_; }
  std::size_t nu() const noexcept { return grid_.u.size(); }
  std::size_t nv() const noexcept { return grid_.v.size(); }
  std::size_t index(std::size_t iu, std::size_t iv) const noexcept { return iv * nu() + iu; }
  const cplx& at(std::size_t iu, std::size_t iv) const noexcept { return values_[index(iu, iv)]; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::vector<double> magnitudes() const;

 private:
  UVGrid grid_;
  std::vector<cplx> values_;
};

/// Conjugate-steering beamformer, value(u, v) = sum_p conj(a_p(u, v)) s_p. Uses the
/// separable per-row factorisation of the grid phasors; rows of v are split across
/// `threads` workers.
Pattern beamform(const VirtualArray& va, const Snapshot& snapshot, const UVGrid& grid, unsigned threads = 1);

/// Same quantity by direct double summation, one complex exponential per (sample,
/// element). Slow; kept for benchmarking and cross-checks.
Pattern beamform_direct(const VirtualArray& va, const Snapshot& snapshot, const UVGrid& grid);

}  // namespace saf
