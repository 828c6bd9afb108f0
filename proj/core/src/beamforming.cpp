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

#include "saf/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "saf/error.hpp"
#include "saf/parallel.hpp"

namespace saf {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDeg = 180.0 / std::numbers::pi;

// Plain product; std::complex operator* takes a slow path for inf/nan recovery.
inline void fma_into(cplx& acc, cplx a, cplx b) {
  acc = {acc.real() + a.real() * b.real() - a.imag() * b.imag(), acc.imag() + a.real() * b.imag() + a.imag() * b.real()};
}

std::vector<double> lattice(int count, int q) {
  const int total = count * q;
  std::vector<double> out(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) out[static_cast<std::size_t>(i)] = 2.0 * i / total - 1.0;
  return out;
}

void require_snapshot_size(const VirtualArray& va, const Snapshot& snapshot) {
  if (snapshot.values.size() != va.unique_count()) {
    throw Error(Errc::dimension_mismatch, "snapshot has " + std::to_string(snapshot.values.size()) +
                                              " entries, virtual array has " + std::to_string(va.unique_count()));
  }
}

}  // namespace

UvPoint angles_to_uv(double phi_deg, double theta_deg) {
  if (!(phi_deg >= -90.0 && phi_deg <= 90.0) || !(theta_deg >= 0.0 && theta_deg <= 180.0)) {
    throw Error(Errc::invalid_argument, "angles out of range: phi must lie in [-90, 90], theta in [0, 180]");
  }
  const double phi = phi_deg / kDeg;
  const double theta = theta_deg / kDeg;
  return {std::sin(phi) * std::sin(theta), std::cos(theta)};
}

std::optional<Angles> uv_to_angles(double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v) || u * u + v * v > 1.0 + 1e-12) return std::nullopt;
  const double theta = std::acos(std::clamp(v, -1.0, 1.0));
  const double s = std::sin(theta);
  if (s < 1e-15) {
    if (std::abs(u) > 1e-12) return std::nullopt;
    return Angles{0.0, theta * kDeg};
  }
  return Angles{std::asin(std::clamp(u / s, -1.0, 1.0)) * kDeg, theta * kDeg};
}

UVGrid make_uv_grid(int M, int N, int q_phi, int q_theta) {
  if (M < 1 || N < 1 || q_phi < 1 || q_theta < 1) {
    throw Error(Errc::invalid_argument, "uv grid dimensions and oversampling factors must be at least 1");
  }
  return UVGrid{M, N, q_phi, q_theta, lattice(M, q_phi), lattice(N, q_theta)};
}

UVGrid make_u_cut(int M, int q_phi, double v0) {
  if (M < 1 || q_phi < 1) throw Error(Errc::invalid_argument, "uv cut dimension and oversampling must be at least 1");
  if (!(v0 >= -1.0 && v0 <= 1.0)) throw Error(Errc::invalid_argument, "cut elevation must lie in [-1, 1]");
  return UVGrid{M, 1, q_phi, 1, lattice(M, q_phi), {v0}};
}

UVGrid evaluation_grid(const VirtualArray& va, int q_phi, int q_theta) {
  if (va.positions.empty()) throw Error(Errc::invalid_argument, "empty virtual array");
  auto base = [](int lo, int hi, double d, int q) {
    int count = static_cast<int>(std::lround(2.0 * (hi - lo) * d)) + 1;
    count = std::max(count, 2);
    if ((count * q) % 2 != 0) ++count;  // keep u = 0 (or v = 0) on the lattice
    return count;
  };
  const auto [min_m, max_m] = std::minmax_element(va.positions.begin(), va.positions.end(),
                                                  [](GridPoint a, GridPoint b) { return a.m < b.m; });
  const int M = base(min_m->m, max_m->m, va.grid.d_y, q_phi);
  if (va.grid.N == 1) return make_u_cut(M, q_phi);
  const int N = base(va.positions.front().n, va.positions.back().n, va.grid.d_z, q_theta);
  return make_uv_grid(M, N, q_phi, q_theta);
}

std::vector<cplx> steering_vector(const VirtualArray& va, double u, double v) {
  std::vector<cplx> out;
  out.reserve(va.positions.size());
  for (const auto& p : va.positions) {
    out.push_back(std::polar(1.0, kTwoPi * (va.grid.y(p.m) * u + va.grid.z(p.n) * v)));
  }
  return out;
}

Snapshot synthesize_snapshot(const VirtualArray& va, std::span<const Target> targets) {
  Snapshot s{std::vector<cplx>(va.unique_count(), cplx{})};
  for (const auto& t : targets) {
    if (t.u * t.u + t.v * t.v > 1.0 + 1e-12) {
      throw Error(Errc::invalid_argument, "target direction is not a real angle (u^2 + v^2 > 1)");
    }
    const auto a = steering_vector(va, t.u, t.v);
    for (std::size_t p = 0; p < a.size(); ++p) s.values[p] += t.amplitude * a[p];
  }
  return s;
}

CouplingMatrix CouplingMatrix::identity(std::size_t dim) {
  CouplingMatrix c{dim, std::vector<cplx>(dim * dim, cplx{})};
  for (std::size_t i = 0; i < dim; ++i) c.entries[i * dim + i] = 1.0;
  return c;
}

Snapshot apply_coupling(const Snapshot& snapshot, const CouplingMatrix& coupling) {
  const std::size_t n = snapshot.values.size();
  if (coupling.dim != n || coupling.entries.size() != n * n) {
    throw Error(Errc::dimension_mismatch, "coupling matrix is " + std::to_string(coupling.dim) + "x" +
                                              std::to_string(coupling.dim) + ", snapshot has " +
                                              std::to_string(n) + " entries");
  }
  Snapshot out{std::vector<cplx>(n, cplx{})};
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc{};
    for (std::size_t j = 0; j < n; ++j) acc += coupling(i, j) * snapshot.values[j];
    out.values[i] = acc;
  }
  return out;
}

Pattern::Pattern(UVGrid grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw Error(Errc::dimension_mismatch, "pattern values do not match grid size");
}

std::vector<double> Pattern::magnitudes() const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), [](const cplx& c) { return std::sqrt(std::norm(c)); });
  return out;
}

Pattern beamform(const VirtualArray& va, const Snapshot& snapshot, const UVGrid& grid, unsigned threads) {
  require_snapshot_size(va, snapshot);
  const std::size_t nu = grid.u.size();
  const std::size_t nv = grid.v.size();

  // Horizontal phasor table, one row per distinct column index.
  std::vector<int> columns;
  columns.reserve(va.positions.size());
  for (const auto& p : va.positions) columns.push_back(p.m);
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  std::vector<cplx> column_phasors(columns.size() * nu);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const double y = va.grid.y(columns[c]);
    for (std::size_t iu = 0; iu < nu; ++iu) column_phasors[c * nu + iu] = std::polar(1.0, -kTwoPi * y * grid.u[iu]);
  }

  // Positions are sorted by row, so each row is a contiguous run. Collapse each row into
  // a u-profile, row_profile[r][iu] = sum over the row of conj(a(u)) * s, stored as
  // separate real and imaginary planes so the accumulation below vectorises.
  std::vector<int> rows;
  std::vector<double> profile_re;
  std::vector<double> profile_im;
  for (std::size_t p = 0; p < va.positions.size();) {
    const int n = va.positions[p].n;
    rows.push_back(n);
    profile_re.resize(rows.size() * nu, 0.0);
    profile_im.resize(rows.size() * nu, 0.0);
    double* re = profile_re.data() + (rows.size() - 1) * nu;
    double* im = profile_im.data() + (rows.size() - 1) * nu;
    for (; p < va.positions.size() && va.positions[p].n == n; ++p) {
      const auto c = static_cast<std::size_t>(
          std::lower_bound(columns.begin(), columns.end(), va.positions[p].m) - columns.begin());
      const cplx s = snapshot.values[p];
      const cplx* phasors = column_phasors.data() + c * nu;
      for (std::size_t iu = 0; iu < nu; ++iu) {
        cplx acc{re[iu], im[iu]};
        fma_into(acc, phasors[iu], s);
        re[iu] = acc.real();
        im[iu] = acc.imag();
      }
    }
  }

  std::vector<cplx> values(nu * nv, cplx{});
  parallel_for(nv, threads, [&](std::size_t iv) {
    std::vector<double> acc_re(nu, 0.0);
    std::vector<double> acc_im(nu, 0.0);
    double* __restrict out_re = acc_re.data();
    double* __restrict out_im = acc_im.data();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const cplx w = std::polar(1.0, -kTwoPi * va.grid.z(rows[r]) * grid.v[iv]);
      const double wr = w.real();
      const double wi = w.imag();
      const double* __restrict pr = profile_re.data() + r * nu;
      const double* __restrict pi = profile_im.data() + r * nu;
      for (std::size_t iu = 0; iu < nu; ++iu) {
        out_re[iu] += wr * pr[iu] - wi * pi[iu];
        out_im[iu] += wr * pi[iu] + wi * pr[iu];
      }
    }
    cplx* out = values.data() + iv * nu;
    for (std::size_t iu = 0; iu < nu; ++iu) out[iu] = {out_re[iu], out_im[iu]};
  });
  return Pattern(grid, std::move(values));
}

Pattern beamform_direct(const VirtualArray& va, const Snapshot& snapshot, const UVGrid& grid) {
  require_snapshot_size(va, snapshot);
  std::vector<cplx> values(grid.size(), cplx{});
  for (std::size_t iv = 0; iv < grid.v.size(); ++iv) {
    for (std::size_t iu = 0; iu < grid.u.size(); ++iu) {
      cplx acc{};
      for (std::size_t p = 0; p < va.positions.size(); ++p) {
        const double phase = kTwoPi * (va.grid.y(va.positions[p].m) * grid.u[iu] +
                                       va.grid.z(va.positions[p].n) * grid.v[iv]);
        acc += std::polar(1.0, -phase) * snapshot.values[p];
      }
      values[iv * grid.u.size() + iu] = acc;
    }
  }
  return Pattern(grid, std::move(values));
}

}  // namespace saf
