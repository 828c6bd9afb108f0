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

#include "saf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "saf/error.hpp"

namespace saf {
namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

bool in_fov(const std::optional<UvWindow>& fov, double u, double v) {
  if (u * u + v * v > 1.0 + 1e-12) return false;
  return !fov || fov->contains(u, v);
}

Peak peak_from_magnitudes(const UVGrid& grid, std::span<const double> mags, const std::optional<UvWindow>& fov) {
  const std::size_t nu = grid.u.size();
  Peak best;
  bool found = false;
  for (std::size_t iv = 0; iv < grid.v.size(); ++iv) {
    for (std::size_t iu = 0; iu < nu; ++iu) {
      if (!in_fov(fov, grid.u[iu], grid.v[iv])) continue;
      const double m = mags[iv * nu + iu];
      if (!found || m > best.magnitude) {
        best = {m, iu, iv, grid.u[iu], grid.v[iv]};
        found = true;
      }
    }
  }
  if (!found) throw Error(Errc::not_found, "field of view contains no real-angle grid node");
  return best;
}

MainLobeMask mask_from_magnitudes(std::size_t nu, std::size_t nv, std::span<const double> mags, std::size_t peak_iu,
                                  std::size_t peak_iv) {
  MainLobeMask mask{nu, nv, peak_iu, peak_iv, std::vector<char>(nu * nv, 0)};
  std::deque<std::size_t> work;
  const std::size_t start = peak_iv * nu + peak_iu;
  mask.inside[start] = 1;
  work.push_back(start);
  while (!work.empty()) {
    const std::size_t idx = work.front();
    work.pop_front();
    const std::size_t iu = idx % nu;
    const std::size_t iv = idx / nu;
    const double level = mags[idx];
    auto visit = [&](std::size_t next) {
      if (!mask.inside[next] && mags[next] <= level) {
        mask.inside[next] = 1;
        work.push_back(next);
      }
    };
    if (iu > 0) visit(idx - 1);
    if (iu + 1 < nu) visit(idx + 1);
    if (iv > 0) visit(idx - nu);
    if (iv + 1 < nv) visit(idx + nu);
  }
  return mask;
}

// Interpolated coordinate where `line` falls through `level` walking from `start` in
// direction `step`. Returns the last index above the level through `last_above`.
double crossing(std::span<const double> line, std::span<const double> coords, std::size_t start, int step,
                double level, std::size_t& last_above) {
  std::size_t i = start;
  for (;;) {
    const bool at_edge = step < 0 ? i == 0 : i + 1 >= line.size();
    if (at_edge) throw Error(Errc::not_found, "half-power crossing lies outside the grid");
    const std::size_t next = step < 0 ? i - 1 : i + 1;
    if (line[next] < level) {
      last_above = i;
      const double frac = (line[i] - level) / (line[i] - line[next]);
      return coords[i] + frac * (coords[next] - coords[i]);
    }
    i = next;
  }
}

int axis_coord(GridPoint p, Axis axis) { return axis == Axis::u ? p.m : p.n; }

std::vector<int> distinct_coords(std::span<const GridPoint> points, Axis axis) {
  std::vector<int> c;
  c.reserve(points.size());
  for (const auto& p : points) c.push_back(axis_coord(p, axis));
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

}  // namespace

bool UvWindow::contains(double u, double v) const noexcept {
  constexpr double eps = 1e-12;
  return u >= u_min - eps && u <= u_max + eps && v >= v_min - eps && v <= v_max + eps;
}

UvWindow UvWindow::from_half_angles(double az_deg, double el_deg) {
  const double su = std::sin(std::clamp(az_deg, 0.0, 90.0) / kDeg);
  const double sv = std::sin(std::clamp(el_deg, 0.0, 90.0) / kDeg);
  return {-su, su, -sv, sv};
}

std::size_t MainLobeMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), char{1}));
}

Peak find_peak(const Pattern& pattern, const std::optional<UvWindow>& fov) {
  if (pattern.grid().size() == 0) throw Error(Errc::invalid_argument, "empty pattern");
  const auto mags = pattern.magnitudes();
  return peak_from_magnitudes(pattern.grid(), mags, fov);
}

MainLobeMask mask_main_lobe(const Pattern& pattern, const Peak& peak) {
  if (peak.iu >= pattern.nu() || peak.iv >= pattern.nv()) throw Error(Errc::invalid_argument, "peak is not a grid node");
  const auto mags = pattern.magnitudes();
  return mask_from_magnitudes(pattern.nu(), pattern.nv(), mags, peak.iu, peak.iv);
}

double pslr_db(const UVGrid& grid, std::span<const double> mags, const std::optional<UvWindow>& fov) {
  if (mags.size() != grid.size() || mags.empty()) throw Error(Errc::dimension_mismatch, "magnitudes do not match grid");
  const std::size_t nu = grid.u.size();

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t iv = 0; iv < grid.v.size(); ++iv) {
    for (std::size_t iu = 0; iu < nu; ++iu) {
      if (!in_fov(fov, grid.u[iu], grid.v[iv])) continue;
      lo = std::min(lo, mags[iv * nu + iu]);
      hi = std::max(hi, mags[iv * nu + iu]);
    }
  }
  if (!(hi > 0.0) || hi - lo <= 1e-12 * hi) {
    throw Error(Errc::invalid_argument, "pattern is flat over the field of view; PSLR undefined");
  }

  const Peak peak = peak_from_magnitudes(grid, mags, fov);
  const MainLobeMask mask = mask_from_magnitudes(nu, grid.v.size(), mags, peak.iu, peak.iv);
  double sidelobe = 0.0;
  for (std::size_t iv = 0; iv < grid.v.size(); ++iv) {
    for (std::size_t iu = 0; iu < nu; ++iu) {
      const std::size_t idx = iv * nu + iu;
      if (mask.inside[idx] || !in_fov(fov, grid.u[iu], grid.v[iv])) continue;
      sidelobe = std::max(sidelobe, mags[idx]);
    }
  }
  if (sidelobe == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak.magnitude / sidelobe);
}

double pslr_db(const Pattern& pattern, const std::optional<UvWindow>& fov) {
  const auto mags = pattern.magnitudes();
  return pslr_db(pattern.grid(), mags, fov);
}

double theoretical_hpbw_deg(double aperture_wavelengths) {
  if (!(aperture_wavelengths > 0.0)) throw Error(Errc::invalid_argument, "aperture length must be positive");
  return 0.886 / aperture_wavelengths * kDeg;
}

Beamwidths theoretical_beamwidths(double aperture_wavelengths) {
  if (!(aperture_wavelengths >= 1.0)) {
    throw Error(Errc::invalid_argument, "first-null beamwidth undefined for apertures shorter than one wavelength");
  }
  return {std::asin(1.0 / aperture_wavelengths) * kDeg, theoretical_hpbw_deg(aperture_wavelengths)};
}

double measured_hpbw(const Pattern& pattern, Axis axis, const std::optional<UvWindow>& fov) {
  const auto mags = pattern.magnitudes();
  const UVGrid& grid = pattern.grid();
  const Peak peak = peak_from_magnitudes(grid, mags, fov);
  const std::size_t nu = pattern.nu();

  std::vector<double> line;
  std::span<const double> coords;
  std::size_t start = 0;
  if (axis == Axis::u) {
    line.assign(mags.begin() + static_cast<std::ptrdiff_t>(peak.iv * nu),
                mags.begin() + static_cast<std::ptrdiff_t>((peak.iv + 1) * nu));
    coords = grid.u;
    start = peak.iu;
  } else {
    for (std::size_t iv = 0; iv < pattern.nv(); ++iv) line.push_back(mags[iv * nu + peak.iu]);
    coords = grid.v;
    start = peak.iv;
  }
  if (line.size() < 3) throw Error(Errc::invalid_argument, "pattern has fewer than three samples along the cut");

  const double level = peak.magnitude / std::numbers::sqrt2;
  std::size_t left_last = start;
  std::size_t right_last = start;
  const double lo = crossing(line, coords, start, -1, level, left_last);
  const double hi = crossing(line, coords, start, +1, level, right_last);
  if (right_last - left_last + 1 < 3) {
    throw Error(Errc::invalid_argument, "main lobe spans fewer than three samples above half power; refine the grid");
  }

  if (axis == Axis::u) {
    const auto a = uv_to_angles(lo, peak.v);
    const auto b = uv_to_angles(hi, peak.v);
    if (!a || !b) throw Error(Errc::not_found, "half-power crossing is not a real angle");
    return std::abs(b->phi_deg - a->phi_deg);
  }
  const auto a = uv_to_angles(peak.u, lo);
  const auto b = uv_to_angles(peak.u, hi);
  if (!a || !b) throw Error(Errc::not_found, "half-power crossing is not a real angle");
  return std::abs(a->theta_deg - b->theta_deg);
}

std::vector<double> grating_lobe_angles(double d_lambda, double phi_t_deg) {
  if (!(d_lambda > 0.0)) throw Error(Errc::invalid_argument, "element spacing must be positive");
  constexpr double eps = 1e-12;
  const double s = std::sin(phi_t_deg / kDeg);
  const auto n_lo = static_cast<long>(std::ceil(d_lambda * (-1.0 - s) - eps));
  const auto n_hi = static_cast<long>(std::floor(d_lambda * (1.0 - s) + eps));
  std::vector<double> out;
  for (long n = n_lo; n <= n_hi; ++n) {
    if (n == 0) continue;
    const double gamma = static_cast<double>(n) / d_lambda + s;
    if (gamma < -1.0 - eps || gamma > 1.0 + eps) continue;
    const double angle = std::asin(std::clamp(gamma, -1.0, 1.0)) * kDeg;
    if (std::abs(angle - phi_t_deg) < 1e-9) continue;
    out.push_back(angle);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double ufov(double d_lambda) {
  if (!(d_lambda > 0.0)) throw Error(Errc::invalid_argument, "element spacing must be positive");
  const double x = 1.0 / (2.0 * d_lambda);
  if (x >= 1.0) return 90.0;
  return std::asin(x) * kDeg;
}

ApertureLoss aperture_loss_factor(double virtual_area, double physical_area, Dimensionality dim) {
  if (!(physical_area > 0.0)) throw Error(Errc::invalid_argument, "physical aperture must be positive");
  if (!(virtual_area >= 0.0)) throw Error(Errc::invalid_argument, "virtual aperture must be non-negative");
  const double beta = dim == Dimensionality::one_d ? 2.0 : 4.0;
  const double raw = virtual_area / (beta * physical_area);
  const bool anomaly = raw > 1.0 + 1e-12;
  return {anomaly ? 1.0 : raw, raw, anomaly};
}

double bw_spreading_factor(double observed_hpbw, double theoretical_hpbw) {
  if (!(observed_hpbw > 0.0) || !(theoretical_hpbw > 0.0)) {
    throw Error(Errc::invalid_argument, "beamwidths must be positive");
  }
  return observed_hpbw / theoretical_hpbw;
}

Extent extent(std::span<const GridPoint> points, const GridSpec& grid) {
  if (points.empty()) return {};
  const auto [mn_m, mx_m] = std::minmax_element(points.begin(), points.end(),
                                                [](GridPoint a, GridPoint b) { return a.m < b.m; });
  const auto [mn_n, mx_n] = std::minmax_element(points.begin(), points.end(),
                                                [](GridPoint a, GridPoint b) { return a.n < b.n; });
  return {(mx_m->m - mn_m->m) * grid.d_y, (mx_n->n - mn_n->n) * grid.d_z};
}

double bounding_box_area(std::span<const GridPoint> points, const GridSpec& grid, Dimensionality dim) {
  const Extent e = extent(points, grid);
  return dim == Dimensionality::one_d ? e.y : e.y * e.z;
}

double covered_area(std::span<const GridPoint> points, const GridSpec& grid, Dimensionality dim) {
  std::vector<GridPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), RowMajorLess{});
  auto has = [&](int m, int n) { return std::binary_search(sorted.begin(), sorted.end(), GridPoint{m, n}, RowMajorLess{}); };

  if (dim == Dimensionality::one_d) {
    double length = 0.0;
    for (const auto& p : sorted) {
      if (has(p.m + 1, p.n)) length += grid.d_y;
    }
    return length;
  }
  // Each candidate cell is anchored at its lower-left corner; any occupied corner can
  // anchor a cell, so scan the four cells touching every occupied node.
  std::vector<GridPoint> anchors;
  anchors.reserve(sorted.size() * 4);
  for (const auto& p : sorted) {
    for (int dm = -1; dm <= 0; ++dm) {
      for (int dn = -1; dn <= 0; ++dn) anchors.push_back({p.m + dm, p.n + dn});
    }
  }
  std::sort(anchors.begin(), anchors.end(), RowMajorLess{});
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());

  auto full = [&](int m, int n) { return has(m, n) && has(m + 1, n) && has(m, n + 1) && has(m + 1, n + 1); };

  double cells = 0.0;
  for (const auto& a : anchors) {
    const bool c00 = has(a.m, a.n), c10 = has(a.m + 1, a.n), c01 = has(a.m, a.n + 1), c11 = has(a.m + 1, a.n + 1);
    const int corners = c00 + c10 + c01 + c11;
    if (corners == 4) {
      cells += 1.0;
    } else if (corners == 3) {
      // Half a cell along a slope. A missing corner flanked by two full cells along the
      // cut is a right-angle notch and adds nothing.
      const bool notch = (!c00 || !c11) ? full(a.m - 1, a.n + 1) && full(a.m + 1, a.n - 1)
                                        : full(a.m + 1, a.n + 1) && full(a.m - 1, a.n - 1);
      if (!notch) cells += 0.5;
    }
  }
  return cells * grid.d_y * grid.d_z;
}

std::optional<double> min_axis_spacing(std::span<const GridPoint> points, const GridSpec& grid, Axis axis) {
  const auto c = distinct_coords(points, axis);
  if (c.size() < 2) return std::nullopt;
  int best = std::numeric_limits<int>::max();
  for (std::size_t i = 1; i < c.size(); ++i) best = std::min(best, c[i] - c[i - 1]);
  return best * (axis == Axis::u ? grid.d_y : grid.d_z);
}

std::optional<double> axis_period(std::span<const GridPoint> points, const GridSpec& grid, Axis axis) {
  const auto c = distinct_coords(points, axis);
  if (c.size() < 2) return std::nullopt;
  int g = 0;
  for (std::size_t i = 1; i < c.size(); ++i) g = std::gcd(g, c[i] - c[0]);
  return g * (axis == Axis::u ? grid.d_y : grid.d_z);
}

MetricsReport evaluate_metrics(const ArrayLayout& layout, const Pattern& pattern, const std::optional<UvWindow>& fov,
                               const std::optional<GridSpec>& reference) {
  const VirtualArray va = build_virtual_array(layout);
  const Dimensionality dim = layout.grid.dimensionality();
  const bool planar = dim == Dimensionality::two_d && pattern.nv() > 1;

  MetricsReport r;
  const Peak peak = find_peak(pattern, fov);
  r.peak_magnitude = peak.magnitude;
  r.peak_direction = {peak.u, peak.v};
  r.pslr_db = pslr_db(pattern, fov);

  auto try_hpbw = [&](Axis axis) -> std::optional<double> {
    try {
      return measured_hpbw(pattern, axis, fov);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  r.hpbw_az_deg = try_hpbw(Axis::u);
  if (planar) r.hpbw_el_deg = try_hpbw(Axis::v);

  const Extent virtual_extent = extent(va.positions, va.grid);
  if (virtual_extent.y >= 1.0) r.fnbw_az_deg = theoretical_beamwidths(virtual_extent.y).fnbw_deg;
  if (planar && virtual_extent.z >= 1.0) r.fnbw_el_deg = theoretical_beamwidths(virtual_extent.z).fnbw_deg;

  if (auto d = min_axis_spacing(va.positions, va.grid, Axis::u)) r.ufov_az_deg = ufov(*d);
  if (planar) {
    if (auto d = min_axis_spacing(va.positions, va.grid, Axis::v)) r.ufov_el_deg = ufov(*d);
  }
  if (auto period = axis_period(va.positions, va.grid, Axis::u)) {
    r.grating_lobes_az_deg = grating_lobe_angles(*period, std::asin(std::clamp(peak.u, -1.0, 1.0)) * kDeg);
  }
  if (planar) {
    if (auto period = axis_period(va.positions, va.grid, Axis::v)) {
      r.grating_lobes_el_deg = grating_lobe_angles(*period, std::asin(std::clamp(peak.v, -1.0, 1.0)) * kDeg);
    }
  }

  r.generated_vrx = va.generated_count;
  r.unique_vrx = va.unique_count();
  if (reference) {
    r.thinning_ratio = thinning_ratio(layout, *reference);
  } else {
    const auto cols = static_cast<double>(std::lround(virtual_extent.y / va.grid.d_y) + 1);
    const auto rows = static_cast<double>(std::lround(virtual_extent.z / va.grid.d_z) + 1);
    r.thinning_ratio = static_cast<double>(va.unique_count()) / (cols * rows);
  }

  std::vector<GridPoint> physical(layout.tx);
  physical.insert(physical.end(), layout.rx.begin(), layout.rx.end());
  const double physical_area = bounding_box_area(physical, layout.grid, dim);
  if (physical_area > 0.0) {
    r.aperture_loss = aperture_loss_factor(bounding_box_area(va.positions, va.grid, dim), physical_area, dim);
  }
  const Extent physical_extent = extent(physical, layout.grid);
  if (r.hpbw_az_deg && physical_extent.y > 0.0) {
    r.bw_spreading_az = bw_spreading_factor(*r.hpbw_az_deg, theoretical_hpbw_deg(2.0 * physical_extent.y));
  }
  if (r.hpbw_el_deg && physical_extent.z > 0.0) {
    r.bw_spreading_el = bw_spreading_factor(*r.hpbw_el_deg, theoretical_hpbw_deg(2.0 * physical_extent.z));
  }
  return r;
}

}  // namespace saf
