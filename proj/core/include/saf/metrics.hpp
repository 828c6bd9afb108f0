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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "saf/beamforming.hpp"
#include "saf/geometry.hpp"

namespace saf {

/// Rectangular field of view in sine space. Metrics always intersect it with the
/// real-angle disk u^2 + v^2 <= 1.
struct UvWindow {
  double u_min = -1.0;
  double u_max = 1.0;
  double v_min = -1.0;
  double v_max = 1.0;

  bool contains(double u, double v) const noexcept;
  /// Symmetric window of +/- sin(az) by +/- sin(el), angles in degrees.
  static UvWindow from_half_angles(double az_deg, double el_deg);
};

struct Peak {
  double magnitude = 0.0;
  std::size_t iu = 0;
  std::size_t iv = 0;
  double u = 0.0;
  double v = 0.0;
};

/// Largest |g| inside the FOV. Ties go to the smallest (v index, u index).
Peak find_peak(const Pattern& pattern, const std::optional<UvWindow>& fov = std::nullopt);

/// Nodes reachable from the peak along 4-connected paths of non-increasing magnitude.
struct MainLobeMask {
  std::size_t nu = 0;
  std::size_t nv = 0;
  std::size_t peak_iu = 0;
  std::size_t peak_iv = 0;
  std::vector<char> inside;

  bool contains(std::size_t iu, std::size_t iv) const noexcept { return inside[iv * nu + iu] != 0; }
  std::size_t count() const noexcept;
};

MainLobeMask mask_main_lobe(const Pattern& pattern, const Peak& peak);

/// 20 log10(peak / max sidelobe), both restricted to the FOV. Returns +infinity when
/// nothing outside the main lobe is nonzero. Throws for an all-equal pattern.
double pslr_db(const Pattern& pattern, const std::optional<UvWindow>& fov = std::nullopt);

/// Magnitude-level variant used by the optimizer's inner loop; `magnitudes` is laid out
/// like Pattern::values().
double pslr_db(const UVGrid& grid, std::span<const double> magnitudes, const std::optional<UvWindow>& fov);

struct Beamwidths {
  double fnbw_deg = 0.0;
  double hpbw_deg = 0.0;
};

/// First-null asin(1/L) and half-power 0.886/L beamwidths for an aperture of L
/// wavelengths, both two-sided and in degrees. L < 1 has no first null and throws.
Beamwidths theoretical_beamwidths(double aperture_wavelengths);

/// Half-power beamwidth along one axis, rotated into degrees.
double theoretical_hpbw_deg(double aperture_wavelengths);

enum class Axis { u, v };

/// Two-sided -3 dB width of the main lobe along the cut through the FOV peak, with
/// linear interpolation between bracketing samples, in degrees (azimuth for Axis::u,
/// polar angle for Axis::v).
double measured_hpbw(const Pattern& pattern, Axis axis, const std::optional<UvWindow>& fov = std::nullopt);

/// asin(n/d + sin(phi_t)) for every integer n != 0 with the argument in [-1, 1],
/// ascending, in degrees.
std::vector<double> grating_lobe_angles(double d_lambda, double phi_t_deg);

/// One-sided grating-lobe-free field of view asin(min(1, 1/(2 d))) in degrees.
double ufov(double d_lambda);

struct ApertureLoss {
  double value = 0.0;  // clamped to 1
  double raw = 0.0;
  bool anomaly = false;  // raw > 1
};

/// A_vrx / (beta A_phy) with beta = 2 for linear and 4 for planar apertures.
ApertureLoss aperture_loss_factor(double virtual_area, double physical_area, Dimensionality dim);

double bw_spreading_factor(double observed_hpbw, double theoretical_hpbw);

/// Bounding-box extent product of a point set (length for linear arrays).
double bounding_box_area(std::span<const GridPoint> points, const GridSpec& grid, Dimensionality dim);

/// Area covered by a populated region: unit cells with all four corners occupied count
/// fully, cells with three corners count half. For linear arrays, the total length of
/// unit segments with both ends occupied.
double covered_area(std::span<const GridPoint> points, const GridSpec& grid, Dimensionality dim);

/// Per-axis extent (max - min coordinate, wavelengths) of a point set.
struct Extent {
  double y = 0.0;
  double z = 0.0;
};
Extent extent(std::span<const GridPoint> points, const GridSpec& grid);

/// Smallest nonzero gap between distinct coordinates along one axis, in wavelengths.
std::optional<double> min_axis_spacing(std::span<const GridPoint> points, const GridSpec& grid, Axis axis);

/// Lattice period along one axis (gcd of coordinate differences), in wavelengths.
std::optional<double> axis_period(std::span<const GridPoint> points, const GridSpec& grid, Axis axis);

struct MetricsReport {
  double pslr_db = 0.0;
  double peak_magnitude = 0.0;
  UvPoint peak_direction;
  std::optional<double> hpbw_az_deg;
  std::optional<double> hpbw_el_deg;
  std::optional<double> fnbw_az_deg;
  std::optional<double> fnbw_el_deg;
  std::optional<double> ufov_az_deg;
  std::optional<double> ufov_el_deg;
  std::vector<double> grating_lobes_az_deg;
  std::vector<double> grating_lobes_el_deg;
  std::size_t generated_vrx = 0;
  std::size_t unique_vrx = 0;
  double thinning_ratio = 0.0;
  std::optional<ApertureLoss> aperture_loss;
  std::optional<double> bw_spreading_az;
  std::optional<double> bw_spreading_el;
};

/// Full report for a layout and its pattern. The thinning ratio uses `reference` when
/// given, otherwise the fully populated grid spanning the virtual array's bounding box.
MetricsReport evaluate_metrics(const ArrayLayout& layout, const Pattern& pattern,
                               const std::optional<UvWindow>& fov = std::nullopt,
                               const std::optional<GridSpec>& reference = std::nullopt);

}  // namespace saf
