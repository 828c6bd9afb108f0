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

namespace saf {

enum class Dimensionality { one_d, two_d };

/// Integer coordinate on a reference grid: m indexes columns (horizontal, y), n rows
/// (vertical, z).
struct GridPoint {
  int m = 0;
  int n = 0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
  friend GridPoint operator+(GridPoint a, GridPoint b) { return {a.m + b.m, a.n + b.n}; }
  friend GridPoint operator-(GridPoint a, GridPoint b) { return {a.m - b.m, a.n - b.n}; }
};

/// Lexicographic order on (n, m); the canonical order of virtual-array positions.
struct RowMajorLess {
  bool operator()(const GridPoint& a, const GridPoint& b) const noexcept {
    return a.n != b.n ? a.n < b.n : a.m < b.m;
  }
};

/// Reference grid. Spacings are in wavelengths; the aperture spans
/// (M-1)*d_y by (N-1)*d_z.
struct GridSpec {
  double d_y = 0.5;
  double d_z = 0.5;
  int M = 1;
  int N = 1;

  void validate() const;
  bool contains(GridPoint p) const noexcept { return p.m >= 0 && p.m < M && p.n >= 0 && p.n < N; }
  double y(int m) const noexcept { return m * d_y; }
  double z(int n) const noexcept { return n * d_z; }
  double y_extent() const noexcept { return (M - 1) * d_y; }
  double z_extent() const noexcept { return (N - 1) * d_z; }
  Dimensionality dimensionality() const noexcept { return N == 1 ? Dimensionality::one_d : Dimensionality::two_d; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Physical footprint of an element in wavelengths, centred on its grid point.
struct ElementSize {
  double width = 0.5;
  double height = 0.5;

  void validate() const;
  friend bool operator==(const ElementSize&, const ElementSize&) = default;
};

enum class Role { tx, rx };

struct ElementRef {
  Role role = Role::tx;
  std::size_t index = 0;

  friend bool operator==(const ElementRef&, const ElementRef&) = default;
};

/// TX/RX positions of a uniform sparse array. Every element sits on a node of `grid`.
struct ArrayLayout {
  GridSpec grid;
  std::vector<GridPoint> tx;
  std::vector<GridPoint> rx;
  ElementSize tx_size;
  ElementSize rx_size;
  std::vector<GridPoint> enforced_tx;
  std::vector<GridPoint> enforced_rx;

  /// Throws Error(invalid_layout) on out-of-grid or duplicate positions, or on enforced
  /// positions missing from the position lists.
  void validate() const;

  const std::vector<GridPoint>& positions(Role role) const noexcept { return role == Role::tx ? tx : rx; }
  std::vector<GridPoint>& positions(Role role) noexcept { return role == Role::tx ? tx : rx; }
  const std::vector<GridPoint>& enforced(Role role) const noexcept {
    return role == Role::tx ? enforced_tx : enforced_rx;
  }
  const ElementSize& size(Role role) const noexcept { return role == Role::tx ? tx_size : rx_size; }
  bool is_enforced(Role role, GridPoint p) const noexcept;

  friend bool operator==(const ArrayLayout&, const ArrayLayout&) = default;
};

enum class ZoneKind { tx_excluded, rx_excluded, both_excluded };

/// Axis-aligned rectangle around `center` with half-extents y_mc, z_mc (wavelengths).
struct ForbiddenZone {
  double y_mc = 0.0;
  double z_mc = 0.0;
  GridPoint center;
  ZoneKind kind = ZoneKind::both_excluded;

  void validate() const;
  bool excludes(Role role) const noexcept;
  /// True when (y, z), in wavelengths, lies strictly inside the rectangle.
  bool strictly_contains(const GridSpec& grid, double y, double z) const noexcept;

  friend bool operator==(const ForbiddenZone&, const ForbiddenZone&) = default;
};

/// De-duplicated coordinate-sum array of a MIMO layout.
struct VirtualArray {
  std::vector<GridPoint> positions;  // sorted by RowMajorLess, unique
  std::size_t generated_count = 0;   // |tx| * |rx|
  GridSpec grid;                     // virtual aperture: (2M-1) x (2N-1) nodes

  std::size_t unique_count() const noexcept { return positions.size(); }
};

VirtualArray build_virtual_array(const ArrayLayout& layout);

struct OverlapViolation {
  ElementRef a;
  ElementRef b;
};

/// Strict-interior rectangle intersection test between two centred footprints separated
/// by (dy, dz) wavelengths. Edge contact is not an overlap.
bool footprints_overlap(double dy, double dz, const ElementSize& a, const ElementSize& b) noexcept;

/// Every TX-TX, RX-RX and TX-RX pair whose footprints overlap with positive area.
std::vector<OverlapViolation> check_overlap(const ArrayLayout& layout);

struct ZoneViolation {
  ElementRef element;
  std::size_t zone = 0;
};

std::vector<ZoneViolation> check_forbidden_zones(const ArrayLayout& layout, std::span<const ForbiddenZone> zones);

/// True when an element of `role` could sit at `p` without leaving the grid, overlapping
/// any other element or entering a zone that excludes it. `ignore` names an element to
/// leave out of the overlap test (the one being moved).
bool can_place(const ArrayLayout& layout, Role role, GridPoint p, std::span<const ForbiddenZone> zones,
               std::optional<ElementRef> ignore = std::nullopt);

/// Bounds, overlap and zone check in one call.
bool is_feasible(const ArrayLayout& layout, std::span<const ForbiddenZone> zones);

/// Unique virtual-element count over reference.M * reference.N.
double thinning_ratio(const ArrayLayout& layout, const GridSpec& reference);

struct EcdfStep {
  double spacing = 0.0;
  double cumulative = 0.0;
};

/// Step ECDF of consecutive spacings of strictly increasing 1-D positions, one entry per
/// distinct spacing. Spacings closer than 1e-9 (relative) are treated as equal.
std::vector<EcdfStep> spacing_ecdf(std::span<const double> positions);

/// Sorted horizontal coordinates (wavelengths) of one role's elements.
std::vector<double> horizontal_positions(const ArrayLayout& layout, Role role);

}  // namespace saf
