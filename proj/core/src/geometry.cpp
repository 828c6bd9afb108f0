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

#include "saf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "saf/error.hpp"

namespace saf {
namespace {

constexpr double kEdgeTolerance = 1e-9;

std::string describe(GridPoint p) {
  return "(" + std::to_string(p.m) + ", " + std::to_string(p.n) + ")";
}

const char* role_name(Role role) { return role == Role::tx ? "tx" : "rx"; }

void require_unique(std::vector<GridPoint> points, const char* what) {
  std::sort(points.begin(), points.end(), RowMajorLess{});
  const auto dup = std::adjacent_find(points.begin(), points.end());
  if (dup != points.end()) {
    throw Error(Errc::invalid_layout, std::string("duplicate ") + what + " position " + describe(*dup));
  }
}

}  // namespace

void GridSpec::validate() const {
  if (!(d_y > 0.0) || !(d_z > 0.0) || !std::isfinite(d_y) || !std::isfinite(d_z)) {
    throw Error(Errc::invalid_argument, "grid spacings must be positive and finite");
  }
  if (M < 1 || N < 1) throw Error(Errc::invalid_argument, "grid dimensions must be at least 1");
}

void ElementSize::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw Error(Errc::invalid_argument, "element width and height must be positive");
  }
}

void ForbiddenZone::validate() const {
  if (!(y_mc >= 0.0) || !(z_mc >= 0.0)) {
    throw Error(Errc::invalid_argument, "forbidden zone half-extents must be non-negative");
  }
}

bool ForbiddenZone::excludes(Role role) const noexcept {
  switch (kind) {
    case ZoneKind::tx_excluded: return role == Role::tx;
    case ZoneKind::rx_excluded: return role == Role::rx;
    case ZoneKind::both_excluded: return true;
  }
  return false;
}

bool ForbiddenZone::strictly_contains(const GridSpec& grid, double y, double z) const noexcept {
  const double dy = std::abs(y - grid.y(center.m));
  const double dz = std::abs(z - grid.z(center.n));
  return y_mc - dy > kEdgeTolerance && z_mc - dz > kEdgeTolerance;
}

bool ArrayLayout::is_enforced(Role role, GridPoint p) const noexcept {
  const auto& list = enforced(role);
  return std::find(list.begin(), list.end(), p) != list.end();
}

void ArrayLayout::validate() const {
  grid.validate();
  tx_size.validate();
  rx_size.validate();
  for (Role role : {Role::tx, Role::rx}) {
    for (const auto& p : positions(role)) {
      if (!grid.contains(p)) {
        throw Error(Errc::invalid_layout, std::string(role_name(role)) + " position " + describe(p) +
                                              " lies outside the " + std::to_string(grid.M) + "x" +
                                              std::to_string(grid.N) + " grid");
      }
    }
    require_unique(positions(role), role_name(role));
    require_unique(enforced(role), role == Role::tx ? "enforced_tx" : "enforced_rx");
    for (const auto& p : enforced(role)) {
      const auto& list = positions(role);
      if (std::find(list.begin(), list.end(), p) == list.end()) {
        throw Error(Errc::invalid_layout, std::string("enforced ") + role_name(role) + " position " + describe(p) +
                                              " is not in the " + role_name(role) + " list");
      }
    }
  }
}

VirtualArray build_virtual_array(const ArrayLayout& layout) {
  layout.validate();
  if (layout.tx.empty() || layout.rx.empty()) {
    throw Error(Errc::invalid_layout, "virtual array needs at least one TX and one RX");
  }
  VirtualArray va;
  va.generated_count = layout.tx.size() * layout.rx.size();
  va.positions.reserve(va.generated_count);
  for (const auto& t : layout.tx) {
    for (const auto& r : layout.rx) va.positions.push_back(t + r);
  }
  std::sort(va.positions.begin(), va.positions.end(), RowMajorLess{});
  va.positions.erase(std::unique(va.positions.begin(), va.positions.end()), va.positions.end());
  va.grid = GridSpec{layout.grid.d_y, layout.grid.d_z, 2 * layout.grid.M - 1, 2 * layout.grid.N - 1};
  return va;
}

bool footprints_overlap(double dy, double dz, const ElementSize& a, const ElementSize& b) noexcept {
  const double half_w = 0.5 * (a.width + b.width);
  const double half_h = 0.5 * (a.height + b.height);
  return half_w - std::abs(dy) > kEdgeTolerance && half_h - std::abs(dz) > kEdgeTolerance;
}

std::vector<OverlapViolation> check_overlap(const ArrayLayout& layout) {
  struct Item {
    ElementRef ref;
    GridPoint p;
    const ElementSize* size;
  };
  std::vector<Item> items;
  items.reserve(layout.tx.size() + layout.rx.size());
  for (Role role : {Role::tx, Role::rx}) {
    const auto& list = layout.positions(role);
    for (std::size_t i = 0; i < list.size(); ++i) items.push_back({{role, i}, list[i], &layout.size(role)});
  }

  std::vector<OverlapViolation> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const double dy = layout.grid.y(items[i].p.m) - layout.grid.y(items[j].p.m);
      const double dz = layout.grid.z(items[i].p.n) - layout.grid.z(items[j].p.n);
      if (footprints_overlap(dy, dz, *items[i].size, *items[j].size)) out.push_back({items[i].ref, items[j].ref});
    }
  }
  return out;
}

std::vector<ZoneViolation> check_forbidden_zones(const ArrayLayout& layout, std::span<const ForbiddenZone> zones) {
  std::vector<ZoneViolation> out;
  for (Role role : {Role::tx, Role::rx}) {
    const auto& list = layout.positions(role);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const double y = layout.grid.y(list[i].m);
      const double z = layout.grid.z(list[i].n);
      for (std::size_t k = 0; k < zones.size(); ++k) {
        if (zones[k].excludes(role) && zones[k].strictly_contains(layout.grid, y, z)) {
          out.push_back({{role, i}, k});
        }
      }
    }
  }
  return out;
}

bool can_place(const ArrayLayout& layout, Role role, GridPoint p, std::span<const ForbiddenZone> zones,
               std::optional<ElementRef> ignore) {
  if (!layout.grid.contains(p)) return false;
  const double y = layout.grid.y(p.m);
  const double z = layout.grid.z(p.n);
  for (const auto& zone : zones) {
    if (zone.excludes(role) && zone.strictly_contains(layout.grid, y, z)) return false;
  }
  const ElementSize& size = layout.size(role);
  for (Role other : {Role::tx, Role::rx}) {
    const auto& list = layout.positions(other);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (ignore && ignore->role == other && ignore->index == i) continue;
      const double dy = y - layout.grid.y(list[i].m);
      const double dz = z - layout.grid.z(list[i].n);
      if (footprints_overlap(dy, dz, size, layout.size(other))) return false;
    }
  }
  return true;
}

bool is_feasible(const ArrayLayout& layout, std::span<const ForbiddenZone> zones) {
  try {
    layout.validate();
  } catch (const Error&) {
    return false;
  }
  return check_overlap(layout).empty() && check_forbidden_zones(layout, zones).empty();
}

double thinning_ratio(const ArrayLayout& layout, const GridSpec& reference) {
  if (reference.M < 1 || reference.N < 1) {
    throw Error(Errc::invalid_argument, "reference grid must have at least one element");
  }
  const auto va = build_virtual_array(layout);
  const double reference_count = static_cast<double>(reference.M) * static_cast<double>(reference.N);
  const double ratio = static_cast<double>(va.unique_count()) / reference_count;
  if (ratio > 1.0) {
    throw Error(Errc::invalid_argument, "reference grid has fewer elements than the virtual array");
  }
  return ratio;
}

std::vector<EcdfStep> spacing_ecdf(std::span<const double> positions) {
  if (positions.size() < 2) throw Error(Errc::invalid_argument, "spacing ECDF needs at least two positions");
  std::vector<double> spacings;
  spacings.reserve(positions.size() - 1);
  for (std::size_t i = 1; i < positions.size(); ++i) {
    const double s = positions[i] - positions[i - 1];
    if (!(s > 0.0)) throw Error(Errc::invalid_argument, "positions must be strictly increasing");
    spacings.push_back(s);
  }
  std::sort(spacings.begin(), spacings.end());

  const auto total = static_cast<double>(spacings.size());
  std::vector<EcdfStep> out;
  for (std::size_t i = 0; i < spacings.size(); ++i) {
    const bool same_as_next =
        i + 1 < spacings.size() &&
        spacings[i + 1] - spacings[i] <= 1e-9 * std::max(1.0, std::abs(spacings[i + 1]));
    if (same_as_next) continue;
    out.push_back({spacings[i], static_cast<double>(i + 1) / total});
  }
  return out;
}

std::vector<double> horizontal_positions(const ArrayLayout& layout, Role role) {
  std::vector<double> out;
  for (const auto& p : layout.positions(role)) out.push_back(layout.grid.y(p.m));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace saf
