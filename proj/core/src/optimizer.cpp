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

#include "saf/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "saf/beamforming.hpp"
#include "saf/error.hpp"
#include "saf/parallel.hpp"

namespace saf {
namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kEps = 1e-9;

std::size_t draw(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

int axis_value(GridPoint p, Axis axis) { return axis == Axis::u ? p.m : p.n; }
void set_axis_value(GridPoint& p, Axis axis, int value) { (axis == Axis::u ? p.m : p.n) = value; }

// Search outward from the node nearest (y, z) for the first node the element fits on.
std::optional<GridPoint> nearest_placeable(const ArrayLayout& layout, Role role, double y, double z,
                                           std::span<const ForbiddenZone> zones) {
  const GridSpec& g = layout.grid;
  const int cm = std::clamp(static_cast<int>(std::lround(y / g.d_y)), 0, g.M - 1);
  const int cn = std::clamp(static_cast<int>(std::lround(z / g.d_z)), 0, g.N - 1);

  if (g.N == 1) {
    if (can_place(layout, role, {cm, 0}, zones)) return GridPoint{cm, 0};
    for (int k = 1; k < g.M; ++k) {
      for (int m : {cm + k, cm - k}) {
        if (m >= 0 && m < g.M && can_place(layout, role, {m, 0}, zones)) return GridPoint{m, 0};
      }
    }
    return std::nullopt;
  }

  const int reach = std::max(g.M, g.N);
  std::vector<GridPoint> ring;
  for (int r = 0; r < reach; ++r) {
    ring.clear();
    for (int dm = -r; dm <= r; ++dm) {
      for (int dn = -r; dn <= r; ++dn) {
        if (std::max(std::abs(dm), std::abs(dn)) != r) continue;
        const GridPoint p{cm + dm, cn + dn};
        if (g.contains(p)) ring.push_back(p);
      }
    }
    std::sort(ring.begin(), ring.end(), [&](GridPoint a, GridPoint b) {
      const double da = std::hypot(g.y(a.m) - y, g.z(a.n) - z);
      const double db = std::hypot(g.y(b.m) - y, g.z(b.n) - z);
      if (da != db) return da < db;
      return RowMajorLess{}(a, b);
    });
    for (const auto& p : ring) {
      if (can_place(layout, role, p, zones)) return p;
    }
  }
  return std::nullopt;
}

std::vector<double> axis_targets(int n, double extent, double grid_step, double element_extent, bool use_hia,
                                 std::mt19937_64& rng) {
  if (!use_hia) {
    std::uniform_real_distribution<double> pick(0.0, extent);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& x : out) x = pick(rng);
    std::sort(out.begin(), out.end());
    return out;
  }
  if (n == 1) return {0.5 * extent};
  if (n == 2) return {0.0, extent};
  double d_min = std::max(grid_step, element_extent);
  if ((n - 1) * d_min > extent + kEps) d_min = grid_step;
  return hia_init(n, 0.0, extent, d_min).positions;
}

std::optional<ArrayLayout> shuffle_spacings(const ArrayLayout& current, Role role, Axis axis, std::mt19937_64& rng) {
  const auto& pts = current.positions(role);
  const std::size_t n = pts.size();
  if (n < 3) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const Axis other = axis == Axis::u ? Axis::v : Axis::u;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const int ka = axis_value(pts[a], axis);
    const int kb = axis_value(pts[b], axis);
    return ka != kb ? ka < kb : axis_value(pts[a], other) < axis_value(pts[b], other);
  });

  std::vector<int> spacings(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    spacings[k] = axis_value(pts[order[k + 1]], axis) - axis_value(pts[order[k]], axis);
  }
  std::vector<std::size_t> anchors{0};
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (current.is_enforced(role, pts[order[k]])) anchors.push_back(k);
  }
  anchors.push_back(n - 1);

  bool movable = false;
  for (std::size_t a = 0; a + 1 < anchors.size(); ++a) {
    const auto first = spacings.begin() + static_cast<std::ptrdiff_t>(anchors[a]);
    const auto last = spacings.begin() + static_cast<std::ptrdiff_t>(anchors[a + 1]);
    if (last - first >= 2) {
      std::shuffle(first, last, rng);
      movable = true;
    }
  }
  if (!movable) return std::nullopt;

  ArrayLayout out = current;
  auto& moved = out.positions(role);
  int coord = axis_value(pts[order[0]], axis);
  for (std::size_t k = 1; k < n; ++k) {
    coord += spacings[k - 1];
    set_axis_value(moved[order[k]], axis, coord);
  }
  return out;
}

bool plateau_reached(const std::vector<double>& improvements, int window, double spread_db) {
  if (window < 2 || improvements.size() < static_cast<std::size_t>(window)) return false;
  const auto first = improvements.end() - window;
  const auto [lo, hi] = std::minmax_element(first, improvements.end());
  return *hi - *lo <= spread_db;
}

}  // namespace

void DesignSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::infeasible, msg); };
  if (n_tx < 1 || n_rx < 1) fail("element budgets must be at least 1");
  if (enforced_tx.size() > static_cast<std::size_t>(n_tx)) fail("more enforced TX positions than TX elements");
  if (enforced_rx.size() > static_cast<std::size_t>(n_rx)) fail("more enforced RX positions than RX elements");
  if (k_max < 1) fail("k_max must be at least 1");
  if (q_phi < 1 || q_theta < 1) fail("oversampling factors must be at least 1");
  if (intensity < 0) fail("perturbation intensity must be non-negative");
  if (batch_size < 1) fail("batch_size must be at least 1");
  const bool planar = dimensionality == Dimensionality::two_d;
  auto check_ufov = [&](double v, const char* name) {
    if (!(v > 0.0 && v <= 90.0)) fail(std::string(name) + " must lie in (0, 90] degrees");
  };
  check_ufov(target_ufov_az, "target_ufov_az");
  if (planar) check_ufov(target_ufov_el, "target_ufov_el");
  if (!aperture_y && !(target_hpbw_az > 0.0)) fail("target_hpbw_az must be positive when no aperture_y is given");
  if (planar && !aperture_z && !(target_hpbw_el > 0.0)) {
    fail("target_hpbw_el must be positive when no aperture_z is given");
  }
  if (aperture_y && !(*aperture_y > 0.0)) fail("aperture_y must be positive");
  if (aperture_z && !(*aperture_z > 0.0)) fail("aperture_z must be positive");
  if (grid_d_y && !(*grid_d_y > 0.0)) fail("grid_d_y must be positive");
  if (grid_d_z && !(*grid_d_z > 0.0)) fail("grid_d_z must be positive");
  if (!(tx_size.width > 0.0 && tx_size.height > 0.0 && rx_size.width > 0.0 && rx_size.height > 0.0)) {
    fail("element sizes must be positive");
  }
  for (const auto& z : zones) {
    if (!(z.y_mc >= 0.0 && z.z_mc >= 0.0)) fail("forbidden zone half-extents must be non-negative");
  }
}

double spacing_for_ufov(double ufov_deg) {
  if (!(ufov_deg > 0.0 && ufov_deg <= 90.0)) throw Error(Errc::invalid_argument, "uFOV must lie in (0, 90] degrees");
  if (ufov_deg >= 90.0) return 0.5;
  return std::max(0.5, 1.0 / (2.0 * std::sin(ufov_deg / kDeg)));
}

double aperture_for_hpbw(double hpbw_deg) {
  if (!(hpbw_deg > 0.0)) throw Error(Errc::invalid_argument, "beamwidth must be positive");
  return 0.886 / (hpbw_deg / kDeg);
}

DerivedGrid derive_grid(const DesignSpec& spec) {
  spec.validate();
  const bool planar = spec.dimensionality == Dimensionality::two_d;
  DerivedGrid out;

  const double d_y = spec.grid_d_y.value_or(spacing_for_ufov(spec.target_ufov_az));
  out.virtual_aperture_y = spec.aperture_y ? 2.0 * *spec.aperture_y : aperture_for_hpbw(spec.target_hpbw_az);
  if (out.virtual_aperture_y < 1.0) throw Error(Errc::infeasible, "azimuth beamwidth target implies an aperture below one wavelength");

  double d_z = spec.grid_d_z.value_or(0.5);
  int N = 1;
  if (planar) {
    d_z = spec.grid_d_z.value_or(spacing_for_ufov(spec.target_ufov_el));
    out.virtual_aperture_z = spec.aperture_z ? 2.0 * *spec.aperture_z : aperture_for_hpbw(spec.target_hpbw_el);
    if (out.virtual_aperture_z < 1.0) {
      throw Error(Errc::infeasible, "elevation beamwidth target implies an aperture below one wavelength");
    }
    N = static_cast<int>(std::floor(0.5 * out.virtual_aperture_z / d_z + kEps)) + 1;
  }
  const int M = static_cast<int>(std::floor(0.5 * out.virtual_aperture_y / d_y + kEps)) + 1;
  out.grid = GridSpec{d_y, d_z, M, N};
  return out;
}

HiaSpacing hia_init(int n, double x_min, double x_max, double d_min) {
  if (n < 3) throw Error(Errc::invalid_argument, "HIA needs at least three elements");
  if (!(d_min > 0.0)) throw Error(Errc::invalid_argument, "minimum spacing must be positive");
  const double span = x_max - x_min;
  const double slack = span - (n - 1) * d_min;
  if (slack < -kEps) {
    throw Error(Errc::infeasible, "aperture of " + std::to_string(span) + " wavelengths cannot hold " +
                                      std::to_string(n) + " elements at spacing " + std::to_string(d_min));
  }
  HiaSpacing h;
  h.d_min = d_min;
  h.delta_d = std::max(0.0, slack) / (0.5 * (n - 2) * (n - 1));
  h.positions.push_back(x_min);
  for (int k = 1; k <= n - 1; ++k) {
    h.spacings.push_back(d_min + (k - 1) * h.delta_d);
    h.positions.push_back(x_min + (k - 1) * d_min + 0.5 * (k - 1) * k * h.delta_d + d_min);
  }
  return h;
}

std::vector<int> snap_to_grid(std::span<const double> positions, double spacing, int node_count,
                              const std::set<int>& occupied) {
  if (!(spacing > 0.0)) throw Error(Errc::invalid_argument, "grid spacing must be positive");
  std::set<int> taken = occupied;
  std::vector<int> out;
  out.reserve(positions.size());
  for (double x : positions) {
    const auto target = static_cast<int>(std::lround(x / spacing));
    std::optional<int> chosen;
    for (int k = 0; !chosen && k <= node_count + std::abs(target); ++k) {
      for (int node : {target + k, target - k}) {
        if (node >= 0 && node < node_count && !taken.contains(node)) {
          chosen = node;
          break;
        }
      }
    }
    if (!chosen) throw Error(Errc::infeasible, "no free grid node left while snapping");
    taken.insert(*chosen);
    out.push_back(*chosen);
  }
  return out;
}

ArrayLayout initial_layout(const DesignSpec& spec, const DerivedGrid& derived, std::mt19937_64& rng) {
  ArrayLayout layout;
  layout.grid = derived.grid;
  layout.tx_size = spec.tx_size;
  layout.rx_size = spec.rx_size;
  layout.tx = spec.enforced_tx;
  layout.rx = spec.enforced_rx;
  layout.enforced_tx = spec.enforced_tx;
  layout.enforced_rx = spec.enforced_rx;
  try {
    layout.validate();
  } catch (const Error& e) {
    throw Error(Errc::infeasible, std::string("enforced positions: ") + e.what());
  }
  if (!is_feasible(layout, spec.zones)) {
    throw Error(Errc::infeasible, "enforced positions overlap each other or violate a forbidden zone");
  }

  const bool planar = layout.grid.N > 1;
  for (Role role : {Role::rx, Role::tx}) {
    const int n = role == Role::tx ? spec.n_tx : spec.n_rx;
    const auto& enforced = layout.enforced(role);
    const std::size_t free = static_cast<std::size_t>(n) - enforced.size();
    if (free == 0) continue;

    const ElementSize& size = layout.size(role);
    const auto ys = axis_targets(n, layout.grid.y_extent(), layout.grid.d_y, size.width, spec.use_hia, rng);
    std::vector<double> zs(ys.size(), 0.0);
    if (planar) {
      zs = axis_targets(n, layout.grid.z_extent(), layout.grid.d_z, size.height, spec.use_hia, rng);
      std::shuffle(zs.begin(), zs.end(), rng);
    }
    std::vector<std::pair<double, double>> targets;
    for (std::size_t i = 0; i < ys.size(); ++i) targets.emplace_back(ys[i], zs[i]);

    // Enforced elements stand in for the targets closest to them.
    for (const auto& e : enforced) {
      const double ey = layout.grid.y(e.m);
      const double ez = layout.grid.z(e.n);
      const auto nearest = std::min_element(targets.begin(), targets.end(), [&](const auto& a, const auto& b) {
        return std::hypot(a.first - ey, a.second - ez) < std::hypot(b.first - ey, b.second - ez);
      });
      targets.erase(nearest);
    }

    for (const auto& [y, z] : targets) {
      const auto p = nearest_placeable(layout, role, y, z, spec.zones);
      if (!p) {
        throw Error(Errc::infeasible, std::string("no room for another ") + (role == Role::tx ? "TX" : "RX") +
                                          " element without overlap or zone violation");
      }
      layout.positions(role).push_back(*p);
    }
  }
  return layout;
}

Proposal propose_candidate(const ArrayLayout& current, std::span<const ForbiddenZone> zones, std::mt19937_64& rng,
                           int intensity) {
  std::vector<Role> roles;
  for (Role role : {Role::tx, Role::rx}) {
    if (current.positions(role).size() > current.enforced(role).size()) roles.push_back(role);
  }
  if (roles.empty()) return {current, MoveKind::none, true};

  const bool planar = current.grid.N > 1;
  for (int attempt = 0; attempt < kProposalAttempts; ++attempt) {
    const Role role = roles[draw(rng, roles.size())];
    const bool shuffle = intensity <= 0 || draw(rng, 2) == 0;
    const Axis axis = planar && draw(rng, 2) == 1 ? Axis::v : Axis::u;

    if (shuffle) {
      auto candidate = shuffle_spacings(current, role, axis, rng);
      if (candidate && *candidate != current && is_feasible(*candidate, zones)) {
        return {std::move(*candidate), MoveKind::shuffle, false};
      }
      continue;
    }

    const auto& pts = current.positions(role);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!current.is_enforced(role, pts[i])) free.push_back(i);
    }
    const std::size_t idx = free[draw(rng, free.size())];
    const int magnitude = 1 + static_cast<int>(draw(rng, static_cast<std::size_t>(intensity)));
    const int step = draw(rng, 2) == 0 ? -magnitude : magnitude;
    GridPoint moved = pts[idx];
    set_axis_value(moved, axis, axis_value(moved, axis) + step);
    if (can_place(current, role, moved, zones, ElementRef{role, idx})) {
      Proposal out{current, MoveKind::perturb, false};
      out.layout.positions(role)[idx] = moved;
      return out;
    }
  }
  return {current, MoveKind::none, true};
}

EvaluationSettings evaluation_settings(const DesignSpec& spec, unsigned threads) {
  const bool planar = spec.dimensionality == Dimensionality::two_d;
  return {spec.q_phi, spec.q_theta, UvWindow::from_half_angles(spec.target_ufov_az, planar ? spec.target_ufov_el : 90.0),
          threads};
}

double layout_pslr(const ArrayLayout& layout, const EvaluationSettings& settings) {
  const VirtualArray va = build_virtual_array(layout);
  const Snapshot broadside{std::vector<cplx>(va.unique_count(), cplx{1.0, 0.0})};
  const UVGrid grid = evaluation_grid(va, settings.q_phi, settings.q_theta);
  const Pattern pattern = beamform(va, broadside, grid, settings.threads);
  const auto mags = pattern.magnitudes();
  try {
    return pslr_db(grid, mags, settings.fov);
  } catch (const Error& e) {
    if (e.code() != Errc::invalid_argument) throw;
    return -std::numeric_limits<double>::infinity();
  }
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::budget: return "budget";
    case Termination::pslr_reached: return "pslr-reached";
    case Termination::plateau: return "plateau";
  }
  return "unknown";
}

const char* to_string(MoveKind k) noexcept {
  switch (k) {
    case MoveKind::shuffle: return "shuffle";
    case MoveKind::perturb: return "perturb";
    case MoveKind::none: return "none";
  }
  return "unknown";
}

OptimizeResult optimize(const DesignSpec& spec, unsigned threads) {
  const DerivedGrid derived = derive_grid(spec);
  std::mt19937_64 rng(spec.seed);
  ArrayLayout current = initial_layout(spec, derived, rng);

  const auto batch = static_cast<std::size_t>(spec.batch_size);
  // With a batch, workers take whole candidates; otherwise they split pattern rows.
  const EvaluationSettings settings = evaluation_settings(spec, batch > 1 ? 1u : threads);

  OptimizerTrace trace;
  trace.initial_layout = current;
  trace.initial_pslr_db = layout_pslr(current, settings);
  trace.best_pslr_db = trace.initial_pslr_db;

  auto finish = [&](Termination why) {
    trace.termination = why;
    trace.best_layout = current;
    return OptimizeResult{current, std::move(trace)};
  };

  if (trace.best_pslr_db > spec.desired_pslr_db) return finish(Termination::pslr_reached);
  if (current.tx.size() == current.enforced_tx.size() && current.rx.size() == current.enforced_rx.size()) {
    return finish(Termination::plateau);
  }

  std::vector<double> improvements;
  int iteration = 0;
  while (iteration < spec.k_max) {
    const std::size_t count = std::min(batch, static_cast<std::size_t>(spec.k_max - iteration));
    std::vector<Proposal> proposals;
    proposals.reserve(count);
    for (std::size_t i = 0; i < count; ++i) proposals.push_back(propose_candidate(current, spec.zones, rng, spec.intensity));

    std::vector<double> scores(count, 0.0);
    parallel_for(count, batch > 1 ? threads : 1u, [&](std::size_t i) {
      if (!proposals[i].stagnated) scores[i] = layout_pslr(proposals[i].layout, settings);
    });

    for (std::size_t i = 0; i < count; ++i, ++iteration) {
      TraceRecord rec;
      rec.iteration = iteration;
      rec.move = proposals[i].kind;
      if (!proposals[i].stagnated) {
        rec.candidate_pslr_db = scores[i];
        if (scores[i] > trace.best_pslr_db) {
          rec.accepted = true;
          trace.best_pslr_db = scores[i];
          current = std::move(proposals[i].layout);
          ++trace.accepted_count;
          improvements.push_back(scores[i]);
        }
      }
      rec.best_pslr_db = trace.best_pslr_db;
      trace.records.push_back(rec);

      if (rec.accepted) {
        if (trace.best_pslr_db > spec.desired_pslr_db) return finish(Termination::pslr_reached);
        if (plateau_reached(improvements, spec.plateau_window, spec.plateau_db)) return finish(Termination::plateau);
      }
    }
  }
  return finish(Termination::budget);
}

DesignSpec apply_hyper_point(const DesignSpec& base, const HyperPoint& point, std::size_t index) {
  DesignSpec s = base;
  if (point.intensity) s.intensity = *point.intensity;
  if (point.grid_d_y) s.grid_d_y = point.grid_d_y;
  if (point.grid_d_z) s.grid_d_z = point.grid_d_z;
  if (point.oversample) s.q_phi = s.q_theta = *point.oversample;
  s.seed = base.seed ^ static_cast<std::uint64_t>(index);
  return s;
}

OuterResult outer_loop(const DesignSpec& spec, std::span<const HyperPoint> points, unsigned threads) {
  if (points.empty()) throw Error(Errc::invalid_argument, "hyperparameter grid is empty");

  std::vector<std::optional<OuterResult>> results(points.size());
  const unsigned outer_threads = std::min<unsigned>(threads, static_cast<unsigned>(points.size()));
  const unsigned inner_threads = outer_threads > 1 ? 1u : threads;
  parallel_for(points.size(), outer_threads, [&](std::size_t i) {
    DesignSpec s = apply_hyper_point(spec, points[i], i);
    try {
      auto r = optimize(s, inner_threads);
      results[i] = OuterResult{i, std::move(s), std::move(r.layout), std::move(r.trace)};
    } catch (const Error& e) {
      if (e.code() != Errc::infeasible && e.code() != Errc::invalid_argument) throw;
    }
  });

  std::optional<OuterResult> best;
  for (auto& r : results) {
    if (r && (!best || r->trace.best_pslr_db > best->trace.best_pslr_db)) best = std::move(r);
  }
  if (!best) throw Error(Errc::infeasible, "every hyperparameter point is infeasible");
  return std::move(*best);
}

}  // namespace saf
