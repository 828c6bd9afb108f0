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

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "saf/geometry.hpp"
#include "saf/metrics.hpp"

namespace saf {

/// Design targets, constraints and search budget for one optimisation run.
struct DesignSpec {
  Dimensionality dimensionality = Dimensionality::one_d;
  int n_tx = 1;
  int n_rx = 1;

  // One-sided usable FOV and two-sided half-power beamwidth targets, degrees.
  double target_ufov_az = 90.0;
  double target_ufov_el = 90.0;
  double target_hpbw_az = 0.0;
  double target_hpbw_el = 0.0;

  // Explicit physical aperture (wavelengths). When set it replaces the beamwidth-derived
  // aperture on that axis.
  std::optional<double> aperture_y;
  std::optional<double> aperture_z;
  // Explicit grid spacing (wavelengths), replacing the FOV-derived spacing.
  std::optional<double> grid_d_y;
  std::optional<double> grid_d_z;

  ElementSize tx_size;
  ElementSize rx_size;
  std::vector<ForbiddenZone> zones;
  std::vector<GridPoint> enforced_tx;
  std::vector<GridPoint> enforced_rx;

  double desired_pslr_db = std::numeric_limits<double>::infinity();
  int k_max = 1000;
  std::uint64_t seed = 0;
  int q_phi = 8;
  int q_theta = 8;

  int intensity = 3;        // perturbation reach in grid steps
  bool use_hia = true;      // false: random initial positions
  int plateau_window = 3;   // accepted improvements compared; < 2 disables the rule
  double plateau_db = 0.5;  // spread that counts as "no longer improving"
  int batch_size = 1;       // proposals evaluated together per step

  /// Throws Error(infeasible) for contradictory or out-of-range settings.
  void validate() const;

  friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

struct DerivedGrid {
  GridSpec grid;                  // physical reference grid
  double virtual_aperture_y = 0;  // wavelengths
  double virtual_aperture_z = 0;
};

/// Grid spacing per axis from the uFOV target (1 / (2 sin ufov), 0.5 at 90 degrees) and
/// virtual aperture from the beamwidth target (0.886 / hpbw). The physical grid spans
/// half the virtual aperture.
DerivedGrid derive_grid(const DesignSpec& spec);

/// Spacing for a one-sided uFOV target, in wavelengths.
double spacing_for_ufov(double ufov_deg);

/// Aperture length for a two-sided half-power beamwidth target, in wavelengths.
double aperture_for_hpbw(double hpbw_deg);

struct HiaSpacing {
  double d_min = 0.0;
  double delta_d = 0.0;
  std::vector<double> spacings;   // n - 1 values, arithmetic progression
  std::vector<double> positions;  // n values from x_min
};

/// Heuristic initialisation: n - 1 spacings d_k = d_min + (k - 1) delta_d that exactly
/// span [x_min, x_max], so their empirical CDF is uniform. Requires n >= 3.
HiaSpacing hia_init(int n, double x_min, double x_max, double d_min);

/// Rounds each position (wavelengths) to the nearest node of a 1-D grid with `spacing`
/// and `node_count` nodes. A node already occupied (or taken by an earlier position)
/// pushes the element outward, trying +1, -1, +2, -2, ... nodes.
std::vector<int> snap_to_grid(std::span<const double> positions, double spacing, int node_count,
                              const std::set<int>& occupied = {});

/// Starting layout: enforced positions first, then HIA (or random) targets moved to the
/// nearest node where the element fits.
ArrayLayout initial_layout(const DesignSpec& spec, const DerivedGrid& derived, std::mt19937_64& rng);

enum class MoveKind { shuffle, perturb, none };

struct Proposal {
  ArrayLayout layout;
  MoveKind kind = MoveKind::none;
  bool stagnated = false;
};

inline constexpr int kProposalAttempts = 32;

/// One random move on a feasible layout: either a permutation of one group's
/// inter-element spacings (the spacing multiset, and so its ECDF, is preserved) or a
/// shift of one element by 1..intensity grid steps. Enforced elements never move.
/// Infeasible draws are retried; after kProposalAttempts the unchanged layout comes back
/// flagged as stagnated.
Proposal propose_candidate(const ArrayLayout& current, std::span<const ForbiddenZone> zones, std::mt19937_64& rng,
                           int intensity);

struct EvaluationSettings {
  int q_phi = 8;
  int q_theta = 8;
  std::optional<UvWindow> fov;
  unsigned threads = 1;
};

/// PSLR of a single broadside unit target, evaluated on the layout's own lattice.
/// Layouts whose pattern is flat score -infinity.
double layout_pslr(const ArrayLayout& layout, const EvaluationSettings& settings);

/// Evaluation settings implied by a design spec (its oversampling and target FOV).
EvaluationSettings evaluation_settings(const DesignSpec& spec, unsigned threads = 1);

enum class Termination { budget, pslr_reached, plateau };

const char* to_string(Termination t) noexcept;
const char* to_string(MoveKind k) noexcept;

struct TraceRecord {
  int iteration = 0;
  std::optional<double> candidate_pslr_db;  // empty when the proposal stagnated
  double best_pslr_db = 0.0;
  bool accepted = false;
  MoveKind move = MoveKind::none;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct OptimizerTrace {
  double initial_pslr_db = 0.0;
  std::vector<TraceRecord> records;
  Termination termination = Termination::budget;
  double best_pslr_db = 0.0;
  int accepted_count = 0;
  ArrayLayout initial_layout;
  ArrayLayout best_layout;
};

struct OptimizeResult {
  ArrayLayout layout;
  OptimizerTrace trace;
};

/// Randomised search maximising PSLR. Candidates are accepted only on strict
/// improvement. Stops on the iteration budget, once desired_pslr_db is exceeded, or when
/// the last plateau_window accepted improvements lie within plateau_db. Results depend
/// only on the spec (seed included), never on `threads`.
OptimizeResult optimize(const DesignSpec& spec, unsigned threads = 1);

/// One point of an outer hyperparameter sweep; unset fields keep the base spec's value.
struct HyperPoint {
  std::optional<int> intensity;
  std::optional<double> grid_d_y;
  std::optional<double> grid_d_z;
  std::optional<int> oversample;

  friend bool operator==(const HyperPoint&, const HyperPoint&) = default;
};

DesignSpec apply_hyper_point(const DesignSpec& base, const HyperPoint& point, std::size_t index);

struct OuterResult {
  std::size_t point_index = 0;
  DesignSpec spec;
  ArrayLayout layout;
  OptimizerTrace trace;
};

/// Runs optimize at every hyperparameter point with sub-seed (seed XOR index) and keeps
/// the highest final PSLR, ties to the lowest index. Infeasible points are skipped.
OuterResult outer_loop(const DesignSpec& spec, std::span<const HyperPoint> points, unsigned threads = 1);

}  // namespace saf
