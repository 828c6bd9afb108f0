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

#include <vector>

#include "saf/beamforming.hpp"
#include "saf/geometry.hpp"

// Independent reference computations for the test suites.
namespace saf::testing {

// Reference values evaluated once in 50-digit arithmetic and frozen here.
namespace frozen {
inline constexpr double u_phi30_theta60 = 0.4330127018922193;
inline constexpr double v_phi30_theta60 = 0.5;
inline constexpr double fnbw_l11_deg = 5.215908570454124;
inline constexpr double hpbw_l11_deg = 4.614914604417358;
inline constexpr double hpbw_l32_deg = 1.5863768952684668;
// ufov at d = 0.5, 0.51, 0.53, 0.58, 0.65, 0.78, 1, 2, 20
inline constexpr double ufov_deg[9] = {90.0, 78.63512303296632, 70.62996175445945, 59.54968597864436, 50.28486276817379,
                                       39.86834155001060, 30.0, 14.47751218592992, 1.432543737566507};
inline constexpr double spacing_for_14_48_deg = 1.99966;
inline constexpr double aperture_for_1_5862_deg = 32.0036;
inline constexpr double thinning_192_of_121x61 = 0.026012735401707085;
inline constexpr double thinning_192_of_156x112 = 0.010989010989010989;
inline constexpr double thinning_190_of_156x112 = 0.010874542124542125;
}  // namespace frozen

/// |sum_{k<n} exp(j 2 pi k d u)| in closed form.
double dirichlet_magnitude(int n, double d, double u);

/// Peak-to-first-sidelobe ratio of an n-element uniform linear array, found by
/// maximising the closed-form pattern between its first and second nulls.
double ula_pslr_db(int n);

/// Pattern values by naive per-sample summation with explicit cos/sin terms.
std::vector<cplx> naive_pattern(const VirtualArray& va, const Snapshot& snapshot, const UVGrid& grid);

/// Linear layout whose virtual array is the full n-element ULA with spacing d: one TX at
/// the origin and RX at every node.
ArrayLayout ula_layout(int n, double d = 0.5);

/// Broadside unit target snapshot for a virtual array.
Snapshot broadside(const VirtualArray& va);

}  // namespace saf::testing
