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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expect_errc.hpp"
#include "oracles.hpp"
#include "saf/beamforming.hpp"

namespace saf {
namespace {

using testing::broadside;
using testing::frozen::u_phi30_theta60;
using testing::frozen::v_phi30_theta60;

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

VirtualArray random_planar(std::mt19937_64& rng, int tx, int rx) {
  ArrayLayout l;
  l.grid = GridSpec{0.5, 0.5, 16, 16};
  std::uniform_int_distribution<int> coord(0, 15);
  while (l.tx.size() < static_cast<std::size_t>(tx)) {
    GridPoint p{coord(rng), coord(rng)};
    if (std::find(l.tx.begin(), l.tx.end(), p) == l.tx.end()) l.tx.push_back(p);
  }
  while (l.rx.size() < static_cast<std::size_t>(rx)) {
    GridPoint p{coord(rng), coord(rng)};
    if (std::find(l.rx.begin(), l.rx.end(), p) == l.rx.end()) l.rx.push_back(p);
  }
  return build_virtual_array(l);
}

TEST(Angles, ForwardMatchesReference) {
  const auto uv = angles_to_uv(30.0, 60.0);
  EXPECT_NEAR(uv.u, u_phi30_theta60, 1e-15);
  EXPECT_NEAR(uv.v, v_phi30_theta60, 1e-15);
  const auto bs = angles_to_uv(0.0, 90.0);
  EXPECT_NEAR(bs.u, 0.0, 1e-16);
  EXPECT_NEAR(bs.v, 0.0, 1e-16);
  EXPECT_ERRC(angles_to_uv(91.0, 90.0), Errc::invalid_argument);
  EXPECT_ERRC(angles_to_uv(0.0, -1.0), Errc::invalid_argument);
}

TEST(Angles, RoundTripOverTheHemisphere) {
  for (double phi = -89.0; phi <= 89.0; phi += 7.0) {
    for (double theta = 1.0; theta <= 179.0; theta += 11.0) {
      const auto uv = angles_to_uv(phi, theta);
      const auto back = uv_to_angles(uv.u, uv.v);
      ASSERT_TRUE(back);
      EXPECT_NEAR(back->phi_deg, phi, 1e-9);
      EXPECT_NEAR(back->theta_deg, theta, 1e-9);
    }
  }
}

TEST(Angles, OutsideTheDiskAndPoles) {
  EXPECT_FALSE(uv_to_angles(0.8, 0.8));
  const auto pole = uv_to_angles(0.0, 1.0);
  ASSERT_TRUE(pole);
  EXPECT_EQ(pole->phi_deg, 0.0);
  EXPECT_EQ(pole->theta_deg, 0.0);
}

TEST(UvGrid, LatticeLayout) {
  const auto g = make_uv_grid(4, 2, 2, 3);
  ASSERT_EQ(g.u.size(), 8u);
  ASSERT_EQ(g.v.size(), 6u);
  EXPECT_DOUBLE_EQ(g.u.front(), -1.0);
  EXPECT_DOUBLE_EQ(g.u[4], 0.0);
  EXPECT_DOUBLE_EQ(g.u[1] - g.u[0], 0.25);
  EXPECT_LT(g.u.back(), 1.0);
  EXPECT_EQ(g.size(), 48u);
  EXPECT_ERRC(make_uv_grid(0, 1, 1, 1), Errc::invalid_argument);
  const auto cut = make_u_cut(5, 2, 0.25);
  EXPECT_EQ(cut.v, (std::vector<double>{0.25}));
  EXPECT_EQ(cut.u.size(), 10u);
}

TEST(UvGrid, EvaluationGridKeepsBroadside) {
  std::mt19937_64 rng(3);
  for (int q : {1, 3, 8}) {
    const auto va = random_planar(rng, 3, 4);
    const auto g = evaluation_grid(va, q, q);
    EXPECT_NE(std::find(g.u.begin(), g.u.end(), 0.0), g.u.end());
    EXPECT_NE(std::find(g.v.begin(), g.v.end(), 0.0), g.v.end());
  }
}

TEST(Snapshot, SingleTargetIsSteeringVector) {
  std::mt19937_64 rng(5);
  const auto va = random_planar(rng, 3, 3);
  const std::vector<Target> t{{0.3, -0.2, cplx{2.0, 0.0}}};
  const auto s = synthesize_snapshot(va, t);
  const auto a = steering_vector(va, 0.3, -0.2);
  for (std::size_t p = 0; p < a.size(); ++p) EXPECT_NEAR(std::abs(s.values[p] - 2.0 * a[p]), 0.0, 1e-14);
  EXPECT_ERRC(synthesize_snapshot(va, std::vector<Target>{{0.9, 0.9}}), Errc::invalid_argument);
  const auto empty = synthesize_snapshot(va, {});
  for (const auto& x : empty.values) EXPECT_EQ(x, cplx{});
}

TEST(Coupling, IdentityAndMismatch) {
  const Snapshot s{{cplx{1, 2}, cplx{3, -1}}};
  const auto out = apply_coupling(s, CouplingMatrix::identity(2));
  EXPECT_EQ(out.values, s.values);
  CouplingMatrix swap{2, {0, 1, 1, 0}};
  EXPECT_EQ(apply_coupling(s, swap).values, (std::vector<cplx>{cplx{3, -1}, cplx{1, 2}}));
  EXPECT_ERRC(apply_coupling(s, CouplingMatrix::identity(3)), Errc::dimension_mismatch);
}

TEST(Beamform, SeparableMatchesNaiveSummation) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto va = random_planar(rng, 4, 5);
    const std::vector<Target> targets{{0.2, 0.1, cplx{1.0, 0.5}}, {-0.5, 0.3, cplx{0.3, 0.0}}};
    const auto snap = synthesize_snapshot(va, targets);
    const auto grid = make_uv_grid(16, 16, 2, 2);
    const auto fast = beamform(va, snap, grid);
    const auto oracle = testing::naive_pattern(va, snap, grid);
    double scale = 0.0;
    for (const auto& x : oracle) scale = std::max(scale, std::abs(x));
    EXPECT_LT(max_abs_diff(fast.values(), oracle), 1e-10 * scale);
  }
}

TEST(Beamform, ThreadCountDoesNotChangeValues) {
  std::mt19937_64 rng(9);
  const auto va = random_planar(rng, 5, 5);
  const auto grid = make_uv_grid(20, 20, 2, 2);
  const auto one = beamform(va, broadside(va), grid, 1);
  const auto four = beamform(va, broadside(va), grid, 4);
  ASSERT_EQ(one.values().size(), four.values().size());
  for (std::size_t i = 0; i < one.values().size(); ++i) EXPECT_EQ(one.values()[i], four.values()[i]);
}

TEST(Beamform, DirectPathAgrees) {
  std::mt19937_64 rng(17);
  const auto va = random_planar(rng, 3, 4);
  const auto grid = make_uv_grid(10, 10, 2, 2);
  const auto a = beamform(va, broadside(va), grid);
  const auto b = beamform_direct(va, broadside(va), grid);
  EXPECT_LT(max_abs_diff(a.values(), b.values()), 1e-10 * static_cast<double>(va.unique_count()));
}

TEST(Beamform, UlaFollowsDirichletKernel) {
  for (int n : {8, 16, 33}) {
    const auto va = build_virtual_array(testing::ula_layout(n));
    const auto grid = make_u_cut(n, 8);
    const auto p = beamform(va, broadside(va), grid);
    const auto mags = p.magnitudes();
    for (std::size_t i = 0; i < grid.u.size(); ++i) {
      EXPECT_NEAR(mags[i], testing::dirichlet_magnitude(n, 0.5, grid.u[i]), 1e-9 * n) << "u=" << grid.u[i];
    }
  }
}

TEST(Beamform, PeakAtTarget) {
  const auto va = build_virtual_array(testing::ula_layout(16));
  const auto grid = make_u_cut(16, 8);
  const std::vector<Target> t{{0.25, 0.0}};
  const auto p = beamform(va, synthesize_snapshot(va, t), grid);
  const auto mags = p.magnitudes();
  const auto best = std::max_element(mags.begin(), mags.end()) - mags.begin();
  EXPECT_DOUBLE_EQ(grid.u[static_cast<std::size_t>(best)], 0.25);
  EXPECT_NEAR(mags[static_cast<std::size_t>(best)], 16.0, 1e-12);
}

TEST(Beamform, SnapshotSizeMismatch) {
  const auto va = build_virtual_array(testing::ula_layout(4));
  EXPECT_ERRC(beamform(va, Snapshot{{1.0, 1.0}}, make_u_cut(4, 1)), Errc::dimension_mismatch);
  EXPECT_ERRC(Pattern(make_u_cut(4, 1), std::vector<cplx>(3)), Errc::dimension_mismatch);
}

}  // namespace
}  // namespace saf
