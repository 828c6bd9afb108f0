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
#include <limits>
#include <numbers>

#include "expect_errc.hpp"
#include "oracles.hpp"
#include "saf/beamforming.hpp"
#include "saf/metrics.hpp"

namespace saf {
namespace {

namespace frozen = testing::frozen;
using testing::broadside;

Pattern ula_pattern(int n, double d, int q) {
  const auto va = build_virtual_array(testing::ula_layout(n, d));
  return beamform(va, broadside(va), make_u_cut(n, q));
}

Pattern from_magnitudes(int nu, int nv, const std::vector<double>& m) {
  UVGrid g{nu, nv, 1, 1, {}, {}};
  for (int i = 0; i < nu; ++i) g.u.push_back(-0.5 + i / static_cast<double>(nu));
  for (int i = 0; i < nv; ++i) g.v.push_back(-0.5 + i / static_cast<double>(nv));
  std::vector<cplx> values(m.begin(), m.end());
  return Pattern(g, values);
}

TEST(Ufov, ReferenceTable) {
  const double d[9] = {0.5, 0.51, 0.53, 0.58, 0.65, 0.78, 1.0, 2.0, 20.0};
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(ufov(d[i]), frozen::ufov_deg[i], 1e-12) << "d=" << d[i];
  EXPECT_EQ(ufov(0.3), 90.0);
  EXPECT_ERRC(ufov(0.0), Errc::invalid_argument);
}

TEST(Beamwidths, ClosedForms) {
  const auto b = theoretical_beamwidths(11.0);
  EXPECT_NEAR(b.fnbw_deg, frozen::fnbw_l11_deg, 1e-12);
  EXPECT_NEAR(b.hpbw_deg, frozen::hpbw_l11_deg, 1e-12);
  EXPECT_NEAR(theoretical_hpbw_deg(32.0), frozen::hpbw_l32_deg, 1e-12);
  EXPECT_ERRC(theoretical_beamwidths(0.5), Errc::invalid_argument);
}

TEST(GratingLobes, Angles) {
  const auto a = grating_lobe_angles(1.0, 30.0);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_NEAR(a[0], -30.0, 1e-9);
  EXPECT_TRUE(grating_lobe_angles(0.4, 0.0).empty());
  EXPECT_TRUE(grating_lobe_angles(0.5, 0.0).empty());

  const auto s = grating_lobe_angles(1.5, 0.0);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0], -std::asin(2.0 / 3.0) * 180.0 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(s[1], -s[0], 1e-12);

  // Endfire lobe at exactly gamma = -1.
  const auto e = grating_lobe_angles(0.5, 90.0);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_NEAR(e[0], -90.0, 1e-9);
}

TEST(Peak, TiesGoToLowestRowThenColumn) {
  const auto p = from_magnitudes(3, 2, {1, 5, 2, 5, 0, 5});
  const auto peak = find_peak(p);
  EXPECT_EQ(peak.iu, 1u);
  EXPECT_EQ(peak.iv, 0u);
  EXPECT_DOUBLE_EQ(peak.magnitude, 5.0);
  const UvWindow nothing{0.9, 0.95, 0.9, 0.95};
  EXPECT_ERRC(find_peak(p, nothing), Errc::not_found);
}

TEST(MainLobe, MonotoneDescentRegion) {
  // 1-D profile 1 3 9 4 2 5 1: the lobe is 1 3 9 4 2 and the sidelobe is 5.
  const auto p = from_magnitudes(7, 1, {1, 3, 9, 4, 2, 5, 1});
  const auto mask = mask_main_lobe(p, find_peak(p));
  EXPECT_EQ(mask.count(), 5u);
  EXPECT_FALSE(mask.contains(5, 0));
  EXPECT_NEAR(pslr_db(p), 20.0 * std::log10(9.0 / 5.0), 1e-12);
}

TEST(MainLobe, PlateauBelongsToTheLobe) {
  const auto p = from_magnitudes(6, 1, {1, 4, 4, 4, 2, 3});
  const auto mask = mask_main_lobe(p, find_peak(p));
  EXPECT_EQ(mask.count(), 5u);
  EXPECT_NEAR(pslr_db(p), 20.0 * std::log10(4.0 / 3.0), 1e-12);
}

TEST(Pslr, EdgeCases) {
  EXPECT_ERRC(pslr_db(from_magnitudes(4, 1, {2, 2, 2, 2})), Errc::invalid_argument);
  EXPECT_EQ(pslr_db(from_magnitudes(5, 1, {0, 1, 3, 1, 0})), std::numeric_limits<double>::infinity());
}

TEST(Pslr, UlaMatchesClosedForm) {
  for (int n : {16, 32, 64}) {
    const double measured = pslr_db(ula_pattern(n, 0.5, 32));
    EXPECT_NEAR(measured, testing::ula_pslr_db(n), 0.02) << "n=" << n;
    EXPECT_GE(measured, 12.8);
    EXPECT_LE(measured, 13.8);
  }
}

TEST(Pslr, FovExcludesGratingLobes) {
  // d = 1: grating lobes at u = +-1 lie outside a +-29 degree window.
  const auto p = ula_pattern(16, 1.0, 16);
  const double full = pslr_db(p);
  const double windowed = pslr_db(p, UvWindow::from_half_angles(29.0, 90.0));
  EXPECT_LT(full, 0.5);
  EXPECT_GT(windowed, 12.8);
}

TEST(Hpbw, MeasuredAgainstTheory) {
  const auto p = ula_pattern(65, 0.5, 16);
  const double hpbw = measured_hpbw(p, Axis::u);
  EXPECT_NEAR(hpbw / frozen::hpbw_l32_deg, 1.0, 0.05);
  const auto wide = ula_pattern(129, 0.5, 16);
  EXPECT_NEAR(measured_hpbw(wide, Axis::u) / hpbw, 0.5, 0.025);
  EXPECT_ERRC(measured_hpbw(ula_pattern(65, 0.5, 1), Axis::u), Errc::invalid_argument);
}

TEST(Efficiency, ApertureLossAndSpreading) {
  const auto a = aperture_loss_factor(1800.0, 900.0, Dimensionality::two_d);
  EXPECT_DOUBLE_EQ(a.value, 0.5);
  EXPECT_FALSE(a.anomaly);
  const auto over = aperture_loss_factor(70.0, 30.0, Dimensionality::one_d);
  EXPECT_TRUE(over.anomaly);
  EXPECT_DOUBLE_EQ(over.value, 1.0);
  EXPECT_DOUBLE_EQ(over.raw, 70.0 / 60.0);
  EXPECT_DOUBLE_EQ(bw_spreading_factor(2.0, 1.0), 2.0);
  EXPECT_ERRC(aperture_loss_factor(1.0, 0.0, Dimensionality::one_d), Errc::invalid_argument);
}

TEST(Areas, BoundingBoxAndCoverage) {
  const GridSpec g{0.5, 0.5, 10, 10};
  std::vector<GridPoint> square;
  for (int m = 0; m <= 2; ++m)
    for (int n = 0; n <= 2; ++n) square.push_back({m, n});
  EXPECT_DOUBLE_EQ(bounding_box_area(square, g, Dimensionality::two_d), 1.0);
  EXPECT_DOUBLE_EQ(covered_area(square, g, Dimensionality::two_d), 1.0);

  std::vector<GridPoint> triangle;
  for (int m = 0; m <= 4; ++m)
    for (int n = m; n <= 4; ++n) triangle.push_back({m, n});
  EXPECT_DOUBLE_EQ(covered_area(triangle, g, Dimensionality::two_d), 2.0);  // half of 2λ x 2λ

  std::vector<GridPoint> ell;
  for (int m = 0; m <= 4; ++m)
    for (int n = 0; n <= 4; ++n)
      if (m <= 2 || n <= 2) ell.push_back({m, n});
  EXPECT_DOUBLE_EQ(covered_area(ell, g, Dimensionality::two_d), 3.0);  // notch corner adds nothing

  const std::vector<GridPoint> sparse{{0, 0}, {1, 0}, {3, 0}, {4, 0}, {5, 0}};
  EXPECT_DOUBLE_EQ(covered_area(sparse, g, Dimensionality::one_d), 1.5);
  EXPECT_DOUBLE_EQ(bounding_box_area(sparse, g, Dimensionality::one_d), 2.5);
}

TEST(Axes, SpacingAndPeriod) {
  const GridSpec g{0.5, 1.0, 20, 20};
  const std::vector<GridPoint> pts{{0, 0}, {4, 3}, {10, 9}};
  EXPECT_DOUBLE_EQ(*min_axis_spacing(pts, g, Axis::u), 2.0);
  EXPECT_DOUBLE_EQ(*axis_period(pts, g, Axis::u), 1.0);
  EXPECT_DOUBLE_EQ(*axis_period(pts, g, Axis::v), 3.0);
  EXPECT_FALSE(min_axis_spacing(std::vector<GridPoint>{{1, 1}}, g, Axis::u));
}

TEST(Report, FullUla) {
  const auto layout = testing::ula_layout(16, 1.0);
  const auto va = build_virtual_array(layout);
  const auto p = beamform(va, broadside(va), make_u_cut(16, 16));
  const auto r = evaluate_metrics(layout, p, UvWindow::from_half_angles(29.0, 90.0));
  EXPECT_EQ(r.generated_vrx, 16u);
  EXPECT_EQ(r.unique_vrx, 16u);
  EXPECT_DOUBLE_EQ(r.thinning_ratio, 1.0);
  EXPECT_DOUBLE_EQ(*r.ufov_az_deg, 30.0);
  ASSERT_EQ(r.grating_lobes_az_deg.size(), 2u);
  EXPECT_NEAR(r.grating_lobes_az_deg[0], -90.0, 1e-9);
  EXPECT_GT(r.pslr_db, 12.8);
  EXPECT_DOUBLE_EQ(r.peak_magnitude, 16.0);
  EXPECT_TRUE(r.hpbw_az_deg);
  EXPECT_FALSE(r.hpbw_el_deg);
}

}  // namespace
}  // namespace saf
