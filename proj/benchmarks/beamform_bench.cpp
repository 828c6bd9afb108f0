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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "saf/beamforming.hpp"
#include "saf/geometry.hpp"
#include "saf/metrics.hpp"
#include "saf/optimizer.hpp"

namespace {

const std::vector<saf::Target> broadside{{0.0, 0.0, {1.0, 0.0}}};

saf::ArrayLayout planar(int n_tx, int n_rx) {
  saf::DesignSpec s;
  s.dimensionality = saf::Dimensionality::two_d;
  s.n_tx = n_tx;
  s.n_rx = n_rx;
  s.grid_d_z = 1.0;
  s.aperture_y = 32.0;
  s.aperture_z = 35.0;
  s.target_ufov_el = 30.0;
  std::mt19937_64 rng(s.seed);
  return saf::initial_layout(s, saf::derive_grid(s), rng);
}

void BM_Beamform(benchmark::State& state) {
  const auto va = saf::build_virtual_array(planar(12, 16));
  const auto snap = saf::synthesize_snapshot(va, broadside);
  const auto grid = saf::evaluation_grid(va, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(saf::beamform(va, snap, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}
BENCHMARK(BM_Beamform)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BeamformDirect(benchmark::State& state) {
  const auto va = saf::build_virtual_array(planar(4, 4));
  const auto snap = saf::synthesize_snapshot(va, broadside);
  const auto grid = saf::evaluation_grid(va, 4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(saf::beamform_direct(va, snap, grid));
}
BENCHMARK(BM_BeamformDirect)->Unit(benchmark::kMillisecond);

void BM_LayoutPslr(benchmark::State& state) {
  const auto layout = planar(12, 16);
  saf::EvaluationSettings settings;
  settings.fov = saf::UvWindow::from_half_angles(90.0, 30.0);
  settings.q_phi = settings.q_theta = 4;
  for (auto _ : state) benchmark::DoNotOptimize(saf::layout_pslr(layout, settings));
}
BENCHMARK(BM_LayoutPslr)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
