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
#include <sstream>
#include <string>

#include "expect_errc.hpp"
#include "oracles.hpp"
#include "saf/io.hpp"

namespace saf {
namespace {

io::LayoutDocument sample_document() {
  io::LayoutDocument doc;
  doc.layout.grid = GridSpec{0.5, 1.0, 65, 36};
  doc.layout.tx = {{0, 0}, {10, 5}, {64, 35}};
  doc.layout.rx = {{3, 7}, {20, 0}};
  doc.layout.tx_size = ElementSize{2.0, 5.0};
  doc.layout.rx_size = ElementSize{0.1, 1.0 / 3.0};
  doc.layout.enforced_tx = {{10, 5}};
  doc.zones = {{10.0, 15.0, {32, 17}, ZoneKind::rx_excluded}};
  return doc;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(LayoutJson, RoundTripIsIdentity) {
  const auto doc = sample_document();
  const std::string text = io::to_json(doc);
  const auto back = io::layout_from_json(text);
  EXPECT_EQ(back, doc);
  EXPECT_EQ(io::to_json(back), text);
}

TEST(LayoutJson, DefaultsForOptionalFields) {
  const auto doc = io::layout_from_json(R"({"grid": {"d_y": 0.5, "M": 4}, "tx": [[0, 0]], "rx": [[1, 0], [3, 0]]})");
  EXPECT_EQ(doc.layout.grid.N, 1);
  EXPECT_EQ(doc.layout.rx.size(), 2u);
  EXPECT_TRUE(doc.zones.empty());
}

TEST(LayoutJson, DiagnosticsLocateTheProblem) {
  EXPECT_ERRC(io::layout_from_json("{\n  \"grid\": {\n  oops"), Errc::parse);
  EXPECT_NE(error_text([] { io::layout_from_json("{\n  \"grid\": {\n  oops"); }).find("3:"), std::string::npos);

  const std::string text = io::to_json(sample_document());
  const auto bad_m = replace(text, "\"M\": 65", "\"M\": 6.5");
  EXPECT_NE(error_text([&] { io::layout_from_json(bad_m); }).find("/grid/M"), std::string::npos);

  const auto extra = replace(text, "\"tx\":", "\"colour\": 1, \"tx\":");
  EXPECT_NE(error_text([&] { io::layout_from_json(extra); }).find("/colour"), std::string::npos);

  const auto kind = replace(text, "rx-excluded", "sideways");
  EXPECT_NE(error_text([&] { io::layout_from_json(kind); }).find("/zones/0/kind"), std::string::npos);

  EXPECT_ERRC(io::layout_from_json(R"({"grid": {"d_y": 0.5, "M": 4}, "tx": [[9, 0]], "rx": [[1, 0]]})"), Errc::parse);
  EXPECT_ERRC(io::layout_from_json(R"({"grid": {"d_y": 0.5, "M": 4}, "tx": [[1]], "rx": [[1, 0]]})"), Errc::parse);
}

TEST(ConfigJson, RoundTripIsIdentity) {
  io::DesignConfig c;
  c.spec.dimensionality = Dimensionality::two_d;
  c.spec.n_tx = 12;
  c.spec.n_rx = 16;
  c.spec.target_ufov_el = 30.0;
  c.spec.aperture_y = 32.0;
  c.spec.grid_d_z = 1.0;
  c.spec.target_hpbw_el = 0.1 + 0.2;
  c.spec.tx_size = ElementSize{2.0, 5.0};
  c.spec.zones = {{10.0, 15.0, {32, 17}, ZoneKind::both_excluded}};
  c.spec.enforced_rx = {{4, 4}};
  c.spec.seed = std::numeric_limits<std::uint64_t>::max();
  c.spec.desired_pslr_db = 11.5;
  c.outer_loop = {{2, {}, {}, {}}, {{}, 0.75, 1.5, 16}};
  const auto text = io::to_json(c);
  EXPECT_EQ(io::config_from_json(text), c);

  io::DesignConfig plain;
  plain.spec.target_hpbw_az = 2.0;
  EXPECT_EQ(io::config_from_json(io::to_json(plain)), plain);
  EXPECT_NE(io::to_json(plain).find("\"desired_pslr_db\": \"inf\""), std::string::npos);
}

TEST(ConfigJson, RejectsMalformedInput) {
  EXPECT_ERRC(io::config_from_json(R"({"n_rx": 4})"), Errc::parse);
  EXPECT_ERRC(io::config_from_json(R"({"n_tx": 4, "n_rx": 4, "dimensionality": "3D"})"), Errc::parse);
  EXPECT_ERRC(io::config_from_json(R"({"n_tx": 4, "n_rx": 4, "seed": -1})"), Errc::parse);
  EXPECT_ERRC(io::config_from_json(R"({"n_tx": 4, "n_rx": 4, "use_hia": 1})"), Errc::parse);
}

TEST(CanonicalJson, IgnoresKeyOrderAndWhitespace) {
  EXPECT_EQ(io::canonical_json(R"({"b": 1, "a": [1, 2]})"), io::canonical_json("{\"a\":[1,2],\n\"b\":1}"));
  EXPECT_ERRC(io::canonical_json("{"), Errc::parse);
}

OptimizerTrace sample_trace() {
  OptimizerTrace t;
  t.initial_pslr_db = 3.0;
  t.records = {{0, 2.5, 3.0, false, MoveKind::shuffle},
               {1, 4.0, 4.0, true, MoveKind::perturb},
               {2, std::nullopt, 4.0, false, MoveKind::none},
               {3, 5.5, 5.5, true, MoveKind::shuffle},
               {4, 6.0, 6.0, true, MoveKind::perturb}};
  t.accepted_count = 3;
  t.best_pslr_db = 6.0;
  t.termination = Termination::budget;
  return t;
}

TEST(TraceJsonl, SummaryAndValidation) {
  const std::string text = io::trace_to_jsonl(sample_trace(), 42, 5);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  const auto s = io::read_trace(text);
  EXPECT_EQ(s.iterations, 5);
  EXPECT_EQ(s.improvements, 3);
  EXPECT_EQ(s.termination, "budget");
  EXPECT_EQ(s.initial_pslr_db, 3.0);
  EXPECT_EQ(s.final_pslr_db, 6.0);
}

TEST(TraceJsonl, EmptyTrace) {
  OptimizerTrace t;
  t.initial_pslr_db = 7.25;
  t.best_pslr_db = 7.25;
  t.termination = Termination::plateau;
  const auto s = io::read_trace(io::trace_to_jsonl(t, 1, 10));
  EXPECT_EQ(s.iterations, 0);
  EXPECT_EQ(s.termination, "plateau");
}

TEST(TraceJsonl, NonFiniteValuesSurvive) {
  OptimizerTrace t;
  t.initial_pslr_db = -std::numeric_limits<double>::infinity();
  t.records = {{0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), true,
                MoveKind::shuffle}};
  t.accepted_count = 1;
  t.best_pslr_db = std::numeric_limits<double>::infinity();
  const auto s = io::read_trace(io::trace_to_jsonl(t, 1, 1));
  EXPECT_EQ(s.final_pslr_db, std::numeric_limits<double>::infinity());
}

TEST(TraceJsonl, TamperingIsDetected) {
  const std::string text = io::trace_to_jsonl(sample_trace(), 42, 5);
  // Truncated: drop the summary line.
  const std::string truncated = text.substr(0, text.rfind("{\"type\":\"summary\""));
  EXPECT_ERRC(io::read_trace(truncated), Errc::parse);
  // Best PSLR decreases.
  EXPECT_ERRC(io::read_trace(replace(text, "\"best_pslr_db\":5.5", "\"best_pslr_db\":3.5")), Errc::parse);
  // Accepted without improvement.
  EXPECT_ERRC(io::read_trace(replace(text, "\"accepted\":false,\"move\":\"shuffle\"", "\"accepted\":true,\"move\":\"shuffle\"")),
              Errc::parse);
  // Summary disagrees.
  EXPECT_ERRC(io::read_trace(replace(text, "\"accepted\":3", "\"accepted\":2")), Errc::parse);
  EXPECT_ERRC(io::read_trace(replace(text, "\"iteration\":3", "\"iteration\":7")), Errc::parse);
  EXPECT_ERRC(io::read_trace("not json\n"), Errc::parse);
  EXPECT_ERRC(io::read_trace(""), Errc::parse);
}

TEST(PatternCsv, LayoutAndPrecision) {
  const auto va = build_virtual_array(testing::ula_layout(4));
  const auto grid = make_uv_grid(2, 2, 1, 1);
  const auto p = beamform(va, testing::broadside(va), grid);
  const std::string csv = io::pattern_to_csv(p);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "u,v,re,im,mag_db");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    ASSERT_EQ(row.size(), 5u);
    rows.push_back(row);
  }
  ASSERT_EQ(rows.size(), 4u);
  // v outer, u inner.
  EXPECT_EQ(rows[0][0], -1.0);
  EXPECT_EQ(rows[0][1], -1.0);
  EXPECT_EQ(rows[1][0], 0.0);
  EXPECT_EQ(rows[1][1], -1.0);
  EXPECT_EQ(rows[2][1], 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const cplx v = p.values()[i];
    EXPECT_EQ(rows[i][2], v.real());  // 17 digits round-trip exactly
    EXPECT_EQ(rows[i][3], v.imag());
    EXPECT_LE(rows[i][4], 0.0);
    EXPECT_GE(rows[i][4], -120.0);
  }
  EXPECT_EQ(rows[3][4], 0.0);  // broadside peak
  EXPECT_EQ(rows[2][4], -120.0);  // exact null of the 4-element ULA at u = -1
}

}  // namespace
}  // namespace saf
