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

#include "saf/io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "saf/error.hpp"

namespace saf::io {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(Errc::parse, (path.empty() ? std::string("/") : path) + ": " + msg);
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(Errc::parse, std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

template <class T>
json maybe(const std::optional<T>& x) {
  if (!x) return nullptr;
  if constexpr (std::is_floating_point_v<T>) return number(*x);
  else return *x;
}

// Read-side view of one JSON node with its path, for located diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  Node operator[](const std::string& key) const { return {j_.at(key), path_ + "/" + key}; }
  Node operator[](std::size_t i) const { return {j_.at(i), path_ + "/" + std::to_string(i)}; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const Node& object(std::initializer_list<std::string_view> allowed) const {
    if (!j_.is_object()) fail(path_, "expected an object");
    for (const auto& [key, value] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(path_ + "/" + key, "unknown field");
    }
    return *this;
  }

  Node required(const std::string& key) const {
    if (!j_.contains(key)) fail(path_ + "/" + key, "missing field");
    return (*this)[key];
  }

  std::size_t array_size() const {
    if (!j_.is_array()) fail(path_, "expected an array");
    return j_.size();
  }

  double as_double() const {
    if (j_.is_number()) return j_.get<double>();
    if (j_.is_string()) {
      const auto s = j_.get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
      if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    fail(path_, "expected a number");
  }

  std::int64_t as_int(std::int64_t lo = std::numeric_limits<int>::min(),
                      std::int64_t hi = std::numeric_limits<int>::max()) const {
    if (!j_.is_number_integer()) fail(path_, "expected an integer");
    if (j_.is_number_unsigned() && j_.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) fail(path_, "out of range");
    const auto v = j_.get<std::int64_t>();
    if (v < lo || v > hi) fail(path_, "out of range");
    return v;
  }

  std::uint64_t as_u64() const {
    if (j_.is_number_unsigned()) return j_.get<std::uint64_t>();
    if (j_.is_number_integer() && j_.get<std::int64_t>() >= 0) return j_.get<std::uint64_t>();
    fail(path_, "expected a non-negative integer");
  }

  bool as_bool() const {
    if (!j_.is_boolean()) fail(path_, "expected true or false");
    return j_.get<bool>();
  }

  std::string as_string() const {
    if (!j_.is_string()) fail(path_, "expected a string");
    return j_.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
};

int as_dim(const Node& n) { return static_cast<int>(n.as_int()); }

json points_json(const std::vector<GridPoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back({p.m, p.n});
  return out;
}

std::vector<GridPoint> read_points(const Node& n) {
  std::vector<GridPoint> out;
  const std::size_t count = n.array_size();
  for (std::size_t i = 0; i < count; ++i) {
    const Node p = n[i];
    if (p.array_size() != 2) fail(p.path(), "expected [m, n]");
    out.push_back({as_dim(p[0]), as_dim(p[1])});
  }
  return out;
}

json size_json(const ElementSize& s) { return {{"w", s.width}, {"h", s.height}}; }

ElementSize read_size(const Node& n) {
  n.object({"w", "h"});
  return {n.required("w").as_double(), n.required("h").as_double()};
}

const char* zone_kind_name(ZoneKind k) {
  switch (k) {
    case ZoneKind::tx_excluded: return "tx-excluded";
    case ZoneKind::rx_excluded: return "rx-excluded";
    case ZoneKind::both_excluded: return "both-excluded";
  }
  return "both-excluded";
}

json zones_json(const std::vector<ForbiddenZone>& zones) {
  json out = json::array();
  for (const auto& z : zones) {
    out.push_back({{"y_mc", z.y_mc}, {"z_mc", z.z_mc}, {"center", {z.center.m, z.center.n}}, {"kind", zone_kind_name(z.kind)}});
  }
  return out;
}

std::vector<ForbiddenZone> read_zones(const Node& n) {
  std::vector<ForbiddenZone> out;
  const std::size_t count = n.array_size();
  for (std::size_t i = 0; i < count; ++i) {
    const Node z = n[i];
    z.object({"y_mc", "z_mc", "center", "kind"});
    ForbiddenZone zone;
    zone.y_mc = z.required("y_mc").as_double();
    zone.z_mc = z.required("z_mc").as_double();
    const Node c = z.required("center");
    if (c.array_size() != 2) fail(c.path(), "expected [m, n]");
    zone.center = {as_dim(c[0]), as_dim(c[1])};
    if (z.has("kind")) {
      const std::string kind = z["kind"].as_string();
      if (kind == "tx-excluded") zone.kind = ZoneKind::tx_excluded;
      else if (kind == "rx-excluded") zone.kind = ZoneKind::rx_excluded;
      else if (kind == "both-excluded") zone.kind = ZoneKind::both_excluded;
      else fail(z["kind"].path(), "expected tx-excluded, rx-excluded or both-excluded");
    }
    try {
      zone.validate();
    } catch (const Error& e) {
      fail(z.path(), e.what());
    }
    out.push_back(zone);
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string to_json(const LayoutDocument& doc) {
  const ArrayLayout& l = doc.layout;
  json j;
  j["grid"] = {{"d_y", l.grid.d_y}, {"d_z", l.grid.d_z}, {"M", l.grid.M}, {"N", l.grid.N}};
  j["tx"] = points_json(l.tx);
  j["rx"] = points_json(l.rx);
  j["tx_size"] = size_json(l.tx_size);
  j["rx_size"] = size_json(l.rx_size);
  j["enforced_tx"] = points_json(l.enforced_tx);
  j["enforced_rx"] = points_json(l.enforced_rx);
  j["zones"] = zones_json(doc.zones);
  return dump(j);
}

LayoutDocument layout_from_json(std::string_view text) {
  const json j = parse_text(text);
  const Node root(j, "");
  root.object({"grid", "tx", "rx", "tx_size", "rx_size", "enforced_tx", "enforced_rx", "zones"});

  LayoutDocument doc;
  ArrayLayout& l = doc.layout;
  const Node g = root.required("grid");
  g.object({"d_y", "d_z", "M", "N"});
  l.grid.d_y = g.required("d_y").as_double();
  l.grid.d_z = g.has("d_z") ? g["d_z"].as_double() : 0.5;
  l.grid.M = as_dim(g.required("M"));
  l.grid.N = g.has("N") ? as_dim(g["N"]) : 1;
  l.tx = read_points(root.required("tx"));
  l.rx = read_points(root.required("rx"));
  if (root.has("tx_size")) l.tx_size = read_size(root["tx_size"]);
  if (root.has("rx_size")) l.rx_size = read_size(root["rx_size"]);
  if (root.has("enforced_tx")) l.enforced_tx = read_points(root["enforced_tx"]);
  if (root.has("enforced_rx")) l.enforced_rx = read_points(root["enforced_rx"]);
  if (root.has("zones")) doc.zones = read_zones(root["zones"]);

  try {
    l.validate();
  } catch (const Error& e) {
    fail("", e.what());
  }
  return doc;
}

std::string to_json(const DesignConfig& config) {
  const DesignSpec& s = config.spec;
  json j;
  j["dimensionality"] = s.dimensionality == Dimensionality::one_d ? "1D" : "2D";
  j["n_tx"] = s.n_tx;
  j["n_rx"] = s.n_rx;
  j["target_ufov_az"] = s.target_ufov_az;
  j["target_ufov_el"] = s.target_ufov_el;
  j["target_hpbw_az"] = s.target_hpbw_az;
  j["target_hpbw_el"] = s.target_hpbw_el;
  j["aperture_y"] = maybe(s.aperture_y);
  j["aperture_z"] = maybe(s.aperture_z);
  j["grid_d_y"] = maybe(s.grid_d_y);
  j["grid_d_z"] = maybe(s.grid_d_z);
  j["tx_size"] = size_json(s.tx_size);
  j["rx_size"] = size_json(s.rx_size);
  j["zones"] = zones_json(s.zones);
  j["enforced_tx"] = points_json(s.enforced_tx);
  j["enforced_rx"] = points_json(s.enforced_rx);
  j["desired_pslr_db"] = number(s.desired_pslr_db);
  j["k_max"] = s.k_max;
  j["seed"] = s.seed;
  j["q_phi"] = s.q_phi;
  j["q_theta"] = s.q_theta;
  j["intensity"] = s.intensity;
  j["use_hia"] = s.use_hia;
  j["plateau_window"] = s.plateau_window;
  j["plateau_db"] = s.plateau_db;
  j["batch_size"] = s.batch_size;
  if (!config.outer_loop.empty()) {
    json points = json::array();
    for (const auto& p : config.outer_loop) {
      json pj = json::object();
      if (p.intensity) pj["intensity"] = *p.intensity;
      if (p.grid_d_y) pj["grid_d_y"] = *p.grid_d_y;
      if (p.grid_d_z) pj["grid_d_z"] = *p.grid_d_z;
      if (p.oversample) pj["oversample"] = *p.oversample;
      points.push_back(std::move(pj));
    }
    j["outer_loop"] = std::move(points);
  }
  return dump(j);
}

DesignConfig config_from_json(std::string_view text) {
  const json j = parse_text(text);
  const Node root(j, "");
  root.object({"dimensionality", "n_tx", "n_rx", "target_ufov_az", "target_ufov_el", "target_hpbw_az",
               "target_hpbw_el", "aperture_y", "aperture_z", "grid_d_y", "grid_d_z", "tx_size", "rx_size", "zones",
               "enforced_tx", "enforced_rx", "desired_pslr_db", "k_max", "seed", "q_phi", "q_theta", "intensity",
               "use_hia", "plateau_window", "plateau_db", "batch_size", "outer_loop"});

  DesignConfig config;
  DesignSpec& s = config.spec;
  if (root.has("dimensionality")) {
    const std::string dim = root["dimensionality"].as_string();
    if (dim == "1D") s.dimensionality = Dimensionality::one_d;
    else if (dim == "2D") s.dimensionality = Dimensionality::two_d;
    else fail("/dimensionality", "expected \"1D\" or \"2D\"");
  }
  s.n_tx = static_cast<int>(root.required("n_tx").as_int());
  s.n_rx = static_cast<int>(root.required("n_rx").as_int());
  auto opt_double = [&](const char* key, double& out) {
    if (root.has(key)) out = root[key].as_double();
  };
  auto opt_optional = [&](const char* key, std::optional<double>& out) {
    if (root.has(key)) out = root[key].as_double();
  };
  auto opt_int = [&](const char* key, int& out) {
    if (root.has(key)) out = static_cast<int>(root[key].as_int());
  };
  opt_double("target_ufov_az", s.target_ufov_az);
  opt_double("target_ufov_el", s.target_ufov_el);
  opt_double("target_hpbw_az", s.target_hpbw_az);
  opt_double("target_hpbw_el", s.target_hpbw_el);
  opt_optional("aperture_y", s.aperture_y);
  opt_optional("aperture_z", s.aperture_z);
  opt_optional("grid_d_y", s.grid_d_y);
  opt_optional("grid_d_z", s.grid_d_z);
  if (root.has("tx_size")) s.tx_size = read_size(root["tx_size"]);
  if (root.has("rx_size")) s.rx_size = read_size(root["rx_size"]);
  if (root.has("zones")) s.zones = read_zones(root["zones"]);
  if (root.has("enforced_tx")) s.enforced_tx = read_points(root["enforced_tx"]);
  if (root.has("enforced_rx")) s.enforced_rx = read_points(root["enforced_rx"]);
  opt_double("desired_pslr_db", s.desired_pslr_db);
  opt_int("k_max", s.k_max);
  if (root.has("seed")) s.seed = root["seed"].as_u64();
  opt_int("q_phi", s.q_phi);
  opt_int("q_theta", s.q_theta);
  opt_int("intensity", s.intensity);
  if (root.has("use_hia")) s.use_hia = root["use_hia"].as_bool();
  opt_int("plateau_window", s.plateau_window);
  opt_double("plateau_db", s.plateau_db);
  opt_int("batch_size", s.batch_size);

  if (root.has("outer_loop")) {
    const Node list = root["outer_loop"];
    const std::size_t count = list.array_size();
    for (std::size_t i = 0; i < count; ++i) {
      const Node p = list[i];
      p.object({"intensity", "grid_d_y", "grid_d_z", "oversample"});
      HyperPoint h;
      if (p.has("intensity")) h.intensity = static_cast<int>(p["intensity"].as_int());
      if (p.has("grid_d_y")) h.grid_d_y = p["grid_d_y"].as_double();
      if (p.has("grid_d_z")) h.grid_d_z = p["grid_d_z"].as_double();
      if (p.has("oversample")) h.oversample = static_cast<int>(p["oversample"].as_int());
      config.outer_loop.push_back(h);
    }
  }
  return config;
}

std::string canonical_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text).dump();
  } catch (const nlohmann::json::parse_error&) {
    parse_text(text);
    throw;
  }
}

std::string to_json(const MetricsReport& r) {
  auto angles = [](const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) out.push_back(number(x));
    return out;
  };
  json j;
  j["pslr_db"] = number(r.pslr_db);
  j["peak_magnitude"] = number(r.peak_magnitude);
  j["peak_u"] = number(r.peak_direction.u);
  j["peak_v"] = number(r.peak_direction.v);
  j["hpbw_az_deg"] = maybe(r.hpbw_az_deg);
  j["hpbw_el_deg"] = maybe(r.hpbw_el_deg);
  j["fnbw_az_deg"] = maybe(r.fnbw_az_deg);
  j["fnbw_el_deg"] = maybe(r.fnbw_el_deg);
  j["ufov_az_deg"] = maybe(r.ufov_az_deg);
  j["ufov_el_deg"] = maybe(r.ufov_el_deg);
  j["grating_lobes_az_deg"] = angles(r.grating_lobes_az_deg);
  j["grating_lobes_el_deg"] = angles(r.grating_lobes_el_deg);
  j["generated_vrx"] = r.generated_vrx;
  j["unique_vrx"] = r.unique_vrx;
  j["thinning_ratio"] = number(r.thinning_ratio);
  j["aperture_loss"] = r.aperture_loss ? number(r.aperture_loss->value) : json(nullptr);
  j["aperture_loss_raw"] = r.aperture_loss ? number(r.aperture_loss->raw) : json(nullptr);
  j["aperture_loss_anomaly"] = r.aperture_loss ? json(r.aperture_loss->anomaly) : json(nullptr);
  j["bw_spreading_az"] = maybe(r.bw_spreading_az);
  j["bw_spreading_el"] = maybe(r.bw_spreading_el);
  return dump(j);
}

std::string trace_to_jsonl(const OptimizerTrace& trace, std::uint64_t seed, int k_max) {
  std::string out;
  auto line = [&](const json& j) {
    out += j.dump();
    out += '\n';
  };
  line({{"type", "header"}, {"initial_pslr_db", number(trace.initial_pslr_db)}, {"seed", seed}, {"k_max", k_max}});
  for (const auto& r : trace.records) {
    line({{"type", "iteration"},
          {"iteration", r.iteration},
          {"candidate_pslr_db", r.candidate_pslr_db ? number(*r.candidate_pslr_db) : json(nullptr)},
          {"best_pslr_db", number(r.best_pslr_db)},
          {"accepted", r.accepted},
          {"move", to_string(r.move)}});
  }
  line({{"type", "summary"},
        {"iterations", trace.records.size()},
        {"accepted", trace.accepted_count},
        {"termination", to_string(trace.termination)},
        {"final_pslr_db", number(trace.best_pslr_db)}});
  return out;
}

TraceSummary read_trace(std::string_view jsonl) {
  TraceSummary s;
  bool have_header = false;
  bool have_summary = false;
  double best = 0.0;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos < jsonl.size()) {
    const std::size_t end = std::min(jsonl.find('\n', pos), jsonl.size());
    const std::string_view text = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error&) {
      fail(where, "malformed JSON");
    }
    const Node rec(j, where);
    if (have_summary) fail(where, "record after the summary line");
    const std::string type = rec.object({"type", "initial_pslr_db", "seed", "k_max", "iteration", "candidate_pslr_db",
                                         "best_pslr_db", "accepted", "move", "iterations", "termination",
                                         "final_pslr_db"})
                                 .required("type")
                                 .as_string();
    if (type == "header") {
      if (have_header) fail(where, "duplicate header");
      have_header = true;
      s.initial_pslr_db = rec.required("initial_pslr_db").as_double();
      best = s.initial_pslr_db;
    } else if (type == "iteration") {
      if (!have_header) fail(where, "iteration before the header");
      if (rec.required("iteration").as_int() != s.iterations) fail(where, "iterations are not consecutive");
      const double next = rec.required("best_pslr_db").as_double();
      const bool accepted = rec.required("accepted").as_bool();
      std::optional<double> candidate;
      if (rec.has("candidate_pslr_db")) candidate = rec["candidate_pslr_db"].as_double();
      if (next < best) fail(where, "best PSLR decreased");
      if (accepted) {
        if (!candidate || !(*candidate > best) || *candidate != next) fail(where, "accepted record inconsistent with its candidate");
        ++s.improvements;
      } else if (next != best) {
        fail(where, "best PSLR changed without an accepted candidate");
      }
      best = next;
      ++s.iterations;
    } else if (type == "summary") {
      if (!have_header) fail(where, "summary before the header");
      have_summary = true;
      if (rec.required("iterations").as_int() != s.iterations) fail(where, "iteration count disagrees with the records");
      if (rec.required("accepted").as_int() != s.improvements) fail(where, "accepted count disagrees with the records");
      s.termination = rec.required("termination").as_string();
      if (s.termination != "budget" && s.termination != "pslr-reached" && s.termination != "plateau") {
        fail(where, "unknown termination reason");
      }
      s.final_pslr_db = rec.required("final_pslr_db").as_double();
      if (s.final_pslr_db != best) fail(where, "final PSLR disagrees with the records");
    } else {
      fail(where, "unknown record type \"" + type + "\"");
    }
  }
  if (!have_header) fail("line 1", "missing header");
  if (!have_summary) fail("line " + std::to_string(line_no), "trace is truncated (no summary line)");
  return s;
}

std::string pattern_to_csv(const Pattern& pattern) {
  const auto mags = pattern.magnitudes();
  double peak = 0.0;
  for (double m : mags) peak = std::max(peak, m);

  std::string out = "u,v,re,im,mag_db\n";
  char buf[160];
  const auto& g = pattern.grid();
  for (std::size_t iv = 0; iv < pattern.nv(); ++iv) {
    for (std::size_t iu = 0; iu < pattern.nu(); ++iu) {
      const std::size_t k = pattern.index(iu, iv);
      const cplx value = pattern.values()[k];
      double db = -120.0;
      if (peak > 0.0 && mags[k] > 0.0) db = std::max(-120.0, 20.0 * std::log10(mags[k] / peak));
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.u[iu], g.v[iv], value.real(), value.imag(),
                    db);
      out += buf;
    }
  }
  return out;
}

}  // namespace saf::io
