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

#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "saf/beamforming.hpp"
#include "saf/error.hpp"
#include "saf/io.hpp"
#include "saf/metrics.hpp"
#include "saf/optimizer.hpp"
#include "saf/parallel.hpp"

namespace saf::cli {
namespace {

namespace fs = std::filesystem;

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string layout;
  std::string trace;
  fs::path out = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = hardware_threads();
  std::optional<int> oversample;
  std::vector<std::string> targets;
  std::vector<double> fov;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoFailure("cannot read " + path.string());
  return buf.str();
}

// Files are written under a temporary name and renamed into place, so a failed run
// leaves either nothing or a complete file behind.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& name : written_) fs::remove(dir_ / name, ec);
  }

  void write(const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoFailure("cannot create " + dir_.string() + ": " + ec.message());
    const fs::path target = dir_ / name;
    const fs::path tmp = dir_ / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.flush();
      if (!out) {
        fs::remove(tmp, ec);
        throw IoFailure("cannot write " + tmp.string());
      }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
      fs::remove(tmp, ec);
      throw IoFailure("cannot move " + tmp.string() + " into place");
    }
    written_.push_back(name);
  }

  const std::vector<std::string>& names() const { return written_; }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
  bool committed_ = false;
};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string utc_now() { return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr))); }

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto logger = std::make_shared<spdlog::logger>("saf", std::make_shared<spdlog::sinks::ostream_sink_mt>(err));
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("SAF_LOG");
  logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
  return logger;
}

std::string pattern_and_metrics(const ArrayLayout& layout, const Snapshot& snapshot, int q_phi, int q_theta,
                                const std::optional<UvWindow>& fov, unsigned threads, std::string& metrics_json) {
  const VirtualArray va = build_virtual_array(layout);
  const UVGrid grid = evaluation_grid(va, q_phi, q_theta);
  const Pattern pattern = beamform(va, snapshot, grid, threads);
  metrics_json = io::to_json(evaluate_metrics(layout, pattern, fov));
  return io::pattern_to_csv(pattern);
}

Target parse_target(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(Errc::parse, "--target \"" + text + "\": expected u,v[,amplitude]");
    }
  }
  if (parts.size() < 2 || parts.size() > 3) throw Error(Errc::parse, "--target \"" + text + "\": expected u,v[,amplitude]");
  return {parts[0], parts[1], cplx{parts.size() == 3 ? parts[2] : 1.0, 0.0}};
}

int cmd_design(const Options& opt, std::ostream& out, spdlog::logger& log) {
  if (opt.config.empty()) throw Error(Errc::invalid_argument, "design needs --config");
  const std::string started = utc_now();
  io::DesignConfig config = io::config_from_json(read_text(opt.config));
  if (opt.seed) config.spec.seed = *opt.seed;
  if (opt.oversample) config.spec.q_phi = config.spec.q_theta = *opt.oversample;
  const DesignSpec& spec = config.spec;

  ArrayLayout layout;
  OptimizerTrace trace;
  DesignSpec used = spec;
  if (config.outer_loop.empty()) {
    auto result = optimize(spec, opt.threads);
    layout = std::move(result.layout);
    trace = std::move(result.trace);
  } else {
    auto result = outer_loop(spec, config.outer_loop, opt.threads);
    log.info("outer loop picked point {} of {}", result.point_index, config.outer_loop.size());
    layout = std::move(result.layout);
    trace = std::move(result.trace);
    used = std::move(result.spec);
  }
  log.info("{} iterations, {} accepted, PSLR {:.3f} -> {:.3f} dB ({})", trace.records.size(), trace.accepted_count,
           trace.initial_pslr_db, trace.best_pslr_db, to_string(trace.termination));

  const Snapshot broadside{std::vector<cplx>(build_virtual_array(layout).unique_count(), cplx{1.0, 0.0})};
  std::string metrics;
  const std::string csv = pattern_and_metrics(layout, broadside, used.q_phi, used.q_theta,
                                              evaluation_settings(used).fov, opt.threads, metrics);

  OutputSet files(opt.out);
  files.write("layout.json", io::to_json(io::LayoutDocument{layout, spec.zones}));
  files.write("trace.jsonl", io::trace_to_jsonl(trace, used.seed, used.k_max));
  files.write("metrics.json", metrics);
  files.write("pattern.csv", csv);

  nlohmann::ordered_json manifest;
  manifest["tool"] = "saf";
  manifest["version"] = SAF_VERSION;
  manifest["spec_sha256"] = sha256_hex(io::canonical_json(io::to_json(config)));
  manifest["seed"] = spec.seed;
  manifest["started"] = started;
  manifest["finished"] = utc_now();
  manifest["outputs"] = files.names();
  files.write("manifest.json", manifest.dump(2) + "\n");
  files.commit();

  out << fmt::format("{} iterations, {}; PSLR {:.3f} dB -> {}\n", trace.records.size(),
                     to_string(trace.termination), trace.best_pslr_db, opt.out.string());
  return ok;
}

int cmd_evaluate(const Options& opt, std::ostream& out, spdlog::logger& log) {
  if (opt.layout.empty() == opt.config.empty()) throw Error(Errc::invalid_argument, "evaluate needs one of --layout or --config");
  ArrayLayout layout;
  int q = 8;
  std::optional<UvWindow> fov;
  if (!opt.layout.empty()) {
    layout = io::layout_from_json(read_text(opt.layout)).layout;
  } else {
    // The spec's seeded starting layout, before any search.
    DesignSpec spec = io::config_from_json(read_text(opt.config)).spec;
    if (opt.seed) spec.seed = *opt.seed;
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    layout = initial_layout(spec, derive_grid(spec), rng);
    q = spec.q_phi;
    fov = evaluation_settings(spec).fov;
  }
  q = opt.oversample.value_or(q);

  std::vector<Target> targets;
  for (const auto& t : opt.targets) targets.push_back(parse_target(t));
  if (targets.empty()) targets.push_back(Target{});

  if (!opt.fov.empty()) {
    if (opt.fov.size() > 2) throw Error(Errc::invalid_argument, "--fov takes az[,el] half-angles in degrees");
    fov = UvWindow::from_half_angles(opt.fov[0], opt.fov.size() == 2 ? opt.fov[1] : 90.0);
  }

  const VirtualArray va = build_virtual_array(layout);
  const Snapshot snapshot = synthesize_snapshot(va, targets);
  std::string metrics;
  const std::string csv = pattern_and_metrics(layout, snapshot, q, q, fov, opt.threads, metrics);
  log.info("{} virtual elements, {} targets", va.unique_count(), targets.size());

  OutputSet files(opt.out);
  files.write("pattern.csv", csv);
  files.write("metrics.json", metrics);
  files.commit();
  out << metrics;
  return ok;
}

int cmd_report(const Options& opt, std::ostream& out) {
  const std::string path = !opt.trace.empty() ? opt.trace : opt.config;
  if (path.empty()) throw Error(Errc::invalid_argument, "report needs --trace");
  const io::TraceSummary s = io::read_trace(read_text(path));
  out << fmt::format("{} iterations, {}\n", s.iterations, s.termination);
  out << fmt::format("initial PSLR: {:.4f} dB\n", s.initial_pslr_db);
  out << fmt::format("final PSLR: {:.4f} dB\n", s.final_pslr_db);
  out << fmt::format("improvements: {}\n", s.improvements);
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse MIMO array design: layout search, pattern evaluation and trace reports", "saf"};
  app.set_version_flag("--version", std::string(SAF_VERSION));
  app.require_subcommand(1);

  Options opt;
  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Config file (JSON)");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seed", opt.seed, "Override the config seed");
    sub->add_option("--threads", opt.threads, "Worker threads; 1 runs serially")->check(CLI::PositiveNumber);
    sub->add_option("--grid-oversample", opt.oversample, "Pattern oversampling factor per axis")
        ->check(CLI::PositiveNumber);
  };

  auto* design = app.add_subcommand("design", "Optimise a layout from a design config");
  common(design);
  auto* evaluate = app.add_subcommand("evaluate", "Beamform a layout and report its metrics");
  common(evaluate);
  evaluate->add_option("--layout", opt.layout, "Layout file (JSON); --config evaluates a spec's initial layout");
  evaluate->add_option("--target", opt.targets, "Far-field target u,v[,amplitude]; repeatable");
  evaluate->add_option("--fov", opt.fov, "FOV half-angles az[,el] in degrees")->delimiter(',');
  auto* report = app.add_subcommand("report", "Summarise an optimisation trace");
  common(report);
  report->add_option("trace,--trace", opt.trace, "Trace file (JSON lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : bad_input;
  }

  auto log = make_logger(err);
  try {
    if (*design) return cmd_design(opt, out, *log);
    if (*evaluate) return cmd_evaluate(opt, out, *log);
    return cmd_report(opt, out);
  } catch (const IoFailure& e) {
    err << "saf: " << e.what() << "\n";
    return io_error;
  } catch (const Error& e) {
    err << "saf: " << e.what() << "\n";
    return bad_input;
  } catch (const std::exception& e) {
    err << "saf: " << e.what() << "\n";
    return io_error;
  }
}

}  // namespace saf::cli
