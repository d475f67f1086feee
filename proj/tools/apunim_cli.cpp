// Copyright 2026 The Apunim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "apunim/apunim.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw apunim::ValidationError("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

// A small column-typed table rendered as CSV, JSON records or aligned text.
using Cell = std::variant<std::monostate, std::string, double, std::uint64_t>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return "NA";
  if (auto s = std::get_if<std::string>(&c)) return *s;
  if (auto d = std::get_if<double>(&c)) return apunim::format_double(*d);
  return std::to_string(std::get<std::uint64_t>(c));
}

void write_table(const Table& t, const std::string& format, std::ostream& out) {
  if (format == "csv") {
    apunim::csv::write_row(out, t.header);
    std::vector<std::string> fields;
    for (const auto& row : t.rows) {
      fields.clear();
      for (const auto& c : row) fields.push_back(cell_text(c));
      apunim::csv::write_row(out, fields);
    }
  } else if (format == "json") {
    auto arr = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json o;
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::visit(
            [&](const auto& v) {
              using V = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<V, std::monostate>) {
                o[t.header[i]] = nullptr;
              } else {
                o[t.header[i]] = v;
              }
            },
            row[i]);
      }
      arr.push_back(std::move(o));
    }
    out << arr.dump(2) << '\n';
  } else {
    std::vector<std::size_t> width(t.header.size());
    for (std::size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        width[i] = std::max(width[i], cell_text(row[i]).size());
      }
    }
    auto line = [&](auto&& text_of) {
      for (std::size_t i = 0; i < width.size(); ++i) {
        std::string s = text_of(i);
        out << (i ? "  " : "") << s << std::string(width[i] - s.size(), ' ');
      }
      out << '\n';
    };
    line([&](std::size_t i) { return t.header[i]; });
    for (const auto& row : t.rows) line([&](std::size_t i) { return cell_text(row[i]); });
  }
}

struct Common {
  std::string annotations;
  std::string annotators;
  std::string config;
  std::optional<double> alpha;
  std::optional<std::uint32_t> partitions;
  std::optional<double> fwer;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> min_group;
  std::optional<std::string> score_mode;
  std::optional<std::string> test;
  std::vector<std::string> dimensions;
  std::string output_dir;
  std::string format = "table";
  unsigned threads = apunim::default_workers();
};

void add_common(CLI::App* cmd, Common& c, bool dataset_inputs) {
  if (dataset_inputs) {
    cmd->add_option("--annotations", c.annotations, "annotations CSV (item_id,annotator_id,value)")
        ->required();
    cmd->add_option("--annotators", c.annotators, "annotators CSV (annotator_id,<dimensions>)")
        ->required();
  }
  cmd->add_option("--config", c.config, "JSON config with scale, dimensions and defaults");
  cmd->add_option("--alpha", c.alpha, "minimum item nDFU for the filter");
  cmd->add_option("--partitions", c.partitions, "random partitions per item");
  cmd->add_option("--fwer", c.fwer, "family-wise confidence; rejection level is 1 - fwer");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--min-group", c.min_group, "minimum annotations for a (pseudo-)group");
  cmd->add_option("--partition-score-mode", c.score_mode, "mean | size_matched")
      ->check(CLI::IsMember({"mean", "size_matched"}));
  cmd->add_option("--test", c.test, "pseudo-group | one-sample")
      ->check(CLI::IsMember({"pseudo-group", "one-sample"}));
  cmd->add_option("--dimension", c.dimensions, "restrict to a dimension (repeatable)");
  cmd->add_option("--output-dir", c.output_dir, "write result files and a manifest here");
  cmd->add_option("--format", c.format, "stdout format")
      ->check(CLI::IsMember({"csv", "json", "table"}));
  cmd->add_option("--threads", c.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
}

apunim::ProjectConfig resolve_config(const Common& c) {
  apunim::ProjectConfig pc;
  if (!c.config.empty()) pc = apunim::load_config(c.config);
  auto& a = pc.analysis;
  if (c.alpha) a.alpha = *c.alpha;
  if (c.partitions) a.partitions = *c.partitions;
  if (c.fwer) a.fwer = *c.fwer;
  if (c.seed) a.master_seed = *c.seed;
  if (c.min_group) a.min_group = *c.min_group;
  if (c.score_mode) a.partition_score_mode = apunim::detail::parse_score_mode(*c.score_mode);
  if (c.test) a.test = apunim::detail::parse_test(*c.test);
  a.validate();
  return pc;
}

apunim::Dataset load(const Common& c, const apunim::ProjectConfig& pc) {
  if (!pc.scale) {
    throw apunim::ValidationError("the config must declare a label scale ('scale' section)");
  }
  std::vector<std::string> warnings;
  auto ds = apunim::load_dataset(c.annotations, c.annotators, *pc.scale, pc.dimensions, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return ds;
}

class Run {
 public:
  Run(std::string command, const std::vector<std::string>& argv, std::string output_dir)
      : command_(std::move(command)), argv_(argv), dir_(std::move(output_dir)),
        start_(std::chrono::steady_clock::now()) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  bool has_dir() const { return !dir_.empty(); }

  void input(const std::string& path) {
    if (!path.empty()) inputs_.push_back(path);
  }

  void config(ordered_json j) { config_ = std::move(j); }

  template <typename Fn>
  void output(const std::string& name, Fn&& write) {
    std::ofstream out(fs::path(dir_) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + name);
    write(out);
    out.close();
    outputs_.push_back(name);
  }

  void finish() {
    if (dir_.empty()) return;
    ordered_json m;
    m["tool"] = "apunim";
    m["version"] = apunim::kVersion;
    m["command"] = command_;
    m["argv"] = argv_;
    m["config"] = config_;
    m["inputs"] = ordered_json::array();
    for (const auto& p : inputs_) m["inputs"].push_back({{"path", p}, {"sha256", sha256_file(p)}});
    m["outputs"] = ordered_json::array();
    for (const auto& name : outputs_) {
      m["outputs"].push_back({{"path", name}, {"sha256", sha256_file(fs::path(dir_) / name)}});
    }
    m["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(fs::path(dir_) / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::string dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  ordered_json config_;
};

ordered_json config_echo(const apunim::ProjectConfig& pc, const apunim::Dataset* ds) {
  ordered_json j;
  j["analysis"] = apunim::config_json(pc.analysis);
  if (ds) {
    j["scale"] = apunim::scale_json(ds->scale());
    j["dimensions"] = apunim::dimensions_json(ds->dimensions());
  } else {
    if (pc.scale) j["scale"] = apunim::scale_json(*pc.scale);
    j["dimensions"] = apunim::dimensions_json(pc.dimensions);
  }
  return j;
}

void emit_table(Run& run, const Table& t, const std::string& name, const std::string& format) {
  write_table(t, format, std::cout);
  if (run.has_dir()) run.output(name + ".csv", [&](std::ostream& o) { write_table(t, "csv", o); });
}

int cmd_analyze(const Common& c, const std::vector<std::string>& argv) {
  const auto pc = resolve_config(c);
  const auto ds = load(c, pc);
  Run run("analyze", argv, c.output_dir);
  run.input(c.annotations);
  run.input(c.annotators);
  run.input(c.config);
  run.config(config_echo(pc, &ds));
  const auto report = apunim::analyze_all(ds, pc.analysis, c.dimensions, c.threads);
  if (c.format == "csv") apunim::write_report_csv(report, std::cout);
  if (c.format == "json") apunim::write_report_json(report, std::cout);
  if (c.format == "table") apunim::write_report_table(report, std::cout);
  if (run.has_dir()) {
    run.output("report.csv", [&](std::ostream& o) { apunim::write_report_csv(report, o); });
    run.output("report.json", [&](std::ostream& o) { apunim::write_report_json(report, o); });
    run.output("report.txt", [&](std::ostream& o) { apunim::write_report_table(report, o); });
  }
  run.finish();
  return 0;
}

int cmd_polarization(const Common& c, std::optional<std::size_t> bins,
                     const std::vector<std::string>& argv) {
  const auto pc = resolve_config(c);
  const auto ds = load(c, pc);
  Run run("polarization", argv, c.output_dir);
  run.input(c.annotations);
  run.input(c.annotators);
  run.input(c.config);
  run.config(config_echo(pc, &ds));
  std::vector<apunim::PolarizationScore> scores(ds.item_count());
  for (std::size_t i = 0; i < ds.item_count(); ++i) scores[i] = apunim::item_ndfu(ds, i);
  if (bins) {
    if (*bins == 0) throw apunim::ValidationError("--bins must be positive");
    std::vector<std::uint64_t> counts(*bins, 0);
    for (const auto& s : scores) {
      auto b = static_cast<std::size_t>(s.value * static_cast<double>(*bins));
      ++counts[std::min(b, *bins - 1)];
    }
    Table t{{"bin_lower", "bin_upper", "count"}, {}};
    for (std::size_t b = 0; b < *bins; ++b) {
      t.rows.push_back({static_cast<double>(b) / static_cast<double>(*bins),
                        static_cast<double>(b + 1) / static_cast<double>(*bins), counts[b]});
    }
    emit_table(run, t, "polarization_bins", c.format);
  } else {
    Table t{{"item_id", "ndfu", "n_annotations"}, {}};
    for (std::size_t i = 0; i < ds.item_count(); ++i) {
      t.rows.push_back({ds.item_id(i), scores[i].value, scores[i].n_annotations});
    }
    emit_table(run, t, "polarization", c.format);
  }
  run.finish();
  return 0;
}

int cmd_trend(const Common& c, bool significant_only, const std::vector<std::string>& argv) {
  const auto pc = resolve_config(c);
  const auto ds = load(c, pc);
  std::vector<std::string> names = c.dimensions;
  if (names.empty()) {
    for (const auto& d : ds.dimensions()) {
      if (d.is_ordinal()) names.push_back(d.name);
    }
    if (names.empty()) throw apunim::ValidationError("no ordinal dimension is declared");
  }
  for (const auto& n : names) {
    if (!ds.dimensions()[ds.dimension_index(n)].is_ordinal()) {
      throw apunim::ValidationError("dimension '" + n + "' has no ordinal_order");
    }
  }
  Run run("trend", argv, c.output_dir);
  run.input(c.annotations);
  run.input(c.annotators);
  run.input(c.config);
  run.config(config_echo(pc, &ds));
  const auto report = apunim::analyze_all(ds, pc.analysis, names, c.threads);
  Table t{{"dimension", "group", "ordinal_position_normalized", "apunim", "p_corrected"}, {}};
  for (const auto& d : report.dimensions) {
    std::size_t significant = 0;
    for (const auto& g : d.groups) significant += g.reject;
    if (significant_only && significant < 2) continue;
    const auto& order = *ds.dimensions()[ds.dimension_index(d.dimension)].ordinal_order;
    std::vector<const apunim::GroupResult*> by_rank(order.size(), nullptr);
    for (const auto& g : d.groups) {
      auto pos = std::find(order.begin(), order.end(), g.group) - order.begin();
      by_rank[static_cast<std::size_t>(pos)] = &g;
    }
    const double span = order.size() > 1 ? static_cast<double>(order.size() - 1) : 1.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const auto* g = by_rank[r];
      if (!g) continue;
      Cell apunim_cell = g->apunim ? Cell(*g->apunim) : Cell();
      Cell p_cell = g->p_corrected ? Cell(*g->p_corrected) : Cell();
      t.rows.push_back({d.dimension, g->group, static_cast<double>(r) / span, apunim_cell, p_cell});
    }
  }
  emit_table(run, t, "trend", c.format);
  run.finish();
  return 0;
}

struct SimulateArgs {
  std::optional<std::size_t> items;
  std::optional<std::size_t> annotators_per_item;
  std::optional<std::size_t> levels;
  std::optional<double> noise;
  std::optional<double> bell_width;
  std::string effect;
  std::optional<double> strength;
  std::string planted_dimension;
  std::string group_low;
  std::string group_high;
  bool cancellation = false;
};

int cmd_simulate(const Common& c, const SimulateArgs& s, const std::vector<std::string>& argv) {
  if (c.output_dir.empty()) throw apunim::ValidationError("simulate needs --output-dir");
  auto pc = resolve_config(c);
  Run run("simulate", argv, c.output_dir);
  run.input(c.config);

  std::optional<apunim::Dataset> ds;
  ordered_json sim_echo;
  if (s.cancellation) {
    ds = apunim::cancellation_fixture(pc.analysis.master_seed);
    sim_echo = {{"fixture", "cancellation"}, {"seed", pc.analysis.master_seed}};
  } else {
    apunim::SyntheticSpec spec = pc.simulation.value_or(apunim::SyntheticSpec{});
    if (pc.scale) spec.scale = *pc.scale;
    if (s.levels) spec.scale = apunim::LabelScale::numeric(*s.levels);
    if (s.items) spec.n_items = *s.items;
    if (s.annotators_per_item) spec.annotators_per_item = *s.annotators_per_item;
    if (s.noise) spec.noise = *s.noise;
    if (s.bell_width) spec.bell_width = *s.bell_width;
    if (c.seed) spec.seed = *c.seed;
    if (spec.dimensions.empty()) spec.dimensions = {{"group", {"A", "B"}, {0.5, 0.5}}};
    if (s.effect == "none") spec.effect.reset();
    if (s.effect == "planted") {
      apunim::PlantedEffect e = spec.effect.value_or(apunim::PlantedEffect{});
      const auto& d0 = spec.dimensions.front();
      if (e.dimension.empty()) e = {d0.name, d0.groups.front(), d0.groups.back(), 1.0};
      spec.effect = e;
    }
    if (spec.effect) {
      if (s.strength) spec.effect->strength = *s.strength;
      if (!s.planted_dimension.empty()) spec.effect->dimension = s.planted_dimension;
      if (!s.group_low.empty()) spec.effect->group_low = s.group_low;
      if (!s.group_high.empty()) spec.effect->group_high = s.group_high;
    } else if (s.strength || !s.group_low.empty() || !s.group_high.empty()) {
      throw apunim::ValidationError("--strength and planted groups need --effect planted");
    }
    ds = apunim::generate(spec);
    sim_echo = apunim::simulation_json(spec);
  }

  // A config that analyze can read back directly.
  ordered_json cfg;
  cfg["scale"] = apunim::scale_json(ds->scale());
  cfg["dimensions"] = apunim::dimensions_json(ds->dimensions());
  cfg["analysis"] = apunim::config_json(pc.analysis);
  if (!s.cancellation) cfg["simulation"] = sim_echo;
  run.config(cfg);
  run.output("annotations.csv", [&](std::ostream& o) { apunim::write_annotations_csv(*ds, o); });
  run.output("annotators.csv", [&](std::ostream& o) { apunim::write_annotators_csv(*ds, o); });
  run.output("config.json", [&](std::ostream& o) { o << cfg.dump(2) << '\n'; });
  run.finish();
  std::cout << "wrote " << ds->item_count() << " items, " << ds->annotation_count()
            << " annotations to " << c.output_dir << '\n';
  return 0;
}

struct SensitivityArgs {
  std::optional<std::size_t> max_k;
  std::size_t resamples = 30;
  double sufficiency = 0.5;
  std::string aggregate = "per-item";
  std::string group;
};

int cmd_sensitivity(const Common& c, const SensitivityArgs& s,
                    const std::vector<std::string>& argv) {
  const auto pc = resolve_config(c);
  const auto ds = load(c, pc);
  apunim::SensitivityOptions opt;
  opt.max_k = s.max_k;
  opt.resamples = s.resamples;
  opt.seed = pc.analysis.master_seed;
  opt.sufficiency = s.sufficiency;
  opt.aggregate = s.aggregate == "dataset" ? apunim::SensitivityAggregate::kDataset
                                           : apunim::SensitivityAggregate::kPerItem;
  opt.workers = c.threads;
  if (!s.group.empty()) {
    if (c.dimensions.size() != 1) {
      throw apunim::ValidationError("--group needs exactly one --dimension");
    }
    opt.dimension = c.dimensions.front();
    opt.group = s.group;
  }
  Run run("sensitivity", argv, c.output_dir);
  run.input(c.annotations);
  run.input(c.annotators);
  run.input(c.config);
  auto echo = config_echo(pc, &ds);
  echo["sensitivity"] = {{"resamples", s.resamples},
                         {"sufficiency", s.sufficiency},
                         {"aggregate", s.aggregate},
                         {"max_k", s.max_k ? ordered_json(*s.max_k) : ordered_json(nullptr)}};
  run.config(echo);
  const auto curve = apunim::sensitivity(ds, opt);
  Table t{{"k", "std", "n_items_used"}, {}};
  for (const auto& p : curve.points) {
    t.rows.push_back({static_cast<std::uint64_t>(p.k), p.std,
                      static_cast<std::uint64_t>(p.n_items_used)});
  }
  emit_table(run, t, "sensitivity", c.format);
  run.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute annotation polarization to annotator groups"};
  app.set_version_flag("--version", std::string(apunim::kVersion));
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);

  Common analyze_c, pol_c, trend_c, sim_c, sens_c;
  auto* analyze = app.add_subcommand("analyze", "per-group apunim with significance");
  add_common(analyze, analyze_c, true);

  auto* pol = app.add_subcommand("polarization", "per-item nDFU (item_id,ndfu,n_annotations)");
  add_common(pol, pol_c, true);
  std::optional<std::size_t> bins;
  pol->add_option("--bins", bins, "emit a histogram of nDFU with this many bins");
  pol_c.format = "csv";

  auto* trend = app.add_subcommand("trend", "apunim over the levels of ordinal dimensions");
  add_common(trend, trend_c, true);
  bool significant_only = false;
  trend->add_flag("--significant-only", significant_only,
                  "keep dimensions with at least two significant groups");
  trend_c.format = "csv";

  auto* sim = app.add_subcommand("simulate", "write a synthetic dataset");
  add_common(sim, sim_c, false);
  SimulateArgs sa;
  sim->add_option("--items", sa.items, "number of items");
  sim->add_option("--annotators-per-item", sa.annotators_per_item, "annotators per item");
  sim->add_option("--levels", sa.levels, "numeric ordinal scale with this many levels");
  sim->add_option("--noise", sa.noise, "chance of a uniform random label");
  sim->add_option("--bell-width", sa.bell_width, "spread of the per-item label bell");
  sim->add_option("--effect", sa.effect, "none | planted")->check(CLI::IsMember({"none", "planted"}));
  sim->add_option("--strength", sa.strength, "fraction of items with the planted effect");
  sim->add_option("--planted-dimension", sa.planted_dimension, "dimension of the planted effect");
  sim->add_option("--group-low", sa.group_low, "group rating the lowest level");
  sim->add_option("--group-high", sa.group_high, "group rating the highest level");
  sim->add_flag("--cancellation", sa.cancellation, "write the two-item cancellation fixture");

  auto* sens = app.add_subcommand("sensitivity", "std of resampled nDFU against annotator count");
  add_common(sens, sens_c, true);
  SensitivityArgs sna;
  sens->add_option("--max-k", sna.max_k, "largest annotator count (default: 50% sufficiency)");
  sens->add_option("--resamples", sna.resamples, "resamples per item and k");
  sens->add_option("--sufficiency", sna.sufficiency, "share of items that must have k annotators");
  sens->add_option("--aggregate", sna.aggregate, "per-item | dataset")
      ->check(CLI::IsMember({"per-item", "dataset"}));
  sens->add_option("--group", sna.group, "resample one group of the single --dimension");
  sens_c.format = "csv";

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*analyze) return cmd_analyze(analyze_c, args);
    if (*pol) return cmd_polarization(pol_c, bins, args);
    if (*trend) return cmd_trend(trend_c, significant_only, args);
    if (*sim) return cmd_simulate(sim_c, sa, args);
    if (*sens) return cmd_sensitivity(sens_c, sna, args);
  } catch (const apunim::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 3;
}
