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

#ifndef APUNIM_REPORT_HPP_
#define APUNIM_REPORT_HPP_

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "apunim/csv.hpp"
#include "apunim/metric.hpp"

namespace apunim {

// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

inline std::string format_fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : "NA";
}

inline std::string significance_stars(const std::optional<double>& p) {
  if (!p) return "";
  if (*p < 0.01) return "***";
  if (*p < 0.05) return "**";
  return "";
}

inline nlohmann::ordered_json config_json(const AnalysisConfig& c) {
  nlohmann::ordered_json j;
  j["alpha"] = c.alpha;
  j["partitions"] = c.partitions;
  j["fwer"] = c.fwer;
  j["significance_level"] = c.significance_level();
  j["seed"] = c.master_seed;
  j["min_group"] = c.min_group;
  j["partition_score_mode"] = std::string(to_string(c.partition_score_mode));
  j["test"] = std::string(to_string(c.test));
  return j;
}

inline void write_report_csv(const ApunimReport& report, std::ostream& out) {
  const auto& c = report.config;
  out << "# alpha=" << format_double(c.alpha) << " partitions=" << c.partitions
      << " fwer=" << format_double(c.fwer) << " seed=" << c.master_seed
      << " min_group=" << c.min_group
      << " partition_score_mode=" << to_string(c.partition_score_mode)
      << " test=" << to_string(c.test) << '\n';
  csv::write_row(out, {"dimension", "group", "apunim", "p_raw", "p_corrected", "support",
                       "n_items", "p_obs", "p_apr"});
  for (const auto& d : report.dimensions) {
    for (const auto& g : d.groups) {
      csv::write_row(out, {g.dimension, g.group, format_optional(g.apunim),
                           format_optional(g.p_raw), format_optional(g.p_corrected),
                           std::to_string(g.support), std::to_string(g.n_items),
                           format_double(g.p_obs), format_double(g.p_apr)});
    }
  }
}

inline nlohmann::ordered_json report_json(const ApunimReport& report) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json j;
  j["config"] = config_json(report.config);
  j["scale"] = {{"kind", std::string(to_string(report.scale.kind()))},
                {"levels", std::vector<std::string>(report.scale.levels().begin(),
                                                    report.scale.levels().end())}};
  j["nominal_scale_warning"] = report.nominal_scale_warning;
  j["support_definition"] =
      "annotations by the group over the filtered items where it has at least min_group";
  j["dimensions"] = ordered_json::array();
  for (const auto& d : report.dimensions) {
    ordered_json dj;
    dj["dimension"] = d.dimension;
    dj["filtered_items"] = d.filtered_items;
    dj["used_items"] = d.used_items;
    dj["p_apr"] = opt(d.p_apr);
    dj["groups"] = ordered_json::array();
    for (const auto& g : d.groups) {
      ordered_json gj;
      gj["group"] = g.group;
      gj["apunim"] = opt(g.apunim);
      gj["p_raw"] = opt(g.p_raw);
      gj["p_corrected"] = opt(g.p_corrected);
      gj["reject"] = g.reject;
      // JSON has no infinities; the degenerate flag explains a null here.
      gj["t_statistic"] =
          g.t_statistic && std::isfinite(*g.t_statistic) ? opt(g.t_statistic) : nullptr;
      gj["degrees_of_freedom"] = g.degrees_of_freedom;
      gj["degenerate_variance"] = g.degenerate_variance;
      gj["support"] = g.support;
      gj["n_items"] = g.n_items;
      gj["p_obs"] = g.p_obs;
      gj["p_apr"] = g.p_apr;
      dj["groups"].push_back(std::move(gj));
    }
    dj["diagnostics"] = d.diagnostics;
    j["dimensions"].push_back(std::move(dj));
  }
  return j;
}

inline void write_report_json(const ApunimReport& report, std::ostream& out) {
  out << report_json(report).dump(2) << '\n';
}

// Fixed-width table; stars mark corrected p below 0.05 (**) and 0.01 (***).
inline void write_report_table(const ApunimReport& report, std::ostream& out) {
  const auto& c = report.config;
  out << "alpha=" << format_double(c.alpha) << "  partitions=" << c.partitions
      << "  fwer=" << format_double(c.fwer) << "  seed=" << c.master_seed
      << "  mode=" << to_string(c.partition_score_mode) << "  test=" << to_string(c.test)
      << '\n';
  if (report.nominal_scale_warning) {
    out << "warning: nominal scale, nDFU depends on the declared level order\n";
  }
  char line[256];
  for (const auto& d : report.dimensions) {
    out << '\n' << d.dimension << "  (filtered items: " << d.filtered_items
        << ", used: " << d.used_items << ")\n";
    std::snprintf(line, sizeof line, "  %-24s %10s %-3s %11s %8s %8s %8s\n", "group", "apunim",
                  "", "p_corrected", "support", "p_obs", "p_apr");
    out << line;
    for (const auto& g : d.groups) {
      std::snprintf(line, sizeof line, "  %-24s %10s %-3s %11s %8llu %8.4f %8.4f\n",
                    g.group.c_str(),
                    g.apunim ? format_fixed(*g.apunim).c_str() : "NA",
                    significance_stars(g.p_corrected).c_str(),
                    g.p_corrected ? format_fixed(*g.p_corrected).c_str() : "NA",
                    static_cast<unsigned long long>(g.support), g.p_obs, g.p_apr);
      out << line;
    }
    for (const auto& note : d.diagnostics) out << "  note: " << note << '\n';
  }
}

}  // namespace apunim

#endif  // APUNIM_REPORT_HPP_
