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

#ifndef APUNIM_CONFIG_HPP_
#define APUNIM_CONFIG_HPP_

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apunim/error.hpp"
#include "apunim/metric.hpp"
#include "apunim/model.hpp"
#include "apunim/synth.hpp"

namespace apunim {

// Contents of a JSON config file:
//
//   {
//     "scale": {"kind": "ordinal", "levels": ["0", "1", "2"]},
//     "dimensions": [{"name": "age", "ordinal_order": ["18-24", "25-34"]},
//                    {"name": "gender", "groups": ["M", "F"]}],
//     "analysis": {"alpha": 0.2, "partitions": 100, "fwer": 0.95, "seed": 0,
//                  "min_group": 2, "partition_score_mode": "mean",
//                  "test": "pseudo-group"},
//     "simulation": {"n_items": 500, "annotators_per_item": 10, ...}
//   }
//
// Every section is optional.
struct ProjectConfig {
  std::optional<LabelScale> scale;
  std::vector<Dimension> dimensions;
  AnalysisConfig analysis;
  std::optional<SyntheticSpec> simulation;
};

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& j, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ValidationError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
T get_as(const json& j, std::string_view key, std::string_view where) {
  try {
    return j.at(std::string(key)).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("bad or missing '" + std::string(key) + "' in " + std::string(where));
  }
}

template <typename T>
void read_opt(const json& j, std::string_view key, std::string_view where, T& out) {
  if (j.contains(std::string(key))) out = get_as<T>(j, key, where);
}

inline LabelScale parse_scale(const json& j) {
  check_keys(j, "scale", {"kind", "levels"});
  const auto kind = get_as<std::string>(j, "kind", "scale");
  if (kind != "ordinal" && kind != "nominal") {
    throw ValidationError("scale.kind must be 'ordinal' or 'nominal'");
  }
  const json& levels = j.at("levels");
  if (levels.is_number_integer()) {
    auto scale = LabelScale::numeric(levels.get<std::size_t>());
    return LabelScale(kind == "ordinal" ? ScaleKind::kOrdinal : ScaleKind::kNominal,
                      {scale.levels().begin(), scale.levels().end()});
  }
  return LabelScale(kind == "ordinal" ? ScaleKind::kOrdinal : ScaleKind::kNominal,
                    get_as<std::vector<std::string>>(j, "levels", "scale"));
}

inline Dimension parse_dimension(const json& j) {
  check_keys(j, "dimension", {"name", "groups", "ordinal_order"});
  Dimension d;
  d.name = get_as<std::string>(j, "name", "dimension");
  read_opt(j, "groups", "dimension '" + d.name + "'", d.groups);
  if (j.contains("ordinal_order")) {
    d.ordinal_order = get_as<std::vector<std::string>>(j, "ordinal_order", "dimension");
    if (d.groups.empty()) d.groups = *d.ordinal_order;
  }
  d.validate();
  return d;
}

inline PartitionScoreMode parse_score_mode(std::string_view s) {
  if (s == "mean") return PartitionScoreMode::kMean;
  if (s == "size_matched") return PartitionScoreMode::kSizeMatched;
  throw ValidationError("partition_score_mode must be 'mean' or 'size_matched'");
}

inline SignificanceTest parse_test(std::string_view s) {
  if (s == "pseudo-group") return SignificanceTest::kPseudoGroup;
  if (s == "one-sample") return SignificanceTest::kOneSample;
  throw ValidationError("test must be 'pseudo-group' or 'one-sample'");
}

inline AnalysisConfig parse_analysis(const json& j) {
  check_keys(j, "analysis", {"alpha", "partitions", "fwer", "seed", "min_group",
                             "partition_score_mode", "test", "significance_level"});
  AnalysisConfig c;
  read_opt(j, "alpha", "analysis", c.alpha);
  read_opt(j, "partitions", "analysis", c.partitions);
  read_opt(j, "fwer", "analysis", c.fwer);
  read_opt(j, "seed", "analysis", c.master_seed);
  read_opt(j, "min_group", "analysis", c.min_group);
  if (j.contains("partition_score_mode")) {
    c.partition_score_mode =
        parse_score_mode(get_as<std::string>(j, "partition_score_mode", "analysis"));
  }
  if (j.contains("test")) c.test = parse_test(get_as<std::string>(j, "test", "analysis"));
  c.validate();
  // Written by the tool alongside fwer; accepted when consistent with it.
  if (j.contains("significance_level")) {
    const double level = get_as<double>(j, "significance_level", "analysis");
    if (std::fabs(level - c.significance_level()) > 1e-12) {
      throw ValidationError("analysis.significance_level disagrees with fwer");
    }
  }
  return c;
}

inline SyntheticSpec parse_simulation(const json& j, const std::optional<LabelScale>& scale) {
  check_keys(j, "simulation", {"n_items", "annotators_per_item", "dimensions", "effect",
                               "noise", "bell_width", "seed"});
  SyntheticSpec s;
  if (scale) s.scale = *scale;
  read_opt(j, "n_items", "simulation", s.n_items);
  read_opt(j, "annotators_per_item", "simulation", s.annotators_per_item);
  read_opt(j, "noise", "simulation", s.noise);
  read_opt(j, "bell_width", "simulation", s.bell_width);
  read_opt(j, "seed", "simulation", s.seed);
  if (j.contains("dimensions")) {
    for (const auto& dj : j.at("dimensions")) {
      check_keys(dj, "simulation dimension", {"name", "groups", "proportions"});
      SyntheticDimension d;
      d.name = get_as<std::string>(dj, "name", "simulation dimension");
      d.groups = get_as<std::vector<std::string>>(dj, "groups", "simulation dimension");
      if (dj.contains("proportions")) {
        d.proportions = get_as<std::vector<double>>(dj, "proportions", "simulation dimension");
      } else {
        d.proportions.assign(d.groups.size(), 1.0 / static_cast<double>(d.groups.size()));
      }
      s.dimensions.push_back(std::move(d));
    }
  }
  if (j.contains("effect") && !j.at("effect").is_null()) {
    const json& e = j.at("effect");
    if (e.is_string() && e.get<std::string>() == "none") {
      s.effect.reset();
    } else {
      check_keys(e, "effect", {"type", "dimension", "group_low", "group_high", "strength"});
      if (get_as<std::string>(e, "type", "effect") != "planted_bimodal") {
        throw ValidationError("effect.type must be 'planted_bimodal'");
      }
      PlantedEffect p;
      p.dimension = get_as<std::string>(e, "dimension", "effect");
      p.group_low = get_as<std::string>(e, "group_low", "effect");
      p.group_high = get_as<std::string>(e, "group_high", "effect");
      read_opt(e, "strength", "effect", p.strength);
      s.effect = p;
    }
  }
  return s;
}

}  // namespace detail

inline ProjectConfig parse_config(const nlohmann::json& j) {
  detail::check_keys(j, "config", {"scale", "dimensions", "analysis", "simulation"});
  ProjectConfig c;
  if (j.contains("scale")) c.scale = detail::parse_scale(j.at("scale"));
  if (j.contains("dimensions")) {
    if (!j.at("dimensions").is_array()) throw ValidationError("dimensions must be a list");
    for (const auto& d : j.at("dimensions")) c.dimensions.push_back(detail::parse_dimension(d));
  }
  if (j.contains("analysis")) c.analysis = detail::parse_analysis(j.at("analysis"));
  if (j.contains("simulation")) c.simulation = detail::parse_simulation(j.at("simulation"), c.scale);
  return c;
}

inline ProjectConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

inline nlohmann::ordered_json scale_json(const LabelScale& scale) {
  return {{"kind", std::string(to_string(scale.kind()))},
          {"levels", std::vector<std::string>(scale.levels().begin(), scale.levels().end())}};
}

inline nlohmann::ordered_json dimensions_json(std::span<const Dimension> dims) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& d : dims) {
    nlohmann::ordered_json dj;
    dj["name"] = d.name;
    dj["groups"] = d.groups;
    if (d.ordinal_order) dj["ordinal_order"] = *d.ordinal_order;
    out.push_back(std::move(dj));
  }
  return out;
}

inline nlohmann::ordered_json simulation_json(const SyntheticSpec& s) {
  nlohmann::ordered_json j;
  j["n_items"] = s.n_items;
  j["annotators_per_item"] = s.annotators_per_item;
  j["dimensions"] = nlohmann::ordered_json::array();
  for (const auto& d : s.dimensions) {
    j["dimensions"].push_back({{"name", d.name}, {"groups", d.groups},
                               {"proportions", d.proportions}});
  }
  if (s.effect) {
    j["effect"] = {{"type", "planted_bimodal"},
                   {"dimension", s.effect->dimension},
                   {"group_low", s.effect->group_low},
                   {"group_high", s.effect->group_high},
                   {"strength", s.effect->strength}};
  } else {
    j["effect"] = "none";
  }
  j["noise"] = s.noise;
  j["bell_width"] = s.bell_width;
  j["seed"] = s.seed;
  return j;
}

}  // namespace apunim

#endif  // APUNIM_CONFIG_HPP_
