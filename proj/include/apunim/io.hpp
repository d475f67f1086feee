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

#ifndef APUNIM_IO_HPP_
#define APUNIM_IO_HPP_

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "apunim/csv.hpp"
#include "apunim/error.hpp"
#include "apunim/model.hpp"

namespace apunim {

namespace detail {

inline std::size_t require_column(const csv::Row& header, std::string_view name,
                                  std::string_view file) {
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    if (header.fields[i] == name) return i;
  }
  throw ValidationError(std::string(file) + ": missing column '" +
                        std::string(name) + "'");
}

inline std::string at_line(std::string_view file, std::size_t line,
                           std::string_view message) {
  return std::string(file) + ":" + std::to_string(line) + ": " +
         std::string(message);
}

// Fills in group lists of declared dimensions that did not list them, using
// first-appearance order in the annotator table.
inline void infer_groups(std::vector<Dimension>& dims,
                         const std::vector<std::size_t>& columns,
                         const std::vector<csv::Row>& rows) {
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (!dims[d].groups.empty()) continue;
    if (dims[d].ordinal_order) {
      dims[d].groups = *dims[d].ordinal_order;
      continue;
    }
    for (const auto& row : rows) {
      const std::string& v = row.fields[columns[d]];
      if (!v.empty() && !dims[d].index_of(v)) dims[d].groups.push_back(v);
    }
  }
}

}  // namespace detail

// Parses a `|`-separated list of level identifiers.
inline LabelSet parse_label_set(std::string_view text, const LabelScale& scale) {
  if (text.empty()) throw ValidationError("empty value");
  LabelSet set;
  std::size_t start = 0;
  while (true) {
    std::size_t end = text.find('|', start);
    std::string_view level = text.substr(start, end == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : end - start);
    auto idx = scale.index_of(level);
    if (!idx) {
      throw ValidationError("value out of scale: '" + std::string(level) + "'");
    }
    set.add(*idx);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return set;
}

inline std::string format_label_set(LabelSet set, const LabelScale& scale) {
  std::string out;
  set.for_each([&](std::size_t level) {
    if (!out.empty()) out.push_back('|');
    out += scale.levels()[level];
  });
  return out;
}

// Reads the annotation and annotator tables into a validated Dataset.
//
// An empty `dimensions` list declares every annotator column as a nominal
// dimension. Declared dimensions with no groups take their groups from the
// table in first-appearance order. Undeclared columns are ignored with a
// warning.
inline Dataset load_dataset(std::istream& annotations, std::istream& annotators,
                            const LabelScale& scale,
                            std::vector<Dimension> dimensions,
                            std::vector<std::string>* warnings = nullptr,
                            std::string_view annotations_name = "annotations",
                            std::string_view annotators_name = "annotators") {
  csv::Reader profile_reader(annotators);
  csv::Row header;
  if (!profile_reader.next(header)) {
    throw ValidationError(std::string(annotators_name) + ": missing header");
  }
  const std::size_t id_col =
      detail::require_column(header, "annotator_id", annotators_name);

  if (dimensions.empty()) {
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
      if (i != id_col) dimensions.push_back({header.fields[i], {}, std::nullopt});
    }
  }
  std::vector<std::size_t> columns;
  for (const auto& d : dimensions) {
    columns.push_back(detail::require_column(header, d.name, annotators_name));
  }
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    if (i == id_col) continue;
    if (std::find(columns.begin(), columns.end(), i) == columns.end() && warnings) {
      warnings->push_back(std::string(annotators_name) + ": ignoring undeclared column '" +
                          header.fields[i] + "'");
    }
  }

  std::vector<csv::Row> rows;
  csv::Row row;
  while (profile_reader.next(row)) {
    if (row.fields.size() != header.fields.size()) {
      throw ValidationError(detail::at_line(
          annotators_name, row.line,
          "malformed row: expected " + std::to_string(header.fields.size()) +
              " fields, got " + std::to_string(row.fields.size())));
    }
    if (row.fields[id_col].empty()) {
      throw ValidationError(detail::at_line(annotators_name, row.line,
                                            "malformed row: empty annotator_id"));
    }
    rows.push_back(std::move(row));
  }
  detail::infer_groups(dimensions, columns, rows);

  DatasetBuilder builder(scale, std::move(dimensions));
  std::vector<std::optional<std::string>> groups(columns.size());
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < columns.size(); ++d) {
      const std::string& v = r.fields[columns[d]];
      groups[d] = v.empty() ? std::nullopt : std::optional<std::string>(v);
    }
    try {
      builder.add_profile(r.fields[id_col], groups);
    } catch (const ValidationError& e) {
      throw ValidationError(detail::at_line(annotators_name, r.line, e.what()));
    }
  }

  csv::Reader reader(annotations);
  if (!reader.next(header)) {
    throw ValidationError(std::string(annotations_name) + ": missing header");
  }
  const std::size_t item_col = detail::require_column(header, "item_id", annotations_name);
  const std::size_t ann_col =
      detail::require_column(header, "annotator_id", annotations_name);
  const std::size_t value_col = detail::require_column(header, "value", annotations_name);
  while (reader.next(row)) {
    if (row.fields.size() != header.fields.size()) {
      throw ValidationError(detail::at_line(
          annotations_name, row.line,
          "malformed row: expected " + std::to_string(header.fields.size()) +
              " fields, got " + std::to_string(row.fields.size())));
    }
    if (row.fields[item_col].empty() || row.fields[ann_col].empty()) {
      throw ValidationError(detail::at_line(annotations_name, row.line,
                                            "malformed row: empty identifier"));
    }
    try {
      builder.add_annotation(row.fields[item_col], row.fields[ann_col],
                             parse_label_set(row.fields[value_col], builder.scale()));
    } catch (const ValidationError& e) {
      throw ValidationError(detail::at_line(annotations_name, row.line, e.what()));
    }
  }
  return std::move(builder).build();
}

inline Dataset load_dataset(const std::filesystem::path& annotations_path,
                            const std::filesystem::path& annotators_path,
                            const LabelScale& scale, std::vector<Dimension> dimensions,
                            std::vector<std::string>* warnings = nullptr) {
  std::ifstream annotations(annotations_path, std::ios::binary);
  if (!annotations) {
    throw ValidationError("cannot open " + annotations_path.string());
  }
  std::ifstream annotators(annotators_path, std::ios::binary);
  if (!annotators) {
    throw ValidationError("cannot open " + annotators_path.string());
  }
  return load_dataset(annotations, annotators, scale, std::move(dimensions), warnings,
                      annotations_path.filename().string(),
                      annotators_path.filename().string());
}

inline void write_annotations_csv(const Dataset& ds, std::ostream& out) {
  out << "item_id,annotator_id,value\n";
  std::vector<std::string> fields(3);
  for (std::size_t i = 0; i < ds.item_count(); ++i) {
    for (const auto& r : ds.annotations(i)) {
      fields[0] = ds.item_id(i);
      fields[1] = ds.annotator_id(r.annotator);
      fields[2] = format_label_set(r.values, ds.scale());
      csv::write_row(out, fields);
    }
  }
}

inline void write_annotators_csv(const Dataset& ds, std::ostream& out) {
  std::vector<std::string> fields{"annotator_id"};
  for (const auto& d : ds.dimensions()) fields.push_back(d.name);
  csv::write_row(out, fields);
  for (std::size_t a = 0; a < ds.annotator_count(); ++a) {
    fields[0] = ds.annotator_id(a);
    for (std::size_t d = 0; d < ds.dimensions().size(); ++d) {
      int g = ds.membership(a, d);
      fields[d + 1] = g == kMissingGroup
                          ? std::string()
                          : ds.dimensions()[d].groups[static_cast<std::size_t>(g)];
    }
    csv::write_row(out, fields);
  }
}

}  // namespace apunim

#endif  // APUNIM_IO_HPP_
