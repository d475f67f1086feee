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

#ifndef APUNIM_CSV_HPP_
#define APUNIM_CSV_HPP_

#include <initializer_list>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apunim/error.hpp"

namespace apunim::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line endings.
// Blank lines are skipped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool next(Row& row) {
    row.fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool quoted_field = false;
    int c;
    while ((c = in_.get()) != EOF) {
      if (!any) {
        row.line = line_;
        any = true;
      }
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(static_cast<char>(c));
        }
        continue;
      }
      if (c == '"') {
        if (!field.empty() || quoted_field) {
          throw ValidationError("line " + std::to_string(line_) +
                                ": unexpected quote inside field");
        }
        in_quotes = true;
        quoted_field = true;
      } else if (c == ',') {
        row.fields.push_back(std::move(field));
        field.clear();
        quoted_field = false;
      } else if (c == '\r') {
        if (in_.peek() != '\n') field.push_back('\r');
      } else if (c == '\n') {
        ++line_;
        if (row.fields.empty() && field.empty() && !quoted_field) {
          any = false;  // blank line
          continue;
        }
        row.fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(static_cast<char>(c));
      }
    }
    if (in_quotes) {
      throw ValidationError("line " + std::to_string(row.line) +
                            ": unterminated quoted field");
    }
    if (!any) return false;
    row.fields.push_back(std::move(field));
    return true;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

inline void write_field(std::ostream& out, std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

inline void write_row(std::ostream& out, std::initializer_list<std::string> fields) {
  write_row(out, std::span<const std::string>(fields.begin(), fields.size()));
}

}  // namespace apunim::csv

#endif  // APUNIM_CSV_HPP_
