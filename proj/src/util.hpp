/*
 * Copyright 2026 The revlabel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REVLABEL_SRC_UTIL_HPP
#define REVLABEL_SRC_UTIL_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace revlabel::detail {

// Throws UnreadableFile.
std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view s, char sep);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

// "key = value" line parser shared by mapping, definition and alias files.
// Blank lines and '#' comments are skipped; `line` is 1-based.
struct KeyValueLine {
  std::size_t line = 0;
  std::string key;
  std::string value;
};
std::vector<KeyValueLine> parse_key_values(std::string_view text,
                                           std::string_view what);

struct CsvRow {
  std::size_t line = 0;  // physical line where the row starts
  std::vector<std::string> fields;
};

// RFC 4180. Throws SchemaViolation on an unterminated quote.
std::vector<CsvRow> parse_csv(std::string_view text, std::string_view source);

// Characters outside [A-Za-z0-9._-] become '_'.
std::string path_component(std::string_view name);

// Quotes a field when it holds a separator, quote or line break.
std::string csv_field(std::string_view value);

}  // namespace revlabel::detail

#endif  // REVLABEL_SRC_UTIL_HPP
