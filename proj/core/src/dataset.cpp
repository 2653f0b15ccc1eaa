//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/dataset.h"

#include <charconv>
#include <cmath>
#include <limits>
#include <optional>

#include "hemgen/binio.h"
#include "hemgen/chem/smiles.h"
#include "hemgen/error.h"

namespace hemgen {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void unparseable(std::size_t line, const std::string &what) {
  throw Error(Errc::kUnparseableRow, "line " + std::to_string(line) + ": " + what, line);
}

// Splits one CSV line; a field wrapped in double quotes may contain commas
// and "" escapes.
std::vector<std::string> split_fields(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (true) {
    std::string field;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
      ++i;
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size())
          unparseable(line_no, "unterminated quoted field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      while (i < line.size() && line[i] != ',') {
        if (line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
          unparseable(line_no, "text after a quoted field");
        ++i;
      }
    } else {
      const auto comma = line.find(',', i);
      const auto end = comma == std::string_view::npos ? line.size() : comma;
      field = std::string(trim(line.substr(i, end - i)));
      i = end;
    }
    out.push_back(std::move(field));
    if (i >= line.size())
      break;
    ++i;  // comma
  }
  return out;
}

std::optional<double> parse_value(std::string_view s) {
  s = trim(s);
  if (s.empty() || s == "nan" || s == "NaN" || s == "NA")
    return std::numeric_limits<double>::quiet_NaN();
  if (s.front() == '+')
    s.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

}  // namespace

IngestResult parse_dataset(std::string_view text, const IngestOptions &options) {
  IngestResult result;
  std::size_t line_no = 0;
  std::vector<int> column_of;  // header position per required column
  std::size_t width = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view {} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF"))
      line.remove_prefix(3);
    if (trim(line).empty())
      continue;

    auto fields = split_fields(line, line_no);
    if (column_of.empty()) {
      std::vector<std::string_view> required = { kSmilesColumn, kCategoryColumn };
      required.insert(required.end(), kTargetNames.begin(), kTargetNames.end());
      for (const auto name: required) {
        int found = -1;
        for (std::size_t k = 0; k < fields.size(); ++k)
          if (fields[k] == name)
            found = static_cast<int>(k);
        if (found < 0)
          throw Error(Errc::kMissingColumn, "dataset header lacks column '" +
                                              std::string(name) + "'");
        column_of.push_back(found);
      }
      width = fields.size();
      continue;
    }
    if (fields.size() != width)
      unparseable(line_no, "expected " + std::to_string(width) + " fields, found " +
                             std::to_string(fields.size()));
    MoleculeRecord rec;
    rec.line = line_no;
    rec.smiles = fields[column_of[0]];
    rec.category = fields[column_of[1]];
    if (rec.smiles.empty())
      unparseable(line_no, "empty SMILES");
    for (int t = 0; t < kTargetCount; ++t) {
      const auto &raw = fields[column_of[2 + t]];
      const auto v = parse_value(raw);
      if (!v)
        unparseable(line_no, "column '" + std::string(kTargetNames[t]) + "': '" + raw +
                               "' is not a number");
      rec.properties[t] = *v;
    }
    if (!chem::is_valid(rec.smiles)) {
      result.invalid_lines.push_back(line_no);
      if (options.drop_invalid)
        continue;
    }
    result.records.push_back(std::move(rec));
  }
  if (column_of.empty())
    throw Error(Errc::kMissingColumn, "dataset has no header");
  return result;
}

IngestResult read_dataset(const std::string &path, const IngestOptions &options) {
  const auto bytes = read_file(path);
  return parse_dataset(std::string_view(reinterpret_cast<const char *>(bytes.data()),
                                        bytes.size()),
                       options);
}

std::vector<std::string> smiles_of(std::span<const MoleculeRecord> records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto &r: records)
    out.push_back(r.smiles);
  return out;
}

}  // namespace hemgen
