//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/config.h"

#include <charconv>
#include <cmath>

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

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view kind) {
  throw Error(Errc::kBadConfig, "key '" + std::string(key) + "': '" +
                                    std::string(value) + "' is not " +
                                    std::string(kind));
}

template <class T>
T parse_number(std::string_view key, std::string_view v, std::string_view kind) {
  T out {};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    bad_value(key, v, kind);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view {} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::kBadConfig, "expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      throw Error(Errc::kBadConfig, "empty key", line_no);
    if (!kv.entries_.emplace(key, value).second)
      throw Error(Errc::kBadConfig, "duplicate key '" + key + "'", line_no);
  }
  return kv;
}

void KeyValues::set(const std::string &key, std::string value) {
  entries_[key] = std::move(value);
}

void KeyValues::set(const std::string &key, long long value) {
  entries_[key] = std::to_string(value);
}

void KeyValues::set(const std::string &key, std::uint64_t value) {
  entries_[key] = std::to_string(value);
}

void KeyValues::set(const std::string &key, double value) {
  entries_[key] = format_double(value);
}

void KeyValues::set(const std::string &key, bool value) {
  entries_[key] = value ? "true" : "false";
}

bool KeyValues::has(std::string_view key) const {
  return entries_.find(key) != entries_.end();
}

std::optional<std::string> KeyValues::get(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    return std::nullopt;
  return it->second;
}

std::string KeyValues::to_text() const {
  std::string out;
  for (const auto &[k, v]: entries_)
    out += k + " = " + v + "\n";
  return out;
}

void KeyValues::read(std::string_view key, std::string &out,
                     std::set<std::string> &used) const {
  if (auto v = get(key)) {
    out = *v;
    used.emplace(key);
  }
}

void KeyValues::read(std::string_view key, int &out,
                     std::set<std::string> &used) const {
  if (auto v = get(key)) {
    out = parse_number<int>(key, *v, "an integer");
    used.emplace(key);
  }
}

void KeyValues::read(std::string_view key, std::uint64_t &out,
                     std::set<std::string> &used) const {
  if (auto v = get(key)) {
    out = parse_number<std::uint64_t>(key, *v, "an unsigned integer");
    used.emplace(key);
  }
}

void KeyValues::read(std::string_view key, double &out,
                     std::set<std::string> &used) const {
  if (auto v = get(key)) {
    if (*v == "inf" || *v == "-inf") {
      out = (*v)[0] == '-' ? -INFINITY : INFINITY;
    } else {
      out = parse_number<double>(key, *v, "a number");
    }
    used.emplace(key);
  }
}

void KeyValues::read(std::string_view key, bool &out,
                     std::set<std::string> &used) const {
  if (auto v = get(key)) {
    if (*v == "true" || *v == "1")
      out = true;
    else if (*v == "false" || *v == "0")
      out = false;
    else
      bad_value(key, *v, "a boolean");
    used.emplace(key);
  }
}

void KeyValues::reject_unknown(const std::set<std::string> &used) const {
  for (const auto &[k, v]: entries_)
    if (!used.contains(k))
      throw Error(Errc::kBadConfig, "unknown key '" + k + "'");
}

}  // namespace hemgen
