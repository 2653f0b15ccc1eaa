//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_CONFIG_H_
#define HEMGEN_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace hemgen {

// Flat "key = value" document. '#' starts a comment; blank lines are
// ignored; keys are unique. to_text() emits keys in sorted order, so equal
// documents serialize to equal bytes.
class KeyValues {
public:
  // Throws Error(kBadConfig, line) on malformed or duplicate lines.
  static KeyValues parse(std::string_view text);

  void set(const std::string &key, std::string value);
  void set(const std::string &key, long long value);
  void set(const std::string &key, std::uint64_t value);
  void set(const std::string &key, int value) { set(key, static_cast<long long>(value)); }
  void set(const std::string &key, double value);
  void set(const std::string &key, bool value);

  bool has(std::string_view key) const;
  const std::map<std::string, std::string, std::less<>> &entries() const noexcept {
    return entries_;
  }
  std::string to_text() const;

  // Typed readers: assign out and record key in used when present.
  // Throw Error(kBadConfig) when the value does not parse.
  void read(std::string_view key, std::string &out, std::set<std::string> &used) const;
  void read(std::string_view key, int &out, std::set<std::string> &used) const;
  void read(std::string_view key, std::uint64_t &out, std::set<std::string> &used) const;
  void read(std::string_view key, double &out, std::set<std::string> &used) const;
  void read(std::string_view key, bool &out, std::set<std::string> &used) const;

  // Throws Error(kBadConfig) naming the first key absent from used.
  void reject_unknown(const std::set<std::string> &used) const;

  bool operator==(const KeyValues &) const = default;

private:
  std::optional<std::string> get(std::string_view key) const;

  std::map<std::string, std::string, std::less<>> entries_;
};

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace hemgen

#endif  // HEMGEN_CONFIG_H_
