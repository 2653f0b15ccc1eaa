//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_SHA256_H_
#define HEMGEN_SHA256_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace hemgen {

using Sha256Digest = std::array<std::uint8_t, 32>;

// FIPS 180-4 SHA-256, incremental.
class Sha256 {
public:
  Sha256() noexcept;

  void update(std::span<const std::uint8_t> data) noexcept;
  void update(std::string_view data) noexcept;
  Sha256Digest finish() noexcept;

private:
  void compress(const std::uint8_t *block) noexcept;

  std::array<std::uint32_t, 8> h_;
  std::array<std::uint8_t, 64> buf_ {};
  std::size_t buf_len_ = 0;
  std::uint64_t total_len_ = 0;
};

Sha256Digest sha256(std::string_view data) noexcept;

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace hemgen

#endif  // HEMGEN_SHA256_H_
