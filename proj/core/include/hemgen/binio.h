//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef HEMGEN_BINIO_H_
#define HEMGEN_BINIO_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hemgen {

// Little-endian byte sink. Doubles are stored as their IEEE-754 bit pattern.
class ByteWriter {
public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::string_view s);
  // u32 length followed by the bytes.
  void str(std::string_view s);
  // Name, u64 rows, u64 cols, column-major doubles.
  void matrix(std::string_view name, const Eigen::MatrixXd &m);

  const std::vector<std::uint8_t> &data() const noexcept { return buf_; }

private:
  std::vector<std::uint8_t> buf_;
};

// Reader over a byte buffer. Every accessor throws Error(kCheckpointFormat)
// on truncation.
class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) { }

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string bytes(std::size_t n);
  std::string str();
  // Throws kCheckpointFormat if the stored name differs from expected.
  Eigen::MatrixXd matrix(std::string_view expected_name);

  bool at_end() const noexcept { return pos_ == data_.size(); }

private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string &path);
void write_file(const std::string &path, std::span<const std::uint8_t> data);

}  // namespace hemgen

#endif  // HEMGEN_BINIO_H_
