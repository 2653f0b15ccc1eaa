//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/binio.h"

#include <bit>
#include <fstream>
#include <iterator>

#include "hemgen/error.h"

namespace hemgen {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::bytes(std::string_view s) {
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s);
}

void ByteWriter::matrix(std::string_view name, const Eigen::MatrixXd &m) {
  str(name);
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  const double *p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i)
    f64(p[i]);
}

void ByteReader::need(std::size_t n) const {
  if (data_.size() - pos_ < n)
    throw Error(Errc::kCheckpointFormat, "truncated data", pos_);
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::bytes(std::size_t n) {
  need(n);
  std::string s(reinterpret_cast<const char *>(data_.data() + pos_), n);
  pos_ += n;
  return s;
}

std::string ByteReader::str() { return bytes(u32()); }

Eigen::MatrixXd ByteReader::matrix(std::string_view expected_name) {
  const std::string name = str();
  if (name != expected_name)
    throw Error(Errc::kCheckpointFormat,
                "expected tensor '" + std::string(expected_name) + "', found '" +
                    name + "'");
  const std::uint64_t rows = u64();
  const std::uint64_t cols = u64();
  constexpr auto kMax = static_cast<std::uint64_t>(1) << 31;
  if (rows > kMax || cols > kMax || (rows && cols > kMax / rows))
    throw Error(Errc::kCheckpointFormat, "tensor '" + name + "' too large");
  need(rows * cols * 8);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  double *p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i)
    p[i] = f64();
  return m;
}

std::vector<std::uint8_t> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::kFileNotFound, "cannot open " + path);
  return { std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>() };
}

void write_file(const std::string &path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(Errc::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char *>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out)
    throw Error(Errc::kIo, "short write to " + path);
}

}  // namespace hemgen
