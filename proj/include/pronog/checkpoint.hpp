#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "pronog/error.hpp"
#include "pronog/matrix.hpp"

namespace pronog {

// Little-endian binary checkpoint plumbing shared by encoder and condition-net
// files. Round-trips must be bit-exact.

namespace ckpt {

inline constexpr std::uint32_t kMagic = 0x474f4e50;  // "PNOG"
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint8_t kKindEncoder = 1;
inline constexpr std::uint8_t kKindConditionNet = 2;

inline void put_u8(std::ostream& out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline std::uint8_t get_u8(std::istream& in) {
  const int ch = in.get();
  if (ch == std::istream::traits_type::eof()) throw data_error("checkpoint: truncated file");
  return static_cast<std::uint8_t>(ch);
}

inline std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(get_u8(in)) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(get_u8(in)) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in) {
  return std::bit_cast<double>(get_u64(in));
}

inline void put_matrix(std::ostream& out, const Matrix& m) {
  put_u64(out, m.rows);
  put_u64(out, m.cols);
  for (double v : m.data) put_f64(out, v);
}

inline Matrix get_matrix(std::istream& in) {
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  if (rows > (1u << 24) || cols > (1u << 24)) throw data_error("checkpoint: implausible shape");
  Matrix m(rows, cols);
  for (double& v : m.data) v = get_f64(in);
  return m;
}

inline std::ofstream open_write(const std::string& path, std::uint8_t kind) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("checkpoint: cannot open " + path + " for writing");
  put_u32(out, kMagic);
  put_u32(out, kVersion);
  put_u8(out, kind);
  return out;
}

inline std::ifstream open_read(const std::string& path, std::uint8_t kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("checkpoint: cannot open " + path);
  if (get_u32(in) != kMagic) throw data_error("checkpoint: bad magic in " + path);
  const std::uint32_t version = get_u32(in);
  if (version != kVersion)
    throw data_error("checkpoint: unsupported version " + std::to_string(version));
  const std::uint8_t got = get_u8(in);
  if (got != kind) throw data_error("checkpoint: wrong kind in " + path);
  return in;
}

}  // namespace ckpt

// FNV-1a over the raw little-endian bytes of every parameter value, preceded
// by its shape; shape-sensitive and stable across runs.
class ParameterHasher {
 public:
  void feed_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) feed_byte(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
  void feed_matrix(const Matrix& m) {
    feed_u64(m.rows);
    feed_u64(m.cols);
    for (double v : m.data) feed_u64(std::bit_cast<std::uint64_t>(v));
  }
  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 0; i < 16; ++i) s[i] = digits[(state_ >> (60 - 4 * i)) & 0xf];
    return s;
  }

 private:
  void feed_byte(std::uint8_t b) {
    state_ ^= b;
    state_ *= 0x100000001b3ull;
  }
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace pronog
