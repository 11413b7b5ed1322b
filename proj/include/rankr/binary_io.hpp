#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rankr {

// Little-endian scalar I/O, independent of host byte order.

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

inline void write_u64_le(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void write_f32_le(std::ostream& out, float v) {
  write_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

inline void write_f64_le(std::ostream& out, double v) {
  write_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

inline void write_i32_le(std::ostream& out, std::int32_t v) {
  write_u32_le(out, static_cast<std::uint32_t>(v));
}

inline std::uint32_t read_u32_le(std::istream& in) {
  char b[4];
  in.read(b, 4);
  if (in.gcount() != 4) throw std::runtime_error("unexpected end of binary stream");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return v;
}

inline std::uint64_t read_u64_le(std::istream& in) {
  char b[8];
  in.read(b, 8);
  if (in.gcount() != 8) throw std::runtime_error("unexpected end of binary stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return v;
}

inline float read_f32_le(std::istream& in) {
  return std::bit_cast<float>(read_u32_le(in));
}

inline double read_f64_le(std::istream& in) {
  return std::bit_cast<double>(read_u64_le(in));
}

inline std::int32_t read_i32_le(std::istream& in) {
  return static_cast<std::int32_t>(read_u32_le(in));
}

}  // namespace rankr
