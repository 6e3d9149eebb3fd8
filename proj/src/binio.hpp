// Internal binary serialization helpers for the container formats.
// All scalar fields are little-endian; files end with a CRC32 of every
// preceding byte.
#pragma once

#include <boost/crc.hpp>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ovgen/common.hpp"

namespace ovgen::detail {

inline std::uint32_t crc32(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

struct ByteWriter {
  std::string buf;

  void raw(const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void i32(std::int32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f32(float v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
};

struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;

  explicit ByteReader(const std::string& b) : buf(b) {}

  void raw(void* p, std::size_t n) {
    if (pos + n > buf.size()) throw parse_error("container truncated");
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
  std::int32_t i32() { std::int32_t v; raw(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
  std::int64_t i64() { std::int64_t v; raw(&v, 8); return v; }
  float f32() { float v; raw(&v, 4); return v; }
  double f64() { double v; raw(&v, 8); return v; }
  std::string str() {
    std::uint32_t n = u32();
    if (pos + n > buf.size()) throw parse_error("container truncated");
    std::string s(buf.data() + pos, n);
    pos += n;
    return s;
  }
};

// Appends a CRC32 of the payload and writes the file atomically enough for
// our purposes (single write).
inline void write_file_with_crc(const std::string& path, const std::string& payload) {
  std::string out = payload;
  std::uint32_t crc = crc32(payload);
  out.append(reinterpret_cast<const char*>(&crc), 4);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw parse_error("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw parse_error("write failed: " + path);
}

// Reads the file, validates and strips the trailing CRC32.
inline std::string read_file_with_crc(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw parse_error("cannot open: " + path);
  std::string all((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (all.size() < 4) throw parse_error("container truncated: " + path);
  std::string payload = all.substr(0, all.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, all.data() + all.size() - 4, 4);
  if (crc32(payload) != stored) throw parse_error("checksum mismatch: " + path);
  return payload;
}

}  // namespace ovgen::detail
