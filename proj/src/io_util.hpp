#ifndef LTSSL_SRC_IO_UTIL_HPP
#define LTSSL_SRC_IO_UTIL_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ltssl/errors.hpp"

// Little-endian binary stream helpers shared by the dataset and checkpoint
// containers. Short reads throw IoError naming the file.

namespace ltssl::io {

static_assert(std::endian::native == std::endian::little,
              "container formats are defined little-endian");

struct Writer {
  std::ofstream out;
  std::string path;

  explicit Writer(const std::string& p) : out(p, std::ios::binary), path(p) {
    if (!out) throw IoError("cannot open for writing: " + p);
  }
  void bytes(const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw IoError("write failed: " + path);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void f64s(const std::vector<double>& v) { bytes(v.data(), v.size() * 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
};

struct Reader {
  std::ifstream in;
  std::string path;

  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw IoError("cannot open for reading: " + p);
  }
  void bytes(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
      throw IoError("truncated file: " + path);
  }
  std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  std::vector<double> f64s(std::size_t n) {
    std::vector<double> v(n);
    bytes(v.data(), n * 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
};

}  // namespace ltssl::io

#endif
