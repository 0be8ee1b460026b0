#pragma once

// Little-endian encoding helpers shared by the persisted file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "rankvec/error.hpp"

namespace rankvec::io {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

inline void write_f32(std::ostream& out, float v) {
  write_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void write_f64(std::ostream& out, double v) {
  write_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

// Reader that throws DataError naming the file and the field on short reads.
class Reader {
 public:
  Reader(std::istream& in, std::string source)
      : in_(in), source_(std::move(source)) {}

  void expect_magic(std::string_view magic) {
    std::string got(magic.size(), '\0');
    bytes(got.data(), got.size(), "magic");
    if (got != magic)
      throw DataError(source_ + ": bad magic, expected \"" +
                      std::string(magic) + "\"");
  }

  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::uint64_t u64(const char* what) {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  std::string string(std::size_t len, const char* what) {
    std::string s(len, '\0');
    bytes(s.data(), len, what);
    return s;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  const std::string& source() const { return source_; }

 private:
  void bytes(char* dst, std::size_t len, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in_.gcount()) != len)
      throw DataError(source_ + ": truncated file while reading " + what);
  }

  std::istream& in_;
  std::string source_;
};

// FNV-1a, 64-bit.
class Fnv1a {
 public:
  static constexpr std::uint64_t kOffset = 14695981039346656037ULL;
  static constexpr std::uint64_t kPrime = 1099511628211ULL;

  Fnv1a& bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= kPrime;
    }
    return *this;
  }
  Fnv1a& text(std::string_view s) { return bytes(s.data(), s.size()); }
  Fnv1a& u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    return bytes(b, 8);
  }
  Fnv1a& f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = kOffset;
};

}  // namespace rankvec::io
