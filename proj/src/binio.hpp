// binio.hpp
//
// Little-endian binary stream helpers shared by the model, index, and
// corpus containers. Byte order is explicit so files are portable.

#ifndef ANE_SRC_BINIO_HPP
#define ANE_SRC_BINIO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ane::binio {

template <typename T>
inline T ByteSwap(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
    std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

template <typename T>
inline void WriteLE(std::ostream &out, T v) {
  if constexpr (std::endian::native == std::endian::big) v = ByteSwap(v);
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
inline T ReadLE(std::istream &in, const std::string &source, const char *what) {
  T v;
  in.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!in) throw std::runtime_error(source + ": truncated reading " + what);
  if constexpr (std::endian::native == std::endian::big) v = ByteSwap(v);
  return v;
}

inline void WriteU32(std::ostream &out, std::uint32_t v) { WriteLE(out, v); }
inline void WriteF64(std::ostream &out, double v) { WriteLE(out, v); }
inline void WriteF32(std::ostream &out, float v) { WriteLE(out, v); }

inline std::uint32_t ReadU32(std::istream &in, const std::string &source,
                             const char *what) {
  return ReadLE<std::uint32_t>(in, source, what);
}
inline double ReadF64(std::istream &in, const std::string &source, const char *what) {
  return ReadLE<double>(in, source, what);
}
inline float ReadF32(std::istream &in, const std::string &source, const char *what) {
  return ReadLE<float>(in, source, what);
}

inline void WriteMagic(std::ostream &out, const char *magic) {
  out.write(magic, static_cast<std::streamsize>(std::strlen(magic)));
}

inline void ExpectMagic(std::istream &in, const char *magic,
                        const std::string &source) {
  const std::size_t len = std::strlen(magic);
  std::string got(len, '\0');
  in.read(got.data(), static_cast<std::streamsize>(len));
  if (!in || got != magic)
    throw std::runtime_error(source + ": bad magic, expected " + magic);
}

// Length-prefixed UTF-8 string (u32 byte count).
inline void WriteString(std::ostream &out, const std::string &s) {
  WriteU32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string ReadString(std::istream &in, const std::string &source,
                              const char *what) {
  const std::uint32_t len = ReadU32(in, source, what);
  if (len > (1u << 20)) throw std::runtime_error(source + ": implausible string length");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error(source + ": truncated reading " + what);
  return s;
}

}  // namespace ane::binio

#endif  // ANE_SRC_BINIO_HPP
