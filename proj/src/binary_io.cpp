#include "avf/binary_io.hpp"

#include <array>
#include <bit>
#include <fstream>

#include "avf/error.hpp"

namespace avf::io {

namespace {

template <std::size_t N>
void put_le(std::ostream& out, std::uint64_t bits) {
  std::array<char, N> buf{};
  for (std::size_t i = 0; i < N; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(buf.data(), N);
}

template <std::size_t N>
std::uint64_t get_le(std::istream& in, const std::string& what) {
  std::array<unsigned char, N> buf{};
  read_bytes(in, reinterpret_cast<char*>(buf.data()), N, what);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < N; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return bits;
}

}  // namespace

void write_magic(std::ostream& out, std::string_view magic) { out.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

void write_u32(std::ostream& out, std::uint32_t v) { put_le<4>(out, v); }

void write_f32(std::ostream& out, float v) { put_le<4>(out, std::bit_cast<std::uint32_t>(v)); }

void write_f64(std::ostream& out, double v) { put_le<8>(out, std::bit_cast<std::uint64_t>(v)); }

void read_bytes(std::istream& in, char* dst, std::size_t n, const std::string& what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw FormatError(what + ": truncated payload");
}

void expect_magic(std::istream& in, std::string_view magic, const std::string& what) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(magic.size()));
  if (static_cast<std::size_t>(in.gcount()) != magic.size() || got != magic) {
    throw FormatError(what + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

std::uint32_t read_u32(std::istream& in, const std::string& what) {
  return static_cast<std::uint32_t>(get_le<4>(in, what));
}

float read_f32(std::istream& in, const std::string& what) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(get_le<4>(in, what)));
}

double read_f64(std::istream& in, const std::string& what) { return std::bit_cast<double>(get_le<8>(in, what)); }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace avf::io
