#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

// Little-endian primitives shared by the AVF1, AVU8, AVNN and AVP1 formats.
// Values are assembled byte by byte so the encoding does not depend on the
// host byte order.

namespace avf::io {

void write_magic(std::ostream& out, std::string_view magic);
void write_u32(std::ostream& out, std::uint32_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);

/// Throws FormatError naming `what` when the stream ends early.
void expect_magic(std::istream& in, std::string_view magic, const std::string& what);
std::uint32_t read_u32(std::istream& in, const std::string& what);
float read_f32(std::istream& in, const std::string& what);
double read_f64(std::istream& in, const std::string& what);
void read_bytes(std::istream& in, char* dst, std::size_t n, const std::string& what);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace avf::io
