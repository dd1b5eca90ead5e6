#include "relscope/proximity.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "relscope/errors.hpp"

namespace relscope {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'X', '1'};

std::string shape_text(std::uint32_t c, std::uint32_t h, std::uint32_t w) {
  return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32(unsigned char* p, std::uint32_t v) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

}  // namespace

std::vector<double> pool_proximity(const ProximityTensor& t, std::array<std::uint32_t, 3> expected) {
  if (t.channels != expected[0] || t.height != expected[1] || t.width != expected[2])
    throw ShapeError("proximity tensor shape " + shape_text(t.channels, t.height, t.width) +
                     ", expected " + shape_text(expected[0], expected[1], expected[2]));
  if (t.channels == 0) throw ShapeError("proximity tensor has no channels");
  const std::size_t plane = static_cast<std::size_t>(t.height) * t.width;
  if (t.values.size() != plane * t.channels)
    throw ShapeError("proximity tensor holds " + std::to_string(t.values.size()) + " values, expected " +
                     std::to_string(plane * t.channels));
  std::vector<double> out(t.values.begin(), t.values.begin() + static_cast<std::ptrdiff_t>(plane));
  for (std::size_t c = 1; c < t.channels; ++c) {
    const float* src = t.values.data() + c * plane;
    for (std::size_t k = 0; k < plane; ++k) out[k] = std::max(out[k], static_cast<double>(src[k]));
  }
  return out;
}

ProximityTensor read_proximity(std::istream& in) {
  unsigned char header[16];
  if (!in.read(reinterpret_cast<char*>(header), sizeof header))
    throw ParseError("proximity file shorter than its 16-byte header");
  if (std::memcmp(header, kMagic, 4) != 0) throw ParseError("proximity file lacks PRX1 magic");
  ProximityTensor t;
  t.channels = load_u32(header + 4);
  t.height = load_u32(header + 8);
  t.width = load_u32(header + 12);
  const std::size_t n = static_cast<std::size_t>(t.channels) * t.height * t.width;
  std::vector<unsigned char> raw(n * 4);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw ParseError("proximity payload truncated for shape " +
                     shape_text(t.channels, t.height, t.width));
  if (in.peek() != std::char_traits<char>::eof())
    throw ParseError("trailing bytes after proximity payload");
  t.values.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    t.values[k] = std::bit_cast<float>(load_u32(raw.data() + 4 * k));
  return t;
}

ProximityTensor read_proximity(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_proximity(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_proximity(std::ostream& out, const ProximityTensor& t) {
  const std::size_t n = static_cast<std::size_t>(t.channels) * t.height * t.width;
  if (t.values.size() != n) throw ShapeError("proximity tensor value count does not match its shape");
  std::vector<unsigned char> buf(16 + 4 * n);
  std::memcpy(buf.data(), kMagic, 4);
  store_u32(buf.data() + 4, t.channels);
  store_u32(buf.data() + 8, t.height);
  store_u32(buf.data() + 12, t.width);
  for (std::size_t k = 0; k < n; ++k)
    store_u32(buf.data() + 16 + 4 * k, std::bit_cast<std::uint32_t>(t.values[k]));
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing proximity tensor");
}

void write_proximity(const std::filesystem::path& path, const ProximityTensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_proximity(out, t);
}

}  // namespace relscope
