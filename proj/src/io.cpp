#include "sw4dvar/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sw4dvar {

namespace {

// All fields are written little-endian regardless of host order.
static_assert(sizeof(double) == 8);

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("SWE1: truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8)
         | (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double x) {
  uint64_t v;
  std::memcpy(&v, &x, 8);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("SWE1: truncated file");
  uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<uint64_t>(b[k]) << (8 * k);
  double x;
  std::memcpy(&x, &v, 8);
  return x;
}

}  // namespace

void dump_state(const StateVector& x, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write("SWE1", 4);
  put_u32(os, static_cast<uint32_t>(x.nlon));
  put_u32(os, static_cast<uint32_t>(x.nlat));
  for (double v : x.data) put_f64(os, v);
  if (!os) throw std::runtime_error("write failed: " + path);
}

StateVector load_state(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SWE1", 4) != 0)
    throw std::runtime_error("SWE1: bad magic in " + path);
  const uint32_t nlon = get_u32(is);
  const uint32_t nlat = get_u32(is);
  if (nlon == 0 || nlat == 0 || nlon > (1u << 20) || nlat > (1u << 20))
    throw std::runtime_error("SWE1: implausible dimensions in " + path);
  StateVector x(static_cast<int>(nlon), static_cast<int>(nlat));
  for (double& v : x.data) v = get_f64(is);
  // No trailing garbage allowed.
  char extra;
  if (is.read(&extra, 1)) throw std::runtime_error("SWE1: trailing bytes in " + path);
  return x;
}

void export_field_image(const StateVector& x, char field, const std::string& path) {
  const double* base = nullptr;
  switch (field) {
    case 'u': base = x.data.data(); break;
    case 'v': base = x.data.data() + x.ncells(); break;
    case 'h': base = x.data.data() + 2 * x.ncells(); break;
    default: throw std::invalid_argument("field must be u, v or h");
  }
  double lo = base[0], hi = base[0];
  for (int n = 0; n < x.ncells(); ++n) {
    lo = std::min(lo, base[n]);
    hi = std::max(hi, base[n]);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  char header[160];
  std::snprintf(header, sizeof(header), "P5\n# min=%.17g max=%.17g\n%d %d\n255\n", lo, hi, x.nlon,
                x.nlat);
  os << header;
  const double range = hi - lo;
  for (int j = 0; j < x.nlat; ++j)
    for (int i = 0; i < x.nlon; ++i) {
      const double v = base[i + j * x.nlon];
      const int pix = range > 0.0 ? static_cast<int>(std::min(255.0, (v - lo) / range * 255.0 + 0.5)) : 0;
      os.put(static_cast<char>(pix));
    }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace sw4dvar
