#pragma once

#include <string>

#include "sw4dvar/state.hpp"

namespace sw4dvar {

/// SWE1 binary state dump:
///   bytes 0..3   magic "SWE1"
///   bytes 4..11  nlon, nlat as little-endian uint32
///   then 3*nlon*nlat little-endian float64 in u, v, h block order.
void dump_state(const StateVector& x, const std::string& path);
StateVector load_state(const std::string& path);

/// 8-bit binary PGM (P5) of one field, linear min-max normalization; the
/// min/max are recorded in the PGM comment line. A constant field maps to 0.
/// field is one of 'u', 'v', 'h'.
void export_field_image(const StateVector& x, char field, const std::string& path);

}  // namespace sw4dvar
