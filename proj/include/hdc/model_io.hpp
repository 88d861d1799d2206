#pragma once

#include <string>
#include <string_view>

#include "hdc/architectures.hpp"

namespace hdc {

/// Binary model image. Layout (all integers little-endian):
///   "HDCM", version u8, architecture u8, flags u8, reserved u8,
///   dim u32, G u16, P u16, channels u16, AM count u16, master seed u64,
///   gesture ids i32[G], position ids i32[P],
///   per AM x class: votes i64 count then i32[dim],
///   per AM x class: prototype words u64[ceil(dim/64)],
///   position model f32[4 * P] when flags bit 0 is set,
///   3 x (CIM levels u32, CIM d_max f64),
///   FNV-1a 64-bit checksum of everything above, u64.
/// Item, context and continuous item memories rebuild from the master seed.
std::string serialize_model(const Model& model);

Model deserialize_model(std::string_view bytes);

void save_model(const Model& model, const std::string& path);

Model load_model(const std::string& path);

}  // namespace hdc
