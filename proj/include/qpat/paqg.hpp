// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qpat/grid.hpp"

namespace qpat {

/// PAQG grid container:
///
///   bytes 0..7     ASCII "PAQGRID\0"
///   bytes 8..11    header length H, uint32 little-endian
///   bytes 12..12+H UTF-8 JSON header
///                  {"version":1,"dims":[..],"spacing":[..],"origin":[..],
///                   "dtype":"f64","order":"row-major"}
///   then           product(dims) float64 little-endian samples, last axis fastest
std::string encode_grid(const ScalarField& field);
ScalarField decode_grid(std::string_view bytes);

void write_grid(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_grid(const std::filesystem::path& path);

}  // namespace qpat
