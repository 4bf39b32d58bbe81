#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "scratchsim/grid/field.hpp"

namespace scratchsim::grid {

// Binary field format, all integers and floats little-endian:
//   "SCRF" | u32 version = 1 | u8 kind (0 real, 1 complex) | u8 D
//   | D x u64 shape | D x (f64 lo, f64 hi) | row-major f64 samples
// Complex samples are interleaved (re, im). Only position-space fields are
// representable.

using AnyField = std::variant<ScalarField, ComplexField>;

std::vector<std::uint8_t> encode_field(const ScalarField& field);
std::vector<std::uint8_t> encode_field(const ComplexField& field);
/// Throws FormatError (UnsupportedDimensionError for D outside {2, 3}).
AnyField decode_field(std::span<const std::uint8_t> bytes);

void write_field(const std::filesystem::path& path, const ScalarField& field);
void write_field(const std::filesystem::path& path, const ComplexField& field);
AnyField read_field(const std::filesystem::path& path);

}  // namespace scratchsim::grid
