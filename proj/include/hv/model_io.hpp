#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hv/facespace.hpp"

namespace hv {

// "HFM1" model file: magic, u32 version = 1, dims (L2 = 2L, P, m, t, d as
// u32), scalars w and k, then x_bar, P_s (row-major), shape stds, g_bar,
// P_g, texture stds, Q, sigma. All little-endian, floats as 64-bit IEEE.
// Round trips byte-exactly.
std::vector<std::uint8_t> serialize_model(const FaceSpace& space);
FaceSpace deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const FaceSpace& space, const std::string& path);
FaceSpace load_model(const std::string& path);

// 16-byte content digest used to bind a vault to the model it was built
// with. Two independent 64-bit FNV-1a passes; integrity check, not crypto.
std::array<std::uint8_t, 16> digest16(std::span<const std::uint8_t> bytes);

std::array<std::uint8_t, 16> model_digest(const FaceSpace& space);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace hv
