#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "groundmem/core.hpp"
#include "groundmem/json_extract.hpp"

namespace groundmem {

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kRed{255, 0, 0};
inline constexpr Rgb kBlue{0x1F, 0x4E, 0x79};

/// white, black, red, blue in that order (ties snap to the earlier entry).
std::vector<Rgb> default_palette();
Rgb outline_color(Outline o) noexcept;

/// Snaps every pixel within Euclidean RGB distance `tolerance` of a palette
/// color to the nearest such color; other pixels and the registry are kept.
Canvas normalize_canvas(const Canvas& c, const std::vector<Rgb>& palette, double tolerance);

std::vector<std::uint8_t> encode_png(const Canvas& c);
/// Pixels only; the registry is not part of the raster. Throws DecodeError.
Canvas decode_png(const std::vector<std::uint8_t>& bytes);

Json sidecar_json(const Canvas& c);
/// Fills scene and objects of `c` from a sidecar document. Throws DecodeError.
void apply_sidecar(Canvas& c, const Json& sidecar);

/// Writes `<stem>.png` and `<stem>.objects.json` into `dir`.
void save_canvas(const Canvas& c, const std::filesystem::path& dir, const std::string& stem);
Canvas load_canvas(const std::filesystem::path& dir, const std::string& stem);

/// Plain-text listing of the registry, black then red then blue.
std::string describe_registry(const Canvas& c);

}  // namespace groundmem
