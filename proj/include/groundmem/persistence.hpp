#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "groundmem/memory.hpp"

namespace groundmem {

/// Writes `path` through a sibling temp file and a rename. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
/// Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Bank directory: manifest.json, frames/<id>.{png,objects.json,summary.txt,meta.txt},
/// links.jsonl, embeddings.bin (little-endian float64). The directory is
/// assembled next to `dir` and renamed into place.
void save_bank(const MemoryBank& bank, const std::filesystem::path& dir);
/// Throws IoError, FormatError or DecodeError.
MemoryBank load_bank(const std::filesystem::path& dir);

}  // namespace groundmem
