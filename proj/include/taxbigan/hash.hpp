#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace taxbigan {

// 64-bit FNV-1a. Used for config fingerprints and artifact hashes in run
// manifests; not a cryptographic digest.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string hash_string(std::string_view bytes);
// Hash of a file's bytes. Throws InputError when the file cannot be read.
std::string hash_file(const std::string& path);

}  // namespace taxbigan
