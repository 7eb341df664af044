#pragma once

// On-disk d_k tables. Layout, all little endian:
//   "D3PL" | u16 version | u8 k | u64 N | N x u32 values d_k(1..N) | u64 checksum
// The checksum is FNV-1a 64 over every byte before it.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "d3lab/arith.hpp"

namespace d3lab::sieve_cache {

inline constexpr std::uint16_t kVersion = 1;

std::filesystem::path cache_path(const std::filesystem::path& dir, int k, arith::u64 limit);

// Throws IoError with the path on failure. Writes to a temp file and renames.
void write(const std::filesystem::path& file, const arith::DivisorTable& table);

// nullopt if the file is missing, truncated, has the wrong magic/version/k/N or
// a bad checksum; the reason goes to *why.
std::optional<arith::DivisorTable> read(const std::filesystem::path& file, int k, arith::u64 limit,
                                        std::string* why = nullptr);

// Reuse a valid cache file or sieve and (re)write it. A present but unusable
// file is reported on warn before rebuilding.
arith::DivisorTable load_or_build(const std::filesystem::path& dir, int k, arith::u64 limit, std::ostream& warn,
                                  bool* rebuilt = nullptr);

}  // namespace d3lab::sieve_cache
