#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "ginv/census.hpp"

namespace ginv {

// On-disk census cache: one file per dataset.
//
// Layout (all integers little-endian):
//   header:  "GINVCEN1" (8 bytes) | u32 version | u64 record_count
//   record:  u32 payload_len | payload | u64 fnv1a64(payload)
//   payload: u64 graph_hash | u8 k | u8 norm | u8 mode | u64 samples | u64 seed
//            | u64 total_connected | u64 denominator_hint | u32 entry_count
//            | entry_count x entry
//   entry:   u8 k | u32 topo_bits | 8 x u8 attrs | u32 aut_count
//            | u64 count | f64 density (IEEE-754 bits)
//
// A record whose checksum does not match is dropped on load and recomputed;
// the remaining records are written back unchanged.
struct CacheKey {
  std::uint64_t graph_hash = 0;
  int k = 0;
  Norm norm = Norm::kOmega;
  CensusMode mode = CensusMode::kExact;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  auto tie() const {
    return std::tuple(graph_hash, k, static_cast<int>(norm), static_cast<int>(mode), samples, seed);
  }
  friend bool operator<(const CacheKey& a, const CacheKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const CacheKey& a, const CacheKey& b) { return a.tie() == b.tie(); }
};

// Exact-mode keys store samples and seed as 0.
CacheKey cache_key_for(const Graph& g, const CensusRequest& req);

class CensusCache {
 public:
  inline static constexpr std::uint32_t kVersion = 1;

  explicit CensusCache(std::filesystem::path file);

  // Loads the file if present. Returns the number of corrupt records dropped.
  std::size_t load();
  std::optional<DensityVector> find(const CacheKey& key) const;
  // Replaces an existing record with the same key in place, else appends.
  void put(const CacheKey& key, DensityVector dv);
  // Atomic write (temporary file + rename).
  void save() const;

  std::size_t size() const { return records_.size(); }
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  std::vector<std::pair<CacheKey, DensityVector>> records_;
  std::map<CacheKey, std::size_t> index_;
};

}  // namespace ginv
