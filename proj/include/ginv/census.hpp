#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ginv/graph.hpp"
#include "ginv/pattern.hpp"
#include "ginv/rng.hpp"

namespace ginv {

enum class Norm : std::uint8_t {
  // ind(F, G) / (n! / (n-k)!)
  kTInd = 0,
  // ind(F, G) / sum over connected F' of ind(F', G)
  kOmega = 1,
};

enum class CensusMode : std::uint8_t { kExact = 0, kSampled = 1 };

const char* norm_name(Norm n);
Norm parse_norm(const std::string& s);
const char* census_mode_name(CensusMode m);
CensusMode parse_census_mode(const std::string& s);

struct DensityEntry {
  PatternCode code;
  // Exact mode: number of induced k-subsets isomorphic to the pattern.
  // Sampled mode: number of draws that reproduced the pattern's canonical
  // labeling, i.e. induced maps of the labeled pattern.
  std::uint64_t count = 0;
  double density = 0.0;
};

// Densities of connected k-vertex patterns for one graph, sorted by code.
struct DensityVector {
  int k = 0;
  Norm norm = Norm::kOmega;
  std::vector<DensityEntry> entries;
  // Exact: connected induced k-subsets. Sampled: draws counted in entries.
  std::uint64_t total_connected = 0;
  // Exact: n. Sampled: number of draws.
  std::uint64_t denominator_hint = 0;

  double density(const PatternCode& code) const;
  double sum() const;
  // Multiplies every density by c (counts are left alone).
  DensityVector scaled(double c) const;

  friend bool operator==(const DensityVector& a, const DensityVector& b);
};

// Enumerates each connected induced k-subset once (ESU extension with
// exclusive neighborhoods) and canonicalizes its induced attributed pattern.
// Throws GraphTooSmall if g.n() < k.
DensityVector exact_census(const Graph& g, int k, Norm norm);

// Draws `samples` uniform ordered k-tuples of distinct vertices and counts
// the tuples that are induced maps of a canonical labeled pattern. The TInd
// estimate is unbiased; the Omega estimate is a ratio estimator.
DensityVector sampled_census(const Graph& g, int k, Norm norm, std::uint64_t samples,
                             RngStream& rng);

struct CensusRequest {
  int k = 5;
  Norm norm = Norm::kOmega;
  CensusMode mode = CensusMode::kExact;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

struct CensusStats {
  std::size_t cache_hits = 0;
  std::size_t computed = 0;
  std::size_t corrupt_records = 0;
};

// Runs one census per graph, in parallel, backed by an optional on-disk cache
// file. Sampled censuses draw from a stream keyed by (seed, graph hash).
std::vector<DensityVector> census_dataset(std::span<const Graph> graphs, const CensusRequest& req,
                                          const std::optional<std::filesystem::path>& cache_file,
                                          int threads = 1, CensusStats* stats = nullptr);

}  // namespace ginv
