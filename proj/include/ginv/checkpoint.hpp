#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ginv/autodiff.hpp"
#include "ginv/pattern.hpp"

namespace ginv {

// Trained model file.
//
// Layout (all integers little-endian):
//   "GINVMDL1" (8 bytes) | u32 version | u64 payload_len | payload
//   | u64 fnv1a64(payload)
//   payload: u64 task_hash | u32 len | settings JSON (UTF-8)
//            | u32 pattern_count | pattern_count x pattern
//            | u32 tensor_count | tensor_count x tensor
//   pattern: u8 k | u32 topo_bits | 8 x u8 attrs | u32 aut_count
//   tensor:  u32 len | name | u32 rows | u32 cols | rows*cols x f64 (row-major)
//
// The settings JSON records the model kind, its dimensions, the census
// settings the model was trained on and the selected hyperparameters.
struct Checkpoint {
  inline static constexpr std::uint32_t kVersion = 1;

  std::uint64_t task_hash = 0;
  nlohmann::ordered_json settings;
  std::vector<PatternCode> vocabulary;
  std::vector<std::pair<std::string, Mat>> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws DataError on a bad magic, unknown version or checksum mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies tensors into parameters by name. Throws DataError if a parameter is
// missing or has the wrong shape.
void restore_parameters(const Checkpoint& ckpt, const std::vector<Parameter*>& params);
std::vector<std::pair<std::string, Mat>> snapshot_parameters(const std::vector<Parameter*>& params);

}  // namespace ginv
