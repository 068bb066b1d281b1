#include "ginv/census_cache.hpp"

#include <bit>
#include <cstring>
#include <mutex>

#include "ginv/errors.hpp"
#include "ginv/hash.hpp"
#include "../util/byte_io.hpp"

namespace ginv {

namespace {

constexpr char kMagic[8] = {'G', 'I', 'N', 'V', 'C', 'E', 'N', '1'};

using Writer = detail::ByteWriter;
using Reader = detail::ByteReader;

std::vector<unsigned char> encode(const CacheKey& key, const DensityVector& dv) {
  Writer w;
  w.put<std::uint64_t>(key.graph_hash);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(key.k));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(key.norm));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(key.mode));
  w.put<std::uint64_t>(key.samples);
  w.put<std::uint64_t>(key.seed);
  w.put<std::uint64_t>(dv.total_connected);
  w.put<std::uint64_t>(dv.denominator_hint);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dv.entries.size()));
  for (const auto& e : dv.entries) {
    w.put<std::uint8_t>(e.code.k);
    w.put<std::uint32_t>(e.code.topo_bits);
    w.raw(e.code.attrs.data(), kMaxPatternSize);
    w.put<std::uint32_t>(e.code.aut_count);
    w.put<std::uint64_t>(e.count);
    w.put_f64(e.density);
  }
  return std::move(w.buffer());
}

std::optional<std::pair<CacheKey, DensityVector>> decode(const unsigned char* data, std::size_t size) {
  Reader r(data, size);
  CacheKey key;
  DensityVector dv;
  std::uint8_t k = 0, norm = 0, mode = 0;
  std::uint32_t count = 0;
  if (!r.get(key.graph_hash) || !r.get(k) || !r.get(norm) || !r.get(mode) || !r.get(key.samples) ||
      !r.get(key.seed) || !r.get(dv.total_connected) || !r.get(dv.denominator_hint) || !r.get(count)) {
    return std::nullopt;
  }
  if (k < 1 || k > kMaxPatternSize || norm > 1 || mode > 1) return std::nullopt;
  key.k = k;
  key.norm = static_cast<Norm>(norm);
  key.mode = static_cast<CensusMode>(mode);
  dv.k = k;
  dv.norm = key.norm;
  constexpr std::size_t kEntryBytes = 1 + 4 + kMaxPatternSize + 4 + 8 + 8;
  if (!r.has(std::size_t(count) * kEntryBytes)) return std::nullopt;
  dv.entries.resize(count);
  for (auto& e : dv.entries) {
    std::uint64_t bits = 0;
    r.get(e.code.k);
    r.get(e.code.topo_bits);
    std::memcpy(e.code.attrs.data(), r.take(kMaxPatternSize), kMaxPatternSize);
    r.get(e.code.aut_count);
    r.get(e.count);
    r.get(bits);
    e.density = std::bit_cast<double>(bits);
  }
  if (!r.done()) return std::nullopt;
  return std::pair(key, std::move(dv));
}

std::mutex& file_mutex(const std::filesystem::path& file) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::mutex> mutexes;
  std::lock_guard lock(registry_mutex);
  std::error_code ec;
  auto canonical = std::filesystem::weakly_canonical(file, ec);
  return mutexes[(ec ? file : canonical).string()];
}

}  // namespace

CensusCache::CensusCache(std::filesystem::path file) : file_(std::move(file)) {}

std::size_t CensusCache::load() {
  records_.clear();
  index_.clear();
  std::vector<unsigned char> data;
  {
    std::lock_guard lock(file_mutex(file_));
    data = detail::read_file_bytes(file_);
  }
  Reader r(data.data(), data.size());
  const unsigned char* magic = r.take(sizeof(kMagic));
  std::uint32_t version = 0;
  std::uint64_t declared = 0;
  if (!magic || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || !r.get(version) ||
      version != kVersion || !r.get(declared)) {
    // Unreadable header: the whole file counts as one corrupt record.
    return data.empty() ? 0 : 1;
  }
  std::size_t corrupt = 0;
  std::size_t seen = 0;
  while (!r.done()) {
    std::uint32_t len = 0;
    const unsigned char* payload = nullptr;
    std::uint64_t checksum = 0;
    if (!r.get(len) || !(payload = r.take(len)) || !r.get(checksum)) {
      ++corrupt;  // truncated tail
      break;
    }
    ++seen;
    if (fnv64({payload, len}) != checksum) {
      ++corrupt;
      continue;
    }
    auto rec = decode(payload, len);
    if (!rec) {
      ++corrupt;
      continue;
    }
    if (index_.count(rec->first)) continue;
    index_[rec->first] = records_.size();
    records_.push_back(std::move(*rec));
  }
  if (seen < declared && corrupt == 0) corrupt = declared - seen;
  return corrupt;
}

std::optional<DensityVector> CensusCache::find(const CacheKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second].second;
}

void CensusCache::put(const CacheKey& key, DensityVector dv) {
  if (auto it = index_.find(key); it != index_.end()) {
    records_[it->second].second = std::move(dv);
    return;
  }
  index_[key] = records_.size();
  records_.emplace_back(key, std::move(dv));
}

void CensusCache::save() const {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(records_.size());
  for (const auto& [key, dv] : records_) {
    auto payload = encode(key, dv);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(payload.size()));
    w.raw(payload.data(), payload.size());
    w.put<std::uint64_t>(fnv64(payload));
  }
  std::lock_guard lock(file_mutex(file_));
  detail::atomic_write(file_, w.buffer().data(), w.buffer().size());
}

}  // namespace ginv
