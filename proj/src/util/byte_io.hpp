#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

namespace ginv::detail {

// Little-endian byte buffer builder.
class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    auto u = static_cast<std::make_unsigned_t<T>>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<unsigned char>(u >> (8 * i)));
  }
  void put_f64(double d) { put(std::bit_cast<std::uint64_t>(d)); }
  void raw(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  std::vector<unsigned char>& buffer() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

// Bounds-checked little-endian reader; every accessor reports truncation.
class ByteReader {
 public:
  ByteReader(const unsigned char* data, std::size_t size) : p_(data), end_(data + size) {}
  bool has(std::size_t n) const { return static_cast<std::size_t>(end_ - p_) >= n; }
  template <typename T>
  bool get(T& out) {
    if (!has(sizeof(T))) return false;
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(p_[i]) << (8 * i);
    p_ += sizeof(T);
    out = static_cast<T>(u);
    return true;
  }
  bool get_f64(double& out) {
    std::uint64_t bits = 0;
    if (!get(bits)) return false;
    out = std::bit_cast<double>(bits);
    return true;
  }
  const unsigned char* take(std::size_t n) {
    if (!has(n)) return nullptr;
    const unsigned char* r = p_;
    p_ += n;
    return r;
  }
  bool done() const { return p_ == end_; }

 private:
  const unsigned char* p_;
  const unsigned char* end_;
};

// Whole file contents; empty when the file cannot be opened.
std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path, bool* opened = nullptr);

// Writes to a sibling temporary file and renames it over `path`. Throws
// DataError on failure.
void atomic_write(const std::filesystem::path& path, const void* data, std::size_t size);
inline void atomic_write(const std::filesystem::path& path, const std::string& text) {
  atomic_write(path, text.data(), text.size());
}

}  // namespace ginv::detail
