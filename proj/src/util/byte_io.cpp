#include "byte_io.hpp"

#include <atomic>
#include <fstream>
#include <iterator>
#include <unistd.h>

#include "ginv/errors.hpp"

namespace ginv::detail {

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path, bool* opened) {
  std::ifstream in(path, std::ios::binary);
  if (opened) *opened = static_cast<bool>(in);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void atomic_write(const std::filesystem::path& path, const void* data, std::size_t size) {
  static std::atomic<std::uint64_t> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ginv::detail
