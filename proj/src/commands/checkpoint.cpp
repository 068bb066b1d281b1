#include "ginv/checkpoint.hpp"

#include <cstring>
#include <map>

#include "ginv/errors.hpp"
#include "ginv/hash.hpp"
#include "../util/byte_io.hpp"

namespace ginv {

namespace {

constexpr char kMagic[8] = {'G', 'I', 'N', 'V', 'M', 'D', 'L', '1'};

void put_string(detail::ByteWriter& w, const std::string& s) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
  w.raw(s.data(), s.size());
}

bool get_string(detail::ByteReader& r, std::string& s) {
  std::uint32_t len = 0;
  if (!r.get(len)) return false;
  const unsigned char* p = r.take(len);
  if (!p) return false;
  s.assign(reinterpret_cast<const char*>(p), len);
  return true;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  detail::ByteWriter payload;
  payload.put<std::uint64_t>(ckpt.task_hash);
  put_string(payload, ckpt.settings.dump());
  payload.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.vocabulary.size()));
  for (const PatternCode& c : ckpt.vocabulary) {
    payload.put<std::uint8_t>(c.k);
    payload.put<std::uint32_t>(c.topo_bits);
    payload.raw(c.attrs.data(), kMaxPatternSize);
    payload.put<std::uint32_t>(c.aut_count);
  }
  payload.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    put_string(payload, name);
    payload.put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
    payload.put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) payload.put_f64(m(r, c));
  }
  detail::ByteWriter w;
  w.raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(Checkpoint::kVersion);
  w.put<std::uint64_t>(payload.buffer().size());
  w.raw(payload.buffer().data(), payload.buffer().size());
  w.put<std::uint64_t>(fnv64(payload.buffer()));
  detail::atomic_write(path, w.buffer().data(), w.buffer().size());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  bool opened = false;
  const auto data = detail::read_file_bytes(path, &opened);
  if (!opened) throw DataError("cannot open checkpoint " + path.string());
  const std::string where = "checkpoint " + path.string() + ": ";
  detail::ByteReader r(data.data(), data.size());
  const unsigned char* magic = r.take(sizeof(kMagic));
  if (!magic || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw DataError(where + "not a model file");
  std::uint32_t version = 0;
  std::uint64_t len = 0, checksum = 0;
  if (!r.get(version)) throw DataError(where + "truncated header");
  if (version != Checkpoint::kVersion) throw DataError(where + "unsupported version " + std::to_string(version));
  const unsigned char* body = nullptr;
  if (!r.get(len) || !(body = r.take(len)) || !r.get(checksum) || !r.done()) throw DataError(where + "truncated");
  if (fnv64({body, len}) != checksum) throw DataError(where + "checksum mismatch");

  Checkpoint ckpt;
  detail::ByteReader p(body, len);
  std::string settings;
  std::uint32_t count = 0;
  if (!p.get(ckpt.task_hash) || !get_string(p, settings) || !p.get(count)) throw DataError(where + "bad payload");
  try {
    ckpt.settings = nlohmann::ordered_json::parse(settings);
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + "bad settings");
  }
  ckpt.vocabulary.resize(count);
  for (PatternCode& c : ckpt.vocabulary) {
    const unsigned char* attrs = nullptr;
    if (!p.get(c.k) || !p.get(c.topo_bits) || !(attrs = p.take(kMaxPatternSize)) || !p.get(c.aut_count)) {
      throw DataError(where + "bad vocabulary");
    }
    std::memcpy(c.attrs.data(), attrs, kMaxPatternSize);
  }
  if (!p.get(count)) throw DataError(where + "bad tensor table");
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name;
    std::uint32_t rows = 0, cols = 0;
    if (!get_string(p, name) || !p.get(rows) || !p.get(cols) || !p.has(std::size_t(rows) * cols * 8)) {
      throw DataError(where + "bad tensor");
    }
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) p.get_f64(m(i, j));
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  if (!p.done()) throw DataError(where + "trailing bytes");
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, const std::vector<Parameter*>& params) {
  std::map<std::string, const Mat*> by_name;
  for (const auto& [name, m] : ckpt.tensors) by_name[name] = &m;
  for (Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw DataError("checkpoint has no tensor " + p->name);
    if (it->second->rows() != p->value.rows() || it->second->cols() != p->value.cols()) {
      throw DataError("checkpoint tensor " + p->name + " has the wrong shape");
    }
    p->value = *it->second;
  }
}

std::vector<std::pair<std::string, Mat>> snapshot_parameters(const std::vector<Parameter*>& params) {
  std::vector<std::pair<std::string, Mat>> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.emplace_back(p->name, p->value);
  return out;
}

}  // namespace ginv
