#include "ginv/census.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "ginv/census_cache.hpp"
#include "ginv/errors.hpp"
#include "ginv/hash.hpp"
#include "ginv/parallel.hpp"

namespace ginv {

const char* norm_name(Norm n) { return n == Norm::kTInd ? "tind" : "omega"; }

Norm parse_norm(const std::string& s) {
  if (s == "tind") return Norm::kTInd;
  if (s == "omega") return Norm::kOmega;
  throw ConfigError("norm must be tind or omega, got \"" + s + "\"");
}

const char* census_mode_name(CensusMode m) { return m == CensusMode::kExact ? "exact" : "sampled"; }

CensusMode parse_census_mode(const std::string& s) {
  if (s == "exact") return CensusMode::kExact;
  if (s == "sampled") return CensusMode::kSampled;
  throw ConfigError("mode must be exact or sampled, got \"" + s + "\"");
}

double DensityVector::density(const PatternCode& code) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), code,
                             [](const DensityEntry& e, const PatternCode& c) { return e.code < c; });
  return it != entries.end() && it->code == code ? it->density : 0.0;
}

double DensityVector::sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.density;
  return s;
}

DensityVector DensityVector::scaled(double c) const {
  DensityVector out = *this;
  for (auto& e : out.entries) e.density *= c;
  return out;
}

bool operator==(const DensityVector& a, const DensityVector& b) {
  if (a.k != b.k || a.norm != b.norm || a.total_connected != b.total_connected ||
      a.denominator_hint != b.denominator_hint || a.entries.size() != b.entries.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (!(x.code == y.code) || x.code.aut_count != y.code.aut_count || x.count != y.count ||
        std::bit_cast<std::uint64_t>(x.density) != std::bit_cast<std::uint64_t>(y.density)) {
      return false;
    }
  }
  return true;
}

namespace {

// Process-wide memo: raw labeled pattern -> canonical code (nullopt when the
// pattern is disconnected).
class CanonicalMemo {
 public:
  static CanonicalMemo& instance() {
    static CanonicalMemo memo;
    return memo;
  }

  std::optional<PatternCode> lookup(int k, std::uint32_t bits,
                                    const std::array<AttrId, kMaxPatternSize>& attrs) {
    Key key{(static_cast<std::uint64_t>(k) << 32) | bits, std::bit_cast<std::uint64_t>(attrs)};
    {
      std::shared_lock lock(mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    std::optional<PatternCode> code;
    if (topology_connected(k, bits)) {
      code = canonical_code(k, bits, std::span<const AttrId>(attrs.data(), k));
    }
    std::unique_lock lock(mutex_);
    memo_.emplace(key, code);
    return code;
  }

 private:
  struct Key {
    std::uint64_t topo, attrs;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(splitmix64(k.topo ^ splitmix64(k.attrs)));
    }
  };
  std::shared_mutex mutex_;
  std::unordered_map<Key, std::optional<PatternCode>, KeyHash> memo_;
};

// Histogram over raw keys: topology bits in the low num_pairs(k) bits, then
// k attribute fields of `abits` bits each.
class RawHistogram {
 public:
  RawHistogram(int k, int abits) : k_(k), abits_(abits), shift_(num_pairs(k)) {
    const int key_bits = shift_ + k * abits;
    if (key_bits <= kDenseKeyBits) dense_.assign(std::size_t{1} << key_bits, 0);
  }

  std::uint64_t key(std::uint32_t bits, std::uint64_t packed_attrs) const {
    return bits | (packed_attrs << shift_);
  }

  void add(std::uint64_t key, std::uint64_t count) {
    if (!dense_.empty()) {
      dense_[key] += count;
    } else {
      sparse_[key] += count;
    }
  }

  // Folds raw counts into canonical patterns.
  std::map<PatternCode, std::uint64_t> fold() const {
    std::map<PatternCode, std::uint64_t> out;
    auto& memo = CanonicalMemo::instance();
    auto visit = [&](std::uint64_t key, std::uint64_t count) {
      std::uint32_t bits = static_cast<std::uint32_t>(key & ((std::uint64_t{1} << shift_) - 1));
      std::array<AttrId, kMaxPatternSize> attrs{};
      if (abits_ > 0) {
        const std::uint64_t mask = (std::uint64_t{1} << abits_) - 1;
        for (int i = 0; i < k_; ++i) attrs[i] = static_cast<AttrId>((key >> (shift_ + i * abits_)) & mask);
      }
      auto code = memo.lookup(k_, bits, attrs);
      if (!code) throw InvariantViolation("census produced a disconnected pattern");
      out[*code] += count;
    };
    if (!dense_.empty()) {
      for (std::size_t key = 0; key < dense_.size(); ++key)
        if (dense_[key]) visit(key, dense_[key]);
    } else {
      for (const auto& [key, count] : sparse_) visit(key, count);
    }
    return out;
  }

 private:
  static constexpr int kDenseKeyBits = 16;
  int k_, abits_, shift_;
  std::vector<std::uint64_t> dense_;
  std::unordered_map<std::uint64_t, std::uint64_t> sparse_;
};

int attr_bits(const Graph& g) {
  return g.has_attrs() ? std::bit_width(static_cast<unsigned>(g.max_attr())) : 0;
}

// ESU enumeration over dense bitsets. Leaves are never visited one by one:
// the final extension set is split by adjacency to the current subset (and by
// color) and counted with popcounts.
class EsuEnumerator {
 public:
  EsuEnumerator(const Graph& g, int k, RawHistogram& hist)
      : g_(g), k_(k), n_(g.n()), words_((g.n() + 63) / 64), abits_(attr_bits(g)), hist_(hist) {
    adj_.assign(std::size_t{n_} * words_, 0);
    for (const auto& [u, v] : g.edges()) {
      adj_[std::size_t{u} * words_ + v / 64] |= std::uint64_t{1} << (v % 64);
      adj_[std::size_t{v} * words_ + u / 64] |= std::uint64_t{1} << (u % 64);
    }
    if (abits_ > 0) {
      const int ncolors = g.max_attr() + 1;
      color_masks_.assign(std::size_t(ncolors) * words_, 0);
      for (VertexId v = 0; v < n_; ++v) {
        color_masks_[std::size_t(g.attr(v)) * words_ + v / 64] |= std::uint64_t{1} << (v % 64);
      }
      for (int c = 0; c < ncolors; ++c) {
        const std::uint64_t* m = &color_masks_[std::size_t(c) * words_];
        if (std::any_of(m, m + words_, [](std::uint64_t w) { return w != 0; })) colors_.push_back(c);
      }
    }
    ext_.assign(std::size_t(k_ + 1) * words_, 0);
    excl_.assign(std::size_t(k_ + 1) * words_, 0);
    split_.assign(std::size_t(2 * (k_ + 1)) * words_, 0);
  }

  void run() {
    if (k_ == 1) {
      for (VertexId v = 0; v < n_; ++v) hist_.add(hist_.key(0, g_.attr(v)), 1);
      return;
    }
    for (VertexId v = 0; v < n_; ++v) {
      sub_[0] = v;
      std::uint64_t* ext = level(ext_, 1);
      std::uint64_t* excl = level(excl_, 1);
      const std::uint64_t* row = adj_row(v);
      for (std::size_t w = 0; w < words_; ++w) {
        std::uint64_t upto;  // vertices <= v
        if (w < v / 64) {
          upto = ~std::uint64_t{0};
        } else if (w == v / 64) {
          upto = (v % 64 == 63) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (v % 64 + 1)) - 1);
        } else {
          upto = 0;
        }
        ext[w] = row[w] & ~upto;
        excl[w] = row[w] | upto;
      }
      extend(1, 0, g_.attr(v));
    }
  }

 private:
  std::uint64_t* level(std::vector<std::uint64_t>& buf, int d) { return buf.data() + std::size_t(d) * words_; }
  const std::uint64_t* adj_row(VertexId v) const { return adj_.data() + std::size_t(v) * words_; }
  bool adjacent(VertexId u, VertexId w) const { return (adj_row(u)[w / 64] >> (w % 64)) & 1u; }

  void extend(int d, std::uint32_t bits, std::uint64_t attr_key) {
    std::uint64_t* ext = level(ext_, d);
    if (d == k_ - 1) {
      leaf(bits, attr_key, ext);
      return;
    }
    std::uint64_t* excl = level(excl_, d);
    std::uint64_t* next_ext = level(ext_, d + 1);
    std::uint64_t* next_excl = level(excl_, d + 1);
    const int base = num_pairs(d);
    for (std::size_t wi = 0; wi < words_; ++wi) {
      while (ext[wi] != 0) {
        const int bit = std::countr_zero(ext[wi]);
        ext[wi] &= ext[wi] - 1;
        const VertexId w = static_cast<VertexId>(wi * 64 + bit);
        const std::uint64_t* row = adj_row(w);
        for (std::size_t x = 0; x < words_; ++x) {
          next_ext[x] = ext[x] | (row[x] & ~excl[x]);
          next_excl[x] = excl[x] | row[x];
        }
        std::uint32_t nbits = bits;
        for (int i = 0; i < d; ++i)
          if (adjacent(sub_[i], w)) nbits |= 1u << (base + i);
        sub_[d] = w;
        extend(d + 1, nbits, attr_key | (std::uint64_t(g_.attr(w)) << (d * abits_)));
      }
    }
  }

  void leaf(std::uint32_t bits, std::uint64_t attr_key, const std::uint64_t* ext) {
    std::size_t count = 0;
    for (std::size_t w = 0; w < words_; ++w) count += std::popcount(ext[w]);
    if (count == 0) return;
    const int last = k_ - 1;
    const int base = num_pairs(last);
    if (count <= 4) {
      for (std::size_t wi = 0; wi < words_; ++wi) {
        for (std::uint64_t m = ext[wi]; m != 0; m &= m - 1) {
          const VertexId w = static_cast<VertexId>(wi * 64 + std::countr_zero(m));
          std::uint32_t nbits = bits;
          for (int i = 0; i < last; ++i)
            if (adjacent(sub_[i], w)) nbits |= 1u << (base + i);
          hist_.add(hist_.key(nbits, attr_key | (std::uint64_t(g_.attr(w)) << (last * abits_))), 1);
        }
      }
      return;
    }
    split(0, ext, bits, attr_key);
  }

  void split(int i, const std::uint64_t* set, std::uint32_t bits, std::uint64_t attr_key) {
    const int last = k_ - 1;
    if (i == last) {
      if (abits_ == 0) {
        std::uint64_t c = 0;
        for (std::size_t w = 0; w < words_; ++w) c += std::popcount(set[w]);
        hist_.add(hist_.key(bits, attr_key), c);
        return;
      }
      for (int color : colors_) {
        const std::uint64_t* cm = &color_masks_[std::size_t(color) * words_];
        std::uint64_t c = 0;
        for (std::size_t w = 0; w < words_; ++w) c += std::popcount(set[w] & cm[w]);
        if (c) hist_.add(hist_.key(bits, attr_key | (std::uint64_t(color) << (last * abits_))), c);
      }
      return;
    }
    std::uint64_t* in = split_.data() + std::size_t(2 * i) * words_;
    std::uint64_t* out = in + words_;
    const std::uint64_t* row = adj_row(sub_[i]);
    bool any_in = false, any_out = false;
    for (std::size_t w = 0; w < words_; ++w) {
      in[w] = set[w] & row[w];
      out[w] = set[w] & ~row[w];
      any_in |= in[w] != 0;
      any_out |= out[w] != 0;
    }
    const int bit = num_pairs(last) + i;
    if (any_in) split(i + 1, in, bits | (1u << bit), attr_key);
    if (any_out) split(i + 1, out, bits, attr_key);
  }

  const Graph& g_;
  int k_;
  VertexId n_;
  std::size_t words_;
  int abits_;
  RawHistogram& hist_;
  std::vector<std::uint64_t> adj_, color_masks_, ext_, excl_, split_;
  std::vector<int> colors_;
  std::array<VertexId, kMaxPatternSize + 1> sub_{};
};

long double falling_factorial(std::uint64_t n, int k) {
  long double r = 1.0L;
  for (int i = 0; i < k; ++i) r *= static_cast<long double>(n - i);
  return r;
}

void check_size(const Graph& g, int k) {
  if (k < 1 || k > kMaxPatternSize) {
    throw ConfigError("pattern size " + std::to_string(k) + " outside [1, " +
                      std::to_string(kMaxPatternSize) + "]");
  }
  if (g.n() < static_cast<std::uint32_t>(k)) {
    throw GraphTooSmall("graph has " + std::to_string(g.n()) + " vertices, fewer than k=" +
                        std::to_string(k));
  }
}

}  // namespace

DensityVector exact_census(const Graph& g, int k, Norm norm) {
  check_size(g, k);
  if (g.n() > 65536) throw ConfigError("exact census supports graphs up to 65536 vertices; use sampled mode");
  RawHistogram hist(k, attr_bits(g));
  EsuEnumerator(g, k, hist).run();
  const auto counts = hist.fold();

  DensityVector dv;
  dv.k = k;
  dv.norm = norm;
  dv.denominator_hint = g.n();
  unsigned __int128 total_ind = 0;
  for (const auto& [code, count] : counts) {
    dv.total_connected += count;
    total_ind += static_cast<unsigned __int128>(count) * code.aut_count;
  }
  const long double denom = norm == Norm::kTInd ? falling_factorial(g.n(), k)
                                                 : static_cast<long double>(total_ind);
  dv.entries.reserve(counts.size());
  for (const auto& [code, count] : counts) {
    const auto ind = static_cast<unsigned __int128>(count) * code.aut_count;
    const double d = denom > 0 ? static_cast<double>(static_cast<long double>(ind) / denom) : 0.0;
    dv.entries.push_back({code, count, d});
  }
  return dv;
}

DensityVector sampled_census(const Graph& g, int k, Norm norm, std::uint64_t samples, RngStream& rng) {
  check_size(g, k);
  if (samples == 0) throw ConfigError("sampled census needs at least one sample");
  const int abits = attr_bits(g);
  auto& memo = CanonicalMemo::instance();
  std::unordered_map<std::uint64_t, std::optional<PatternCode>> local;
  std::map<PatternCode, std::uint64_t> counts;
  std::array<VertexId, kMaxPatternSize> tuple{};
  std::array<AttrId, kMaxPatternSize> attrs{};
  const std::uint32_t n = g.n();
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < k; ++i) {
      VertexId v;
      do {
        v = static_cast<VertexId>(rng.below(n));
      } while (std::find(tuple.begin(), tuple.begin() + i, v) != tuple.begin() + i);
      tuple[i] = v;
    }
    const std::uint32_t bits = induced_bits(g, std::span<const VertexId>(tuple.data(), k));
    std::uint64_t key = bits;
    for (int i = 0; i < k; ++i) {
      attrs[i] = g.attr(tuple[i]);
      key |= std::uint64_t(attrs[i]) << (num_pairs(k) + i * abits);
    }
    auto it = local.find(key);
    if (it == local.end()) {
      // A draw is an induced map of the canonical labeled pattern only when
      // it reproduces that labeling exactly.
      auto code = memo.lookup(k, bits, attrs);
      if (code && (code->topo_bits != bits ||
                   !std::equal(attrs.begin(), attrs.begin() + k, code->attrs.begin()))) {
        code.reset();
      }
      it = local.emplace(key, code).first;
    }
    if (it->second) ++counts[*it->second];
  }

  DensityVector dv;
  dv.k = k;
  dv.norm = norm;
  dv.denominator_hint = samples;
  for (const auto& [code, count] : counts) dv.total_connected += count;
  const double denom = norm == Norm::kTInd ? static_cast<double>(samples)
                                           : static_cast<double>(dv.total_connected);
  for (const auto& [code, count] : counts) {
    dv.entries.push_back({code, count, denom > 0 ? static_cast<double>(count) / denom : 0.0});
  }
  return dv;
}

CacheKey cache_key_for(const Graph& g, const CensusRequest& req) {
  CacheKey key;
  key.graph_hash = g.content_hash();
  key.k = req.k;
  key.norm = req.norm;
  key.mode = req.mode;
  if (req.mode == CensusMode::kSampled) {
    key.samples = req.samples;
    key.seed = req.seed;
  }
  return key;
}

std::vector<DensityVector> census_dataset(std::span<const Graph> graphs, const CensusRequest& req,
                                          const std::optional<std::filesystem::path>& cache_file,
                                          int threads, CensusStats* stats) {
  for (const Graph& g : graphs) check_size(g, req.k);
  if (req.mode == CensusMode::kSampled && req.samples == 0) {
    throw ConfigError("sampled census needs --samples >= 1");
  }
  std::vector<CacheKey> keys(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) keys[i] = cache_key_for(graphs[i], req);

  std::optional<CensusCache> cache;
  CensusStats local_stats;
  if (cache_file) {
    cache.emplace(*cache_file);
    local_stats.corrupt_records = cache->load();
  }

  std::vector<DensityVector> out(graphs.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (cache) {
      if (auto hit = cache->find(keys[i])) {
        out[i] = std::move(*hit);
        ++local_stats.cache_hits;
        continue;
      }
    }
    missing.push_back(i);
  }

  parallel_for(missing.size(), threads, [&](std::size_t j) {
    const std::size_t i = missing[j];
    if (req.mode == CensusMode::kExact) {
      out[i] = exact_census(graphs[i], req.k, req.norm);
    } else {
      auto rng = RngStream::derive(req.seed, {keys[i].graph_hash,
                                              static_cast<std::uint64_t>(StreamPurpose::kCensusSampling),
                                              static_cast<std::uint64_t>(req.k)});
      out[i] = sampled_census(graphs[i], req.k, req.norm, req.samples, rng);
    }
  });
  local_stats.computed = missing.size();

  if (cache && (!missing.empty() || local_stats.corrupt_records > 0)) {
    for (std::size_t i : missing) cache->put(keys[i], out[i]);
    cache->save();
  }
  if (stats) *stats = local_stats;
  return out;
}

}  // namespace ginv
