#include "ginv/vocabulary.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "ginv/errors.hpp"

namespace ginv {

Vocabulary::Vocabulary(std::vector<PatternCode> patterns) : patterns_(std::move(patterns)) {
  std::sort(patterns_.begin(), patterns_.end());
  if (auto dup = std::adjacent_find(patterns_.begin(), patterns_.end());
      dup != patterns_.end()) {
    throw InvariantViolation("duplicate pattern " + dup->to_string() + " in vocabulary");
  }
  index_.reserve(patterns_.size());
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    index_.emplace(patterns_[i], i);
    k_ = std::max<int>(k_, patterns_[i].k);
  }
}

std::optional<std::size_t> Vocabulary::find(const PatternCode& code) const {
  auto it = index_.find(code);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<PatternCode> connected_topologies(int k) {
  if (k < 1 || k > kMaxPatternSize) {
    throw ConfigError("pattern size " + std::to_string(k) + " outside [1, " +
                      std::to_string(kMaxPatternSize) + "]");
  }
  // Every connected graph on k vertices has a vertex whose removal leaves it
  // connected, so growing each (k-1)-vertex topology by one vertex attached
  // to a nonempty subset reaches every isomorphism class.
  std::set<PatternCode> level{canonical_code(1, 0)};
  for (int size = 2; size <= k; ++size) {
    std::set<PatternCode> next;
    const int shift = num_pairs(size - 1);
    for (const PatternCode& base : level) {
      for (std::uint32_t subset = 1; subset < (1u << (size - 1)); ++subset) {
        next.insert(canonical_code(size, base.topo_bits | (subset << shift)));
      }
    }
    level = std::move(next);
  }
  return {level.begin(), level.end()};
}

namespace {

void add_attributed(int k, std::span<const AttrId> alphabet, std::size_t cap,
                    std::set<PatternCode>& out) {
  std::vector<AttrId> sorted(alphabet.begin(), alphabet.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const auto topologies = connected_topologies(k);
  std::array<AttrId, kMaxPatternSize> tuple{};
  std::array<std::size_t, kMaxPatternSize> digit{};
  for (const PatternCode& topo : topologies) {
    digit.fill(0);
    for (;;) {
      for (int i = 0; i < k; ++i) tuple[i] = sorted[digit[i]];
      out.insert(canonical_code(k, topo.topo_bits, std::span<const AttrId>(tuple.data(), k)));
      if (out.size() > cap) {
        throw VocabularyTooLarge("vocabulary exceeds cap of " + std::to_string(cap) +
                                 " patterns");
      }
      int i = 0;
      while (i < k && ++digit[i] == sorted.size()) digit[i++] = 0;
      if (i == k) break;
    }
  }
}

}  // namespace

Vocabulary enumerate_vocabulary(int k, std::span<const AttrId> alphabet, std::size_t cap) {
  if (alphabet.empty()) throw ConfigError("alphabet must be nonempty");
  std::set<PatternCode> patterns;
  add_attributed(k, alphabet, cap, patterns);
  return Vocabulary({patterns.begin(), patterns.end()});
}

Vocabulary enumerate_vocabulary_up_to(int k, std::span<const AttrId> alphabet, std::size_t cap) {
  if (alphabet.empty()) throw ConfigError("alphabet must be nonempty");
  std::set<PatternCode> patterns;
  for (int size = 1; size <= k; ++size) add_attributed(size, alphabet, cap, patterns);
  return Vocabulary({patterns.begin(), patterns.end()});
}

}  // namespace ginv
