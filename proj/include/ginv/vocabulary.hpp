#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ginv/pattern.hpp"

namespace ginv {

inline constexpr std::size_t kDefaultVocabularyCap = 100000;

// Ordered pattern set with a dense index. Patterns are kept sorted by
// (k, topo_bits, attrs) so indices are stable across runs.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Sorts the patterns; throws InvariantViolation on duplicates.
  explicit Vocabulary(std::vector<PatternCode> patterns);

  // Largest pattern size present (0 when empty).
  int k() const { return k_; }
  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }
  const std::vector<PatternCode>& patterns() const { return patterns_; }
  const PatternCode& operator[](std::size_t i) const { return patterns_[i]; }
  std::optional<std::size_t> find(const PatternCode& code) const;
  bool contains(const PatternCode& code) const { return find(code).has_value(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.patterns_ == b.patterns_;
  }

 private:
  int k_ = 0;
  std::vector<PatternCode> patterns_;
  std::unordered_map<PatternCode, std::size_t, PatternCodeHash> index_;
};

// All connected canonical patterns on exactly k vertices with attributes drawn
// from `alphabet`. Throws VocabularyTooLarge past `cap` patterns.
Vocabulary enumerate_vocabulary(int k, std::span<const AttrId> alphabet,
                                std::size_t cap = kDefaultVocabularyCap);

// Union over sizes 1..k.
Vocabulary enumerate_vocabulary_up_to(int k, std::span<const AttrId> alphabet,
                                      std::size_t cap = kDefaultVocabularyCap);

// Connected unattributed topologies on exactly k vertices, canonical form.
std::vector<PatternCode> connected_topologies(int k);

}  // namespace ginv
