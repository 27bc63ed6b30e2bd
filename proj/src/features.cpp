#include <map>

#include "namerec/tokenizer.hpp"

namespace namerec {

int trigram_slot(std::u32string_view gram, int width) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char32_t c : gram) {
    for (int shift = 0; shift < 32; shift += 8) {
      h ^= (static_cast<std::uint64_t>(c) >> shift) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return static_cast<int>(h % static_cast<std::uint64_t>(width));
}

SparseFeatures prompt_features(std::string_view text, int width) {
  const std::u32string chars = to_u32(text);
  std::map<int, double> counts;
  std::size_t grams = 0;
  if (chars.size() < 3) {
    if (!chars.empty()) {
      counts[trigram_slot(chars, width)] += 1.0;
      grams = 1;
    }
  } else {
    for (std::size_t i = 0; i + 3 <= chars.size(); ++i) {
      counts[trigram_slot(std::u32string_view(chars).substr(i, 3), width)] += 1.0;
      ++grams;
    }
  }
  SparseFeatures f;
  f.width = width;
  f.index.reserve(counts.size());
  f.value.reserve(counts.size());
  for (const auto& [slot, count] : counts) {
    f.index.push_back(slot);
    f.value.push_back(count / static_cast<double>(grams));
  }
  return f;
}

}  // namespace namerec
