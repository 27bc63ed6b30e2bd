#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "namerec/promptgen.hpp"

namespace namerec {

/// Character vocabulary of the response decoder: BOS, EOS, UNK, then the 95
/// printable ASCII characters.
class Tokenizer {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kUnk = 2;
  static constexpr int kFirstChar = 3;
  static constexpr char32_t kFirstPrintable = 0x20;
  static constexpr char32_t kLastPrintable = 0x7E;

  int size() const { return kFirstChar + static_cast<int>(kLastPrintable - kFirstPrintable + 1); }
  int id(char32_t c) const;
  /// Printable form of a token; markers render as <bos>, <eos>, <unk>.
  std::string symbol(int id) const;

  /// Character ids of `response` followed by EOS.
  std::vector<int> encode(const ResponseText& response) const;
};

/// Hashed character-trigram counts of a prompt, normalized to unit sum.
/// Stored sparsely with ascending, unique indices.
struct SparseFeatures {
  std::vector<int> index;
  std::vector<double> value;
  int width = 0;
};

/// FNV-1a over the three code points, reduced modulo `width`. Texts shorter
/// than three characters hash as a single gram.
SparseFeatures prompt_features(std::string_view text, int width);
int trigram_slot(std::u32string_view gram, int width);

}  // namespace namerec
