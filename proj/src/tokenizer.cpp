#include "namerec/tokenizer.hpp"

#include <map>

namespace namerec {

int Tokenizer::id(char32_t c) const {
  if (c < kFirstPrintable || c > kLastPrintable) return kUnk;
  return kFirstChar + static_cast<int>(c - kFirstPrintable);
}

std::string Tokenizer::symbol(int id) const {
  switch (id) {
    case kBos: return "<bos>";
    case kEos: return "<eos>";
    case kUnk: return "<unk>";
    default: return std::string(1, static_cast<char>(kFirstPrintable + static_cast<char32_t>(id - kFirstChar)));
  }
}

std::vector<int> Tokenizer::encode(const ResponseText& response) const {
  std::vector<int> out;
  for (char32_t c : to_u32(response.text)) out.push_back(id(c));
  out.push_back(kEos);
  return out;
}

}  // namespace namerec
