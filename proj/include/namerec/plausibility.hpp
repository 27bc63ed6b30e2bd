#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "namerec/core.hpp"

namespace namerec {

/// Additive-smoothed character n-gram model over boundary-padded names.
///
/// A name c_1..c_L is padded to (order-1) boundary markers, c_1..c_L, and one
/// closing boundary marker; the model predicts every symbol after the leading
/// pad. P(c | h) = (count(h, c) + k) / (count(h) + k * |alphabet|), where the
/// alphabet is the training characters plus the boundary and unknown symbols.
class PlausibilityModel {
 public:
  static constexpr char32_t kBoundary = 0x110000;
  static constexpr char32_t kUnknown = 0x110001;

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }
  /// Sorted real characters, then kBoundary, then kUnknown.
  const std::vector<char32_t>& symbols() const { return symbols_; }
  std::size_t alphabet_size() const { return symbols_.size(); }
  bool in_alphabet(char32_t c) const;

  /// Maps characters outside the alphabet to kUnknown.
  char32_t canonical(char32_t c) const;

  /// `history` holds the order-1 preceding padded symbols.
  double prob(std::u32string_view history, char32_t next) const;
  /// Distribution over symbols(), same order.
  std::vector<double> distribution(std::u32string_view history) const;
  /// The order-1 padded symbols preceding position `pos` of `chars`.
  std::u32string history_at(std::u32string_view chars, std::size_t pos) const;

  std::uint64_t history_count(std::u32string_view history) const;

 private:
  friend PlausibilityModel train_plausibility(const std::vector<Name>&, int, double, std::u32string_view);

  struct Row {
    std::uint64_t total = 0;
    std::unordered_map<char32_t, std::uint64_t> next;
  };

  int order_ = 3;
  double smoothing_ = 0.1;
  std::vector<char32_t> symbols_;
  std::unordered_map<std::u32string, Row> rows_;
};

/// Throws EmptyCorpus. `extra_alphabet` widens the alphabet beyond the corpus
/// characters (used when several models must share one alphabet).
PlausibilityModel train_plausibility(const std::vector<Name>& corpus, int order = 3, double smoothing = 0.1,
                                     std::u32string_view extra_alphabet = {});

/// Mean per-symbol log-probability over the L + 1 predicted symbols.
double plausibility_score(const PlausibilityModel& model, const Name& name);

/// Percentile (linear interpolation between order statistics) of corpus
/// scores. Throws EmptyCorpus.
double calibrate_tau(const PlausibilityModel& model, const std::vector<Name>& corpus, double percentile);

/// Percentile of raw values, same interpolation rule.
double percentile_of(std::vector<double> values, double percentile);

}  // namespace namerec
