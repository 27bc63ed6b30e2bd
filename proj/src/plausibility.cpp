#include "namerec/plausibility.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace namerec {

bool PlausibilityModel::in_alphabet(char32_t c) const {
  return std::binary_search(symbols_.begin(), symbols_.end(), c);
}

char32_t PlausibilityModel::canonical(char32_t c) const { return in_alphabet(c) ? c : kUnknown; }

std::u32string PlausibilityModel::history_at(std::u32string_view chars, std::size_t pos) const {
  const auto n = static_cast<std::size_t>(order_ - 1);
  std::u32string h(n, kBoundary);
  for (std::size_t k = 0; k < n; ++k) {
    // h[k] is the symbol n-k positions before pos.
    const std::size_t back = n - k;
    if (pos >= back) h[k] = canonical(chars[pos - back]);
  }
  return h;
}

std::uint64_t PlausibilityModel::history_count(std::u32string_view history) const {
  auto it = rows_.find(std::u32string(history));
  return it == rows_.end() ? 0 : it->second.total;
}

double PlausibilityModel::prob(std::u32string_view history, char32_t next) const {
  const double k = smoothing_;
  const double v = static_cast<double>(symbols_.size());
  next = canonical(next);
  auto it = rows_.find(std::u32string(history));
  if (it == rows_.end()) return 1.0 / v;
  const auto& row = it->second;
  auto nit = row.next.find(next);
  const double c = nit == row.next.end() ? 0.0 : static_cast<double>(nit->second);
  return (c + k) / (static_cast<double>(row.total) + k * v);
}

std::vector<double> PlausibilityModel::distribution(std::u32string_view history) const {
  std::vector<double> out;
  out.reserve(symbols_.size());
  for (char32_t s : symbols_) out.push_back(prob(history, s));
  return out;
}

PlausibilityModel train_plausibility(const std::vector<Name>& corpus, int order, double smoothing,
                                     std::u32string_view extra_alphabet) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "plausibility model needs at least one name");
  if (order < 2) throw Error(ErrorCode::InvalidConfig, "n-gram order must be at least 2");
  if (!(smoothing > 0)) throw Error(ErrorCode::InvalidConfig, "smoothing must be positive");

  PlausibilityModel m;
  m.order_ = order;
  m.smoothing_ = smoothing;
  std::set<char32_t> alphabet(extra_alphabet.begin(), extra_alphabet.end());
  for (const auto& name : corpus) alphabet.insert(name.chars().begin(), name.chars().end());
  alphabet.erase(PlausibilityModel::kBoundary);
  alphabet.erase(PlausibilityModel::kUnknown);
  m.symbols_.assign(alphabet.begin(), alphabet.end());
  m.symbols_.push_back(PlausibilityModel::kBoundary);
  m.symbols_.push_back(PlausibilityModel::kUnknown);

  for (const auto& name : corpus) {
    const auto& cs = name.chars();
    for (std::size_t pos = 0; pos <= cs.size(); ++pos) {
      const char32_t next = pos < cs.size() ? cs[pos] : PlausibilityModel::kBoundary;
      auto& row = m.rows_[m.history_at(cs, pos)];
      ++row.total;
      ++row.next[next];
    }
  }
  return m;
}

double plausibility_score(const PlausibilityModel& model, const Name& name) {
  const auto& cs = name.chars();
  double total = 0.0;
  for (std::size_t pos = 0; pos <= cs.size(); ++pos) {
    const char32_t next = pos < cs.size() ? cs[pos] : PlausibilityModel::kBoundary;
    total += std::log(model.prob(model.history_at(cs, pos), next));
  }
  return total / static_cast<double>(cs.size() + 1);
}

double percentile_of(std::vector<double> values, double percentile) {
  if (values.empty()) throw Error(ErrorCode::EmptyCorpus, "percentile of an empty set");
  if (!(percentile >= 0 && percentile <= 100)) throw Error(ErrorCode::InvalidConfig, "percentile outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = percentile / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double calibrate_tau(const PlausibilityModel& model, const std::vector<Name>& corpus, double percentile) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot calibrate tau on an empty corpus");
  std::vector<double> scores;
  scores.reserve(corpus.size());
  for (const auto& n : corpus) scores.push_back(plausibility_score(model, n));
  return percentile_of(std::move(scores), percentile);
}

}  // namespace namerec
