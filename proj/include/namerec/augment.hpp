#pragma once

#include <limits>
#include <random>
#include <vector>

#include "namerec/core.hpp"
#include "namerec/plausibility.hpp"

namespace namerec {

using Rng = std::mt19937_64;

struct AugmentConfig {
  double p_insert = 0.25;
  double p_delete = 0.25;
  double p_substitute = 0.25;
  double p_transpose = 0.25;
  int max_edits = 2;
  bool fusion_enabled = false;
  /// Share of candidates drawn from fusion when it is enabled and possible.
  double fusion_rate = 0.5;
  double tau = -std::numeric_limits<double>::infinity();
  int per_name_budget = 3;
  /// Candidate attempts per requested member before giving up.
  int attempts_per_member = 20;

  /// Throws InvalidConfig.
  void validate() const;
};

enum class EditOp { Insert, Delete, Substitute, Transpose };

/// Applies 1..max_edits random edits. Inserted and substituted characters are
/// drawn from `model`'s next-character distribution at the edit position.
/// Never returns its input.
Name perturb(const Name& name, const AugmentConfig& config, const PlausibilityModel& model, Rng& rng);

/// Single deterministic edits, exposed for tests and tooling. Positions are
/// 0-based character offsets; Transpose swaps pos and pos+1.
std::u32string apply_edit(std::u32string chars, EditOp op, std::size_t pos, char32_t c = 0);

/// Prefix of `a` (split uniform in [1, L_a-1]) followed by the suffix of `b`
/// after a split uniform in [1, L_b-1]. Labeled like `a`.
LabeledName fuse_cross_cultural(const LabeledName& a, const LabeledName& b, Rng& rng);
/// Fixed split points, `a_split` characters of a and b from `b_split` on.
LabeledName fuse_at(const LabeledName& a, const LabeledName& b, std::size_t a_split, std::size_t b_split);

struct AugmentedMember {
  Name name;
  double score = 0.0;
  bool fused = false;
};

struct AugmentationSet {
  LabeledName source;
  std::vector<AugmentedMember> members;

  /// Members as training items that inherit the source label.
  std::vector<LabeledName> as_labeled() const;
};

/// Generates candidates until `per_name_budget` distinct survivors score at
/// least tau or the attempt budget runs out.
AugmentationSet augment_set(const LabeledName& source, const AugmentConfig& config, const PlausibilityModel& model,
                            const std::vector<LabeledName>& fusion_pool, Rng& rng);

}  // namespace namerec
