#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "modeseek/model.hpp"

namespace modeseek {

struct SearchBudget {
  std::uint64_t max_nodes = 1'000'000;
  std::size_t max_depth = 512;
};

struct SearchOptions {
  SearchBudget budget;
  /// Maximum number of tied argmax hypotheses retained (lexicographically
  /// smallest kept when more exist).
  std::size_t tie_cap = 16;
  /// Completions within this log-prob window of the best count as ties;
  /// partials are pruned only strictly below the window.
  double tie_tolerance = 1e-12;
  /// Incumbent pruning. Off = exhaustive reference traversal.
  bool prune = true;
  /// Delta caching: nodes hold only their incoming token and full states are
  /// rebuilt from the nearest retained ancestor when a second child is
  /// expanded. Off = every node retains its full state.
  bool cache_states = true;
};

struct SearchStats {
  std::uint64_t nodes_expanded = 0;
  std::uint64_t prunes = 0;
  std::uint64_t completes_considered = 0;
  std::uint64_t full_state_rebuilds = 0;
  std::uint64_t peak_cached_states = 0;
};

/// argmax holds every maximal complete hypothesis (up to tie_cap), all within
/// tie_tolerance of the best log-prob, in lexicographic order. exhausted is
/// true only if the whole space was explored or soundly pruned.
struct ModeResult {
  std::vector<Hypothesis> argmax;
  bool exhausted = false;
  SearchStats stats;
};

/// Exact unconditional mode by depth-first branch-and-bound over the prefix
/// tree. Children expand in descending conditional probability; every
/// expanded node contributes its EOS completion as a candidate; partials
/// strictly below the incumbent are pruned (extension never raises the
/// log-prob). Budget exhaustion returns best-so-far with exhausted=false.
ModeResult global_mode(const AutoregressiveModel& model, const SearchOptions& options = {});

/// Exact mode among sequences of exactly target_len tokens: EOS is masked
/// before that depth, forced at it, and no deeper partial is ever created.
/// Throws NoFeasibleSequence when the search proves no length-target_len
/// sequence has positive mass.
ModeResult length_conditional_mode(const AutoregressiveModel& model, std::size_t target_len,
                                   const SearchOptions& options = {});

struct EmptyModeEntry {
  std::string label;
  int length_bin;
  std::shared_ptr<const AutoregressiveModel> model;
};

struct EmptyModeRow {
  std::string label;
  int length_bin;
  double frac_empty_mode;
  double geomean_p_empty;
  double frac_exhausted;
};

/// Per (label, length_bin): fraction of models whose mode set contains the
/// empty sequence, geometric mean of P(empty) = exp(mean ln P(EOS | start)),
/// and the fraction of searches that ran to exhaustion. Rows are sorted by
/// label then bin.
std::vector<EmptyModeRow> empty_mode_report(const std::vector<EmptyModeEntry>& entries,
                                            const SearchOptions& options = {});

}  // namespace modeseek
