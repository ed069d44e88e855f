#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "modeseek/model.hpp"
#include "modeseek/predictors.hpp"

namespace modeseek {

struct BeamConfig {
  std::size_t beam_size = 5;
  /// Candidate continuations per live hypothesis, ranked by model log-prob
  /// (EOS competes like any token unless masked).
  std::size_t top_k = 500;
  /// Guidance weight applied to the predictor term while searching; final
  /// selection always uses unit weight.
  double alpha = 1.0;
  std::size_t max_len = 64;
};

/// A beam slot. The stored score is always the pure model log-likelihood;
/// guidance is the last attribute log-prob used for ranking and is never
/// accumulated into the score.
struct BeamEntry {
  Hypothesis hypothesis;
  double guidance = 0.0;
  bool frozen = false;
};

/// What a conditional search conditions on: either a fixed attribute id, or a
/// total output length, translated per step into the remaining-length class
/// the predictor scores.
class AttributeTarget {
 public:
  static AttributeTarget fixed(int attribute);
  static AttributeTarget total_length(std::size_t length);

  /// Class to condition on for an output holding emitted_len tokens so far;
  /// nullopt when the target is no longer reachable.
  std::optional<int> class_at(std::size_t emitted_len) const;

  bool is_total_length() const { return total_length_.has_value(); }
  std::size_t length() const { return *total_length_; }
  int fixed_id() const { return fixed_; }

 private:
  AttributeTarget() = default;
  int fixed_ = -1;
  std::optional<std::size_t> total_length_;
};

/// Standard beam search. Each live entry proposes its top-k continuations
/// (EOS included); completed entries freeze, stay on the beam, and keep
/// competing by score; the beam_size best survive each step. Returns frozen
/// entries by descending score.
std::vector<BeamEntry> beam_search(const AutoregressiveModel& model, const BeamConfig& config);

/// Beam search over outputs of exactly target_len tokens: EOS is masked (no
/// renormalization) before that step and forced at it. Throws
/// NoFeasibleSequence when every entry hits -inf.
std::vector<BeamEntry> length_constrained_beam(const AutoregressiveModel& model,
                                               std::size_t target_len, const BeamConfig& config);

/// Classifier-guided search for the conditional mode. Candidates are still
/// the top-k by model log-prob; survival is ranked by score + alpha *
/// predictor guidance, re-derived fresh each step (the per-step attribute
/// ratios telescope, so guidance never accumulates into the score). Final
/// selection orders completed entries by score + guidance with alpha
/// excluded.
std::vector<BeamEntry> conditional_beam(const AutoregressiveModel& model,
                                        const AttributePredictor& predictor,
                                        const AttributeTarget& target, const BeamConfig& config);

struct WinrateResult {
  double frac_a = 0.0;
  double frac_tie = 0.0;
  double frac_b = 0.0;
};

/// Index-wise comparison of two aligned output lists by model score; scores
/// within tie_tolerance count as ties. Throws LengthMismatch on unaligned
/// input. Fractions sum to 1.
WinrateResult winrate(std::span<const Hypothesis> a_outputs, std::span<const Hypothesis> b_outputs,
                      double tie_tolerance = 1e-12);

}  // namespace modeseek
