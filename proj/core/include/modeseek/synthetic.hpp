#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "modeseek/explicit_dist.hpp"
#include "modeseek/model.hpp"

namespace modeseek {

/// A clean distribution contaminated with a noise distribution:
/// P = (1 - epsilon) * clean + epsilon * noise.
struct MixtureSpec {
  ExplicitDistribution clean;
  ExplicitDistribution noise;
  Rational epsilon;
};

struct CriticalEpsilon {
  Rational exact;
  double value;
};

/// Infimum noise rate at which an individual uniform-noise sequence overtakes
/// an individual uniform-clean sequence: M / (M + N) for clean support N and
/// noise support M. Counts may be arbitrarily large integers.
CriticalEpsilon critical_epsilon(const Rational& clean_support, const Rational& noise_support);

/// Pointwise mixture; overlapping support masses add.
ExplicitDistribution build_mixture(const MixtureSpec& spec);

/// Corrupts each word of each clean sequence independently: kept with
/// probability 1-p, else replaced by a uniformly chosen misspelling. The
/// output support enumerates every corruption pattern; its vocab extends the
/// clean vocab with the variant words.
ExplicitDistribution typo_channel(const ExplicitDistribution& clean,
                                  const Rational& per_word_error_prob,
                                  const std::map<std::string, std::vector<std::string>>& variants);

/// Closed-form model mixing an empty output of mass q with a uniform set of
/// branching^length sequences of exactly `length` tokens (total mass 1-q).
class LengthFamilyModel final : public AutoregressiveModel {
 public:
  LengthFamilyModel(Rational empty_mass, int branching, std::size_t length);

  ModelState initial_state() const override;
  ModelState step(const ModelState& state, TokenId token) const override;
  std::vector<double> next_token_log_probs(const ModelState& state) const override;
  std::optional<std::size_t> max_output_length() const override { return length_; }
  std::optional<std::string> state_key(const ModelState& state) const override;
  std::string kind() const override { return "length_family"; }

  const Rational& empty_mass() const { return empty_mass_; }
  int branching() const { return branching_; }
  std::size_t length() const { return length_; }

 private:
  Rational empty_mass_;
  int branching_;
  std::size_t length_;
  std::vector<double> logp_root_;
  std::vector<double> logp_inner_;
  std::vector<double> logp_leaf_;
};

/// One model per requested length, sharing q and branching factor.
std::vector<std::shared_ptr<const AutoregressiveModel>> length_family(
    const Rational& empty_mass, int branching, const std::vector<std::size_t>& lengths);

}  // namespace modeseek
