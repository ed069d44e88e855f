#pragma once

#include <map>
#include <memory>

#include "modeseek/explicit_dist.hpp"
#include "modeseek/model.hpp"

namespace modeseek {

/// Exact autoregressive view of an explicit distribution. Conditionals are
/// subtree-mass ratios over a trie of the support:
///   P(t | prefix)   = mass(prefix t) / mass(prefix)
///   P(EOS | prefix) = P(prefix) / mass(prefix)
/// so the chain-rule product reproduces the stored probability exactly.
class TrieModel final : public AutoregressiveModel {
 public:
  explicit TrieModel(ExplicitDistribution dist);

  ModelState initial_state() const override;
  ModelState step(const ModelState& state, TokenId token) const override;
  std::vector<double> next_token_log_probs(const ModelState& state) const override;
  std::optional<std::size_t> max_output_length() const override { return dist_.max_length(); }
  std::optional<std::string> state_key(const ModelState& state) const override;
  std::string kind() const override { return "explicit"; }

  const ExplicitDistribution& distribution() const { return dist_; }

 private:
  struct Node {
    Rational mass;      // total probability of sequences through this prefix
    Rational terminal;  // probability of exactly this prefix
    std::map<TokenId, int> children;
    std::vector<double> logp;  // next-token log-probs, precomputed
  };

  struct State {
    int node;
    std::size_t depth;
  };

  int child_of(int node, TokenId token) const;

  ExplicitDistribution dist_;
  std::vector<Node> nodes_;
};

std::shared_ptr<const TrieModel> to_autoregressive(ExplicitDistribution dist);

}  // namespace modeseek
