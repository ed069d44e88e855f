#include "modeseek/trie_model.hpp"

#include <limits>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

TrieModel::TrieModel(ExplicitDistribution dist)
    : AutoregressiveModel(dist.vocab()), dist_(std::move(dist)) {
  nodes_.push_back(Node{});
  for (const auto& [seq, p] : dist_.entries()) {
    int node = 0;
    nodes_[0].mass += p;
    for (TokenId id : seq) {
      // push_back below may reallocate nodes_; take the child index by value
      // before growing and never hold references across the growth.
      int child = child_of(node, id);
      if (child < 0) {
        child = static_cast<int>(nodes_.size());
        nodes_[static_cast<std::size_t>(node)].children.emplace(id, child);
        nodes_.push_back(Node{});
      }
      node = child;
      nodes_[static_cast<std::size_t>(node)].mass += p;
    }
    nodes_[static_cast<std::size_t>(node)].terminal = p;
  }
  for (auto& node : nodes_) {
    node.logp.assign(vocab_.size(), kNegInf);
    node.logp[kEosId] = (node.terminal / node.mass).log();
    for (const auto& [token, child] : node.children) {
      node.logp[static_cast<std::size_t>(token)] =
          (nodes_[static_cast<std::size_t>(child)].mass / node.mass).log();
    }
  }
}

ModelState TrieModel::initial_state() const {
  return ModelState::wrap(State{0, 0}, sizeof(State));
}

int TrieModel::child_of(int node, TokenId token) const {
  const auto& children = nodes_[static_cast<std::size_t>(node)].children;
  auto it = children.find(token);
  return it == children.end() ? -1 : it->second;
}

ModelState TrieModel::step(const ModelState& state, TokenId token) const {
  const auto& s = state.get<State>();
  if (token == kEosId) throw InvalidToken("step on EOS");
  int child = child_of(s.node, token);
  if (child < 0)
    throw InvalidToken("step onto zero-probability token \"" + vocab_.token(token) + "\"");
  return ModelState::wrap(State{child, s.depth + 1}, sizeof(State));
}

std::vector<double> TrieModel::next_token_log_probs(const ModelState& state) const {
  return nodes_[static_cast<std::size_t>(state.get<State>().node)].logp;
}

std::optional<std::string> TrieModel::state_key(const ModelState& state) const {
  return "t" + std::to_string(state.get<State>().node);
}

std::shared_ptr<const TrieModel> to_autoregressive(ExplicitDistribution dist) {
  return std::make_shared<TrieModel>(std::move(dist));
}

}  // namespace modeseek
