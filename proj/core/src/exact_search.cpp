#include "modeseek/exact_search.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class DfsSearcher {
 public:
  DfsSearcher(const AutoregressiveModel& model, const SearchOptions& opts,
              std::optional<std::size_t> target_len)
      : model_(model), opts_(opts), target_len_(target_len) {
    if (opts_.budget.max_nodes < 1 || opts_.budget.max_depth < 1)
      throw std::invalid_argument("search budget fields must be >= 1");
    if (opts_.tie_cap < 1) throw std::invalid_argument("tie_cap must be >= 1");
  }

  ModeResult run() {
    Frame root{nullptr, -1, 0, std::nullopt, 0};
    std::optional<ModelState> init = model_.initial_state();
    cache_add();
    expand(root, std::move(init), 0.0);
    ModeResult result;
    result.argmax = std::move(ties_);
    result.exhausted = !budget_exceeded_ && !coverage_lost_;
    result.stats = stats_;
    return result;
  }

 private:
  struct Frame {
    Frame* parent;
    TokenId token;  // delta: the token that produced this node (unset at root)
    std::size_t depth;
    std::optional<ModelState> retained;
    std::uint64_t expanded_children;
  };

  void cache_add() {
    ++cached_now_;
    stats_.peak_cached_states = std::max(stats_.peak_cached_states, cached_now_);
  }
  void cache_remove() { --cached_now_; }

  void expand(Frame& frame, std::optional<ModelState> state, double logprob) {
    ++stats_.nodes_expanded;
    cache_add();  // the frame's delta entry, live while the node is active

    std::vector<double> logp = model_.next_token_log_probs(*state);

    const bool at_target = target_len_ && frame.depth == *target_len_;
    const bool eos_allowed = !target_len_ || at_target;
    if (eos_allowed && logp[kEosId] != kNegInf) {
      ++stats_.completes_considered;
      offer_complete(frame, logprob + logp[kEosId]);
    }

    std::vector<std::pair<double, TokenId>> kids;
    if (!at_target) {
      for (std::size_t id = 1; id < logp.size(); ++id) {
        if (logp[id] == kNegInf) continue;
        assert(logp[id] <= 1e-9);
        kids.emplace_back(logp[id], static_cast<TokenId>(id));
      }
      // Strong incumbents first: descending conditional probability.
      std::sort(kids.begin(), kids.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
    }

    if (!opts_.cache_states && state) {
      frame.retained = std::move(*state);
      state.reset();
    }

    for (const auto& [lp, token] : kids) {
      const double child_lp = logprob + lp;
      if (frame.depth + 1 > opts_.budget.max_depth) {
        // Cannot descend. Only a loss of coverage if the child could still
        // have reached the tie window.
        if (child_lp >= best_ - opts_.tie_tolerance) coverage_lost_ = true;
        ++stats_.prunes;
        continue;
      }
      if (opts_.prune && child_lp < best_ - opts_.tie_tolerance) {
        ++stats_.prunes;
        continue;
      }
      if (stats_.nodes_expanded >= opts_.budget.max_nodes) {
        budget_exceeded_ = true;
        break;
      }

      std::optional<ModelState> child_state;
      if (frame.retained) {
        child_state = model_.step(*frame.retained, token);
        cache_add();
      } else if (frame.expanded_children == 0) {
        child_state = model_.step(*state, token);
        cache_add();
        state.reset();  // the in-flight state is spent on the first child
        cache_remove();
      } else {
        ++stats_.full_state_rebuilds;
        frame.retained = rebuild(frame);
        child_state = model_.step(*frame.retained, token);
        cache_add();
      }

      Frame child{&frame, token, frame.depth + 1, std::nullopt, 0};
      expand(child, std::move(child_state), child_lp);
      ++frame.expanded_children;
      if (budget_exceeded_) break;
    }

    if (state) {
      state.reset();
      cache_remove();
    }
    if (frame.retained) {
      frame.retained.reset();
      cache_remove();
    }
    cache_remove();  // delta entry
  }

  // Reconstitutes the frame's full state by walking back pointers to the
  // nearest ancestor holding one (the initial state anchors the walk) and
  // replaying the stored deltas.
  ModelState rebuild(const Frame& frame) {
    std::vector<TokenId> deltas;
    const Frame* node = &frame;
    while (!node->retained && node->parent) {
      deltas.push_back(node->token);
      node = node->parent;
    }
    ModelState state = node->retained ? *node->retained : model_.initial_state();
    cache_add();
    for (auto it = deltas.rbegin(); it != deltas.rend(); ++it) {
      ModelState next = model_.step(state, *it);
      cache_add();
      state = std::move(next);
      cache_remove();
    }
    return state;
  }

  void offer_complete(const Frame& frame, double logprob) {
    const double tol = opts_.tie_tolerance;
    if (logprob > best_ + tol) {
      best_ = logprob;
      ties_.clear();
      ties_.push_back(Hypothesis{path_of(frame), logprob, true});
      return;
    }
    if (logprob < best_ - tol) return;
    if (logprob > best_) {
      best_ = logprob;
      std::erase_if(ties_, [&](const Hypothesis& h) { return h.logprob < best_ - tol; });
    }
    Hypothesis hyp{path_of(frame), logprob, true};
    auto pos = std::lower_bound(ties_.begin(), ties_.end(), hyp,
                                [](const Hypothesis& a, const Hypothesis& b) { return a.seq < b.seq; });
    ties_.insert(pos, std::move(hyp));
    if (ties_.size() > opts_.tie_cap) ties_.pop_back();
  }

  Sequence path_of(const Frame& frame) const {
    Sequence seq;
    for (const Frame* node = &frame; node->parent; node = node->parent)
      seq.push_back(node->token);
    std::reverse(seq.begin(), seq.end());
    return seq;
  }

  const AutoregressiveModel& model_;
  SearchOptions opts_;
  std::optional<std::size_t> target_len_;
  SearchStats stats_;
  double best_ = kNegInf;
  std::vector<Hypothesis> ties_;
  bool budget_exceeded_ = false;
  bool coverage_lost_ = false;
  std::uint64_t cached_now_ = 0;
};

}  // namespace

ModeResult global_mode(const AutoregressiveModel& model, const SearchOptions& options) {
  return DfsSearcher(model, options, std::nullopt).run();
}

ModeResult length_conditional_mode(const AutoregressiveModel& model, std::size_t target_len,
                                   const SearchOptions& options) {
  ModeResult result = DfsSearcher(model, options, target_len).run();
  if (result.exhausted && result.argmax.empty())
    throw NoFeasibleSequence("no sequence of length " + std::to_string(target_len) +
                             " has positive probability");
  return result;
}

std::vector<EmptyModeRow> empty_mode_report(const std::vector<EmptyModeEntry>& entries,
                                            const SearchOptions& options) {
  struct Accum {
    std::uint64_t models = 0, empty = 0, exhausted = 0;
    double sum_log_p_empty = 0.0;
  };
  std::map<std::pair<std::string, int>, Accum> bins;
  for (const auto& entry : entries) {
    ModeResult mode = global_mode(*entry.model, options);
    bool empty_mode = std::any_of(mode.argmax.begin(), mode.argmax.end(),
                                  [](const Hypothesis& h) { return h.seq.empty(); });
    double log_p_empty = entry.model->next_token_log_probs(entry.model->initial_state())[kEosId];
    Accum& a = bins[{entry.label, entry.length_bin}];
    ++a.models;
    if (empty_mode) ++a.empty;
    if (mode.exhausted) ++a.exhausted;
    a.sum_log_p_empty += log_p_empty;
  }
  std::vector<EmptyModeRow> rows;
  rows.reserve(bins.size());
  for (const auto& [key, a] : bins) {
    double n = static_cast<double>(a.models);
    rows.push_back(EmptyModeRow{key.first, key.second, static_cast<double>(a.empty) / n,
                                std::exp(a.sum_log_p_empty / n),
                                static_cast<double>(a.exhausted) / n});
  }
  return rows;
}

}  // namespace modeseek
