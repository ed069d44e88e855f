#include "modeseek/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_attribute(int attribute, int count) {
  if (attribute < 0 || attribute >= count)
    throw PredictorDomainError("attribute " + std::to_string(attribute) +
                               " outside the predictor's space of " + std::to_string(count));
}

std::uint64_t fnv1a64(std::uint64_t seed, std::span<const TokenId> prefix,
                      std::optional<TokenId> candidate) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(seed);
  for (TokenId id : prefix) mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(id)) + 2);
  mix(candidate ? static_cast<std::uint64_t>(*candidate) + 2 : 1);
  return h;
}

}  // namespace

int LengthBuckets::class_of(std::size_t remaining) {
  if (remaining <= 16) return static_cast<int>(remaining);
  if (remaining <= 32) return 17 + static_cast<int>((remaining - 17) / 4);
  if (remaining <= 64) return 21 + static_cast<int>((remaining - 33) / 16);
  return 23;
}

std::pair<std::size_t, std::optional<std::size_t>> LengthBuckets::range_of(int cls) {
  if (cls < 0 || cls >= kNumLengthClasses)
    throw PredictorDomainError("length class " + std::to_string(cls) + " out of range");
  if (cls <= 16) return {static_cast<std::size_t>(cls), static_cast<std::size_t>(cls)};
  if (cls <= 20) {
    std::size_t lo = 17 + 4 * static_cast<std::size_t>(cls - 17);
    return {lo, lo + 3};
  }
  if (cls <= 22) {
    std::size_t lo = 33 + 16 * static_cast<std::size_t>(cls - 21);
    return {lo, lo + 15};
  }
  return {65, std::nullopt};
}

// ---------------------------------------------------------------------------
// ExactLengthPredictor

struct ExactLengthPredictor::Impl {
  std::shared_ptr<const AutoregressiveModel> model;
  std::size_t horizon;

  struct StateInfo {
    std::vector<double> probs;               // exp of next-token log-probs
    std::map<TokenId, ModelState> children;  // positive-probability steps
  };
  mutable std::mutex mu;
  mutable std::map<std::string, StateInfo> states;
  mutable std::map<std::pair<std::string, std::size_t>, double> terminate;

  std::string key_of(const ModelState& state) const {
    auto key = model->state_key(state);
    if (!key)
      throw std::invalid_argument("exact_length_predictor: model does not expose state keys");
    return *key;
  }

  const StateInfo& info_of(const std::string& key, const ModelState& state) const {
    auto it = states.find(key);
    if (it != states.end()) return it->second;
    StateInfo info;
    std::vector<double> logp = model->next_token_log_probs(state);
    info.probs.resize(logp.size());
    for (std::size_t id = 0; id < logp.size(); ++id) {
      info.probs[id] = logp[id] == kNegInf ? 0.0 : std::exp(logp[id]);
      if (id != static_cast<std::size_t>(kEosId) && info.probs[id] > 0.0)
        info.children.emplace(static_cast<TokenId>(id), model->step(state, static_cast<TokenId>(id)));
    }
    return states.emplace(key, std::move(info)).first->second;
  }

  // P(exactly `remaining` more tokens then EOS | state). Memoized on
  // (state key, remaining); recursion on remaining always terminates.
  double p_terminate(const std::string& key, const ModelState& state, std::size_t remaining) const {
    auto memo = terminate.find({key, remaining});
    if (memo != terminate.end()) return memo->second;
    const StateInfo& info = info_of(key, state);
    double p;
    if (remaining == 0) {
      p = info.probs[kEosId];
    } else {
      p = 0.0;
      for (const auto& [token, child] : info.children) {
        double pt = info.probs[static_cast<std::size_t>(token)];
        p += pt * p_terminate(key_of(child), child, remaining - 1);
      }
    }
    terminate.emplace(std::make_pair(key, remaining), p);
    return p;
  }

  // Remaining-length probabilities for the extended query point, plus the
  // beyond-horizon leftover. EOS candidates terminate: point mass at 0.
  std::vector<double> remaining_vec(const PrefixContext& ctx, std::optional<TokenId> candidate,
                                    double* leftover) const {
    std::vector<double> probs(horizon + 1, 0.0);
    if (candidate && *candidate == kEosId) {
      probs[0] = 1.0;
      *leftover = 0.0;
      return probs;
    }
    std::lock_guard<std::mutex> lock(mu);
    ModelState state = *ctx.state;
    if (candidate) {
      const StateInfo& info = info_of(key_of(state), state);
      auto it = info.children.find(*candidate);
      if (it == info.children.end())
        throw InvalidToken("exact_length_predictor: zero-probability candidate");
      state = it->second;
    }
    std::string key = key_of(state);
    double total = 0.0;
    for (std::size_t r = 0; r <= horizon; ++r) {
      probs[r] = p_terminate(key, state, r);
      total += probs[r];
    }
    *leftover = std::max(0.0, 1.0 - total);
    return probs;
  }
};

ExactLengthPredictor::ExactLengthPredictor(std::shared_ptr<const AutoregressiveModel> model,
                                           std::size_t horizon)
    : impl_(std::make_unique<Impl>()) {
  if (!model) throw std::invalid_argument("exact_length_predictor: null model");
  if (auto bound = model->max_output_length(); bound && *bound > horizon)
    throw HorizonTooSmall("exact_length_predictor: model forces EOS at depth " +
                          std::to_string(*bound) + ", beyond horizon " + std::to_string(horizon));
  impl_->model = std::move(model);
  impl_->horizon = horizon;
}

ExactLengthPredictor::~ExactLengthPredictor() = default;

std::size_t ExactLengthPredictor::horizon() const { return impl_->horizon; }

double ExactLengthPredictor::log_prob(int attribute, const PrefixContext& ctx,
                                      std::optional<TokenId> candidate) const {
  check_attribute(attribute, kNumLengthClasses);
  double leftover = 0.0;
  std::vector<double> probs = impl_->remaining_vec(ctx, candidate, &leftover);
  double mass = 0.0;
  for (std::size_t r = 0; r < probs.size(); ++r)
    if (LengthBuckets::class_of(r) == attribute) mass += probs[r];
  if (attribute == kNumLengthClasses - 1) mass += leftover;
  return mass > 0.0 ? std::log(mass) : kNegInf;
}

std::vector<double> ExactLengthPredictor::remaining_probs(const PrefixContext& ctx,
                                                          std::optional<TokenId> candidate) const {
  double leftover = 0.0;
  return impl_->remaining_vec(ctx, candidate, &leftover);
}

std::shared_ptr<const ExactLengthPredictor> exact_length_predictor(
    std::shared_ptr<const AutoregressiveModel> model, std::size_t horizon) {
  return std::make_shared<ExactLengthPredictor>(std::move(model), horizon);
}

// ---------------------------------------------------------------------------
// Monte Carlo predictor

namespace {

class MonteCarloPredictor final : public AttributePredictor {
 public:
  MonteCarloPredictor(std::shared_ptr<const AutoregressiveModel> model, int num_classes,
                      AttributeFn attribute, int samples, std::uint64_t seed,
                      std::size_t max_rollout_len)
      : model_(std::move(model)),
        num_classes_(num_classes),
        attribute_(std::move(attribute)),
        samples_(samples),
        seed_(seed),
        max_rollout_len_(max_rollout_len) {
    if (num_classes_ < 1) throw std::invalid_argument("monte_carlo_predictor: no classes");
    if (samples_ < 1) throw std::invalid_argument("monte_carlo_predictor: samples must be >= 1");
  }

  int attribute_count() const override { return num_classes_; }

  double log_prob(int attribute, const PrefixContext& ctx,
                  std::optional<TokenId> candidate) const override {
    check_attribute(attribute, num_classes_);
    const std::vector<std::uint64_t> counts = query_counts(ctx, candidate);
    double num = static_cast<double>(counts[static_cast<std::size_t>(attribute)]) + 1.0;
    double den = static_cast<double>(samples_) + static_cast<double>(num_classes_);
    return std::log(num / den);
  }

 private:
  std::vector<std::uint64_t> query_counts(const PrefixContext& ctx,
                                          std::optional<TokenId> candidate) const {
    std::uint64_t h = fnv1a64(seed_, ctx.prefix, candidate);
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (auto it = cache_.find(h); it != cache_.end()) return it->second;
    }

    Sequence extended(ctx.prefix.begin(), ctx.prefix.end());
    bool terminated = false;
    ModelState state = *ctx.state;
    if (candidate) {
      if (*candidate == kEosId)
        terminated = true;
      else {
        state = model_->step(state, *candidate);
        extended.push_back(*candidate);
      }
    }
    const std::size_t extended_len = extended.size();

    std::vector<std::uint64_t> counts(static_cast<std::size_t>(num_classes_), 0);
    std::mt19937_64 rng(h);
    for (int s = 0; s < samples_; ++s) {
      Sequence full = extended;
      if (!terminated) rollout(state, rng, full);
      int cls = attribute_(full, extended_len);
      if (cls < 0 || cls >= num_classes_)
        throw PredictorDomainError("attribute function returned class out of range");
      ++counts[static_cast<std::size_t>(cls)];
    }
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(h, counts);
    return counts;
  }

  void rollout(const ModelState& from, std::mt19937_64& rng, Sequence& into) const {
    ModelState state = from;
    for (std::size_t step = 0; step < max_rollout_len_; ++step) {
      std::vector<double> logp = model_->next_token_log_probs(state);
      double u = uniform_unit(rng());
      double cum = 0.0;
      TokenId drawn = -1;
      for (std::size_t id = 0; id < logp.size(); ++id) {
        if (logp[id] == kNegInf) continue;
        cum += std::exp(logp[id]);
        drawn = static_cast<TokenId>(id);
        if (u < cum) break;
      }
      if (drawn < 0 || drawn == kEosId) return;
      into.push_back(drawn);
      state = model_->step(state, drawn);
    }
  }

  std::shared_ptr<const AutoregressiveModel> model_;
  int num_classes_;
  AttributeFn attribute_;
  int samples_;
  std::uint64_t seed_;
  std::size_t max_rollout_len_;
  mutable std::mutex mu_;
  mutable std::map<std::uint64_t, std::vector<std::uint64_t>> cache_;
};

class FirstTokenPredictor final : public AttributePredictor {
 public:
  explicit FirstTokenPredictor(TokenId token) : token_(token) {
    if (token_ == kEosId) throw std::invalid_argument("first_token_predictor: EOS target");
  }

  int attribute_count() const override { return 2; }

  double log_prob(int attribute, const PrefixContext& ctx,
                  std::optional<TokenId> candidate) const override {
    check_attribute(attribute, 2);
    double p_match;
    if (!ctx.prefix.empty()) {
      p_match = ctx.prefix.front() == token_ ? 1.0 : 0.0;
    } else if (candidate) {
      // EOS as the first token means the empty output, which starts with nothing.
      p_match = (*candidate != kEosId && *candidate == token_) ? 1.0 : 0.0;
    } else {
      std::vector<double> logp = ctx.model->next_token_log_probs(*ctx.state);
      double lp = logp[static_cast<std::size_t>(token_)];
      p_match = lp == kNegInf ? 0.0 : std::exp(lp);
    }
    double p = attribute == 1 ? p_match : 1.0 - p_match;
    return p > 0.0 ? std::log(p) : kNegInf;
  }

 private:
  TokenId token_;
};

}  // namespace

AttributeFn remaining_length_attribute() {
  return [](const Sequence& completed, std::size_t extended_len) {
    return LengthBuckets::class_of(completed.size() - extended_len);
  };
}

std::shared_ptr<const AttributePredictor> monte_carlo_predictor(
    std::shared_ptr<const AutoregressiveModel> model, int num_classes, AttributeFn attribute,
    int samples_per_query, std::uint64_t seed, std::size_t max_rollout_len) {
  return std::make_shared<MonteCarloPredictor>(std::move(model), num_classes, std::move(attribute),
                                               samples_per_query, seed, max_rollout_len);
}

std::shared_ptr<const AttributePredictor> first_token_predictor(TokenId token) {
  return std::make_shared<FirstTokenPredictor>(token);
}

}  // namespace modeseek
