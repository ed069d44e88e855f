#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>

#include "modeseek/model.hpp"

namespace modeseek {

inline constexpr int kNumLengthClasses = 24;

/// 24-class coarsening of remaining output length: 0-16 are singletons,
/// 17-32 split into four width-4 classes, 33-64 into two width-16 classes,
/// and 65+ collapse into the top class.
struct LengthBuckets {
  static int class_of(std::size_t remaining);
  /// Inclusive remaining-length range covered by a class; the upper bound is
  /// absent for the open-ended top class.
  static std::pair<std::size_t, std::optional<std::size_t>> range_of(int cls);
};

inline int bucket_of(std::size_t remaining) { return LengthBuckets::class_of(remaining); }

/// Query point for a predictor: the prefix tokens, the model state after
/// consuming them, and the model itself.
struct PrefixContext {
  const AutoregressiveModel* model;
  const ModelState* state;
  std::span<const TokenId> prefix;
};

/// Estimator of P(A(x) = a | prefix extended by a candidate token), where A
/// is an attribute of the completed output. A candidate of EOS means the
/// prefix is the completed output; nullopt means no extension. Over the
/// attribute space, probabilities sum to 1 for any query point.
/// Implementations are safe for concurrent queries.
class AttributePredictor {
 public:
  virtual ~AttributePredictor() = default;
  virtual int attribute_count() const = 0;
  virtual double log_prob(int attribute, const PrefixContext& ctx,
                          std::optional<TokenId> candidate) const = 0;
};

/// Exact remaining-length class probabilities, computed by memoized dynamic
/// programming over (state, remaining) pairs:
///   P(class c | query) = sum over r in c of P(exactly r more tokens then EOS).
/// Termination mass beyond the horizon is assigned to the top class. Requires
/// a model exposing state keys. Throws HorizonTooSmall when the model forces
/// EOS past the horizon.
class ExactLengthPredictor final : public AttributePredictor {
 public:
  ExactLengthPredictor(std::shared_ptr<const AutoregressiveModel> model, std::size_t horizon);
  ~ExactLengthPredictor() override;

  int attribute_count() const override { return kNumLengthClasses; }
  double log_prob(int attribute, const PrefixContext& ctx,
                  std::optional<TokenId> candidate) const override;

  /// P(exactly r more tokens | query) for r in 0..horizon; test hook.
  std::vector<double> remaining_probs(const PrefixContext& ctx,
                                      std::optional<TokenId> candidate) const;

  std::size_t horizon() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::shared_ptr<const ExactLengthPredictor> exact_length_predictor(
    std::shared_ptr<const AutoregressiveModel> model, std::size_t horizon);

/// Maps a completed output and the length of the extended prefix it was
/// reached from to an attribute class.
using AttributeFn = std::function<int(const Sequence& completed, std::size_t extended_len)>;

/// Classifies completions by bucketed remaining length.
AttributeFn remaining_length_attribute();

/// Add-one-smoothed empirical class frequencies over seeded rollouts from the
/// extended prefix. Each query point derives its own generator from
/// (seed, prefix, candidate), so results are deterministic and independent of
/// query order or concurrency.
std::shared_ptr<const AttributePredictor> monte_carlo_predictor(
    std::shared_ptr<const AutoregressiveModel> model, int num_classes, AttributeFn attribute,
    int samples_per_query, std::uint64_t seed, std::size_t max_rollout_len = 64);

/// Binary attribute "the completed output starts with token t": class 1 when
/// it does, class 0 otherwise. Deterministic once any first token exists; at
/// the bare initial state it is the model's P(x_1 = t).
std::shared_ptr<const AttributePredictor> first_token_predictor(TokenId token);

}  // namespace modeseek
