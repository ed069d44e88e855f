#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modeseek/vocab.hpp"

namespace modeseek {

/// Opaque, copyable handle for a model's per-prefix state. size_bytes is the
/// accounting value used by the search state-cache instrumentation.
class ModelState {
 public:
  ModelState() = default;

  template <typename T>
  static ModelState wrap(T value, std::size_t size_bytes) {
    ModelState s;
    s.handle_ = std::make_shared<const T>(std::move(value));
    s.size_bytes_ = size_bytes;
    return s;
  }

  template <typename T>
  const T& get() const {
    return *static_cast<const T*>(handle_.get());
  }

  bool empty() const { return handle_ == nullptr; }
  std::size_t size_bytes() const { return size_bytes_; }

 private:
  std::shared_ptr<const void> handle_;
  std::size_t size_bytes_ = 0;
};

/// A (possibly partial) output and its accumulated natural-log probability.
/// complete means scoring terminated with EOS.
struct Hypothesis {
  Sequence seq;
  double logprob = 0.0;
  bool complete = false;
};

/// Contract for autoregressive sequence distributions: an initial state, a
/// per-token step, and a next-token log-probability vector over the full
/// vocab (index 0 = EOS, natural logs, -inf for zero mass).
///
/// Implementations are immutable after construction and safe to share across
/// concurrent searches; states are value-like. Stepping the initial state
/// through the tokens of a prefix always reproduces the same next-token
/// distribution (within 1e-12 in log space), so states may be rebuilt by
/// replay.
class AutoregressiveModel {
 public:
  virtual ~AutoregressiveModel() = default;

  const Vocab& vocab() const { return vocab_; }

  virtual ModelState initial_state() const = 0;
  virtual ModelState step(const ModelState& state, TokenId token) const = 0;
  virtual std::vector<double> next_token_log_probs(const ModelState& state) const = 0;

  /// Depth at which the model forces EOS, when it has one.
  virtual std::optional<std::size_t> max_output_length() const { return std::nullopt; }

  /// Stable identity for a state, for models with an enumerable state space.
  /// Enables memoized dynamic programming over states.
  virtual std::optional<std::string> state_key(const ModelState& state) const {
    (void)state;
    return std::nullopt;
  }

  /// Serialization tag ("explicit", "ngram", "length_family").
  virtual std::string kind() const = 0;

 protected:
  explicit AutoregressiveModel(Vocab vocab) : vocab_(std::move(vocab)) {}

  Vocab vocab_;
};

/// Chain-rule log-probability of a sequence; when complete, the final factor
/// is P(EOS | seq). Returns -inf if any factor is zero. Throws InvalidToken
/// for ids outside the model's vocab.
double sequence_log_prob(const AutoregressiveModel& model, const Sequence& seq, bool complete);

/// Ancestral sample, deterministic for a fixed seed. complete=false when
/// max_len is reached before EOS is drawn.
Hypothesis sample(const AutoregressiveModel& model, std::uint64_t seed, std::size_t max_len);

/// Uniform double in [0, 1) from raw 64-bit output; keeps sampling identical
/// across platforms and standard libraries.
double uniform_unit(std::uint64_t raw);

}  // namespace modeseek
