#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>

#include "modeseek/model.hpp"

namespace modeseek {

/// Add-alpha smoothed n-gram model with a hard length cap:
///   P(t | ctx) = (count(ctx, t) + alpha) / (total(ctx) + alpha * |V|)
/// over the full vocab including EOS; at depth max_len EOS is forced. The
/// cap keeps the total mass of complete sequences finite and equal to 1.
class NgramModel final : public AutoregressiveModel {
 public:
  using Context = std::vector<TokenId>;  // n-1 ids, begin-padded
  using ContextCounts = std::map<TokenId, std::uint64_t>;

  /// Reserved begin-of-sequence marker used inside contexts only.
  static constexpr TokenId kBeginMarker = -1;

  NgramModel(Vocab vocab, int order, double alpha, std::size_t max_len,
             std::map<Context, ContextCounts> counts);

  ModelState initial_state() const override;
  ModelState step(const ModelState& state, TokenId token) const override;
  std::vector<double> next_token_log_probs(const ModelState& state) const override;
  std::optional<std::size_t> max_output_length() const override { return max_len_; }
  std::optional<std::string> state_key(const ModelState& state) const override;
  std::string kind() const override { return "ngram"; }

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  std::size_t max_len() const { return max_len_; }
  const std::map<Context, ContextCounts>& counts() const { return counts_; }

 private:
  struct State {
    Context context;
    std::size_t depth;
  };

  int order_;
  double alpha_;
  std::size_t max_len_;
  std::map<Context, ContextCounts> counts_;
  std::map<Context, std::uint64_t> totals_;
};

/// Counts every corpus sequence's tokens plus one EOS event per sequence;
/// start-of-sequence contexts are padded with the begin marker. The vocab is
/// built from the corpus in first-appearance order unless one is supplied.
std::shared_ptr<const NgramModel> train_ngram(
    const std::vector<std::vector<std::string>>& corpus, int order, double alpha,
    std::size_t max_len = 64, std::optional<Vocab> vocab = std::nullopt);

/// Reads one sequence per line; whitespace tokens, or single characters in
/// char mode. Blank lines are kept as empty sequences.
std::vector<std::vector<std::string>> read_corpus(std::istream& in, bool char_mode);

}  // namespace modeseek
