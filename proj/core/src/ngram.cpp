#include "modeseek/ngram.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <stdexcept>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

NgramModel::NgramModel(Vocab vocab, int order, double alpha, std::size_t max_len,
                       std::map<Context, ContextCounts> counts)
    : AutoregressiveModel(std::move(vocab)),
      order_(order),
      alpha_(alpha),
      max_len_(max_len),
      counts_(std::move(counts)) {
  if (order_ < 1) throw std::invalid_argument("ngram: order must be >= 1");
  if (alpha_ < 0) throw std::invalid_argument("ngram: alpha must be >= 0");
  if (static_cast<std::size_t>(order_) > max_len_ + 1)
    throw OrderTooLarge("ngram: order " + std::to_string(order_) + " exceeds max_len + 1");
  for (const auto& [ctx, by_token] : counts_) {
    if (ctx.size() + 1 != static_cast<std::size_t>(order_))
      throw std::invalid_argument("ngram: context arity mismatch");
    std::uint64_t total = 0;
    for (const auto& [token, c] : by_token) {
      if (!vocab_.contains_id(token)) throw InvalidToken("ngram: count for unknown token");
      total += c;
    }
    totals_[ctx] = total;
  }
}

ModelState NgramModel::initial_state() const {
  State s{Context(static_cast<std::size_t>(order_ - 1), kBeginMarker), 0};
  std::size_t bytes = sizeof(State) + s.context.size() * sizeof(TokenId);
  return ModelState::wrap(std::move(s), bytes);
}

ModelState NgramModel::step(const ModelState& state, TokenId token) const {
  const auto& s = state.get<State>();
  if (token == kEosId || !vocab_.contains_id(token)) throw InvalidToken("ngram: bad step token");
  if (s.depth >= max_len_) throw InvalidToken("ngram: step past forced EOS");
  State next{s.context, s.depth + 1};
  if (!next.context.empty()) {
    next.context.erase(next.context.begin());
    next.context.push_back(token);
  }
  std::size_t bytes = sizeof(State) + next.context.size() * sizeof(TokenId);
  return ModelState::wrap(std::move(next), bytes);
}

std::vector<double> NgramModel::next_token_log_probs(const ModelState& state) const {
  const auto& s = state.get<State>();
  std::vector<double> logp(vocab_.size(), kNegInf);
  if (s.depth >= max_len_) {
    logp[kEosId] = 0.0;
    return logp;
  }
  const ContextCounts* by_token = nullptr;
  std::uint64_t total = 0;
  if (auto it = counts_.find(s.context); it != counts_.end()) {
    by_token = &it->second;
    total = totals_.at(s.context);
  }
  double denom = static_cast<double>(total) + alpha_ * static_cast<double>(vocab_.size());
  if (denom == 0.0) return logp;  // alpha = 0 on an unseen context: no mass
  for (std::size_t id = 0; id < vocab_.size(); ++id) {
    std::uint64_t c = 0;
    if (by_token) {
      auto it = by_token->find(static_cast<TokenId>(id));
      if (it != by_token->end()) c = it->second;
    }
    double num = static_cast<double>(c) + alpha_;
    logp[id] = num == 0.0 ? kNegInf : std::log(num) - std::log(denom);
  }
  return logp;
}

std::optional<std::string> NgramModel::state_key(const ModelState& state) const {
  const auto& s = state.get<State>();
  std::string key = "n" + std::to_string(s.depth);
  for (TokenId id : s.context) key += ":" + std::to_string(id);
  return key;
}

std::shared_ptr<const NgramModel> train_ngram(const std::vector<std::vector<std::string>>& corpus,
                                              int order, double alpha, std::size_t max_len,
                                              std::optional<Vocab> vocab) {
  if (corpus.empty()) throw EmptyCorpus("train_ngram: empty corpus");
  if (order < 1) throw std::invalid_argument("train_ngram: order must be >= 1");
  if (static_cast<std::size_t>(order) > max_len + 1)
    throw OrderTooLarge("train_ngram: order " + std::to_string(order) + " exceeds max_len + 1");

  Vocab v;
  if (vocab.has_value()) {
    v = std::move(*vocab);
  } else {
    std::vector<std::string> tokens;
    std::map<std::string, bool> seen;
    for (const auto& line : corpus) {
      for (const auto& w : line) {
        if (w == kEosToken) throw InvalidToken("train_ngram: literal \"</s>\" in corpus");
        if (!seen[w]) {
          seen[w] = true;
          tokens.push_back(w);
        }
      }
    }
    v = Vocab::from_tokens(tokens);
  }

  std::map<NgramModel::Context, NgramModel::ContextCounts> counts;
  for (const auto& line : corpus) {
    if (line.size() > max_len)
      throw std::invalid_argument("train_ngram: training sequence longer than max_len");
    NgramModel::Context ctx(static_cast<std::size_t>(order - 1), NgramModel::kBeginMarker);
    auto advance = [&](TokenId id) {
      if (!ctx.empty()) {
        ctx.erase(ctx.begin());
        ctx.push_back(id);
      }
    };
    for (const auto& w : line) {
      TokenId id = v.id_of(w);
      ++counts[ctx][id];
      advance(id);
    }
    ++counts[ctx][kEosId];
  }
  return std::make_shared<NgramModel>(std::move(v), order, alpha, max_len, std::move(counts));
}

std::vector<std::vector<std::string>> read_corpus(std::istream& in, bool char_mode) {
  std::vector<std::vector<std::string>> corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    corpus.push_back(char_mode ? split_characters(line) : split_whitespace(line));
  }
  return corpus;
}

}  // namespace modeseek
