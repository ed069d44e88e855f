#include "modeseek/enumeration.hpp"

#include <algorithm>
#include <limits>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<Enumerated> enumerate_support(const AutoregressiveModel& model, std::size_t max_len,
                                          std::size_t max_sequences) {
  std::vector<Enumerated> out;
  Sequence prefix;
  std::size_t visited = 0;
  const std::size_t max_visits = std::max<std::size_t>(10 * max_sequences, 1'000'000);

  auto walk = [&](auto&& self, const ModelState& state, double logprob) -> void {
    if (++visited > max_visits)
      throw EnumerationBound("enumeration visits exceed " + std::to_string(max_visits));
    std::vector<double> logp = model.next_token_log_probs(state);
    if (logp[kEosId] != kNegInf) {
      if (out.size() >= max_sequences)
        throw EnumerationBound("enumeration exceeds " + std::to_string(max_sequences) +
                               " sequences");
      out.push_back({prefix, logprob + logp[kEosId]});
    }
    if (prefix.size() == max_len) return;
    for (std::size_t id = 1; id < logp.size(); ++id) {
      if (logp[id] == kNegInf) continue;
      prefix.push_back(static_cast<TokenId>(id));
      self(self, model.step(state, static_cast<TokenId>(id)), logprob + logp[id]);
      prefix.pop_back();
    }
  };
  walk(walk, model.initial_state(), 0.0);
  return out;
}

void sort_by_probability(std::vector<Enumerated>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const Enumerated& a, const Enumerated& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.seq < b.seq;
  });
}

}  // namespace modeseek
