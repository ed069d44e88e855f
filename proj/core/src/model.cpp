#include "modeseek/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double sequence_log_prob(const AutoregressiveModel& model, const Sequence& seq, bool complete) {
  validate_sequence(model.vocab(), seq);
  double total = 0.0;
  ModelState state = model.initial_state();
  for (TokenId id : seq) {
    double lp = model.next_token_log_probs(state)[static_cast<std::size_t>(id)];
    if (lp == kNegInf) return kNegInf;
    total += lp;
    state = model.step(state, id);
  }
  if (complete) {
    double lp = model.next_token_log_probs(state)[kEosId];
    if (lp == kNegInf) return kNegInf;
    total += lp;
  }
  return total;
}

double uniform_unit(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

Hypothesis sample(const AutoregressiveModel& model, std::uint64_t seed, std::size_t max_len) {
  if (max_len < 1) throw std::invalid_argument("sample: max_len must be >= 1");
  std::mt19937_64 rng(seed);
  Hypothesis hyp;
  ModelState state = model.initial_state();
  for (std::size_t depth = 0; depth < max_len; ++depth) {
    std::vector<double> logp = model.next_token_log_probs(state);
    double u = uniform_unit(rng());
    double cum = 0.0;
    TokenId drawn = -1;
    double drawn_lp = kNegInf;
    for (std::size_t id = 0; id < logp.size(); ++id) {
      if (logp[id] == kNegInf) continue;
      cum += std::exp(logp[id]);
      drawn = static_cast<TokenId>(id);
      drawn_lp = logp[id];
      if (u < cum) break;
    }
    if (drawn < 0) throw std::logic_error("sample: state has no positive-probability token");
    hyp.logprob += drawn_lp;
    if (drawn == kEosId) {
      hyp.complete = true;
      return hyp;
    }
    hyp.seq.push_back(drawn);
    state = model.step(state, drawn);
  }
  // max_len tokens without EOS: truncated.
  return hyp;
}

}  // namespace modeseek
