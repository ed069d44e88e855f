#include "modeseek/beam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Working {
  Sequence seq;
  double score = 0.0;     // pure model log-likelihood S
  double guidance = 0.0;  // last attribute log-prob used for ranking
  double rank = 0.0;      // survival key: S (+ alpha * guidance)
  bool frozen = false;
  ModelState state;  // live entries only
};

// Deterministic order: rank descending, then lexicographic token ids with a
// virtual trailing EOS on frozen entries.
bool rank_before(const Working& a, const Working& b) {
  if (a.rank != b.rank) return a.rank > b.rank;
  auto at = [](const Working& w, std::size_t i) -> TokenId {
    return i < w.seq.size() ? w.seq[i] : kEosId;
  };
  std::size_t la = a.seq.size() + (a.frozen ? 1 : 0);
  std::size_t lb = b.seq.size() + (b.frozen ? 1 : 0);
  for (std::size_t i = 0; i < std::min(la, lb); ++i) {
    TokenId ta = at(a, i), tb = at(b, i);
    if (ta != tb) return ta < tb;
  }
  return la < lb;
}

enum class Mode { kPlain, kConstrained, kConditional };

std::vector<BeamEntry> run_beam(const AutoregressiveModel& model, const BeamConfig& config,
                                Mode mode, std::size_t target_len,
                                const AttributePredictor* predictor,
                                const AttributeTarget* target) {
  if (config.beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (config.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  if (config.alpha < 0) throw std::invalid_argument("alpha must be >= 0");

  const std::size_t cap = mode == Mode::kConstrained ? target_len : config.max_len;

  std::vector<Working> live;
  {
    Working root;
    root.state = model.initial_state();
    live.push_back(std::move(root));
  }
  std::vector<Working> frozen;

  for (std::size_t step = 0; !live.empty() && step <= cap; ++step) {
    const bool final_step = step == cap;
    std::vector<Working> pool = frozen;

    for (const Working& entry : live) {
      std::vector<double> logp = model.next_token_log_probs(entry.state);

      std::vector<TokenId> cands;
      if (final_step) {
        // Length cap: EOS is the only admissible continuation. For the
        // constrained variant this is the forced emission at the target.
        if (logp[kEosId] != kNegInf) cands.push_back(kEosId);
      } else {
        const bool mask_eos = mode == Mode::kConstrained;
        for (std::size_t id = mask_eos ? 1 : 0; id < logp.size(); ++id)
          if (logp[id] != kNegInf) cands.push_back(static_cast<TokenId>(id));
        std::sort(cands.begin(), cands.end(), [&](TokenId x, TokenId y) {
          double lx = logp[static_cast<std::size_t>(x)], ly = logp[static_cast<std::size_t>(y)];
          if (lx != ly) return lx > ly;
          return x < y;
        });
        if (cands.size() > config.top_k) cands.resize(config.top_k);
      }

      for (TokenId cand : cands) {
        double extended_score = entry.score + logp[static_cast<std::size_t>(cand)];
        if (extended_score == kNegInf) continue;
        Working next;
        next.frozen = cand == kEosId;
        next.seq = entry.seq;
        if (!next.frozen) next.seq.push_back(cand);
        next.score = extended_score;
        next.rank = extended_score;
        if (predictor) {
          auto cls = target->class_at(next.seq.size());
          PrefixContext ctx{&model, &entry.state, entry.seq};
          next.guidance = cls ? predictor->log_prob(*cls, ctx, cand) : kNegInf;
          if (config.alpha > 0) {
            next.rank = extended_score + config.alpha * next.guidance;
            if (next.rank == kNegInf) continue;
          }
        }
        if (!next.frozen) next.state = model.step(entry.state, cand);
        pool.push_back(std::move(next));
      }
    }

    std::sort(pool.begin(), pool.end(), rank_before);
    if (pool.size() > config.beam_size) pool.resize(config.beam_size);

    frozen.clear();
    live.clear();
    for (auto& w : pool) (w.frozen ? frozen : live).push_back(std::move(w));
  }

  if (mode == Mode::kConstrained && frozen.empty())
    throw NoFeasibleSequence("no length-" + std::to_string(target_len) +
                             " sequence survived the beam");

  // Completed entries are selected by S + guidance, alpha excluded.
  for (auto& w : frozen) w.rank = predictor ? w.score + w.guidance : w.score;
  std::sort(frozen.begin(), frozen.end(), rank_before);

  std::vector<BeamEntry> out;
  out.reserve(frozen.size());
  for (auto& w : frozen)
    out.push_back(BeamEntry{Hypothesis{std::move(w.seq), w.score, true}, w.guidance, true});
  return out;
}

}  // namespace

AttributeTarget AttributeTarget::fixed(int attribute) {
  AttributeTarget t;
  t.fixed_ = attribute;
  return t;
}

AttributeTarget AttributeTarget::total_length(std::size_t length) {
  AttributeTarget t;
  t.total_length_ = length;
  return t;
}

std::optional<int> AttributeTarget::class_at(std::size_t emitted_len) const {
  if (!total_length_) return fixed_;
  if (emitted_len > *total_length_) return std::nullopt;
  return LengthBuckets::class_of(*total_length_ - emitted_len);
}

std::vector<BeamEntry> beam_search(const AutoregressiveModel& model, const BeamConfig& config) {
  return run_beam(model, config, Mode::kPlain, 0, nullptr, nullptr);
}

std::vector<BeamEntry> length_constrained_beam(const AutoregressiveModel& model,
                                               std::size_t target_len, const BeamConfig& config) {
  return run_beam(model, config, Mode::kConstrained, target_len, nullptr, nullptr);
}

std::vector<BeamEntry> conditional_beam(const AutoregressiveModel& model,
                                        const AttributePredictor& predictor,
                                        const AttributeTarget& target, const BeamConfig& config) {
  if (target.is_total_length()) {
    if (predictor.attribute_count() != kNumLengthClasses)
      throw PredictorDomainError("total-length target needs a remaining-length-class predictor");
  } else if (target.fixed_id() < 0 || target.fixed_id() >= predictor.attribute_count()) {
    throw PredictorDomainError("target attribute " + std::to_string(target.fixed_id()) +
                               " outside the predictor's space");
  }
  return run_beam(model, config, Mode::kConditional, 0, &predictor, &target);
}

WinrateResult winrate(std::span<const Hypothesis> a_outputs, std::span<const Hypothesis> b_outputs,
                      double tie_tolerance) {
  if (a_outputs.size() != b_outputs.size())
    throw LengthMismatch("winrate: lists of size " + std::to_string(a_outputs.size()) + " and " +
                         std::to_string(b_outputs.size()));
  if (a_outputs.empty()) throw LengthMismatch("winrate: empty lists");
  WinrateResult r;
  double n = static_cast<double>(a_outputs.size());
  for (std::size_t i = 0; i < a_outputs.size(); ++i) {
    double sa = a_outputs[i].logprob, sb = b_outputs[i].logprob;
    if (sa == sb || std::fabs(sa - sb) <= tie_tolerance)
      r.frac_tie += 1.0;
    else if (sa > sb)
      r.frac_a += 1.0;
    else
      r.frac_b += 1.0;
  }
  r.frac_a /= n;
  r.frac_tie /= n;
  r.frac_b /= n;
  return r;
}

}  // namespace modeseek
