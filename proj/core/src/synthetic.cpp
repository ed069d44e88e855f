#include "modeseek/synthetic.hpp"

#include <limits>
#include <stdexcept>

#include "modeseek/errors.hpp"

namespace modeseek {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Guard against corruption-pattern blowup in typo_channel.
constexpr std::size_t kMaxTypoSupport = 2'000'000;

}  // namespace

CriticalEpsilon critical_epsilon(const Rational& clean_support, const Rational& noise_support) {
  if (!clean_support.is_integer() || !noise_support.is_integer())
    throw std::invalid_argument("critical_epsilon: support sizes must be integers");
  if (clean_support.sign() <= 0 || noise_support.sign() <= 0)
    throw ZeroSupport("critical_epsilon: support sizes must be >= 1");
  Rational exact = noise_support / (noise_support + clean_support);
  return CriticalEpsilon{exact, exact.to_double()};
}

ExplicitDistribution build_mixture(const MixtureSpec& spec) {
  if (spec.clean.vocab() != spec.noise.vocab())
    throw VocabMismatch("build_mixture: clean and noise vocabs differ");
  if (spec.epsilon.sign() < 0 || spec.epsilon > Rational::one())
    throw std::invalid_argument("build_mixture: epsilon outside [0, 1]");

  Rational keep = Rational::one() - spec.epsilon;
  std::map<Sequence, Rational> entries;
  if (!keep.is_zero()) {
    for (const auto& [seq, p] : spec.clean.entries()) entries[seq] += p * keep;
  }
  if (!spec.epsilon.is_zero()) {
    for (const auto& [seq, p] : spec.noise.entries()) entries[seq] += p * spec.epsilon;
  }
  return ExplicitDistribution(spec.clean.vocab(), std::move(entries));
}

ExplicitDistribution typo_channel(const ExplicitDistribution& clean,
                                  const Rational& per_word_error_prob,
                                  const std::map<std::string, std::vector<std::string>>& variants) {
  const Rational& p = per_word_error_prob;
  if (p.sign() < 0 || p >= Rational::one())
    throw std::invalid_argument("typo_channel: error probability outside [0, 1)");

  const Vocab& cv = clean.vocab();
  // Output vocab: clean tokens, then variants in vocab-then-given order.
  std::vector<std::string> extra;
  std::map<std::string, bool> known;
  for (const auto& t : cv.tokens()) known[t] = true;
  for (std::size_t id = 1; id < cv.size(); ++id) {
    const std::string& word = cv.tokens()[id];
    auto it = variants.find(word);
    if (it == variants.end()) continue;
    for (const auto& alt : it->second) {
      if (alt == word)
        throw std::invalid_argument("typo_channel: variant equals the clean word \"" + word + "\"");
      if (!known[alt]) {
        known[alt] = true;
        extra.push_back(alt);
      }
    }
  }
  std::vector<std::string> full = cv.tokens();
  full.insert(full.end(), extra.begin(), extra.end());
  Vocab vocab = Vocab::from_full(std::move(full));

  Rational keep = Rational::one() - p;
  std::map<Sequence, Rational> entries;
  std::size_t support = 0;

  for (const auto& [seq, mass] : clean.entries()) {
    // Per-position options: (token, probability factor).
    std::vector<std::vector<std::pair<TokenId, Rational>>> options;
    options.reserve(seq.size());
    for (TokenId id : seq) {
      const std::string& word = cv.tokens()[static_cast<std::size_t>(id)];
      auto it = variants.find(word);
      if (it == variants.end() || it->second.empty())
        throw EmptyVariantSet("typo_channel: no variants for word \"" + word + "\"");
      std::vector<std::pair<TokenId, Rational>> opts;
      opts.emplace_back(id, keep);
      Rational each = p / Rational(static_cast<long>(it->second.size()));
      for (const auto& alt : it->second) opts.emplace_back(vocab.id_of(alt), each);
      options.push_back(std::move(opts));
    }

    // Walk every corruption pattern of this sequence.
    Sequence current(seq.size(), 0);
    auto recurse = [&](auto&& self, std::size_t pos, Rational acc) -> void {
      if (pos == options.size()) {
        if (acc.is_zero()) return;
        entries[current] += acc;
        if (++support > kMaxTypoSupport)
          throw std::invalid_argument("typo_channel: corruption support too large");
        return;
      }
      for (const auto& [tok, factor] : options[pos]) {
        if (factor.is_zero()) continue;
        current[pos] = tok;
        self(self, pos + 1, acc * factor);
      }
    };
    recurse(recurse, 0, mass);
  }
  return ExplicitDistribution(std::move(vocab), std::move(entries));
}

LengthFamilyModel::LengthFamilyModel(Rational empty_mass, int branching, std::size_t length)
    : AutoregressiveModel(Vocab()),
      empty_mass_(std::move(empty_mass)),
      branching_(branching),
      length_(length) {
  if (branching_ < 2) throw std::invalid_argument("length_family: branching must be >= 2");
  if (empty_mass_.sign() <= 0 || empty_mass_ >= Rational::one())
    throw std::invalid_argument("length_family: empty mass outside (0, 1)");
  if (length_ < 1) throw std::invalid_argument("length_family: length must be >= 1");

  std::vector<std::string> tokens;
  tokens.reserve(static_cast<std::size_t>(branching_));
  for (int i = 0; i < branching_; ++i) tokens.push_back("w" + std::to_string(i));
  vocab_ = Vocab::from_tokens(tokens);

  Rational b(static_cast<long>(branching_));
  logp_root_.assign(vocab_.size(), kNegInf);
  logp_root_[kEosId] = empty_mass_.log();
  double spread = ((Rational::one() - empty_mass_) / b).log();
  for (int i = 1; i <= branching_; ++i) logp_root_[static_cast<std::size_t>(i)] = spread;

  logp_inner_.assign(vocab_.size(), kNegInf);
  double uniform = (Rational::one() / b).log();
  for (int i = 1; i <= branching_; ++i) logp_inner_[static_cast<std::size_t>(i)] = uniform;

  logp_leaf_.assign(vocab_.size(), kNegInf);
  logp_leaf_[kEosId] = 0.0;
}

ModelState LengthFamilyModel::initial_state() const {
  return ModelState::wrap(std::size_t{0}, sizeof(std::size_t));
}

ModelState LengthFamilyModel::step(const ModelState& state, TokenId token) const {
  std::size_t depth = state.get<std::size_t>();
  if (token == kEosId || !vocab_.contains_id(token)) throw InvalidToken("length_family: bad step token");
  if (depth >= length_) throw InvalidToken("length_family: step past forced EOS");
  return ModelState::wrap(depth + 1, sizeof(std::size_t));
}

std::vector<double> LengthFamilyModel::next_token_log_probs(const ModelState& state) const {
  std::size_t depth = state.get<std::size_t>();
  if (depth == 0) return logp_root_;
  if (depth >= length_) return logp_leaf_;
  return logp_inner_;
}

std::optional<std::string> LengthFamilyModel::state_key(const ModelState& state) const {
  return "f" + std::to_string(state.get<std::size_t>());
}

std::vector<std::shared_ptr<const AutoregressiveModel>> length_family(
    const Rational& empty_mass, int branching, const std::vector<std::size_t>& lengths) {
  std::vector<std::shared_ptr<const AutoregressiveModel>> models;
  models.reserve(lengths.size());
  for (std::size_t len : lengths)
    models.push_back(std::make_shared<LengthFamilyModel>(empty_mass, branching, len));
  return models;
}

}  // namespace modeseek
