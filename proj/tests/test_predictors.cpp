#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "doctest.h"
#include "modeseek/errors.hpp"
#include "modeseek/ngram.hpp"
#include "modeseek/predictors.hpp"
#include "modeseek/trie_model.hpp"
#include "test_util.hpp"

using namespace modeseek;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Unbounded test model: EOS with probability 1/2 at every step.
class GeometricModel final : public AutoregressiveModel {
 public:
  GeometricModel() : AutoregressiveModel(Vocab::from_tokens({"x"})) {}
  ModelState initial_state() const override { return ModelState::wrap(0, sizeof(int)); }
  ModelState step(const ModelState&, TokenId token) const override {
    if (token != 1) throw InvalidToken("geometric: bad token");
    return ModelState::wrap(0, sizeof(int));
  }
  std::vector<double> next_token_log_probs(const ModelState&) const override {
    return {std::log(0.5), std::log(0.5)};
  }
  std::optional<std::string> state_key(const ModelState&) const override { return "g"; }
  std::string kind() const override { return "geometric"; }
};

std::vector<double> class_distribution(const AttributePredictor& pred, const PrefixContext& ctx,
                                       std::optional<TokenId> cand) {
  std::vector<double> probs;
  for (int a = 0; a < pred.attribute_count(); ++a) {
    double lp = pred.log_prob(a, ctx, cand);
    probs.push_back(lp == -kInf ? 0.0 : std::exp(lp));
  }
  return probs;
}

}  // namespace

TEST_CASE("length bucket table") {
  CHECK(bucket_of(0) == 0);
  CHECK(bucket_of(16) == 16);
  CHECK(bucket_of(17) == 17);
  CHECK(bucket_of(20) == 17);
  CHECK(bucket_of(21) == 18);
  CHECK(bucket_of(24) == 18);
  CHECK(bucket_of(25) == 19);
  CHECK(bucket_of(28) == 19);
  CHECK(bucket_of(29) == 20);
  CHECK(bucket_of(30) == 20);
  CHECK(bucket_of(32) == 20);
  CHECK(bucket_of(33) == 21);
  CHECK(bucket_of(48) == 21);
  CHECK(bucket_of(49) == 22);
  CHECK(bucket_of(50) == 22);
  CHECK(bucket_of(64) == 22);
  CHECK(bucket_of(65) == 23);
  CHECK(bucket_of(70) == 23);
  CHECK(bucket_of(1000000) == 23);

  // Total, monotone, surjective onto 0..23, consistent with range_of.
  std::set<int> seen;
  int prev = 0;
  for (std::size_t r = 0; r <= 200; ++r) {
    int cls = bucket_of(r);
    REQUIRE(cls >= 0);
    REQUIRE(cls < kNumLengthClasses);
    CHECK(cls >= prev);
    prev = cls;
    seen.insert(cls);
    auto [lo, hi] = LengthBuckets::range_of(cls);
    CHECK(r >= lo);
    if (hi) CHECK(r <= *hi);
  }
  CHECK(seen.size() == kNumLengthClasses);
}

TEST_CASE("exact length predictor on a two-entry trie") {
  // {"a b": 0.5, "a": 0.5} after "a": remaining 0 and 1 each carry half.
  Vocab v = Vocab::from_tokens({"a", "b"});
  std::map<Sequence, Rational> entries;
  entries[{1}] = Rational(1, 2);
  entries[{1, 2}] = Rational(1, 2);
  auto model = to_autoregressive(ExplicitDistribution(v, std::move(entries)));
  auto pred = exact_length_predictor(model, 8);

  ModelState start = model->initial_state();
  Sequence empty;
  PrefixContext ctx{model.get(), &start, empty};

  auto probs = pred->remaining_probs(ctx, 1);  // candidate "a"
  CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pred->log_prob(0, ctx, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(pred->log_prob(1, ctx, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(pred->log_prob(2, ctx, 1) == -kInf);

  // After "a b" the only continuation is EOS.
  ModelState ab = model->step(model->step(start, 1), 2);
  Sequence ab_seq{1, 2};
  PrefixContext ctx_ab{model.get(), &ab, ab_seq};
  CHECK(pred->log_prob(0, ctx_ab, std::nullopt) == doctest::Approx(0.0));

  // EOS candidate: termination is certain.
  CHECK(pred->log_prob(0, ctx, kEosId) == 0.0);
  CHECK(pred->log_prob(1, ctx, kEosId) == -kInf);
}

TEST_CASE("exact length predictor matches enumeration on an n-gram model") {
  auto model = train_ngram({{"a", "b"}, {"b", "a", "a"}, {"a"}}, 2, 0.5, 8);
  REQUIRE(model->vocab().size() <= 4);
  auto pred = exact_length_predictor(model, 8);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Sequence prefix = sample(*model, rng(), 4).seq;
    ModelState state = model->initial_state();
    for (TokenId id : prefix) state = model->step(state, id);
    PrefixContext ctx{model.get(), &state, prefix};

    // Brute-force remaining-length masses from the prefix.
    auto remaining = pred->remaining_probs(ctx, std::nullopt);
    std::vector<double> brute(remaining.size(), 0.0);
    Sequence walk;
    std::vector<std::pair<Sequence, double>> completions;
    testutil::oracle_walk(*model, state, walk, 0.0, 8 - prefix.size(), completions);
    for (const auto& [suffix, lp] : completions) brute[suffix.size()] += std::exp(lp);
    for (std::size_t r = 0; r < remaining.size(); ++r)
      CHECK(remaining[r] == doctest::Approx(brute[r]).epsilon(1e-9));

    // Class mass dominates each of its member lengths.
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      double cls = std::exp(pred->log_prob(bucket_of(r), ctx, std::nullopt));
      CHECK(cls >= remaining[r] - 1e-12);
    }
  }
}

TEST_CASE("exact length predictor horizon handling") {
  auto model = train_ngram({{"a", "b"}}, 1, 1.0, 16);
  CHECK_THROWS_AS(exact_length_predictor(model, 8), HorizonTooSmall);

  // Unbounded model: beyond-horizon mass lands in the top class, exactly
  // (1/2)^(horizon+1) for the geometric model. A short horizon keeps the
  // leftover visible in double precision.
  auto geom = std::make_shared<GeometricModel>();
  auto pred = exact_length_predictor(geom, 8);
  ModelState start = geom->initial_state();
  Sequence empty;
  PrefixContext ctx{geom.get(), &start, empty};
  CHECK(pred->log_prob(0, ctx, std::nullopt) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(pred->log_prob(23, ctx, std::nullopt) ==
        doctest::Approx(9.0 * std::log(0.5)).epsilon(1e-9));
  auto probs = class_distribution(*pred, ctx, std::nullopt);
  double total = 0.0;
  for (double p : probs) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("monte carlo predictor") {
  SUBCASE("deterministic model is one-hot up to smoothing") {
    Vocab v = Vocab::from_tokens({"x"});
    std::map<Sequence, Rational> entries;
    entries[{1, 1}] = Rational(1);
    auto model = to_autoregressive(ExplicitDistribution(v, std::move(entries)));
    auto pred = monte_carlo_predictor(model, kNumLengthClasses, remaining_length_attribute(), 100,
                                      7, 8);
    ModelState start = model->initial_state();
    Sequence empty;
    PrefixContext ctx{model.get(), &start, empty};
    // Candidate "x": one more token always remains.
    CHECK(std::exp(pred->log_prob(1, ctx, 1)) ==
          doctest::Approx(101.0 / 124.0).epsilon(1e-12));
    CHECK(std::exp(pred->log_prob(0, ctx, 1)) == doctest::Approx(1.0 / 124.0).epsilon(1e-12));
  }

  SUBCASE("agrees with the exact predictor within 0.05 at 10k samples") {
    auto model = train_ngram({{"a", "b"}, {"b"}, {"a"}}, 2, 0.5, 6);
    REQUIRE(model->vocab().size() == 3);
    auto exact = exact_length_predictor(model, 6);
    auto mc = monte_carlo_predictor(model, kNumLengthClasses, remaining_length_attribute(), 10000,
                                    11, 6);
    ModelState start = model->initial_state();
    Sequence empty;
    PrefixContext ctx{model.get(), &start, empty};
    for (TokenId cand : {1, 2}) {
      auto exact_probs = class_distribution(*exact, ctx, cand);
      auto mc_probs = class_distribution(*mc, ctx, cand);
      for (int a = 0; a < kNumLengthClasses; ++a)
        CHECK(std::fabs(exact_probs[static_cast<std::size_t>(a)] -
                        mc_probs[static_cast<std::size_t>(a)]) < 0.05);
    }
  }

  SUBCASE("fixed seed gives bit-identical predictions") {
    auto model = train_ngram({{"a", "b"}, {"b"}}, 2, 0.5, 6);
    auto one = monte_carlo_predictor(model, kNumLengthClasses, remaining_length_attribute(), 500,
                                     42, 6);
    auto two = monte_carlo_predictor(model, kNumLengthClasses, remaining_length_attribute(), 500,
                                     42, 6);
    ModelState start = model->initial_state();
    Sequence empty;
    PrefixContext ctx{model.get(), &start, empty};
    for (int a = 0; a < kNumLengthClasses; ++a)
      CHECK(one->log_prob(a, ctx, 1) == two->log_prob(a, ctx, 1));
  }
}

TEST_CASE("first-token predictor") {
  auto model = train_ngram({{"a", "b"}, {"b"}}, 2, 0.5, 6);
  TokenId a = model->vocab().id_of("a");
  TokenId b = model->vocab().id_of("b");
  auto pred = first_token_predictor(a);
  ModelState start = model->initial_state();
  Sequence empty;
  PrefixContext ctx{model.get(), &start, empty};

  CHECK(pred->log_prob(1, ctx, a) == 0.0);       // candidate matches
  CHECK(pred->log_prob(1, ctx, b) == -kInf);     // candidate differs
  CHECK(pred->log_prob(1, ctx, kEosId) == -kInf);  // empty output starts with nothing
  CHECK(pred->log_prob(0, ctx, kEosId) == 0.0);

  // Bare initial state: the model's own P(x_1 = a).
  double marginal = std::exp(model->next_token_log_probs(start)[static_cast<std::size_t>(a)]);
  CHECK(std::exp(pred->log_prob(1, ctx, std::nullopt)) == doctest::Approx(marginal).epsilon(1e-12));

  // Non-empty prefix pins the attribute regardless of the candidate.
  ModelState at_b = model->step(start, b);
  Sequence prefix{b};
  PrefixContext ctx_b{model.get(), &at_b, prefix};
  CHECK(pred->log_prob(1, ctx_b, a) == -kInf);
  CHECK(pred->log_prob(0, ctx_b, a) == 0.0);
}

TEST_CASE("class distributions sum to one across random probes") {
  std::mt19937_64 dist_rng(97);
  std::vector<std::shared_ptr<const AutoregressiveModel>> models{
      train_ngram({{"a", "b"}, {"b", "a"}, {"a"}}, 2, 0.5, 8),
      to_autoregressive(testutil::random_distribution(dist_rng))};

  for (const auto& model : models) {
    std::size_t cap = model->max_output_length().value_or(8);
    auto exact = exact_length_predictor(model, cap);
    auto mc =
        monte_carlo_predictor(model, kNumLengthClasses, remaining_length_attribute(), 50, 3, cap);
    auto first = first_token_predictor(1);

    std::mt19937_64 rng(17);
    for (int probe = 0; probe < 1000; ++probe) {
      Sequence prefix = sample(*model, rng(), cap).seq;
      ModelState state = model->initial_state();
      for (TokenId id : prefix) state = model->step(state, id);
      auto logp = model->next_token_log_probs(state);
      std::vector<TokenId> viable;
      for (std::size_t id = 0; id < logp.size(); ++id)
        if (logp[id] != -kInf) viable.push_back(static_cast<TokenId>(id));
      TokenId cand = viable[rng() % viable.size()];
      PrefixContext ctx{model.get(), &state, prefix};

      for (const AttributePredictor* pred :
           {static_cast<const AttributePredictor*>(exact.get()), mc.get(), first.get()}) {
        double total = 0.0;
        for (double p : class_distribution(*pred, ctx, cand)) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("concurrent predictor queries are deterministic") {
  auto model = train_ngram({{"a", "b"}, {"b"}, {"a", "a"}}, 2, 0.5, 8);
  auto exact = exact_length_predictor(model, 8);
  auto mc = monte_carlo_predictor(model, kNumLengthClasses, remaining_length_attribute(), 200, 5, 8);

  ModelState start = model->initial_state();
  Sequence empty;
  PrefixContext ctx{model.get(), &start, empty};
  std::vector<double> serial_exact = class_distribution(*exact, ctx, 1);
  std::vector<double> serial_mc = class_distribution(*mc, ctx, 1);

  std::vector<std::vector<double>> exact_out(8), mc_out(8);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < 8; ++i)
    pool.emplace_back([&, i] {
      exact_out[i] = class_distribution(*exact, ctx, 1);
      mc_out[i] = class_distribution(*mc, ctx, 1);
    });
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(exact_out[i] == serial_exact);
    CHECK(mc_out[i] == serial_mc);
  }
}
